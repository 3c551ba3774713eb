//! Dense symmetric spectral utilities.
//!
//! All matrices are plain `DMatrix<f64>`; routines that promise a symmetric
//! result re-symmetrize before returning.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative threshold below which eigenvalues count as zero when forming
/// pseudoinverses and images.
pub const RANK_REL_TOL: f64 = 1e-10;

const EIGEN_ITERATIONS_PER_DIM: usize = 1_000;

/// Eigenvalues in ascending order with orthonormal eigenvectors; column `i`
/// of `vectors` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.iter().copied().next().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.iter().copied().last().unwrap_or(0.0)
    }

    /// `V f(Λ) Vᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        symmetrized(&(scaled * self.vectors.transpose()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map_spectrum(|x| x)
    }

    /// Sum of the `r` largest eigenvalues.
    pub fn top_sum(&self, r: usize) -> f64 {
        let n = self.dim();
        self.values.iter().skip(n - r.min(n)).sum()
    }

    /// Eigenvectors of the `d` smallest eigenvalues as a subspace.
    pub fn bottom_subspace(&self, d: usize) -> Subspace {
        Subspace {
            basis: self.vectors.columns(0, d.min(self.dim())).into_owned(),
        }
    }

    /// Eigenvectors whose eigenvalues exceed `rel_tol * max|λ|`.
    pub fn image(&self, rel_tol: f64) -> Subspace {
        let cut = rel_tol * self.values.amax();
        let cols: Vec<usize> = (0..self.dim()).filter(|&i| self.values[i] > cut).collect();
        Subspace {
            basis: self.vectors.select_columns(cols.iter()),
        }
    }
}

/// Symmetric eigendecomposition with ascending eigenvalues. Ties keep the
/// order returned by the underlying QR iteration, which is deterministic.
pub fn eigh(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Numerical(format!(
            "eigh needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("eigh input has non-finite entries".into()));
    }
    let cap = EIGEN_ITERATIONS_PER_DIM * n.max(1);
    let eig = SymmetricEigen::try_new(symmetrized(a), f64::EPSILON, cap).ok_or_else(|| {
        Error::Numerical(format!("symmetric eigensolver did not converge in {cap} iterations"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Ok(SpectralDecomposition { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(eigh(a)?.values)
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrized(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Frobenius product `A • B = Tr(AᵀB)`.
pub fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// An orthonormal basis `Q` (n×d) of a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps `basis`, checking `QᵀQ = I` within 1e-10.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let d = basis.ncols();
        let gram = basis.transpose() * &basis;
        let err = max_abs(&(gram - DMatrix::identity(d, d)));
        if err > 1e-10 {
            return Err(Error::Numerical(format!(
                "subspace basis is not orthonormal (error {err:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn full(n: usize) -> Self {
        Self {
            basis: DMatrix::identity(n, n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            basis: DMatrix::zeros(n, 0),
        }
    }

    /// Orthonormal basis of the complement of the all-ones vector.
    pub fn ones_complement(n: usize) -> Self {
        let centering =
            DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
        let dec = eigh(&centering).expect("centering matrix is well conditioned");
        Self {
            basis: dec.vectors.columns(1, n.saturating_sub(1)).into_owned(),
        }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection `QQᵀ`.
    pub fn projection(&self) -> DMatrix<f64> {
        symmetrized(&(&self.basis * self.basis.transpose()))
    }

    /// Coordinates `Qᵀx` of a vector.
    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * x
    }
}

/// Restriction `QᵀAQ` of `a` to the subspace.
pub fn restrict(a: &DMatrix<f64>, s: &Subspace) -> DMatrix<f64> {
    symmetrized(&(s.basis.transpose() * a * &s.basis))
}

/// Moore–Penrose pseudoinverse of a symmetric PSD matrix; eigenvalues below
/// `rel_tol * λ_max` are treated as zero.
pub fn pseudoinverse(a: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let dec = eigh(a)?;
    let cut = rel_tol * dec.values.amax();
    Ok(dec.map_spectrum(|x| if x > cut { 1.0 / x } else { 0.0 }))
}

/// `(A†)^{1/2}` for symmetric PSD `a`.
pub fn pinv_sqrt(a: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let dec = eigh(a)?;
    let cut = rel_tol * dec.values.amax();
    Ok(dec.map_spectrum(|x| if x > cut { 1.0 / x.sqrt() } else { 0.0 }))
}

/// Image of a symmetric PSD matrix as a subspace.
pub fn image(a: &DMatrix<f64>, rel_tol: f64) -> Result<Subspace> {
    Ok(eigh(a)?.image(rel_tol))
}

const UPDATE_DENOMINATOR_TOL: f64 = 1e-12;

/// Sherman–Morrison for a nonsingular matrix:
/// `(A + vvᵀ)⁻¹ = A⁻¹ − A⁻¹vvᵀA⁻¹ / (1 + vᵀA⁻¹v)`.
pub fn sm_inverse_update(a_inv: &DMatrix<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let av = a_inv * v;
    let denominator = 1.0 + v.dot(&av);
    if denominator.abs() <= UPDATE_DENOMINATOR_TOL {
        return Err(Error::SingularUpdate { denominator });
    }
    let va = a_inv.transpose() * v;
    Ok(a_inv - (av * va.transpose()) / denominator)
}

/// Pseudoinverse form of Sherman–Morrison for symmetric `A`:
/// returns `(A + PvvᵀP)† = A† − A†vvᵀA† / (1 + A†•vvᵀ)` where `projection`
/// projects onto `im(A)`.
pub fn sm_pinv_update(
    a_pinv: &DMatrix<f64>,
    projection: &DMatrix<f64>,
    v: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let v_bar = projection * v;
    let av = a_pinv * &v_bar;
    let denominator = 1.0 + v_bar.dot(&av);
    if denominator.abs() <= UPDATE_DENOMINATOR_TOL {
        return Err(Error::SingularUpdate { denominator });
    }
    Ok(symmetrized(&(a_pinv - (&av * av.transpose()) / denominator)))
}

/// Eigenvalues, ascending, of the pencil `(a, b)` on the common image:
/// the spectrum of `(B†)^{1/2} A (B†)^{1/2}` restricted to `im(B)`.
pub fn generalized_spectrum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DVector<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::IncompatibleKernels(format!(
            "shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let dec_a = eigh(a)?;
    let dec_b = eigh(b)?;
    let img_a = dec_a.image(RANK_REL_TOL);
    let img_b = dec_b.image(RANK_REL_TOL);
    if img_a.dim() != img_b.dim() {
        return Err(Error::IncompatibleKernels(format!(
            "ranks differ: {} vs {}",
            img_a.dim(),
            img_b.dim()
        )));
    }
    let pb = img_b.projection();
    let scale = max_abs(a).max(1.0);
    let leak = max_abs(&(&pb * a * &pb - a));
    if leak > 1e-8 * scale {
        return Err(Error::IncompatibleKernels(format!(
            "range of A leaves im(B) (residual {leak:e})"
        )));
    }
    // Work in the eigenbasis of B on its image.
    let cut = RANK_REL_TOL * dec_b.values.amax();
    let cols: Vec<usize> = (0..dec_b.dim()).filter(|&i| dec_b.values[i] > cut).collect();
    let q = dec_b.vectors.select_columns(cols.iter());
    let inv_sqrt = DVector::from_iterator(cols.len(), cols.iter().map(|&i| 1.0 / dec_b.values[i].sqrt()));
    let core = q.transpose() * a * &q;
    let pencil = DMatrix::from_fn(cols.len(), cols.len(), |i, j| {
        inv_sqrt[i] * core[(i, j)] * inv_sqrt[j]
    });
    eigvalsh(&pencil)
}

/// Tightest `(lo, hi)` with `lo·B ⪯ A ⪯ hi·B` on the common image.
pub fn spectral_range(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let spec = generalized_spectrum(a, b)?;
    if spec.is_empty() {
        return Ok((1.0, 1.0));
    }
    Ok((spec[0], spec[spec.len() - 1]))
}

/// Relative condition number `κ(A, B) = max xᵀAx/xᵀBx · max xᵀBx/xᵀAx`
/// over the common image.
pub fn relative_condition_number(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let (lo, hi) = spectral_range(a, b)?;
    if lo <= 0.0 {
        return Err(Error::IncompatibleKernels(format!(
            "pencil has a non-positive eigenvalue {lo:e} on the image"
        )));
    }
    Ok(hi / lo)
}
