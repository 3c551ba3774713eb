//! Patch sparsification: keep a graph `G` and replace a patch `W` by a
//! reweighted subgraph `W_k` of at most `N` edges such that `G + W_k`
//! spectrally approximates `G + W`.
//!
//! The reduction works on `V = im(L_{G+W})` in the eigenbasis of `L_{G+W}`:
//! with `D = diag(μ^{-1/2})` over the nonzero eigenvalues `μ`,
//! `X = D QᵀL_G Q D` and `v_e = √w_e · D Qᵀ b_e`, so `X + Σ v_e v_eᵀ = I`.

use nalgebra::{DMatrix, DVector};

use crate::engine::{run_engine, EngineProblem, EngineResult, RankOneUpdate};
use crate::error::{Error, Result};
use crate::graph::{laplacian, Edge, WeightedGraph};
use crate::linalg::{eigh, eigvalsh, frobenius, pseudoinverse, spectral_range, symmetrized, RANK_REL_TOL};

/// Measured `(k, T, λ*)` of a patch: `λ* = λ_{k+1}(L_G L_{G+W}†)` and
/// `T = Tr(L_W L_{G+W}†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchParams {
    pub k: usize,
    pub trace: f64,
    pub lambda_star: f64,
}

/// `L_{G+W}` in its eigenbasis restricted to the image.
struct ImageFrame {
    basis: DMatrix<f64>,
    inv_sqrt: DVector<f64>,
}

impl ImageFrame {
    fn new(combined: &WeightedGraph) -> Result<Self> {
        let dec = eigh(&laplacian(combined))?;
        let cut = RANK_REL_TOL * dec.values.amax();
        let cols: Vec<usize> = (0..dec.dim()).filter(|&i| dec.values[i] > cut).collect();
        Ok(Self {
            basis: dec.vectors.select_columns(cols.iter()),
            inv_sqrt: DVector::from_iterator(
                cols.len(),
                cols.iter().map(|&i| 1.0 / dec.values[i].sqrt()),
            ),
        })
    }

    fn dim(&self) -> usize {
        self.inv_sqrt.len()
    }

    /// `D Qᵀ M Q D`.
    fn congruence(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let core = self.basis.transpose() * m * &self.basis;
        let d = &self.inv_sqrt;
        symmetrized(&DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            d[i] * core[(i, j)] * d[j]
        }))
    }

    /// `√w · D Qᵀ b_e`.
    fn edge_vector(&self, e: &Edge) -> DVector<f64> {
        let mut v = (self.basis.row(e.u) - self.basis.row(e.v)).transpose();
        v.component_mul_assign(&self.inv_sqrt);
        v * e.w.sqrt()
    }
}

/// Measures the patch parameters of `w` with respect to `g` for a given `k`.
pub fn verify_patch(g: &WeightedGraph, w: &WeightedGraph, k: usize) -> Result<PatchParams> {
    let combined = g.union(w)?;
    let frame = ImageFrame::new(&combined)?;
    if k >= frame.dim() {
        return Err(Error::InvalidK {
            k,
            rank: frame.dim(),
        });
    }
    let pencil = eigvalsh(&frame.congruence(&laplacian(g)))?;
    let combined_pinv = pseudoinverse(&laplacian(&combined), RANK_REL_TOL)?;
    let trace = frobenius(&laplacian(w), &combined_pinv);
    Ok(PatchParams {
        k,
        trace,
        lambda_star: pencil[k],
    })
}

/// Engine instance for a patch together with the edge behind every update.
#[derive(Debug, Clone)]
pub struct PatchProblem {
    pub problem: EngineProblem,
    /// Edge of `W` generating update `i`.
    pub edges: Vec<Edge>,
}

/// Builds the engine problem with `M* = I` on `im(L_{G+W})`,
/// `cost_e = w_e / Σ w_d`.
pub fn build_patch_problem(
    g: &WeightedGraph,
    w: &WeightedGraph,
    k: usize,
    budget: usize,
) -> Result<PatchProblem> {
    if w.edge_count() == 0 {
        return Err(Error::InvalidProblem("patch graph W has no edges".into()));
    }
    let combined = g.union(w)?;
    let frame = ImageFrame::new(&combined)?;
    let x = frame.congruence(&laplacian(g));
    let total = w.total_weight();
    let updates = w
        .edges()
        .iter()
        .map(|e| RankOneUpdate::new(frame.edge_vector(e), e.w / total))
        .collect();
    Ok(PatchProblem {
        problem: EngineProblem::new(x, updates, k, budget)?,
        edges: w.edges().to_vec(),
    })
}

/// Reweighted patch `W_k` with its spectral certificate.
#[derive(Debug, Clone)]
pub struct PatchSparsifier {
    pub sparsifier: WeightedGraph,
    pub params: PatchParams,
    pub budget: usize,
    /// Certified `c_lo` with `c_lo·L_{G+W} ⪯ L_{G+W_k}`.
    pub certified_lower: f64,
    /// Certified `c_hi` with `L_{G+W_k} ⪯ c_hi·L_{G+W}` (`θ_max`).
    pub certified_upper: f64,
    /// `min(N/T,1)·λ*/72` (`/90` under the balanced schedule).
    pub explicit_lower: f64,
    /// Measured extreme generalized eigenvalues of `(L_{G+W_k}, L_{G+W})`.
    pub measured: (f64, f64),
    pub total_weight: f64,
    pub patch_weight: f64,
    /// `None` when `W` is empty and nothing had to be selected.
    pub engine: Option<EngineResult>,
}

/// Budget used when none is requested: `8k + 1`.
pub fn default_budget(k: usize) -> usize {
    8 * k + 1
}

/// Sparsifies the patch `w` on top of `g` with at most `budget` edges
/// (default `8k + 1`; an explicit budget must exceed `8k`).
pub fn sparsify_patch(
    g: &WeightedGraph,
    w: &WeightedGraph,
    k: usize,
    budget: Option<usize>,
) -> Result<PatchSparsifier> {
    let budget = budget.unwrap_or_else(|| default_budget(k));
    if budget <= 8 * k {
        return Err(Error::BudgetTooSmall { k, budget });
    }
    let params = verify_patch(g, w, k)?;
    if w.edge_count() == 0 {
        return Ok(PatchSparsifier {
            sparsifier: WeightedGraph::empty(g.n()),
            params,
            budget,
            certified_lower: 1.0,
            certified_upper: 1.0,
            explicit_lower: 1.0,
            measured: (1.0, 1.0),
            total_weight: 0.0,
            patch_weight: 0.0,
            engine: None,
        });
    }
    let built = build_patch_problem(g, w, k, budget)?;
    let result = run_engine(&built.problem)?;
    let kept: Vec<(usize, usize, f64)> = built
        .edges
        .iter()
        .zip(&result.weights)
        .filter(|(_, &rho)| rho > 0.0)
        .map(|(e, &rho)| (e.u, e.v, rho * e.w))
        .collect();
    let sparsifier = WeightedGraph::from_edges(g.n(), kept)?;
    let measured = spectral_range(
        &laplacian(&g.union(&sparsifier)?),
        &laplacian(&g.union(w)?),
    )?;
    Ok(PatchSparsifier {
        total_weight: sparsifier.total_weight(),
        patch_weight: w.total_weight(),
        sparsifier,
        params,
        budget,
        certified_lower: result.certified_lambda_min,
        certified_upper: result.theta_max,
        explicit_lower: result.explicit_floor,
        measured,
        engine: Some(result),
    })
}
