//! Two-subspace barrier-shift process.
//!
//! Given `X ⪰ 0` and rank-one terms `Y_i = v_i v_iᵀ` with
//! `X + Σ Y_i = M* ⪯ I`, the engine picks `N` reweighted terms so that
//! `M = X + Σ w_i Y_i` keeps its spectrum inside certified bounds. Two
//! potentials steer the selection:
//!
//! * the lower potential `Φ_l(B) = Σ 1/(λ_i(B|_S) − l)` lives on the fixed
//!   subspace `S` spanned by the `k` bottom eigenvectors of `X`, evaluated on
//!   `B = Z(A − X)Z` with `Z = ((P_S(M* − X)P_S)†)^{1/2}`;
//! * the upper potential `Φ^u(A) = Σ 1/(u − λ_i(A))` runs over the `T`
//!   largest eigenvalues of the current matrix `A`.
//!
//! Each step adds `t·Y_i` for an index whose gradients satisfy
//! `U_A•Y_i + max(N,T)·cost_i ≤ L_B•(ZY_iZ)`, with `t = 1/(L_B•ZY_iZ)`, then
//! shifts `l += δ_L` and `u += δ_U`. Neither potential increases, so after
//! `N` steps `λ_max(A) ≤ θ_max` and `λ_min(B|_S) ≥ θ_min`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs, restrict, symmetrized, SpectralDecomposition, Subspace};

/// Slack allowed when checking potentials and barrier bounds after the fact.
pub const CERTIFICATE_TOL: f64 = 1e-9;

const GRADIENT_DEGENERACY_TOL: f64 = 1e-14;

/// A term `Y_i = v vᵀ` with an associated cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneUpdate {
    pub vector: DVector<f64>,
    pub cost: f64,
}

impl RankOneUpdate {
    pub fn new(vector: DVector<f64>, cost: f64) -> Self {
        Self { vector, cost }
    }
}

/// An instance `(X, {Y_i, cost_i}, M*, k, N, T)` of the reweighting problem.
#[derive(Debug, Clone)]
pub struct EngineProblem {
    x: DMatrix<f64>,
    updates: Vec<RankOneUpdate>,
    target: DMatrix<f64>,
    k: usize,
    budget: usize,
    trace_bound: usize,
}

impl EngineProblem {
    /// Validates the instance and forms `M* = X + Σ v_i v_iᵀ` and
    /// `T = ⌈Tr(M* − X)⌉`.
    ///
    /// `k` may equal the dimension, in which case `S` is the whole space.
    pub fn new(
        x: DMatrix<f64>,
        updates: Vec<RankOneUpdate>,
        k: usize,
        budget: usize,
    ) -> Result<Self> {
        let d = x.nrows();
        if !x.is_square() || d == 0 {
            return Err(Error::InvalidProblem(format!(
                "X must be a non-empty square matrix, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if budget <= 8 * k {
            return Err(Error::BudgetTooSmall { k, budget });
        }
        if k > d {
            return Err(Error::InvalidK { k, rank: d });
        }
        if updates.is_empty() {
            return Err(Error::InvalidProblem("no rank-one updates".into()));
        }
        let x = symmetrized(&x);
        let mut target = x.clone();
        let mut trace = 0.0;
        let mut total_cost = 0.0;
        for (i, upd) in updates.iter().enumerate() {
            if upd.vector.len() != d {
                return Err(Error::InvalidProblem(format!(
                    "update {i} has length {} but X is {d}x{d}",
                    upd.vector.len()
                )));
            }
            if !(upd.cost.is_finite() && upd.cost >= 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "update {i} has invalid cost {}",
                    upd.cost
                )));
            }
            target += &upd.vector * upd.vector.transpose();
            trace += upd.vector.norm_squared();
            total_cost += upd.cost;
        }
        let target = symmetrized(&target);
        if (total_cost - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProblem(format!(
                "costs must sum to 1, got {total_cost}"
            )));
        }
        if trace <= 0.0 {
            return Err(Error::InvalidProblem("all rank-one updates are zero".into()));
        }
        let x_dec = eigh(&x)?;
        if x_dec.lambda_min() < -1e-9 * x_dec.values.amax().max(1.0) {
            return Err(Error::InvalidProblem(format!(
                "X is not positive semidefinite (λ_min = {:e})",
                x_dec.lambda_min()
            )));
        }
        let top = eigh(&target)?.lambda_max();
        if top > 1.0 + 1e-9 {
            return Err(Error::InvalidProblem(format!(
                "λ_max(M*) = {top} exceeds 1"
            )));
        }
        let trace_bound = ((trace - 1e-9).ceil().max(1.0) as usize).min(d);
        Ok(Self {
            x,
            updates,
            target,
            k,
            budget,
            trace_bound,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn updates(&self) -> &[RankOneUpdate] {
        &self.updates
    }

    /// `M* = X + Σ Y_i`.
    pub fn target(&self) -> &DMatrix<f64> {
        &self.target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of steps `N`.
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// `T = ⌈Tr(M* − X)⌉`.
    pub fn trace_bound(&self) -> usize {
        self.trace_bound
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// `λ_{k+1}(X)`, or `None` when `k` equals the dimension.
    pub fn lambda_star(&self) -> Result<Option<f64>> {
        let vals = eigh(&self.x)?.values;
        Ok(vals.get(self.k).copied())
    }
}

/// Which parameter schedule drives the barriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleVariant {
    /// `δ_U = 4δ_L`, `ε_U = 1/(4δ_L)`, `u_0 = 4Tδ_L + 1`; `θ_max ≤ 5`.
    Standard,
    /// `δ_U = 8δ_L`, `ε_U = 1/(8δ_L)`, `u_0 = 8Tδ_L + 1`. Satisfies
    /// `1/δ_U + ε_U + max(N,T) ≤ 1/δ_L − ε_L` exactly, at the price of
    /// `θ_max ≤ 9`.
    Balanced,
}

impl ScheduleVariant {
    /// Denominator `c` of the explicit floor `min(N/T,1)·λ*·λ_min(M*)/c`.
    pub fn name(self) -> &'static str {
        match self {
            ScheduleVariant::Standard => "standard",
            ScheduleVariant::Balanced => "balanced",
        }
    }

    pub fn floor_denominator(self) -> f64 {
        match self {
            ScheduleVariant::Standard => 72.0,
            ScheduleVariant::Balanced => 90.0,
        }
    }
}

/// Barrier step sizes, potential ceilings and starting positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineSchedule {
    pub variant: ScheduleVariant,
    pub delta_lower: f64,
    pub delta_upper: f64,
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub lower_start: f64,
    pub upper_start: f64,
    /// `max(N, T)`.
    pub scale: usize,
}

impl EngineSchedule {
    /// `θ_max = u_0 + N·δ_U`; `2(N + T)/max(N,T) + 1` for the standard schedule.
    pub fn theta_max(&self, budget: usize) -> f64 {
        self.upper_start + budget as f64 * self.delta_upper
    }

    /// `θ_min = l_0 + N·δ_L = (N/2 − 2k)/max(N,T)`.
    pub fn theta_min(&self, budget: usize) -> f64 {
        self.lower_start + budget as f64 * self.delta_lower
    }
}

/// Parameter schedule for `k` bottom eigenvalues, `N` steps and trace bound `T`:
/// `δ_L = 1/(2max(N,T))`, `δ_U = 4δ_L`, `ε_L = ε_U = 1/(4δ_L)`,
/// `l_0 = −4kδ_L`, `u_0 = 4Tδ_L + 1`.
///
/// With these values `1/δ_U + ε_U + max(N,T) = 2max(N,T)` while
/// `1/δ_L − ε_L = 1.5max(N,T)`, so a feasible index is not guaranteed a
/// priori; [`run_engine`] falls back to [`init_balanced_schedule`] if a step
/// ever finds none.
pub fn init_schedule(k: usize, budget: usize, trace_bound: usize) -> Result<EngineSchedule> {
    let scale = validate_schedule_inputs(k, budget, trace_bound)?;
    let delta_lower = 1.0 / (2.0 * scale as f64);
    let eps = 1.0 / (4.0 * delta_lower);
    Ok(EngineSchedule {
        variant: ScheduleVariant::Standard,
        delta_lower,
        delta_upper: 4.0 * delta_lower,
        eps_lower: eps,
        eps_upper: eps,
        lower_start: -4.0 * k as f64 * delta_lower,
        upper_start: 4.0 * trace_bound as f64 * delta_lower + 1.0,
        scale,
    })
}

/// Same lower barrier as [`init_schedule`]; the upper barrier uses
/// `δ_U = 8δ_L`, `ε_U = 1/(8δ_L)` and `u_0 = 8Tδ_L + 1`, which makes
/// `1/δ_U + ε_U + max(N,T) = 1/δ_L − ε_L = 1.5max(N,T)`.
pub fn init_balanced_schedule(
    k: usize,
    budget: usize,
    trace_bound: usize,
) -> Result<EngineSchedule> {
    let scale = validate_schedule_inputs(k, budget, trace_bound)?;
    let delta_lower = 1.0 / (2.0 * scale as f64);
    Ok(EngineSchedule {
        variant: ScheduleVariant::Balanced,
        delta_lower,
        delta_upper: 8.0 * delta_lower,
        eps_lower: 1.0 / (4.0 * delta_lower),
        eps_upper: 1.0 / (8.0 * delta_lower),
        lower_start: -4.0 * k as f64 * delta_lower,
        upper_start: 8.0 * trace_bound as f64 * delta_lower + 1.0,
        scale,
    })
}

fn validate_schedule_inputs(k: usize, budget: usize, trace_bound: usize) -> Result<usize> {
    if budget <= 8 * k {
        return Err(Error::BudgetTooSmall { k, budget });
    }
    if trace_bound == 0 {
        return Err(Error::InvalidProblem("trace bound T must be at least 1".into()));
    }
    Ok(budget.max(trace_bound))
}

/// Eigenspace of the `k` smallest eigenvalues of `x`.
pub fn fixed_subspace(x: &DMatrix<f64>, k: usize) -> Result<Subspace> {
    if k > x.nrows() {
        return Err(Error::InvalidK { k, rank: x.nrows() });
    }
    Ok(eigh(x)?.bottom_subspace(k))
}

/// `Z = ((P_S(M*′ − X)P_S)†)^{1/2}` for a perturbed target `M*′`.
///
/// Eigendirections `d_j` of `P_S(M* − X)P_S` inside `S` with eigenvalue at
/// most `ε = 1e-8·λ_max(M* − X)` are covered by zero-cost auxiliary updates
/// `√ε·d_j`, so that `M*′ = M* + ε Σ d_j d_jᵀ` is nonsingular on `S` and
/// `Z(M*′ − X)Z = P_S`.
#[derive(Debug, Clone)]
pub struct ZFactor {
    pub z: DMatrix<f64>,
    /// `ε`, or zero when no direction needed covering.
    pub perturbation: f64,
    pub auxiliary: Vec<DVector<f64>>,
}

pub fn compute_z(x: &DMatrix<f64>, target: &DMatrix<f64>, s: &Subspace) -> Result<ZFactor> {
    let n = x.nrows();
    if s.dim() == 0 {
        return Ok(ZFactor {
            z: DMatrix::zeros(n, n),
            perturbation: 0.0,
            auxiliary: Vec::new(),
        });
    }
    let gap = symmetrized(&(target - x));
    let eps = 1e-8 * eigh(&gap)?.lambda_max().max(0.0);
    let core_dec = eigh(&restrict(&gap, s))?;
    let q = s.basis();
    let mut core = restrict(&gap, s);
    let mut auxiliary = Vec::new();
    for j in 0..core_dec.dim() {
        if core_dec.values[j] <= eps {
            let d = core_dec.vectors.column(j);
            core += d * d.transpose() * eps;
            auxiliary.push(q * d * eps.sqrt());
        }
    }
    let dec = eigh(&symmetrized(&core))?;
    if dec.lambda_min() <= 0.0 {
        return Err(Error::Numerical(
            "M* − X vanishes on the fixed subspace".into(),
        ));
    }
    let inv_sqrt = dec.map_spectrum(|x| 1.0 / x.sqrt());
    Ok(ZFactor {
        z: symmetrized(&(q * inv_sqrt * q.transpose())),
        perturbation: if auxiliary.is_empty() { 0.0 } else { eps },
        auxiliary,
    })
}

fn lower_values(b: &DMatrix<f64>, s: &Subspace) -> Result<SpectralDecomposition> {
    eigh(&restrict(b, s))
}

fn lower_potential_of(values: &DVector<f64>, l: f64) -> Result<f64> {
    let mut sum = 0.0;
    for &mu in values.iter() {
        if mu <= l {
            return Err(Error::BarrierViolation {
                barrier: "lower",
                eigenvalue: mu,
                position: l,
            });
        }
        sum += 1.0 / (mu - l);
    }
    Ok(sum)
}

fn upper_potential_of(values: &DVector<f64>, u: f64, top: usize) -> Result<f64> {
    let n = values.len();
    let mut sum = 0.0;
    for &lam in values.iter().skip(n - top.min(n)) {
        if lam >= u {
            return Err(Error::BarrierViolation {
                barrier: "upper",
                eigenvalue: lam,
                position: u,
            });
        }
        sum += 1.0 / (u - lam);
    }
    Ok(sum)
}

/// `Φ_l(B) = Σ_{i≤k} 1/(λ_i(B|_S) − l)`.
pub fn lower_potential(b: &DMatrix<f64>, l: f64, s: &Subspace) -> Result<f64> {
    lower_potential_of(&lower_values(b, s)?.values, l)
}

/// `Φ^u(A) = Σ over the `top` largest eigenvalues of 1/(u − λ_i(A))`.
pub fn upper_potential(a: &DMatrix<f64>, u: f64, top: usize) -> Result<f64> {
    upper_potential_of(&eigh(a)?.values, u, top)
}

fn upper_gradient_of(
    dec: &SpectralDecomposition,
    u: f64,
    delta: f64,
    top: usize,
) -> Result<DMatrix<f64>> {
    let drop = upper_potential_of(&dec.values, u, top)?
        - upper_potential_of(&dec.values, u + delta, top)?;
    if drop <= GRADIENT_DEGENERACY_TOL {
        return Err(Error::DegenerateGradient { difference: drop });
    }
    let shifted = u + delta;
    Ok(dec.map_spectrum(|lam| {
        let g = 1.0 / (shifted - lam);
        g * g / drop + g
    }))
}

/// `U_A = ((u+δ_U)I − A)^{-2} / (Φ^u(A) − Φ^{u+δ_U}(A)) + ((u+δ_U)I − A)^{-1}`.
pub fn upper_gradient(a: &DMatrix<f64>, u: f64, delta: f64, top: usize) -> Result<DMatrix<f64>> {
    upper_gradient_of(&eigh(a)?, u, delta, top)
}

fn lower_gradient_of(
    dec: &SpectralDecomposition,
    s: &Subspace,
    l: f64,
    delta: f64,
) -> Result<DMatrix<f64>> {
    let shifted = l + delta;
    let rise = lower_potential_of(&dec.values, shifted)? - lower_potential_of(&dec.values, l)?;
    if rise <= GRADIENT_DEGENERACY_TOL {
        return Err(Error::DegenerateGradient { difference: rise });
    }
    let inner = dec.map_spectrum(|mu| {
        let g = 1.0 / (mu - shifted);
        g * g / rise - g
    });
    let q = s.basis();
    Ok(symmetrized(&(q * inner * q.transpose())))
}

/// `L_B = (P_S(B − (l+δ_L)I)P_S)^{†2} / (Φ_{l+δ_L}(B) − Φ_l(B)) − (P_S(B − (l+δ_L)I)P_S)†`.
pub fn lower_gradient(
    b: &DMatrix<f64>,
    l: f64,
    delta: f64,
    s: &Subspace,
) -> Result<DMatrix<f64>> {
    lower_gradient_of(&lower_values(b, s)?, s, l, delta)
}

/// Iteration state `(q, w, A, B, l, u)` together with the fixed `S` and `Z`.
#[derive(Debug, Clone)]
pub struct EngineState {
    pub step: usize,
    pub weights: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub lower: f64,
    pub upper: f64,
    pub subspace: Subspace,
    pub z: DMatrix<f64>,
    /// `ε` of the auxiliary updates (zero if there are none).
    pub perturbation: f64,
    /// Zero-cost updates indexed after the real ones, see [`ZFactor`].
    pub auxiliary: Vec<DVector<f64>>,
    pub auxiliary_weights: Vec<f64>,
    z_vectors: Vec<DVector<f64>>,
}

impl EngineState {
    /// `A = X`, `B = 0`, all weights zero, barriers at their starting values.
    pub fn initial(problem: &EngineProblem, schedule: &EngineSchedule) -> Result<Self> {
        let n = problem.dim();
        let subspace = fixed_subspace(problem.x(), problem.k())?;
        let ZFactor {
            z,
            perturbation,
            auxiliary,
        } = compute_z(problem.x(), problem.target(), &subspace)?;
        let z_vectors = problem
            .updates()
            .iter()
            .map(|u| &u.vector)
            .chain(&auxiliary)
            .map(|v| &z * v)
            .collect();
        Ok(Self {
            step: 0,
            weights: vec![0.0; problem.updates().len()],
            a: problem.x().clone(),
            b: DMatrix::zeros(n, n),
            lower: schedule.lower_start,
            upper: schedule.upper_start,
            subspace,
            z,
            perturbation,
            auxiliary_weights: vec![0.0; auxiliary.len()],
            auxiliary,
            z_vectors,
        })
    }

    /// Update vector `i`; indices past the real updates are auxiliary.
    pub fn update_vector<'a>(&'a self, problem: &'a EngineProblem, i: usize) -> &'a DVector<f64> {
        let m = problem.updates().len();
        if i < m {
            &problem.updates()[i].vector
        } else {
            &self.auxiliary[i - m]
        }
    }

    /// `Z v_i` for update `i`.
    pub fn z_vector(&self, i: usize) -> &DVector<f64> {
        &self.z_vectors[i]
    }

    /// Adds `t·Y_i` to `A`, `t·ZY_iZ` to `B` and shifts both barriers.
    pub fn apply(
        &mut self,
        problem: &EngineProblem,
        schedule: &EngineSchedule,
        selection: &Selection,
    ) {
        let v = self.update_vector(problem, selection.index).clone();
        let zv = &self.z_vectors[selection.index];
        let t = selection.step;
        let m = problem.updates().len();
        if selection.index < m {
            self.weights[selection.index] += t;
        } else {
            self.auxiliary_weights[selection.index - m] += t;
        }
        self.a += (&v * v.transpose()) * t;
        self.b += (zv * zv.transpose()) * t;
        self.a = symmetrized(&self.a);
        self.b = symmetrized(&self.b);
        self.lower += schedule.delta_lower;
        self.upper += schedule.delta_upper;
        self.step += 1;
    }
}

/// Chosen index `i` and step `t`, with the gradient products that justified it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub step: f64,
    /// `U_A • Y_i`.
    pub upper_term: f64,
    /// `L_B • (Z Y_i Z)`; zero when `S` is trivial.
    pub lower_term: f64,
    /// `L_B•ZY_iZ − U_A•Y_i − max(N,T)·cost_i`.
    pub slack: f64,
}

/// Gradient products of every candidate at the current state.
#[derive(Debug, Clone)]
pub struct SelectionScores {
    pub upper_terms: Vec<f64>,
    pub lower_terms: Vec<f64>,
}

/// Evaluates `U_A•Y_i` and `L_B•(ZY_iZ)` for every update.
pub fn selection_scores(
    problem: &EngineProblem,
    state: &EngineState,
    schedule: &EngineSchedule,
) -> Result<SelectionScores> {
    let a_dec = eigh(&state.a)?;
    let grad_u = upper_gradient_of(&a_dec, state.upper, schedule.delta_upper, problem.trace_bound())?;
    let upper_terms = problem
        .updates()
        .iter()
        .map(|u| &u.vector)
        .chain(&state.auxiliary)
        .map(|v| v.dot(&(&grad_u * v)))
        .collect();
    let lower_terms = if state.subspace.dim() == 0 {
        vec![0.0; state.z_vectors.len()]
    } else {
        let b_dec = lower_values(&state.b, &state.subspace)?;
        let grad_l = lower_gradient_of(&b_dec, &state.subspace, state.lower, schedule.delta_lower)?;
        state
            .z_vectors
            .iter()
            .map(|z| z.dot(&(&grad_l * z)))
            .collect()
    };
    Ok(SelectionScores {
        upper_terms,
        lower_terms,
    })
}

/// Picks the feasible index with the largest slack
/// `L_B•ZY_iZ − U_A•Y_i − max(N,T)·cost_i` (lowest index on ties) and
/// `t = 1/(L_B•ZY_iZ)`. Auxiliary updates (see [`ZFactor`]) take part
/// with zero cost and indices after the real ones.
///
/// With a trivial fixed subspace (`k = 0`) there is no lower barrier; the
/// step is `t = 1/(U_A•Y_i + max(N,T)·cost_i)` and the index maximizing the
/// added trace `t·|v_i|²` wins.
pub fn select_update(
    problem: &EngineProblem,
    state: &EngineState,
    schedule: &EngineSchedule,
) -> Result<Selection> {
    let scores = selection_scores(problem, state, schedule)?;
    let scale = schedule.scale as f64;
    let mut best: Option<(f64, Selection)> = None;
    let m = problem.updates().len();
    for i in 0..m + state.auxiliary.len() {
        let ua = scores.upper_terms[i];
        let lb = scores.lower_terms[i];
        let cost = if i < m { problem.updates()[i].cost } else { 0.0 };
        let cost_term = scale * cost;
        let candidate = if state.subspace.dim() == 0 {
            let denom = ua + cost_term;
            let mass = state.update_vector(problem, i).norm_squared();
            if mass == 0.0 || denom <= 0.0 {
                continue;
            }
            let t = 1.0 / denom;
            (
                t * mass,
                Selection {
                    index: i,
                    step: t,
                    upper_term: ua,
                    lower_term: 0.0,
                    slack: 0.0,
                },
            )
        } else {
            let slack = lb - ua - cost_term;
            if !(lb > 0.0 && slack >= 0.0) {
                continue;
            }
            (
                slack,
                Selection {
                    index: i,
                    step: 1.0 / lb,
                    upper_term: ua,
                    lower_term: lb,
                    slack,
                },
            )
        };
        if best.as_ref().map_or(true, |(score, _)| candidate.0 > *score) {
            best = Some(candidate);
        }
    }
    best.map(|(_, sel)| sel).ok_or_else(|| Error::InfeasibleStep {
        step: state.step,
        upper_sum: scores.upper_terms.iter().sum(),
        lower_sum: scores.lower_terms.iter().sum(),
        cost_term: scale * problem.updates().iter().map(|u| u.cost).sum::<f64>(),
    })
}

/// One applied step with the potentials on both sides of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub index: usize,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    /// `Φ^u(A^(q))` at the barrier before the step.
    pub upper_potential_before: f64,
    /// `Φ^{u+δ_U}(A^(q+1))`.
    pub upper_potential_after: f64,
    /// `Φ_l(B^(q))`; zero for a trivial fixed subspace.
    pub lower_potential_before: f64,
    /// `Φ_{l+δ_L}(B^(q+1))`.
    pub lower_potential_after: f64,
}

impl StepRecord {
    /// True when either potential rose by more than `tol`.
    pub fn violates_monotonicity(&self, tol: f64) -> bool {
        self.upper_potential_after > self.upper_potential_before + tol
            || self.lower_potential_after > self.lower_potential_before + tol
    }
}

/// Final weights, matrix and certificate.
#[derive(Debug, Clone)]
pub struct EngineResult {
    pub weights: Vec<f64>,
    /// `X + Σ w_i Y_i` over the real updates.
    pub m: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub schedule: EngineSchedule,
    pub k: usize,
    pub budget: usize,
    pub trace_bound: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_min(B^(N)|_S)`; `+∞` for a trivial fixed subspace.
    pub lambda_min_restricted: f64,
    /// `λ_{k+1}(X)`, absent when `S` is the whole space.
    pub lambda_star: Option<f64>,
    /// `λ_min(M*)`.
    pub target_lambda_min: f64,
    /// `θ_min·λ*·λ_min(M*) / (√λ* + √θ_max + √(θ_min·λ_min(M*)))²`
    /// (or `θ_min·λ_min(M*)` when `S` is the whole space).
    pub certified_lambda_min: f64,
    /// `min(N/T, 1)·λ*·λ_min(M*)/c`, implied by the certified bound.
    pub explicit_floor: f64,
    pub total_cost: f64,
    /// `ε` of the auxiliary updates.
    pub perturbation: f64,
    /// Total step length spent on auxiliary updates; they are dropped from
    /// `M`, which lowers `λ_min` by at most `ε` times this.
    pub auxiliary_weight: f64,
    pub trace: Vec<StepRecord>,
}

impl EngineResult {
    /// Number of distinct indices with positive weight.
    pub fn support(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn monotonicity_violations(&self, tol: f64) -> usize {
        self.trace.iter().filter(|r| r.violates_monotonicity(tol)).count()
    }
}

/// Certified lower bound on `λ_min(M)` from the barrier endpoints.
pub fn certified_lambda_min(
    theta_min: f64,
    theta_max: f64,
    lambda_star: Option<f64>,
    target_lambda_min: f64,
) -> f64 {
    let lower_part = (theta_min * target_lambda_min).max(0.0);
    match lambda_star {
        None => lower_part,
        Some(ls) => {
            let ls = ls.max(0.0);
            let denom = ls.sqrt() + theta_max.sqrt() + lower_part.sqrt();
            lower_part * ls / (denom * denom)
        }
    }
}

/// `min(N/T, 1)·λ*·λ_min(M*)/c` with `c = 72` for the standard schedule
/// (`c = 90` for the balanced one).
pub fn explicit_floor(
    variant: ScheduleVariant,
    budget: usize,
    trace_bound: usize,
    lambda_star: Option<f64>,
    target_lambda_min: f64,
) -> f64 {
    let ratio = (budget as f64 / trace_bound as f64).min(1.0);
    ratio * lambda_star.unwrap_or(1.0).max(0.0) * target_lambda_min.max(0.0)
        / variant.floor_denominator()
}

/// Runs the barrier process for exactly `N` steps with the standard
/// schedule, retrying once with the balanced schedule if some step has no
/// feasible index.
pub fn run_engine(problem: &EngineProblem) -> Result<EngineResult> {
    let schedule = init_schedule(problem.k(), problem.budget(), problem.trace_bound())?;
    match run_engine_with(problem, schedule) {
        Err(Error::InfeasibleStep { .. }) => {
            let balanced =
                init_balanced_schedule(problem.k(), problem.budget(), problem.trace_bound())?;
            run_engine_with(problem, balanced)
        }
        other => other,
    }
}

/// Runs the barrier process for exactly `N` steps under `schedule`.
pub fn run_engine_with(problem: &EngineProblem, schedule: EngineSchedule) -> Result<EngineResult> {
    let mut state = EngineState::initial(problem, &schedule)?;
    let top = problem.trace_bound();
    let has_lower = state.subspace.dim() > 0;

    let mut upper_before = upper_potential(&state.a, state.upper, top)?;
    let mut lower_before = if has_lower {
        lower_potential(&state.b, state.lower, &state.subspace)?
    } else {
        0.0
    };
    let mut trace = Vec::with_capacity(problem.budget());
    for _ in 0..problem.budget() {
        let selection = select_update(problem, &state, &schedule)?;
        let (lower, upper) = (state.lower, state.upper);
        state.apply(problem, &schedule, &selection);
        let upper_after = upper_potential(&state.a, state.upper, top)?;
        let lower_after = if has_lower {
            lower_potential(&state.b, state.lower, &state.subspace)?
        } else {
            0.0
        };
        trace.push(StepRecord {
            step: state.step - 1,
            index: selection.index,
            t: selection.step,
            lower,
            upper,
            slack: selection.slack,
            upper_potential_before: upper_before,
            upper_potential_after: upper_after,
            lower_potential_before: lower_before,
            lower_potential_after: lower_after,
        });
        upper_before = upper_after;
        lower_before = lower_after;
    }

    let budget = problem.budget();
    let theta_min = schedule.theta_min(budget);
    let theta_max = schedule.theta_max(budget);
    let mut m = problem.x().clone();
    for (u, &w) in problem.updates().iter().zip(&state.weights) {
        if w > 0.0 {
            m += &u.vector * u.vector.transpose() * w;
        }
    }
    let m = symmetrized(&m);
    let m_dec = eigh(&m)?;
    let lambda_min_restricted = if has_lower {
        lower_values(&state.b, &state.subspace)?.lambda_min()
    } else {
        f64::INFINITY
    };
    let lambda_star = problem.lambda_star()?;
    let target_lambda_min = eigh(problem.target())?.lambda_min();
    let certified = certified_lambda_min(theta_min, theta_max, lambda_star, target_lambda_min);
    let total_cost = problem
        .updates()
        .iter()
        .zip(&state.weights)
        .map(|(u, w)| u.cost * w)
        .sum();

    let result = EngineResult {
        weights: state.weights,
        auxiliary_weight: state.auxiliary_weights.iter().sum(),
        m,
        b: state.b,
        schedule,
        k: problem.k(),
        budget,
        trace_bound: problem.trace_bound(),
        theta_min,
        theta_max,
        lambda_min: m_dec.lambda_min(),
        lambda_max: m_dec.lambda_max(),
        lambda_min_restricted,
        lambda_star,
        target_lambda_min,
        certified_lambda_min: certified,
        explicit_floor: explicit_floor(
            schedule.variant,
            budget,
            problem.trace_bound(),
            lambda_star,
            target_lambda_min,
        ),
        total_cost,
        perturbation: state.perturbation,
        trace,
    };
    check_certificate(&result)?;
    Ok(result)
}

fn check_certificate(r: &EngineResult) -> Result<()> {
    let tol = CERTIFICATE_TOL * r.theta_max.max(1.0);
    if r.lambda_max > r.theta_max + tol {
        return Err(Error::Numerical(format!(
            "λ_max(M) = {} exceeds θ_max = {}",
            r.lambda_max, r.theta_max
        )));
    }
    if r.lambda_min_restricted < r.theta_min - tol {
        return Err(Error::Numerical(format!(
            "λ_min(B|_S) = {} below θ_min = {}",
            r.lambda_min_restricted, r.theta_min
        )));
    }
    let slack = tol + r.perturbation * r.auxiliary_weight;
    if r.lambda_min < r.certified_lambda_min - slack {
        return Err(Error::Numerical(format!(
            "λ_min(M) = {} below the certified {}",
            r.lambda_min, r.certified_lambda_min
        )));
    }
    let cost_cap = r.budget as f64 / r.schedule.scale as f64;
    if r.total_cost > cost_cap + CERTIFICATE_TOL {
        return Err(Error::Numerical(format!(
            "total cost {} exceeds {}",
            r.total_cost, cost_cap
        )));
    }
    debug_assert!(max_abs(&(&r.m - r.m.transpose())) <= 1e-12);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_psd, random_vector, rng};
    use crate::linalg::{eigvalsh, frobenius};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    /// Random instance scaled so that `λ_max(M*) = 1`.
    fn random_problem(seed: u64, n: usize, m: usize, k: usize, budget: usize) -> EngineProblem {
        let mut r = rng(seed);
        let x = random_psd(&mut r, n);
        let vs: Vec<DVector<f64>> = (0..m).map(|_| random_vector(&mut r, n) * 0.3).collect();
        let mut target = x.clone();
        for v in &vs {
            target += v * v.transpose();
        }
        let scale = eigvalsh(&target).unwrap()[n - 1];
        let costs: Vec<f64> = (0..m).map(|_| r.gen_range(0.1..1.0)).collect();
        let total: f64 = costs.iter().sum();
        let updates = vs
            .into_iter()
            .zip(costs)
            .map(|(v, c)| RankOneUpdate::new(v / scale.sqrt(), c / total))
            .collect();
        EngineProblem::new(x / scale, updates, k, budget).unwrap()
    }

    #[test]
    fn schedule_values() {
        assert!(matches!(
            init_schedule(1, 8, 4),
            Err(Error::BudgetTooSmall { k: 1, budget: 8 })
        ));
        let s = init_schedule(1, 9, 4).unwrap();
        assert_abs_diff_eq!(s.delta_lower, 1.0 / 18.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.delta_upper, 2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eps_lower, 4.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eps_upper, 4.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lower_start, -2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.upper_start, 16.0 / 18.0 + 1.0, epsilon = 1e-15);
        assert_eq!(init_schedule(1, 16, 16).unwrap().delta_lower, 1.0 / 32.0);
    }

    #[test]
    fn schedule_balances_both_barriers() {
        for (k, n, t) in [(1, 9, 4), (2, 17, 30), (3, 25, 25), (0, 4, 2), (5, 100, 7)] {
            let s = init_schedule(k, n, t).unwrap();
            let left = 1.0 / s.delta_upper + s.eps_upper + s.scale as f64;
            let right = 1.0 / s.delta_lower - s.eps_lower;
            assert_abs_diff_eq!(right, 1.5 * n.max(t) as f64, epsilon = 1e-9);
            assert_abs_diff_eq!(left, 2.0 * n.max(t) as f64, epsilon = 1e-9);
            let scale = n.max(t) as f64;
            assert_abs_diff_eq!(s.theta_max(n), 2.0 * (n + t) as f64 / scale + 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                s.theta_min(n),
                (n as f64 / 2.0 - 2.0 * k as f64) / scale,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn balanced_schedule_meets_both_barrier_condition() {
        for (k, n, t) in [(1, 9, 4), (2, 17, 30), (0, 4, 2)] {
            let s = init_balanced_schedule(k, n, t).unwrap();
            let left = 1.0 / s.delta_upper + s.eps_upper + s.scale as f64;
            let right = 1.0 / s.delta_lower - s.eps_lower;
            assert_abs_diff_eq!(left, right, epsilon = 1e-9);
            assert_abs_diff_eq!(left, 1.5 * n.max(t) as f64, epsilon = 1e-9);
            let upper0 = t as f64 / (s.upper_start - 1.0);
            assert_abs_diff_eq!(upper0, s.eps_upper, epsilon = 1e-9);
            assert!(s.theta_max(n) <= 9.0 + 1e-12);
        }
    }

    #[test]
    fn balanced_schedule_runs_with_certificate() {
        let p = random_problem(77, 12, 60, 2, 17);
        let s = init_balanced_schedule(2, 17, p.trace_bound()).unwrap();
        let r = run_engine_with(&p, s).unwrap();
        assert_eq!(r.schedule.variant, ScheduleVariant::Balanced);
        assert!(r.lambda_max <= r.theta_max);
        assert!(r.lambda_min >= r.explicit_floor);
        assert_eq!(r.monotonicity_violations(1e-9), 0);
    }

    #[test]
    fn fixed_subspace_examples() {
        let x = diag(&[1.0, 2.0, 3.0]);
        let s = fixed_subspace(&x, 2).unwrap();
        let p = s.projection();
        assert!(max_abs(&(p - diag(&[1.0, 1.0, 0.0]))) < 1e-14);
        assert_eq!(fixed_subspace(&x, 0).unwrap().dim(), 0);
        let mut r = rng(4);
        let x = random_psd(&mut r, 7);
        let vals = eigvalsh(&x).unwrap();
        for k in 1..7 {
            let s = fixed_subspace(&x, k).unwrap();
            let top = eigvalsh(&restrict(&x, &s)).unwrap()[k - 1];
            assert_abs_diff_eq!(top, vals[k - 1], epsilon = 1e-9);
        }
    }

    #[test]
    fn compute_z_examples() {
        let x = diag(&[0.1, 0.2, 0.5]);
        let s = fixed_subspace(&x, 2).unwrap();
        let ps = s.projection();
        let f = compute_z(&x, &(&x + &ps), &s).unwrap();
        assert_eq!(f.perturbation, 0.0);
        assert!(f.auxiliary.is_empty());
        assert!(max_abs(&(&f.z - &ps)) < 1e-12);
        let f = compute_z(&x, &(&x + &ps * 4.0), &s).unwrap();
        assert!(max_abs(&(&f.z - &ps * 0.5)) < 1e-12);

        let p = random_problem(21, 8, 20, 3, 25);
        let s = fixed_subspace(p.x(), 3).unwrap();
        let z = compute_z(p.x(), p.target(), &s).unwrap().z;
        let gap = p.target() - p.x();
        let ps = s.projection();
        let lhs = &z * (&ps * gap * &ps) * &z;
        assert!(max_abs(&(lhs - &ps)) < 1e-7);
    }

    #[test]
    fn compute_z_covers_singular_gap() {
        let x = diag(&[0.1, 0.2, 0.5]);
        let s = fixed_subspace(&x, 2).unwrap();
        let gap = diag(&[1.0, 0.0, 0.0]);
        let f = compute_z(&x, &(&x + &gap), &s).unwrap();
        assert_abs_diff_eq!(f.perturbation, 1e-8, epsilon = 1e-20);
        assert_eq!(f.auxiliary.len(), 1);
        assert_abs_diff_eq!(f.auxiliary[0][1].abs(), 1e-4, epsilon = 1e-12);
        let mut covered = gap.clone();
        for a in &f.auxiliary {
            covered += a * a.transpose();
        }
        let ps = s.projection();
        let lhs = &f.z * (&ps * covered * &ps) * &f.z;
        assert!(max_abs(&(lhs - &ps)) < 1e-9);
    }

    #[test]
    fn lower_potential_examples() {
        let s = init_schedule(2, 17, 5).unwrap();
        let sub = fixed_subspace(&diag(&[0.1, 0.2, 0.7, 0.9]), 2).unwrap();
        let b0 = DMatrix::zeros(4, 4);
        assert_abs_diff_eq!(
            lower_potential(&b0, s.lower_start, &sub).unwrap(),
            s.eps_lower,
            epsilon = 1e-12
        );
        let ps = sub.projection();
        assert_abs_diff_eq!(lower_potential(&ps, 0.0, &sub).unwrap(), 2.0, epsilon = 1e-12);
        assert!(matches!(
            lower_potential(&ps, 1.0, &sub),
            Err(Error::BarrierViolation { barrier: "lower", .. })
        ));

        let mut r = rng(9);
        let b = random_psd(&mut r, 6);
        let sub = fixed_subspace(&random_psd(&mut r, 6), 3).unwrap();
        let vals = eigvalsh(&restrict(&b, &sub)).unwrap();
        let l = vals[0] - 0.5;
        let oracle: f64 = vals.iter().map(|m| 1.0 / (m - l)).sum();
        assert_abs_diff_eq!(lower_potential(&b, l, &sub).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn upper_potential_examples() {
        let p = random_problem(5, 6, 10, 1, 9);
        let s = init_schedule(1, 9, p.trace_bound()).unwrap();
        let phi = upper_potential(p.x(), s.upper_start, p.trace_bound()).unwrap();
        assert!(phi <= p.trace_bound() as f64 / (s.upper_start - 1.0) + 1e-12);
        assert_abs_diff_eq!(s.eps_upper, p.trace_bound() as f64 / (s.upper_start - 1.0), epsilon = 1e-9);

        assert_abs_diff_eq!(
            upper_potential(&DMatrix::zeros(5, 5), 1.0, 5).unwrap(),
            5.0,
            epsilon = 1e-14
        );
        assert!(matches!(
            upper_potential(&DMatrix::identity(2, 2), 1.0, 1),
            Err(Error::BarrierViolation { barrier: "upper", .. })
        ));

        let mut r = rng(10);
        let a = random_psd(&mut r, 7);
        let vals = eigvalsh(&a).unwrap();
        let u = vals[6] + 0.3;
        let oracle: f64 = vals.iter().skip(4).map(|l| 1.0 / (u - l)).sum();
        assert_abs_diff_eq!(upper_potential(&a, u, 3).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn upper_gradient_scalar() {
        let g = upper_gradient(&DMatrix::zeros(1, 1), 2.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lower_gradient_scalar() {
        let s = Subspace::full(1);
        let g = lower_gradient(&DMatrix::identity(1, 1), 0.0, 0.5, &s).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut r = rng(31);
        let n = 6;
        let a = random_psd(&mut r, n) * 0.5;
        let u = eigvalsh(&a).unwrap()[n - 1] + 0.4;
        let (delta, top) = (0.2, 3);
        let y = {
            let v = random_vector(&mut r, n);
            &v * v.transpose()
        };
        // U_A = D²/drop + D where D = ((u+δ)I − A)^{-1}; the D² part is the
        // gradient of Φ^{u+δ}, check it by central differences.
        let grad = upper_gradient(&a, u, delta, top).unwrap();
        let drop = upper_potential(&a, u, top).unwrap() - upper_potential(&a, u + delta, top).unwrap();
        let resolvent = eigh(&a).unwrap().map_spectrum(|l| 1.0 / (u + delta - l));
        let d2 = (&grad - &resolvent) * drop;
        let h = 1e-6;
        let fd = (upper_potential(&(&a + &y * h), u + delta, top).unwrap()
            - upper_potential(&(&a - &y * h), u + delta, top).unwrap())
            / (2.0 * h);
        // Only the top-T eigenvalues contribute; compare on the full trace.
        let full_fd = (upper_potential(&(&a + &y * h), u + delta, n).unwrap()
            - upper_potential(&(&a - &y * h), u + delta, n).unwrap())
            / (2.0 * h);
        assert_abs_diff_eq!(frobenius(&d2, &y), full_fd, epsilon = 1e-5 * full_fd.abs().max(1.0));
        assert!(fd <= full_fd + 1e-9);

        let sub = fixed_subspace(&random_psd(&mut r, n), 3).unwrap();
        let b = sub.projection() * 0.8;
        let (l, dl) = (0.1, 0.2);
        let grad = lower_gradient(&b, l, dl, &sub).unwrap();
        let rise = lower_potential(&b, l + dl, &sub).unwrap() - lower_potential(&b, l, &sub).unwrap();
        let inner = {
            let dec = eigh(&restrict(&b, &sub)).unwrap();
            let m = dec.map_spectrum(|mu| 1.0 / (mu - l - dl));
            sub.basis() * m * sub.basis().transpose()
        };
        let d2 = (&grad + &inner) * rise;
        let fd = (lower_potential(&(&b + &y * h), l + dl, &sub).unwrap()
            - lower_potential(&(&b - &y * h), l + dl, &sub).unwrap())
            / (2.0 * h);
        // dΦ/dB • Y = −(P(B−l'I)P)^{†2} • Y
        assert_abs_diff_eq!(-frobenius(&d2, &y), fd, epsilon = 1e-5 * fd.abs().max(1.0));
        let comp = DMatrix::identity(n, n) - sub.projection();
        assert!(max_abs(&(&comp * &grad * &comp)) < 1e-12);
    }

    #[test]
    fn select_update_single_candidate() {
        let x = diag(&[0.2, 0.4, 0.5]);
        let v = DVector::from_vec(vec![0.5, 0.3, 0.1]);
        let p = EngineProblem::new(x, vec![RankOneUpdate::new(v, 1.0)], 1, 9).unwrap();
        let s = init_schedule(1, 9, p.trace_bound()).unwrap();
        let state = EngineState::initial(&p, &s).unwrap();
        let sel = select_update(&p, &state, &s).unwrap();
        assert_eq!(sel.index, 0);
        assert_abs_diff_eq!(sel.step, 1.0 / sel.lower_term, epsilon = 1e-15);
        assert!(sel.step * 1.0 <= 1.0 / s.scale as f64 + 1e-15);
    }

    #[test]
    fn aggregate_gradient_bounds() {
        for seed in 0..5 {
            let p = random_problem(100 + seed, 10, 40, 2, 17);
            let s = init_schedule(2, 17, p.trace_bound()).unwrap();
            let mut state = EngineState::initial(&p, &s).unwrap();
            for _ in 0..5 {
                let scores = selection_scores(&p, &state, &s).unwrap();
                let upper: f64 = scores.upper_terms.iter().sum::<f64>() + s.scale as f64;
                let lower: f64 = scores.lower_terms.iter().sum();
                assert!(upper <= 1.0 / s.delta_upper + s.eps_upper + s.scale as f64 + 1e-8);
                assert!(lower >= 1.0 / s.delta_lower - s.eps_lower - 1e-8);
                assert!(upper <= lower + 1e-8);
                let sel = select_update(&p, &state, &s).unwrap();
                state.apply(&p, &s, &sel);
            }
        }
    }

    #[test]
    fn diagonal_example_with_trivial_subspace() {
        let x = DMatrix::identity(4, 4) * 0.5;
        let updates = (0..4)
            .map(|i| {
                let mut v = DVector::zeros(4);
                v[i] = 0.5_f64.sqrt();
                RankOneUpdate::new(v, 0.25)
            })
            .collect();
        let p = EngineProblem::new(x, updates, 0, 4).unwrap();
        assert_eq!(p.trace_bound(), 2);
        let r = run_engine(&p).unwrap();
        assert_abs_diff_eq!(r.theta_max, 4.0, epsilon = 1e-12);
        assert!(r.lambda_max <= 4.0);
        assert_eq!(r.lambda_star, Some(0.5));
        assert!(r.lambda_min >= r.certified_lambda_min);
        assert!(r.total_cost <= 1.0 + 1e-12);
        assert_eq!(r.monotonicity_violations(1e-9), 0);
    }

    #[test]
    fn run_engine_certificate_and_determinism() {
        for (seed, k) in [(1, 1), (2, 2), (3, 3)] {
            let budget = 8 * k + 1;
            let p = random_problem(seed, 12, 60, k, budget);
            let r = run_engine(&p).unwrap();
            assert_eq!(r.trace.len(), budget);
            assert!(r.support() <= budget);
            assert!(r.lambda_max <= r.theta_max);
            assert!(r.lambda_max <= 5.0);
            assert!(r.lambda_min_restricted >= r.theta_min - 1e-9);
            assert!(r.lambda_min >= r.explicit_floor);
            assert!(r.lambda_min >= r.certified_lambda_min - 1e-9);
            let cap = (budget as f64 / p.trace_bound() as f64).min(1.0);
            assert!(r.total_cost <= cap + 1e-12);
            assert_eq!(r.monotonicity_violations(1e-9), 0);
            for rec in &r.trace {
                assert!(rec.t * p.updates()[rec.index].cost <= 1.0 / r.schedule.scale as f64 + 1e-12);
            }
            let mut m = p.x().clone();
            for (u, w) in p.updates().iter().zip(&r.weights) {
                m += &u.vector * u.vector.transpose() * *w;
            }
            assert!(max_abs(&(m - &r.m)) < 1e-8);
            let again = run_engine(&p).unwrap();
            assert_eq!(r.weights, again.weights);
        }
    }

    #[test]
    fn singular_gap_on_subspace_is_covered() {
        // Y_1 misses e_2, which lies in the bottom-2 eigenspace of X.
        let x = diag(&[0.1, 0.2, 0.5]);
        let mut v = DVector::zeros(3);
        v[0] = 0.5;
        let mut w = DVector::zeros(3);
        w[2] = 0.5;
        let p = EngineProblem::new(
            x,
            vec![RankOneUpdate::new(v, 0.5), RankOneUpdate::new(w, 0.5)],
            2,
            17,
        )
        .unwrap();
        let r = run_engine(&p).unwrap();
        assert!(r.perturbation > 0.0);
        assert!(r.auxiliary_weight > 0.0);
        assert!(r.support() <= 17);
        assert!(r.lambda_max <= r.theta_max + 1e-9);
        assert!(r.lambda_min >= r.certified_lambda_min - 1e-9 - r.perturbation * r.auxiliary_weight);
    }

    #[test]
    fn problem_validation() {
        let x = DMatrix::identity(2, 2) * 0.5;
        let v = DVector::from_vec(vec![0.5, 0.0]);
        let ok = vec![RankOneUpdate::new(v.clone(), 1.0)];
        assert!(matches!(
            EngineProblem::new(x.clone(), ok.clone(), 1, 8),
            Err(Error::BudgetTooSmall { .. })
        ));
        let bad_cost = vec![RankOneUpdate::new(v.clone(), 0.5)];
        assert!(EngineProblem::new(x.clone(), bad_cost, 0, 3).is_err());
        let too_big = vec![RankOneUpdate::new(v * 2.0, 1.0)];
        assert!(EngineProblem::new(x.clone(), too_big, 0, 3).is_err());
        assert!(EngineProblem::new(x, ok, 0, 3).is_ok());
    }
}
