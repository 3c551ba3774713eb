//! Adding at most `k` candidate edges to maximize `λ₂`.
//!
//! The relaxation `max λ₂(L_G + Σ w_e L_e)` over `{0 ≤ w ≤ 1, Σ w ≤ k}` is
//! concave and solved by projected supergradient ascent. Its solution is
//! rounded to few edges by the barrier engine with `X = L_G/(4Δ)` and
//! `Y_e = w_e L_e/(4Δ)` on the complement of the all-ones vector.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::engine::{run_engine, EngineProblem, EngineResult, RankOneUpdate};
use crate::error::{Error, Result};
use crate::graph::{add_edge_laplacian, laplacian, WeightedGraph};
use crate::linalg::{eigh, eigvalsh, restrict, Subspace};

/// Base graph, unit-weight candidate edges and the budget `k`.
#[derive(Debug, Clone)]
pub struct ConnectivityInstance {
    base: WeightedGraph,
    candidates: Vec<(usize, usize)>,
    k: usize,
    delta: f64,
    complement: Subspace,
}

impl ConnectivityInstance {
    /// Candidates are normalized to `u < v`; duplicates, self-loops and
    /// overlaps with the base graph are rejected.
    pub fn new(base: WeightedGraph, candidates: &[(usize, usize)], k: usize) -> Result<Self> {
        let n = base.n();
        if n < 2 {
            return Err(Error::InvalidProblem("need at least two vertices".into()));
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(candidates.len());
        for &(a, b) in candidates {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidGraph(format!(
                    "candidate ({a}, {b}) is not an edge on 0..{n}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::InvalidProblem(format!(
                    "candidate ({}, {}) listed twice",
                    e.0, e.1
                )));
            }
            if base.contains_edge(e.0, e.1) {
                return Err(Error::InvalidProblem(format!(
                    "candidate ({}, {}) is already a base edge",
                    e.0, e.1
                )));
            }
            normalized.push(e);
        }
        let mut cand_degree = vec![0.0; n];
        for &(a, b) in &normalized {
            cand_degree[a] += 1.0;
            cand_degree[b] += 1.0;
        }
        let delta = base
            .weighted_degrees()
            .into_iter()
            .chain(cand_degree)
            .fold(1.0, f64::max);
        Ok(Self {
            base,
            candidates: normalized,
            k,
            delta,
            complement: Subspace::ones_complement(n),
        })
    }

    pub fn base(&self) -> &WeightedGraph {
        &self.base
    }

    pub fn candidates(&self) -> &[(usize, usize)] {
        &self.candidates
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `max(1, max weighted base degree, max candidate degree)`, so that
    /// `L_G + Σ w_e L_e ⪯ 4Δ·I` for every feasible `w`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// `L_G + Σ w_e L_e`.
    pub fn weighted_laplacian(&self, weights: &[f64]) -> DMatrix<f64> {
        let mut l = laplacian(&self.base);
        for (&(a, b), &w) in self.candidates.iter().zip(weights) {
            if w != 0.0 {
                add_edge_laplacian(&mut l, a, b, w);
            }
        }
        l
    }

    /// `λ₂(L_G + Σ w_e L_e)`.
    pub fn lambda2(&self, weights: &[f64]) -> Result<f64> {
        lambda2_of(&self.weighted_laplacian(weights), &self.complement)
    }

    /// `λ₂` of the base graph plus a unit-weight edge subset.
    pub fn lambda2_of_subset(&self, subset: &[usize]) -> Result<f64> {
        let mut weights = vec![0.0; self.candidates.len()];
        for &i in subset {
            weights[i] = 1.0;
        }
        self.lambda2(&weights)
    }

    fn supergradient(&self, weights: &[f64]) -> Result<(f64, DVector<f64>)> {
        let l = self.weighted_laplacian(weights);
        let dec = eigh(&restrict(&l, &self.complement))?;
        let lambda = dec.values[0];
        let cluster: Vec<usize> = (0..dec.dim())
            .take_while(|&i| dec.values[i] - lambda <= DEGENERACY_GAP)
            .collect();
        let mut grad = DVector::zeros(self.candidates.len());
        for &c in &cluster {
            let x = self.complement.basis() * dec.vectors.column(c);
            for (g, &(a, b)) in grad.iter_mut().zip(&self.candidates) {
                let d = x[a] - x[b];
                *g += d * d;
            }
        }
        Ok((lambda, grad / cluster.len() as f64))
    }
}

/// `λ₂(L_G)`.
pub fn algebraic_connectivity(g: &WeightedGraph) -> Result<f64> {
    if g.n() < 2 {
        return Err(Error::InvalidProblem("need at least two vertices".into()));
    }
    lambda2_of(&laplacian(g), &Subspace::ones_complement(g.n()))
}

fn lambda2_of(l: &DMatrix<f64>, complement: &Subspace) -> Result<f64> {
    Ok(eigvalsh(&restrict(l, complement))?[0])
}

/// Eigenvalues within this distance of `λ₂` share the supergradient.
pub const DEGENERACY_GAP: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 5000;
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub weights: Vec<f64>,
    pub lambda_sdp: f64,
    pub iterations: usize,
    /// Norm of the supergradient at the returned point.
    pub gradient_norm: f64,
    /// False when the iteration cap was hit before the stall criterion.
    pub converged: bool,
}

/// Euclidean projection onto `{0 ≤ w ≤ 1, Σ w ≤ k}`.
pub fn project_capped_simplex(w: &[f64], k: f64) -> Vec<f64> {
    let clipped: Vec<f64> = w.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    if clipped.iter().sum::<f64>() <= k {
        return clipped;
    }
    let shifted_sum = |tau: f64| w.iter().map(|x| (x - tau).clamp(0.0, 1.0)).sum::<f64>();
    let mut lo = 0.0;
    let mut hi = w.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shifted_sum(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    w.iter().map(|x| (x - hi).clamp(0.0, 1.0)).collect()
}

/// Maximizes `λ₂(L_G + Σ w_e L_e)` by projected supergradient ascent with
/// step `a/√t` along normalized supergradients, keeping the best iterate.
/// Stops after `MAX_ITERATIONS` or when the best value has not improved by
/// more than `tol/100` over the last 500 iterations.
pub fn solve_fractional(inst: &ConnectivityInstance, tol: f64) -> Result<FractionalSolution> {
    let m = inst.candidates.len();
    if m == 0 {
        return Err(Error::InvalidProblem("no candidate edges".into()));
    }
    let k = inst.k as f64;
    if inst.k == 0 {
        let lambda = inst.lambda2(&vec![0.0; m])?;
        return Ok(FractionalSolution {
            weights: vec![0.0; m],
            lambda_sdp: lambda,
            iterations: 0,
            gradient_norm: 0.0,
            converged: true,
        });
    }
    let budget = k.min(m as f64);
    let mut w = vec![budget / m as f64; m];
    let step_scale = budget.sqrt();
    let (mut value, mut grad) = inst.supergradient(&w)?;
    let mut best = (value, w.clone(), grad.norm());
    let mut last_gain = 0;
    let mut iterations = 0;
    let mut converged = false;
    for t in 1..=MAX_ITERATIONS {
        iterations = t;
        let norm = grad.norm();
        if norm <= 1e-14 {
            converged = true;
            break;
        }
        let step = step_scale / (t as f64).sqrt() / norm;
        let moved: Vec<f64> = w.iter().zip(grad.iter()).map(|(x, g)| x + step * g).collect();
        w = project_capped_simplex(&moved, k);
        (value, grad) = inst.supergradient(&w)?;
        if value > best.0 + tol * 1e-2 {
            last_gain = t;
        }
        if value > best.0 {
            best = (value, w.clone(), grad.norm());
        }
        if t - last_gain >= 500 {
            converged = true;
            break;
        }
    }
    Ok(FractionalSolution {
        lambda_sdp: best.0,
        weights: best.1,
        gradient_norm: best.2,
        iterations,
        converged,
    })
}

/// `λ_{k+2}(L_G)`, or `+∞` when `k + 2 > n`.
pub fn lambda_k2_bound(g: &WeightedGraph, k: usize) -> Result<f64> {
    if k + 2 > g.n() {
        return Ok(f64::INFINITY);
    }
    Ok(eigvalsh(&laplacian(g))?[k + 1])
}

/// Limit on the number of subsets `brute_force_opt` evaluates.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, r: usize) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exact optimum over all subsets of at most `k` candidates; ties keep the
/// first subset in order of size, then lexicographic order.
pub fn brute_force_opt(inst: &ConnectivityInstance) -> Result<(f64, Vec<usize>)> {
    let m = inst.candidates.len();
    let top = inst.k.min(m);
    let subsets: u128 = (0..=top).map(|r| binomial(m, r)).sum();
    if subsets > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            subsets,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = (inst.lambda2_of_subset(&[])?, Vec::new());
    for r in 1..=top {
        let mut idx: Vec<usize> = (0..r).collect();
        loop {
            let value = inst.lambda2_of_subset(&idx)?;
            if value > best.0 {
                best = (value, idx.clone());
            }
            let Some(pos) = (0..r).rev().find(|&i| idx[i] < m - r + i) else {
                break;
            };
            idx[pos] += 1;
            for j in pos + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedEdge {
    pub u: usize,
    pub v: usize,
    /// Rounded weight `ρ_e·w_e`.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct RoundedSolution {
    pub selected: Vec<SelectedEdge>,
    /// `λ₂(L_G + Σ w̃_e L_e)`.
    pub weighted_lambda2: f64,
    /// `λ₂` of `G` plus the selected edges at unit weight.
    pub unweighted_lambda2: f64,
    pub lambda_sdp: f64,
    /// `λ_{k+2}(L_G)`, `+∞` when `k + 2 > n`.
    pub lambda_k2: f64,
    pub delta: f64,
    /// `λ_{k+2}·λ_SDP/(c·(4Δ)²)` (or `λ_SDP/c` when `k + 2 > n`) with
    /// `c = 72` for the standard schedule and `90` for the balanced one.
    pub certified_floor: f64,
    /// `4Δ` times the engine's certified `λ_min`; never below the floor.
    pub engine_floor: f64,
    /// `θ_max·4Δ`.
    pub weight_ceiling: f64,
    pub engine: Option<EngineResult>,
}

/// Rounds a fractional solution to at most `N = 8k' + 1` weighted edges,
/// where `k' = k` if `k + 2 ≤ n` and `k' = n − 1` otherwise.
pub fn round_solution(
    inst: &ConnectivityInstance,
    frac: &FractionalSolution,
) -> Result<RoundedSolution> {
    let n = inst.n();
    let d = n - 1;
    let four_delta = 4.0 * inst.delta;
    let lambda_k2 = lambda_k2_bound(&inst.base, inst.k)?;
    let active: Vec<usize> = (0..inst.candidates.len())
        .filter(|&i| frac.weights[i] > 0.0)
        .collect();
    let base_lambda2 = inst.lambda2(&vec![0.0; inst.candidates.len()])?;
    if inst.k == 0 || active.is_empty() {
        return Ok(RoundedSolution {
            selected: Vec::new(),
            weighted_lambda2: base_lambda2,
            unweighted_lambda2: base_lambda2,
            lambda_sdp: frac.lambda_sdp,
            lambda_k2,
            delta: inst.delta,
            certified_floor: 0.0,
            engine_floor: 0.0,
            weight_ceiling: 0.0,
            engine: None,
        });
    }
    let engine_k = if inst.k + 2 > n { d } else { inst.k };
    let budget = 8 * engine_k + 1;
    let basis = inst.complement.basis();
    let x = restrict(&laplacian(&inst.base), &inst.complement) / four_delta;
    let total: f64 = active.iter().map(|&i| frac.weights[i]).sum();
    let updates = active
        .iter()
        .map(|&i| {
            let (a, b) = inst.candidates[i];
            let v = (basis.row(a) - basis.row(b)).transpose() * (frac.weights[i] / four_delta).sqrt();
            RankOneUpdate::new(v, frac.weights[i] / total)
        })
        .collect();
    let problem = EngineProblem::new(x, updates, engine_k, budget)?;
    let result = run_engine(&problem)?;

    let selected: Vec<SelectedEdge> = active
        .iter()
        .zip(&result.weights)
        .filter(|(_, &rho)| rho > 0.0)
        .map(|(&i, &rho)| SelectedEdge {
            u: inst.candidates[i].0,
            v: inst.candidates[i].1,
            weight: rho * frac.weights[i],
        })
        .collect();
    let mut weights = vec![0.0; inst.candidates.len()];
    let mut unit = vec![0.0; inst.candidates.len()];
    for (&i, &rho) in active.iter().zip(&result.weights) {
        if rho > 0.0 {
            weights[i] = rho * frac.weights[i];
            unit[i] = 1.0;
        }
    }
    let c = result.schedule.variant.floor_denominator();
    let certified_floor = if lambda_k2.is_finite() {
        lambda_k2 * frac.lambda_sdp / (c * four_delta * four_delta)
    } else {
        frac.lambda_sdp / c
    };
    Ok(RoundedSolution {
        selected,
        weighted_lambda2: inst.lambda2(&weights)?,
        unweighted_lambda2: inst.lambda2(&unit)?,
        lambda_sdp: frac.lambda_sdp,
        lambda_k2,
        delta: inst.delta,
        certified_floor,
        engine_floor: four_delta * result.certified_lambda_min,
        weight_ceiling: result.theta_max * four_delta,
        engine: Some(result),
    })
}
