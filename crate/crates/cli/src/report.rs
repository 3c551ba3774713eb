//! Run reports written by every command.

use serde::{Deserialize, Serialize};
use sparsify_core::engine::EngineResult;
use sparsify_core::Edge;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 over the input files, each prefixed by its byte length.
    pub input_digest: String,
    pub results: Results,
    /// Engine steps with the barrier potentials around each of them.
    pub trace: Vec<TraceRow>,
    pub timings: Timings,
}

impl RunReport {
    /// The report with timings zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings: Timings::default(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    SparsifyPatch(PatchReport),
    Ultra(UltraReport),
    Algconn(AlgconnReport),
    Verify(VerifyReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub g_path: String,
    pub w_path: String,
    pub out_path: String,
    pub k: usize,
    pub n_budget: usize,
    pub n: usize,
    pub g_edges: usize,
    pub w_edges: usize,
    pub lambda_star: f64,
    pub patch_trace: f64,
    pub trace_bound: usize,
    pub schedule: String,
    pub theta_min: f64,
    pub theta_max: f64,
    pub output_edges: usize,
    pub output_weight: f64,
    pub patch_weight: f64,
    pub certified_lower: f64,
    pub certified_upper: f64,
    pub explicit_lower: f64,
    pub measured_lower: f64,
    pub measured_upper: f64,
    pub perturbation: f64,
    pub auxiliary_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub threshold: f64,
    pub count: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltraReport {
    pub g_path: String,
    pub out_path: String,
    pub k: usize,
    pub c1: f64,
    pub c3: f64,
    pub seed: u64,
    pub n: usize,
    pub g_edges: usize,
    pub tree_stretch: f64,
    pub tree_trace: f64,
    pub trace_residual: f64,
    pub tails: Vec<TailRow>,
    pub kappa_target: f64,
    /// Absent when the input is a tree.
    pub patch_lambda_star: Option<f64>,
    pub patch_trace: Option<f64>,
    pub output_edges: usize,
    pub edge_budget: usize,
    /// Extreme generalized eigenvalues of `(L_G, L_U)`.
    pub measured_lower: f64,
    pub measured_upper: f64,
    pub measured_kappa: f64,
    pub certified_lower: f64,
    pub certified_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub edges: Vec<(usize, usize)>,
    /// `value ≤ λ_SDP + tol`.
    pub below_sdp: bool,
    /// `value ≤ λ_{k+2}(L_G) + 1e-9`.
    pub below_lambda_k2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgconnReport {
    pub base_path: String,
    pub cand_path: String,
    pub out_path: String,
    pub k: usize,
    pub tol: f64,
    pub n: usize,
    pub candidates: usize,
    pub delta: f64,
    pub base_lambda2: f64,
    pub lambda_sdp: f64,
    pub fractional: Vec<WeightedEdge>,
    pub solver: Option<SolverReport>,
    /// `λ_{k+2}(L_G)`; absent when `k + 2 > n`.
    pub lambda_k2: Option<f64>,
    pub support_budget: usize,
    pub selected: Vec<WeightedEdge>,
    pub weighted_lambda2: f64,
    pub unweighted_lambda2: f64,
    pub certified_floor: f64,
    pub engine_floor: f64,
    pub weight_ceiling: f64,
    pub oracle: Option<OracleReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub g_path: String,
    pub h_path: String,
    pub n: usize,
    pub g_edges: usize,
    pub h_edges: usize,
    /// Tightest `(c, κ)` with `c·L_G ⪯ L_H ⪯ κ·L_G`.
    pub lower: f64,
    pub upper: f64,
    /// Extreme generalized eigenvalues of `(L_G, L_H)`.
    pub inverse_lower: f64,
    pub inverse_upper: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub index: usize,
    /// Edge behind the update; absent for auxiliary updates.
    pub edge_u: Option<usize>,
    pub edge_v: Option<usize>,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    pub upper_potential_before: f64,
    pub upper_potential_after: f64,
    pub lower_potential_before: f64,
    pub lower_potential_after: f64,
}

/// Trace rows of an engine run whose update `i` came from `edges[i]`.
pub fn trace_rows(result: &EngineResult, edges: &[Edge]) -> Vec<TraceRow> {
    result
        .trace
        .iter()
        .map(|r| {
            let edge = edges.get(r.index);
            TraceRow {
                step: r.step,
                index: r.index,
                edge_u: edge.map(|e| e.u),
                edge_v: edge.map(|e| e.v),
                t: r.t,
                lower: r.lower,
                upper: r.upper,
                slack: r.slack,
                upper_potential_before: r.upper_potential_before,
                upper_potential_after: r.upper_potential_after,
                lower_potential_before: r.lower_potential_before,
                lower_potential_after: r.lower_potential_after,
            }
        })
        .collect()
}
