use std::fs;
use std::time::Instant;

use sha2::{Digest, Sha256};
use sparsify_core::algconn::{
    algebraic_connectivity, brute_force_opt, round_solution, solve_fractional, ConnectivityInstance, FractionalSolution,
};
use sparsify_core::linalg::spectral_range;
use sparsify_core::patch::{default_budget, sparsify_patch};
use sparsify_core::ultra::{build_ultrasparsifier, UltraConfig};
use sparsify_core::{laplacian, WeightedGraph};

use crate::error::{CliError, CliResult};
use crate::graph_file::{format_graph, parse_graph, GraphFormat};
use crate::report::{
    trace_rows, AlgconnReport, OracleReport, PatchReport, Results, RunReport, SolverReport,
    TailRow, Timings, TraceRow, UltraReport, VerifyReport, WeightedEdge,
};

/// Relative tolerance when recomputed values are compared with a report.
pub const RECHECK_TOL: f64 = 1e-7;
/// Absolute slack for certified inequalities.
pub const BOUND_TOL: f64 = 1e-9;

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new() -> Self {
        Self {
            hasher: Sha256::new(),
        }
    }

    fn graph(&mut self, path: &str) -> CliResult<WeightedGraph> {
        let text = read(path)?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        parse_graph(&text).map_err(|source| CliError::Input {
            path: path.to_string(),
            source,
        })
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn read(path: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

pub fn read_graph(path: &str) -> CliResult<WeightedGraph> {
    parse_graph(&read(path)?).map_err(|source| CliError::Input {
        path: path.to_string(),
        source,
    })
}

pub fn write_graph(path: &str, g: &WeightedGraph) -> CliResult<()> {
    fs::write(path, format_graph(g, GraphFormat::from_path(path))).map_err(|source| {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RECHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Check(what()))
    }
}

fn subgraph_of(sub: &WeightedGraph, sup: &WeightedGraph) -> bool {
    sub.n() == sup.n() && sub.edges().iter().all(|e| sup.contains_edge(e.u, e.v))
}

/// Serializes, parses back and re-checks `report` against its files.
fn finish(report: RunReport) -> CliResult<RunReport> {
    let text = serde_json::to_string(&report).map_err(|e| CliError::Check(e.to_string()))?;
    let reparsed: RunReport =
        serde_json::from_str(&text).map_err(|e| CliError::Check(e.to_string()))?;
    check_report(&reparsed)?;
    Ok(reparsed)
}

/// Recomputes every certified claim of a report from the files it names.
pub fn check_report(report: &RunReport) -> CliResult<()> {
    match &report.results {
        Results::SparsifyPatch(r) => check_patch(r),
        Results::Ultra(r) => check_ultra(r),
        Results::Algconn(r) => check_algconn(r),
        Results::Verify(r) => check_verify(r),
    }
}

pub fn cmd_sparsify_patch(
    g_path: &str,
    w_path: &str,
    k: usize,
    n_budget: Option<usize>,
    out_path: &str,
) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::new();
    let g = inputs.graph(g_path)?;
    let w = inputs.graph(w_path)?;
    let budget = n_budget.unwrap_or_else(|| default_budget(k));
    let s = sparsify_patch(&g, &w, k, Some(budget))?;
    write_graph(out_path, &s.sparsifier)?;
    let engine = s.engine.as_ref();
    let results = PatchReport {
        g_path: g_path.into(),
        w_path: w_path.into(),
        out_path: out_path.into(),
        k,
        n_budget: budget,
        n: g.n(),
        g_edges: g.edge_count(),
        w_edges: w.edge_count(),
        lambda_star: s.params.lambda_star,
        patch_trace: s.params.trace,
        trace_bound: engine.map_or(0, |e| e.trace_bound),
        schedule: engine.map_or("none", |e| e.schedule.variant.name()).into(),
        theta_min: engine.map_or(1.0, |e| e.theta_min),
        theta_max: engine.map_or(1.0, |e| e.theta_max),
        output_edges: s.sparsifier.edge_count(),
        output_weight: s.total_weight,
        patch_weight: s.patch_weight,
        certified_lower: s.certified_lower,
        certified_upper: s.certified_upper,
        explicit_lower: s.explicit_lower,
        measured_lower: s.measured.0,
        measured_upper: s.measured.1,
        perturbation: engine.map_or(0.0, |e| e.perturbation),
        auxiliary_weight: engine.map_or(0.0, |e| e.auxiliary_weight),
    };
    let trace = engine.map_or_else(Vec::new, |e| trace_rows(e, w.edges()));
    finish(RunReport {
        command: "sparsify-patch".into(),
        input_digest: inputs.digest(),
        results: Results::SparsifyPatch(results),
        trace,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn check_patch(r: &PatchReport) -> CliResult<()> {
    let g = read_graph(&r.g_path)?;
    let w = read_graph(&r.w_path)?;
    let wk = read_graph(&r.out_path)?;
    ensure(wk.edge_count() == r.output_edges && wk.edge_count() <= r.n_budget, || {
        format!("output has {} edges, budget {}", wk.edge_count(), r.n_budget)
    })?;
    ensure(subgraph_of(&wk, &w), || "output edges are not a subset of W".into())?;
    ensure(close(wk.total_weight(), r.output_weight), || {
        "output weight differs from the report".into()
    })?;
    let (lo, hi) = spectral_range(&laplacian(&g.union(&wk)?), &laplacian(&g.union(&w)?))?;
    ensure(close(lo, r.measured_lower) && close(hi, r.measured_upper), || {
        format!(
            "recomputed range ({lo}, {hi}) differs from reported ({}, {})",
            r.measured_lower, r.measured_upper
        )
    })?;
    ensure(lo >= r.certified_lower - BOUND_TOL, || {
        format!("lower {lo} below certified {}", r.certified_lower)
    })?;
    ensure(lo >= r.explicit_lower - BOUND_TOL, || {
        format!("lower {lo} below explicit floor {}", r.explicit_lower)
    })?;
    ensure(hi <= r.certified_upper + BOUND_TOL, || {
        format!("upper {hi} above certified {}", r.certified_upper)
    })
}

pub fn cmd_ultra(
    g_path: &str,
    k: usize,
    out_path: &str,
    c1: f64,
    c3: f64,
    seed: u64,
) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::new();
    let g = inputs.graph(g_path)?;
    let u = build_ultrasparsifier(&g, k, UltraConfig { c1, c3, seed })?;
    write_graph(out_path, &u.ultrasparsifier)?;
    let check = &u.stretch.check;
    let results = UltraReport {
        g_path: g_path.into(),
        out_path: out_path.into(),
        k,
        c1,
        c3,
        seed,
        n: g.n(),
        g_edges: g.edge_count(),
        tree_stretch: u.stretch.stretch.total,
        tree_trace: check.trace,
        trace_residual: check.residual,
        tails: check
            .tails
            .iter()
            .map(|t| TailRow {
                threshold: t.threshold,
                count: t.count,
                bound: t.bound,
            })
            .collect(),
        kappa_target: u.kappa_target,
        patch_lambda_star: u.patch_params.map(|p| p.lambda_star),
        patch_trace: u.patch_params.map(|p| p.trace),
        output_edges: u.edge_count(),
        edge_budget: u.edge_budget(),
        measured_lower: u.measured.0,
        measured_upper: u.measured.1,
        measured_kappa: u.measured_kappa,
        certified_lower: u.certified_lower,
        certified_upper: u.certified_upper,
    };
    let trace = u
        .patch
        .as_ref()
        .and_then(|p| p.engine.as_ref())
        .map_or_else(Vec::new, |e| trace_rows(e, g.edges()));
    finish(RunReport {
        command: "ultra".into(),
        input_digest: inputs.digest(),
        results: Results::Ultra(results),
        trace,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn check_ultra(r: &UltraReport) -> CliResult<()> {
    let g = read_graph(&r.g_path)?;
    let u = read_graph(&r.out_path)?;
    ensure(u.edge_count() == r.output_edges && u.edge_count() <= r.edge_budget, || {
        format!("output has {} edges, budget {}", u.edge_count(), r.edge_budget)
    })?;
    ensure(subgraph_of(&u, &g), || "output edges are not a subset of G".into())?;
    ensure(r.trace_residual <= RECHECK_TOL * r.tree_stretch, || {
        format!("trace identity residual {} too large", r.trace_residual)
    })?;
    ensure(r.tails.iter().all(|t| t.count as f64 <= t.bound), || {
        "eigenvalue tail bound violated".into()
    })?;
    let (lo, hi) = spectral_range(&laplacian(&g), &laplacian(&u))?;
    ensure(close(lo, r.measured_lower) && close(hi, r.measured_upper), || {
        format!(
            "recomputed range ({lo}, {hi}) differs from reported ({}, {})",
            r.measured_lower, r.measured_upper
        )
    })?;
    ensure(lo >= r.certified_lower - BOUND_TOL, || {
        format!("lower {lo} below certified {}", r.certified_lower)
    })?;
    ensure(hi <= r.certified_upper * (1.0 + BOUND_TOL), || {
        format!("upper {hi} above certified {}", r.certified_upper)
    })
}

pub fn cmd_algconn(
    base_path: &str,
    cand_path: &str,
    k: usize,
    out_path: &str,
    tol: f64,
    oracle: bool,
) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::new();
    let base = inputs.graph(base_path)?;
    let cand = inputs.graph(cand_path)?;
    if cand.n() != base.n() {
        return Err(CliError::Precondition(format!(
            "candidate file has {} vertices, base graph has {}",
            cand.n(),
            base.n()
        )));
    }
    let pairs: Vec<(usize, usize)> = cand.edges().iter().map(|e| (e.u, e.v)).collect();
    let inst = ConnectivityInstance::new(base.clone(), &pairs, k)?;
    let m = pairs.len();
    let base_lambda2 = inst.lambda2(&vec![0.0; m])?;
    let (frac, solver) = if k == 0 || m == 0 {
        let frac = FractionalSolution {
            weights: vec![0.0; m],
            lambda_sdp: base_lambda2,
            iterations: 0,
            gradient_norm: 0.0,
            converged: true,
        };
        (frac, None)
    } else {
        let frac = solve_fractional(&inst, tol)?;
        let solver = SolverReport {
            iterations: frac.iterations,
            gradient_norm: frac.gradient_norm,
            converged: frac.converged,
        };
        (frac, Some(solver))
    };
    let rounded = round_solution(&inst, &frac)?;
    let selected: Vec<WeightedEdge> = rounded
        .selected
        .iter()
        .map(|e| WeightedEdge {
            u: e.u,
            v: e.v,
            w: e.weight,
        })
        .collect();
    let out = WeightedGraph::from_edges(base.n(), selected.iter().map(|e| (e.u, e.v, e.w)))?;
    write_graph(out_path, &out)?;

    let lambda_k2 = rounded.lambda_k2.is_finite().then_some(rounded.lambda_k2);
    let oracle = if oracle {
        let (value, set) = brute_force_opt(&inst)?;
        Some(OracleReport {
            value,
            edges: set.iter().map(|&i| pairs[i]).collect(),
            below_sdp: value <= frac.lambda_sdp + tol,
            below_lambda_k2: lambda_k2.map_or(true, |b| value <= b + BOUND_TOL),
        })
    } else {
        None
    };
    let engine = rounded.engine.as_ref();
    let active: Vec<sparsify_core::Edge> = (0..m)
        .filter(|&i| frac.weights[i] > 0.0)
        .map(|i| sparsify_core::Edge {
            u: pairs[i].0,
            v: pairs[i].1,
            w: frac.weights[i],
        })
        .collect();
    let trace: Vec<TraceRow> = engine.map_or_else(Vec::new, |e| trace_rows(e, &active));
    let results = AlgconnReport {
        base_path: base_path.into(),
        cand_path: cand_path.into(),
        out_path: out_path.into(),
        k,
        tol,
        n: base.n(),
        candidates: m,
        delta: inst.delta(),
        base_lambda2,
        lambda_sdp: frac.lambda_sdp,
        fractional: pairs
            .iter()
            .zip(&frac.weights)
            .map(|(&(u, v), &w)| WeightedEdge { u, v, w })
            .collect(),
        solver,
        lambda_k2,
        support_budget: engine.map_or(0, |e| e.budget),
        selected,
        weighted_lambda2: rounded.weighted_lambda2,
        unweighted_lambda2: rounded.unweighted_lambda2,
        certified_floor: rounded.certified_floor,
        engine_floor: rounded.engine_floor,
        weight_ceiling: rounded.weight_ceiling,
        oracle,
    };
    finish(RunReport {
        command: "algconn".into(),
        input_digest: inputs.digest(),
        results: Results::Algconn(results),
        trace,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn check_algconn(r: &AlgconnReport) -> CliResult<()> {
    let base = read_graph(&r.base_path)?;
    let cand = read_graph(&r.cand_path)?;
    let out = read_graph(&r.out_path)?;
    ensure(out.edge_count() == r.selected.len(), || {
        "output file does not match the selection".into()
    })?;
    ensure(subgraph_of(&out, &cand), || "selected edges are not candidates".into())?;
    if !r.selected.is_empty() {
        ensure(out.edge_count() <= r.support_budget, || {
            format!("{} edges exceed the support budget {}", out.edge_count(), r.support_budget)
        })?;
    }
    ensure(out.edges().iter().all(|e| e.w <= r.weight_ceiling * (1.0 + BOUND_TOL)), || {
        "rounded weight above the ceiling".into()
    })?;
    let weighted = base.union(&out)?;
    let achieved = algebraic_connectivity(&weighted)?;
    ensure(close(achieved, r.weighted_lambda2), || {
        format!("recomputed λ₂ {achieved} differs from reported {}", r.weighted_lambda2)
    })?;
    ensure(achieved >= r.certified_floor - BOUND_TOL, || {
        format!("λ₂ {achieved} below the certified floor {}", r.certified_floor)
    })?;
    ensure(achieved >= r.engine_floor - BOUND_TOL, || {
        format!("λ₂ {achieved} below the engine floor {}", r.engine_floor)
    })?;
    let unit = base.union(&WeightedGraph::from_edges(
        base.n(),
        out.edges().iter().map(|e| (e.u, e.v, 1.0)),
    )?)?;
    let unweighted = algebraic_connectivity(&unit)?;
    ensure(close(unweighted, r.unweighted_lambda2), || {
        format!("recomputed unweighted λ₂ {unweighted} differs from reported {}", r.unweighted_lambda2)
    })?;
    if let Some(o) = &r.oracle {
        ensure(o.below_sdp == (o.value <= r.lambda_sdp + r.tol), || {
            "oracle flag below_sdp inconsistent".into()
        })?;
        let below = r.lambda_k2.map_or(true, |b| o.value <= b + BOUND_TOL);
        ensure(o.below_lambda_k2 == below, || "oracle flag below_lambda_k2 inconsistent".into())?;
    }
    Ok(())
}

pub fn cmd_verify(g_path: &str, h_path: &str) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut inputs = Inputs::new();
    let g = inputs.graph(g_path)?;
    let h = inputs.graph(h_path)?;
    let results = verify_pair(g_path, h_path, &g, &h)?;
    finish(RunReport {
        command: "verify".into(),
        input_digest: inputs.digest(),
        results: Results::Verify(results),
        trace: Vec::new(),
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn verify_pair(g_path: &str, h_path: &str, g: &WeightedGraph, h: &WeightedGraph) -> CliResult<VerifyReport> {
    if g.n() != h.n() {
        return Err(CliError::Precondition(format!(
            "vertex counts differ: {} vs {}",
            g.n(),
            h.n()
        )));
    }
    if g.components() != h.components() {
        return Err(CliError::Precondition(
            "graphs have different connected components".into(),
        ));
    }
    let (lg, lh) = (laplacian(g), laplacian(h));
    let (lower, upper) = spectral_range(&lh, &lg)?;
    let (inverse_lower, inverse_upper) = spectral_range(&lg, &lh)?;
    Ok(VerifyReport {
        g_path: g_path.into(),
        h_path: h_path.into(),
        n: g.n(),
        g_edges: g.edge_count(),
        h_edges: h.edge_count(),
        lower,
        upper,
        inverse_lower,
        inverse_upper,
        kappa: upper / lower,
    })
}

fn check_verify(r: &VerifyReport) -> CliResult<()> {
    let g = read_graph(&r.g_path)?;
    let h = read_graph(&r.h_path)?;
    let again = verify_pair(&r.g_path, &r.h_path, &g, &h)?;
    ensure(
        close(again.lower, r.lower)
            && close(again.upper, r.upper)
            && close(again.inverse_lower, r.inverse_lower)
            && close(again.inverse_upper, r.inverse_upper),
        || "recomputed range differs from the report".into(),
    )
}

/// Writes the potential trace as CSV.
pub fn write_trace_csv(path: &str, rows: &[TraceRow]) -> CliResult<()> {
    let io = |source: std::io::Error| CliError::Io {
        path: path.to_string(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
    for row in rows {
        writer.serialize(row).map_err(|e| io(e.into()))?;
    }
    writer.flush().map_err(io)
}
