use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use sparsify_cli::graph_file::{format_graph, parse_graph, GraphFormat};
use sparsify_cli::report::Results;
use sparsify_cli::{cmd_algconn, cmd_sparsify_patch, cmd_ultra, cmd_verify, read_graph, RunReport};
use sparsify_core::fixtures::{cycle, random_connected, rng};
use sparsify_core::WeightedGraph;

fn write_text(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn write_g(dir: &Path, name: &str, g: &WeightedGraph) -> String {
    let mut text = format!("n {}\n", g.n());
    for e in g.edges() {
        text.push_str(&format!("{} {} {:?}\n", e.u, e.v, e.w));
    }
    write_text(dir, name, &text)
}

fn out(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn sparsify(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsify"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn ultra(r: &RunReport) -> &sparsify_cli::report::UltraReport {
    match &r.results {
        Results::Ultra(u) => u,
        other => panic!("unexpected results {other:?}"),
    }
}

#[test]
fn malformed_line_exits_2_and_names_line() {
    let dir = tempfile::tempdir().unwrap();
    write_text(dir.path(), "g.txt", "n 3\n0 1\n1 x\n");
    let o = sparsify(dir.path(), &["ultra", "g.txt", "--k", "1", "-o", "u.txt"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = sparsify(dir.path(), &["verify", "nope.txt", "nope.txt"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn disconnected_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write_text(dir.path(), "g.txt", "n 4\n0 1\n2 3\n");
    let o = sparsify(dir.path(), &["ultra", "g.txt", "--k", "1", "-o", "u.txt"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn budget_not_above_8k_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_connected(&mut rng(1), 12, 10, (1.0, 1.0));
    write_g(dir.path(), "g.txt", &g);
    write_text(dir.path(), "w.txt", "n 12\n0 5 1\n1 7 1\n");
    let o = sparsify(
        dir.path(),
        &["sparsify-patch", "g.txt", "w.txt", "--k", "1", "--n-budget", "8", "-o", "h.txt"],
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("N > 8k"));
}

#[test]
fn overlapping_candidate_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write_text(dir.path(), "b.txt", "n 3\n0 1\n1 2\n");
    write_text(dir.path(), "c.txt", "n 3\n0 1\n");
    let o = sparsify(dir.path(), &["algconn", "b.txt", "c.txt", "--k", "1", "-o", "s.txt"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn report_and_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    write_g(dir.path(), "g.txt", &cycle(12));
    let o = sparsify(
        dir.path(),
        &[
            "--report", "r.json", "--trace-csv", "t.csv", "ultra", "g.txt", "--k", "1", "-o",
            "u.txt",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let report: RunReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report.command, "ultra");
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), report.trace.len() + 1);
    assert!(csv.starts_with("step,index,"));
}

#[test]
fn tree_input_is_returned_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("n 6\n");
    for (u, v, w) in [(0, 1, 2.0), (1, 2, 0.5), (1, 3, 1.0), (3, 4, 3.0), (3, 5, 1.5)] {
        text.push_str(&format!("{u} {v} {w}\n"));
    }
    let g_path = write_text(dir.path(), "t.txt", &text);
    let u_path = out(dir.path(), "u.txt");
    let r = cmd_ultra(&g_path, 2, &u_path, 4.0, 1.0, 0).unwrap();
    let u = ultra(&r);
    assert!((u.measured_kappa - 1.0).abs() < 1e-12);
    assert!(u.patch_lambda_star.is_none());
    assert_eq!(read_graph(&u_path).unwrap(), read_graph(&g_path).unwrap());
}

#[test]
fn cycle_stretch_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g_path = write_g(dir.path(), "g.txt", &cycle(10));
    let u_path = out(dir.path(), "u.txt");
    let r = cmd_ultra(&g_path, 1, &u_path, 4.0, 1.0, 0).unwrap();
    let u = ultra(&r);
    assert_eq!(u.tree_stretch, 18.0);
    assert!(u.trace_residual <= 1e-7 * 18.0);
    assert!(u.output_edges <= u.edge_budget);
    let v = cmd_verify(&g_path, &u_path).unwrap();
    let Results::Verify(v) = v.results else { panic!() };
    assert!((v.inverse_lower - u.measured_lower).abs() <= 1e-7 * u.measured_lower);
    assert!((v.inverse_upper - u.measured_upper).abs() <= 1e-7 * u.measured_upper);
}

#[test]
fn verify_against_self_and_double() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_connected(&mut rng(5), 15, 20, (0.5, 2.0));
    let g_path = write_g(dir.path(), "g.txt", &g);
    let h_path = write_g(dir.path(), "h.txt", &g.scaled(2.0).unwrap());
    let Results::Verify(same) = cmd_verify(&g_path, &g_path).unwrap().results else { panic!() };
    assert!((same.lower - 1.0).abs() < 1e-9 && (same.upper - 1.0).abs() < 1e-9);
    let Results::Verify(double) = cmd_verify(&g_path, &h_path).unwrap().results else { panic!() };
    assert!((double.lower - 2.0).abs() < 1e-9 && (double.upper - 2.0).abs() < 1e-9);
    assert!((double.kappa - 1.0).abs() < 1e-9);
}

#[test]
fn verify_rejects_mismatched_vertex_count() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_g(dir.path(), "g.txt", &cycle(5));
    let h = write_g(dir.path(), "h.txt", &cycle(6));
    assert_eq!(cmd_verify(&g, &h).unwrap_err().exit_code(), 3);
}

#[test]
fn algconn_zero_budget_selects_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_text(dir.path(), "b.txt", "n 4\n0 1\n1 2\n2 3\n");
    let c = write_text(dir.path(), "c.txt", "n 4\n0 3\n0 2\n");
    let s = out(dir.path(), "s.txt");
    let Results::Algconn(a) = cmd_algconn(&b, &c, 0, &s, 1e-4, false).unwrap().results else {
        panic!()
    };
    assert!(a.selected.is_empty());
    assert_eq!(read_graph(&s).unwrap().edge_count(), 0);
}

#[test]
fn algconn_oracle_is_below_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_text(dir.path(), "b.txt", "n 6\n0 1\n1 2\n2 3\n3 4\n4 5\n");
    let c = write_text(dir.path(), "c.txt", "n 6\n0 5\n0 3\n2 5\n1 4\n");
    let s = out(dir.path(), "s.txt");
    let Results::Algconn(a) = cmd_algconn(&b, &c, 2, &s, 1e-4, true).unwrap().results else {
        panic!()
    };
    let oracle = a.oracle.unwrap();
    assert!(oracle.below_sdp && oracle.below_lambda_k2);
    assert!(oracle.edges.len() <= 2);
    assert!(a.weighted_lambda2 >= a.certified_floor);
    assert!(a.selected.len() <= a.support_budget);
}

#[test]
fn patch_command_respects_budget() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(9);
    let g = random_connected(&mut r, 20, 15, (0.5, 2.0));
    let w = random_connected(&mut r, 20, 40, (0.05, 0.2));
    let g_path = write_g(dir.path(), "g.txt", &g);
    let w_path = write_g(dir.path(), "w.txt", &w);
    let h_path = out(dir.path(), "h.txt");
    let report = cmd_sparsify_patch(&g_path, &w_path, 2, None, &h_path).unwrap();
    let Results::SparsifyPatch(p) = &report.results else { panic!() };
    assert_eq!(p.n_budget, 17);
    assert!(p.output_edges <= 17);
    assert!(p.certified_lower <= p.measured_lower && p.measured_upper <= p.certified_upper);
    assert_eq!(report.trace.len(), 17);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_files_round_trip(
        n in 2usize..12,
        raw in prop::collection::vec((0usize..12, 0usize..12, 1e-3f64..1e3), 0..40),
        json in any::<bool>(),
    ) {
        let edges: Vec<_> = raw
            .into_iter()
            .map(|(u, v, w)| (u % n, v % n, w))
            .filter(|(u, v, _)| u != v)
            .collect();
        let g = WeightedGraph::from_edges(n, edges).unwrap();
        let format = if json { GraphFormat::Json } else { GraphFormat::Text };
        let back = parse_graph(&format_graph(&g, format)).unwrap();
        prop_assert_eq!(back, g);
    }
}

#[test]
fn json_graph_input_matches_text() {
    let dir = tempfile::tempdir().unwrap();
    let g = cycle(7);
    let text = write_g(dir.path(), "g.txt", &g);
    let json: PathBuf = dir.path().join("g.json");
    fs::write(&json, format_graph(&g, GraphFormat::Json)).unwrap();
    assert_eq!(read_graph(&text).unwrap(), read_graph(json.to_str().unwrap()).unwrap());
}
