use nalgebra::DMatrix;
use proptest::prelude::*;
use sparsify_core::algconn::project_capped_simplex;
use sparsify_core::fixtures::{random_connected, rng};
use sparsify_core::linalg::{generalized_spectrum, pseudoinverse};
use sparsify_core::patch::{default_budget, sparsify_patch};
use sparsify_core::tree::{low_stretch_tree, tree_stretch};
use sparsify_core::ultra::{build_ultrasparsifier, UltraConfig};
use sparsify_core::{laplacian, WeightedGraph};

fn graph(seed: u64, n: usize, extra: usize) -> WeightedGraph {
    random_connected(&mut rng(seed), n, extra, (0.25, 4.0))
}

fn max_entry(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplacian_rows_sum_to_zero_and_pinv_is_involutive(seed in 0u64..10_000, n in 2usize..20, extra in 0usize..30) {
        let l = laplacian(&graph(seed, n, extra));
        for i in 0..n {
            prop_assert!(l.row(i).sum().abs() <= 1e-12 * max_entry(&l));
        }
        let back = pseudoinverse(&pseudoinverse(&l, 1e-10).unwrap(), 1e-10).unwrap();
        prop_assert!(max_entry(&(&back - &l)) <= 1e-8 * max_entry(&l));
    }

    #[test]
    fn pencil_of_scaled_graph_is_constant(seed in 0u64..10_000, n in 3usize..15, scale in 0.1f64..10.0) {
        let g = graph(seed, n, n);
        let spec = generalized_spectrum(&laplacian(&g.scaled(scale).unwrap()), &laplacian(&g)).unwrap();
        prop_assert_eq!(spec.len(), n - 1);
        for x in spec.iter() {
            prop_assert!((x - scale).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn tree_is_spanning_subgraph_with_stretch_at_least_edge_count(seed in 0u64..10_000, n in 2usize..30, extra in 0usize..40) {
        let g = random_connected(&mut rng(seed), n, extra, (1.0, 1.0));
        let t = low_stretch_tree(&g, seed).unwrap();
        prop_assert!(t.graph().is_tree());
        for e in t.graph().edges() {
            prop_assert!(g.contains_edge(e.u, e.v));
        }
        let st = tree_stretch(&g, &t).unwrap();
        prop_assert!(st.total >= g.edge_count() as f64 - 1e-9);
    }

    #[test]
    fn patch_output_uses_patch_edges_within_certified_range(seed in 0u64..10_000, n in 6usize..16, k in 1usize..3) {
        let g = graph(seed, n, n / 2);
        let w = graph(seed + 1, n, 2 * n).scaled(0.1).unwrap();
        let p = sparsify_patch(&g, &w, k, None).unwrap();
        prop_assert!(p.sparsifier.edge_count() <= default_budget(k));
        for e in p.sparsifier.edges() {
            prop_assert!(w.contains_edge(e.u, e.v));
        }
        let (lo, hi) = p.measured;
        prop_assert!(p.certified_lower <= lo + 1e-9);
        prop_assert!(hi <= p.certified_upper + 1e-9);
    }

    #[test]
    fn ultrasparsifier_stays_within_budget_and_target(seed in 0u64..10_000, n in 8usize..24, k in 1usize..4) {
        let g = graph(seed, n, 2 * n);
        let u = build_ultrasparsifier(&g, k, UltraConfig::default()).unwrap();
        prop_assert!(u.edge_count() <= u.edge_budget());
        prop_assert!(u.measured_kappa <= u.kappa_target + 1e-9);
        prop_assert!(u.measured.0 >= u.certified_lower - 1e-9);
    }

    #[test]
    fn capped_simplex_projection_is_feasible(w in prop::collection::vec(-3.0f64..3.0, 1..12), k in 0usize..6) {
        let p = project_capped_simplex(&w, k as f64);
        let budget = (k as f64).min(w.len() as f64);
        prop_assert!(p.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        prop_assert!(p.iter().sum::<f64>() <= budget + 1e-9);
    }
}
