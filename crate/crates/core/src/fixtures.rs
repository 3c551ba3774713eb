//! Deterministic graph and matrix fixtures used by tests, benchmarks and
//! the acceptance suite.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::WeightedGraph;

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector with i.i.d. entries uniform in `[-1, 1]`.
pub fn random_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random positive definite matrix `GGᵀ/n + 0.05 I`.
pub fn random_psd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = random_matrix(rng, n, n);
    let a = &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.05;
    (&a + a.transpose()) * 0.5
}

/// Random PSD matrix of rank `r` (almost surely).
pub fn random_psd_rank(rng: &mut impl Rng, n: usize, r: usize) -> DMatrix<f64> {
    let g = random_matrix(rng, n, r);
    let a = &g * g.transpose();
    (&a + a.transpose()) * 0.5
}

/// Random orthogonal projection of rank `r`.
pub fn random_projection(rng: &mut impl Rng, n: usize, r: usize) -> DMatrix<f64> {
    let q = random_matrix(rng, n, r).qr().q();
    let p = &q * q.transpose();
    (&p + p.transpose()) * 0.5
}

pub fn path(n: usize) -> WeightedGraph {
    WeightedGraph::unweighted(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
}

pub fn cycle(n: usize) -> WeightedGraph {
    WeightedGraph::unweighted(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
}

pub fn complete(n: usize) -> WeightedGraph {
    WeightedGraph::unweighted(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
        .expect("valid complete graph")
}

/// Connected graph: a random spanning tree plus `extra` random non-tree
/// edges, weights uniform in `weight_range`.
pub fn random_connected(
    rng: &mut impl Rng,
    n: usize,
    extra: usize,
    weight_range: (f64, f64),
) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let (a, b) = (order[i], parent);
        pairs.insert((a.min(b), a.max(b)));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = (pairs.len() + extra).min(max_edges);
    while pairs.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let (lo, hi) = weight_range;
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(a, b)| (a, b, if hi > lo { rng.gen_range(lo..hi) } else { lo }))
        .collect();
    WeightedGraph::from_edges(n, edges).expect("valid random graph")
}

/// Random simple connected `d`-regular graph by the configuration model with
/// rejection. `n * d` must be even.
pub fn random_regular(rng: &mut impl Rng, n: usize, d: usize) -> WeightedGraph {
    assert!(n * d % 2 == 0 && d < n, "no simple {d}-regular graph on {n} vertices");
    loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(rng);
        let mut pairs = BTreeSet::new();
        let simple = stubs.chunks(2).all(|c| {
            let (a, b) = (c[0].min(c[1]), c[0].max(c[1]));
            a != b && pairs.insert((a, b))
        });
        if !simple {
            continue;
        }
        let g = WeightedGraph::unweighted(n, pairs).expect("valid regular graph");
        if g.is_connected() {
            return g;
        }
    }
}
