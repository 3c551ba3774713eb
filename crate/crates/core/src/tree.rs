//! Spanning trees, stretch and the trace identity `Tr(L_G L_T†) = st_T(G)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::fixtures::rng;
use crate::graph::{laplacian, Edge, WeightedGraph};
use crate::linalg::{frobenius, generalized_spectrum, pseudoinverse, RANK_REL_TOL};

/// Spanning tree rooted at vertex 0 with binary-lifting ancestor tables.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    graph: WeightedGraph,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    /// `S(x)`: sum of `1/w` along the root path of `x`.
    resistance: Vec<f64>,
    up: Vec<Vec<usize>>,
}

impl SpanningTree {
    /// Roots the tree given by `edges` at vertex 0. Fails unless the edges
    /// form a spanning tree on `n` vertices.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        let graph = WeightedGraph::from_edges(n, edges.iter().map(|e| (e.u, e.v, e.w)))?;
        if n == 0 || !graph.is_tree() {
            return Err(Error::InvalidGraph(format!(
                "{} edges do not form a spanning tree on {n} vertices",
                edges.len()
            )));
        }
        let adj = graph.adjacency();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut resistance = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(y, w) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    depth[y] = depth[x] + 1;
                    resistance[y] = resistance[x] + 1.0 / w;
                    stack.push(y);
                }
            }
        }
        let levels = usize::BITS as usize - n.leading_zeros() as usize;
        let mut up = vec![(0..n).map(|v| parent[v].unwrap_or(v)).collect::<Vec<_>>()];
        for j in 1..levels.max(1) {
            let prev = &up[j - 1];
            let next = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        Ok(Self {
            graph,
            parent,
            depth,
            resistance,
            up,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn edges(&self) -> &[Edge] {
        self.graph.edges()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn root_resistance(&self, v: usize) -> f64 {
        self.resistance[v]
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a] - self.depth[b];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[j][a];
            }
            diff >>= 1;
            j += 1;
        }
        if a == b {
            return a;
        }
        for j in (0..self.up.len()).rev() {
            if self.up[j][a] != self.up[j][b] {
                a = self.up[j][a];
                b = self.up[j][b];
            }
        }
        self.up[0][a]
    }

    /// Sum of `1/w` over the tree path between `a` and `b`.
    pub fn path_resistance(&self, a: usize, b: usize) -> f64 {
        let c = self.lca(a, b);
        self.resistance[a] + self.resistance[b] - 2.0 * self.resistance[c]
    }
}

/// Per-edge and total stretch of `G` with respect to a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeStretch {
    /// Aligned with `g.edges()`.
    pub per_edge: Vec<f64>,
    pub total: f64,
}

pub fn tree_stretch(g: &WeightedGraph, t: &SpanningTree) -> Result<TreeStretch> {
    if g.n() != t.n() {
        return Err(Error::InvalidGraph(format!(
            "tree has {} vertices, graph has {}",
            t.n(),
            g.n()
        )));
    }
    let per_edge: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| e.w * t.path_resistance(e.u, e.v))
        .collect();
    let total = per_edge.iter().sum();
    Ok(TreeStretch { per_edge, total })
}

/// Count of pencil eigenvalues above a threshold next to the bound `st/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCount {
    pub threshold: f64,
    pub count: usize,
    pub bound: f64,
}

impl TailCount {
    pub fn holds(&self) -> bool {
        self.count as f64 <= self.bound
    }
}

/// Dense check of the trace identity and the eigenvalue tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCheck {
    /// `Tr(L_G L_T†)`.
    pub trace: f64,
    pub stretch: f64,
    pub residual: f64,
    pub tails: Vec<TailCount>,
    pub max_eigenvalue: f64,
}

impl TraceCheck {
    pub fn identity_holds(&self, rel_tol: f64) -> bool {
        self.residual <= rel_tol * self.stretch
    }
}

pub const DEFAULT_TAIL_PROBES: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

pub fn sw_trace_check(g: &WeightedGraph, t: &SpanningTree, probes: &[f64]) -> Result<TraceCheck> {
    let stretch = tree_stretch(g, t)?.total;
    let lg = laplacian(g);
    let lt = laplacian(t.graph());
    let trace = frobenius(&lg, &pseudoinverse(&lt, RANK_REL_TOL)?);
    let eigs = generalized_spectrum(&lg, &lt)?;
    let tails = probes
        .iter()
        .map(|&threshold| TailCount {
            threshold,
            count: eigs.iter().filter(|&&x| x > threshold).count(),
            bound: stretch / threshold,
        })
        .collect();
    Ok(TraceCheck {
        trace,
        stretch,
        residual: (trace - stretch).abs(),
        tails,
        max_eigenvalue: eigs.max(),
    })
}

/// Stretch, trace identity and tail counts in one record.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchReport {
    pub stretch: TreeStretch,
    pub check: TraceCheck,
}

pub fn stretch_report(g: &WeightedGraph, t: &SpanningTree) -> Result<StretchReport> {
    Ok(StretchReport {
        stretch: tree_stretch(g, t)?,
        check: sw_trace_check(g, t, &DEFAULT_TAIL_PROBES)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    ShortestPath { root: usize },
    MaxWeight,
}

#[derive(Debug, Clone)]
pub struct TreeCandidate {
    pub kind: CandidateKind,
    pub tree: SpanningTree,
    pub stretch: f64,
}

/// All ensemble candidates and the index of the minimum-stretch one.
#[derive(Debug, Clone)]
pub struct TreeEnsemble {
    pub candidates: Vec<TreeCandidate>,
    pub chosen: usize,
}

impl TreeEnsemble {
    pub fn best(&self) -> &TreeCandidate {
        &self.candidates[self.chosen]
    }
}

/// Number of shortest-path roots sampled: `min(n, 16)`.
pub const MAX_SPT_ROOTS: usize = 16;

/// Builds shortest-path trees (lengths `1/w`) from `min(n, 16)` random roots
/// plus a maximum-weight spanning tree, scoring each by total stretch.
pub fn tree_ensemble(g: &WeightedGraph, seed: u64) -> Result<TreeEnsemble> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected {
            components: g.component_count(),
        });
    }
    let n = g.n();
    let mut r = rng(seed);
    let mut roots = sample(&mut r, n, n.min(MAX_SPT_ROOTS)).into_vec();
    roots.sort_unstable();
    let mut kinds: Vec<CandidateKind> = roots
        .into_iter()
        .map(|root| CandidateKind::ShortestPath { root })
        .collect();
    kinds.push(CandidateKind::MaxWeight);

    let mut candidates = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let edges = match kind {
            CandidateKind::ShortestPath { root } => shortest_path_tree(g, root),
            CandidateKind::MaxWeight => max_weight_tree(g),
        };
        let tree = SpanningTree::from_edges(n, &edges)?;
        let stretch = tree_stretch(g, &tree)?.total;
        candidates.push(TreeCandidate {
            kind,
            tree,
            stretch,
        });
    }
    let chosen = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.stretch.total_cmp(&b.1.stretch).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("ensemble is never empty");
    Ok(TreeEnsemble { candidates, chosen })
}

/// Minimum-stretch tree of the ensemble.
pub fn low_stretch_tree(g: &WeightedGraph, seed: u64) -> Result<SpanningTree> {
    Ok(tree_ensemble(g, seed)?.best().tree.clone())
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn shortest_path_tree(g: &WeightedGraph, root: usize) -> Vec<Edge> {
    let adj = g.adjacency();
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut via: Vec<Option<(usize, f64)>> = vec![None; g.n()];
    let mut done = vec![false; g.n()];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(Frontier(0.0, root));
    while let Some(Frontier(d, x)) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, w) in &adj[x] {
            let nd = d + 1.0 / w;
            if nd < dist[y] {
                dist[y] = nd;
                via[y] = Some((x, w));
                heap.push(Frontier(nd, y));
            }
        }
    }
    via.iter()
        .enumerate()
        .filter_map(|(y, p)| p.map(|(x, w)| Edge { u: x.min(y), v: x.max(y), w }))
        .collect()
}

fn max_weight_tree(g: &WeightedGraph) -> Vec<Edge> {
    let mut order: Vec<&Edge> = g.edges().iter().collect();
    order.sort_by(|a, b| b.w.total_cmp(&a.w));
    let mut dsu: Vec<usize> = (0..g.n()).collect();
    fn find(dsu: &mut [usize], mut x: usize) -> usize {
        while dsu[x] != x {
            dsu[x] = dsu[dsu[x]];
            x = dsu[x];
        }
        x
    }
    let mut out = Vec::with_capacity(g.n().saturating_sub(1));
    for e in order {
        let (a, b) = (find(&mut dsu, e.u), find(&mut dsu, e.v));
        if a != b {
            dsu[a] = b;
            out.push(*e);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cycle, path, random_connected};
    use approx::assert_abs_diff_eq;

    #[test]
    fn tree_input_is_its_own_tree() {
        let mut r = rng(3);
        let g = random_connected(&mut r, 12, 0, (0.5, 2.0));
        let t = low_stretch_tree(&g, 0).unwrap();
        assert_eq!(t.graph(), &g);
        let s = tree_stretch(&g, &t).unwrap();
        assert_abs_diff_eq!(s.total, 11.0, epsilon = 1e-10);
    }

    #[test]
    fn cycle_stretch() {
        for n in [3, 5, 10, 17] {
            let g = cycle(n);
            let t = low_stretch_tree(&g, 1).unwrap();
            let s = tree_stretch(&g, &t).unwrap();
            assert_abs_diff_eq!(s.total, (2 * n - 2) as f64, epsilon = 1e-9);
        }
        let g = cycle(5);
        let t = SpanningTree::from_edges(5, path(5).edges()).unwrap();
        let s = tree_stretch(&g, &t).unwrap();
        let chord = g.edges().iter().position(|e| (e.u, e.v) == (0, 4)).unwrap();
        assert_abs_diff_eq!(s.per_edge[chord], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_two_hop_stretch() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.0)]).unwrap();
        let t = SpanningTree::from_edges(3, path(3).edges()).unwrap();
        let s = tree_stretch(&g, &t).unwrap();
        assert_eq!(s.per_edge, vec![1.0, 4.0, 1.0]);
    }

    #[test]
    fn lca_matches_naive_walk() {
        let mut r = rng(5);
        let g = random_connected(&mut r, 40, 0, (1.0, 1.0));
        let t = SpanningTree::from_edges(40, g.edges()).unwrap();
        let ancestors = |mut v: usize| {
            let mut out = vec![v];
            while let Some(p) = t.parent(v) {
                out.push(p);
                v = p;
            }
            out
        };
        for a in 0..40 {
            for b in 0..40 {
                let pa = ancestors(a);
                let pb = ancestors(b);
                let naive = *pa.iter().find(|x| pb.contains(x)).unwrap();
                assert_eq!(t.lca(a, b), naive);
            }
        }
    }

    #[test]
    fn stretch_at_least_one_and_trace_identity() {
        let mut r = rng(9);
        for _ in 0..5 {
            let g = random_connected(&mut r, 25, 30, (0.2, 3.0));
            let ens = tree_ensemble(&g, 11).unwrap();
            let best = ens.best();
            for c in &ens.candidates {
                assert!(best.stretch <= c.stretch);
            }
            let rep = stretch_report(&g, &best.tree).unwrap();
            for e in best.tree.edges() {
                assert_eq!(g.weight(e.u, e.v), Some(e.w));
            }
            assert!(rep.check.identity_holds(1e-7));
            assert!(rep.check.tails.iter().all(TailCount::holds));
        }
    }

    #[test]
    fn unit_weight_stretch_at_least_one() {
        let mut r = rng(10);
        for _ in 0..5 {
            let g = random_connected(&mut r, 25, 30, (1.0, 1.0));
            let t = low_stretch_tree(&g, 2).unwrap();
            let s = tree_stretch(&g, &t).unwrap();
            assert!(s.per_edge.iter().all(|&x| x >= 1.0 - 1e-12));
            assert_abs_diff_eq!(s.total, s.per_edge.iter().sum::<f64>(), epsilon = 1e-9);
        }
    }

    #[test]
    fn heavy_tree_path_gives_stretch_below_one() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 4.0), (1, 2, 4.0), (0, 2, 0.5)]).unwrap();
        let t = low_stretch_tree(&g, 0).unwrap();
        let s = tree_stretch(&g, &t).unwrap();
        assert_abs_diff_eq!(s.total, 2.25, epsilon = 1e-12);
    }

    #[test]
    fn rejects_disconnected_and_non_trees() {
        let g = WeightedGraph::unweighted(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            low_stretch_tree(&g, 0),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(SpanningTree::from_edges(3, cycle(3).edges()).is_err());
        let t = SpanningTree::from_edges(3, path(3).edges()).unwrap();
        assert!(tree_stretch(&path(4), &t).is_err());
    }
}
