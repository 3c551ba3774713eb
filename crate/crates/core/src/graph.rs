//! Weighted undirected graphs and their Laplacians.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An undirected edge `(u, v)` with `u < v` and a positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    /// Signed incidence vector `e_u - e_v`.
    pub fn incidence(&self, n: usize) -> DVector<f64> {
        let mut b = DVector::zeros(n);
        b[self.u] = 1.0;
        b[self.v] = -1.0;
        b
    }
}

/// Vertex-indexed undirected weighted graph.
///
/// Edges are stored once per unordered pair, normalized so that `u < v` and
/// sorted lexicographically. Parallel input edges are merged by adding
/// their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// Builds a graph from `(u, v, w)` triples, rejecting self-loops,
    /// out-of-range endpoints and non-positive or non-finite weights.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        let edges = merged
            .into_iter()
            .map(|((u, v), w)| Edge { u, v, w })
            .collect();
        Ok(Self { n, edges })
    }

    /// Unit-weight graph from vertex pairs.
    pub fn unweighted<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, pairs.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&key))
            .ok()
            .map(|i| self.edges[i].w)
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    /// Multiplies every edge weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_edges(self.n, self.edges.iter().map(|e| (e.u, e.v, e.w * factor)))
    }

    /// Edge-wise sum `self + other` on the same vertex set.
    pub fn union(&self, other: &WeightedGraph) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidGraph(format!(
                "vertex counts differ: {} vs {}",
                self.n, other.n
            )));
        }
        Self::from_edges(
            self.n,
            self.edges
                .iter()
                .chain(other.edges.iter())
                .map(|e| (e.u, e.v, e.w)),
        )
    }

    /// Weighted degree of every vertex.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    /// Number of incident edges of every vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    /// Adjacency lists `(neighbour, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        adj
    }

    /// Connected component label of every vertex, labels in order of first
    /// appearance.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next;
            while let Some(x) = stack.pop() {
                for &(y, _) in &adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().max().map_or(0, |&c| c + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_count() == 1
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.edges.len() == self.n - 1 && self.is_connected()
    }
}

/// Graph Laplacian: weighted degrees on the diagonal, `-w_ij` off it.
pub fn laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(g.n, g.n);
    for e in &g.edges {
        add_edge_laplacian(&mut l, e.u, e.v, e.w);
    }
    l
}

/// Adds `w * (e_u - e_v)(e_u - e_v)^T` to `l` in place.
pub fn add_edge_laplacian(l: &mut DMatrix<f64>, u: usize, v: usize, w: f64) {
    l[(u, u)] += w;
    l[(v, v)] += w;
    l[(u, v)] -= w;
    l[(v, u)] -= w;
}
