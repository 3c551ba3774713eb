//! Ultrasparsifiers: a low-stretch spanning tree plus a sparsified, scaled
//! copy of the graph.
//!
//! With `κ = c₁·st_T(G)/k` and `W = G/(c₃κ)` the pair `(T, W)` is a patch
//! with `Tr(L_W L_{T+W}†) ≤ k/(c₁c₃)`, so sparsifying it with `8k+1` edges
//! gives `U = T + W_k` with at most `n − 1 + 8k + 1` edges.

use crate::error::{Error, Result};
use crate::graph::{laplacian, WeightedGraph};
use crate::linalg::spectral_range;
use crate::patch::{default_budget, sparsify_patch, verify_patch, PatchParams, PatchSparsifier};
use crate::tree::{stretch_report, tree_ensemble, SpanningTree, StretchReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltraConfig {
    pub c1: f64,
    pub c3: f64,
    /// Seed for the tree ensemble roots.
    pub seed: u64,
}

impl Default for UltraConfig {
    fn default() -> Self {
        Self {
            c1: 4.0,
            c3: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UltraResult {
    pub ultrasparsifier: WeightedGraph,
    pub tree: SpanningTree,
    pub stretch: StretchReport,
    pub k: usize,
    pub config: UltraConfig,
    /// `c₁·st_T(G)/k`.
    pub kappa_target: f64,
    /// Patch parameters of `(T, W)`; `None` when `G` is a tree.
    pub patch_params: Option<PatchParams>,
    pub patch: Option<PatchSparsifier>,
    /// Extreme generalized eigenvalues of `(L_G, L_U)`.
    pub measured: (f64, f64),
    /// `κ(L_G, L_U)`.
    pub measured_kappa: f64,
    /// Certified `c` with `c·L_U ⪯ L_G`.
    pub certified_lower: f64,
    /// Certified `κ'` with `L_G ⪯ κ'·L_U`.
    pub certified_upper: f64,
}

impl UltraResult {
    pub fn edge_count(&self) -> usize {
        self.ultrasparsifier.edge_count()
    }

    /// `n − 1 + 8k + 1`.
    pub fn edge_budget(&self) -> usize {
        self.tree.n() - 1 + default_budget(self.k)
    }
}

pub fn build_ultrasparsifier(g: &WeightedGraph, k: usize, config: UltraConfig) -> Result<UltraResult> {
    if k == 0 {
        return Err(Error::InvalidProblem("ultrasparsifier needs k >= 1".into()));
    }
    if !(config.c1 > 0.0 && config.c3 > 0.0 && config.c1.is_finite() && config.c3.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "constants must be positive, got c1 = {}, c3 = {}",
            config.c1, config.c3
        )));
    }
    let ensemble = tree_ensemble(g, config.seed)?;
    let tree = ensemble.best().tree.clone();
    let stretch = stretch_report(g, &tree)?;
    let kappa_target = config.c1 * stretch.stretch.total / k as f64;

    if g.is_tree() {
        return Ok(UltraResult {
            ultrasparsifier: g.clone(),
            tree,
            stretch,
            k,
            config,
            kappa_target,
            patch_params: None,
            patch: None,
            measured: (1.0, 1.0),
            measured_kappa: 1.0,
            certified_lower: 1.0,
            certified_upper: 1.0,
        });
    }

    let scale = config.c3 * kappa_target;
    let w = g.scaled(1.0 / scale)?;
    let params = verify_patch(tree.graph(), &w, k)?;
    let patch = sparsify_patch(tree.graph(), &w, k, Some(default_budget(k)))?;
    let ultrasparsifier = tree.graph().union(&patch.sparsifier)?;
    let measured = spectral_range(&laplacian(g), &laplacian(&ultrasparsifier))?;
    let certified_lower = 1.0 / (patch.certified_upper * (1.0 + 1.0 / scale));
    let certified_upper = scale / patch.certified_lower;
    Ok(UltraResult {
        ultrasparsifier,
        tree,
        stretch,
        k,
        config,
        kappa_target,
        patch_params: Some(params),
        patch: Some(patch),
        measured,
        measured_kappa: measured.1 / measured.0,
        certified_lower,
        certified_upper,
    })
}
