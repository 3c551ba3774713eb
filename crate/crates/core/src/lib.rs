//! Spectral subgraph sparsification.
//!
//! * [`engine`]: barrier-shift reweighting of rank-one updates with certified
//!   spectral bounds.
//! * [`patch`]: sparsifies a patch graph `W` on top of a fixed graph `G`.
//! * [`tree`] and [`ultra`]: low-stretch spanning trees and ultrasparsifiers.
//! * [`algconn`]: adding few edges to maximize algebraic connectivity.

pub mod algconn;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod patch;
pub mod tree;
pub mod ultra;

pub use error::{Error, Result};
pub use graph::{laplacian, Edge, WeightedGraph};
