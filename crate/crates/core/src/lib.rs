//! Exact moments of weighted node degrees in random spanning trees.
//!
//! Trees of a graph are drawn with probability proportional to the product
//! of their edges' probability weights `w`; a node's degree in a tree is the
//! sum of the degree weights `omega` of its tree edges. This crate computes
//! expectations, variances and covariances of those degrees, edge inclusion
//! probabilities, full degree distributions and moments of edge-additive tree
//! functionals, all from a factorized reduced Laplacian. Directed graphs are
//! supported through in-trees rooted at a chosen node.
//!
//! Two independent checks ship with the crate: [`oracle`] enumerates every
//! tree, and [`sampler`] draws trees with Wilson's algorithm.
//!
//! ```
//! use treedeg::{Graph, moments};
//!
//! let k4 = Graph::new(4, false, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v, 1.0, 1.0))))?;
//! let e = moments::expected_degree(&k4, 0, None)?;
//! assert!((e - 1.5).abs() < 1e-12);
//! # Ok::<(), treedeg::Error>(())
//! ```

// `!(x <= tol)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod graph;
pub mod laplacian;
pub mod moments;
mod numeric;
pub mod oracle;
pub mod sampler;

pub use error::{Error, ErrorKind, Result};
pub use graph::{build_graph, Edge, EdgeId, Graph, NodeId, ScaleMode, ScaleSpec};
pub use laplacian::{
    build_laplacian, reduce, reduce_with, LaplacianMatrix, ReducedLaplacianSystem, SolverOptions,
    SparseMatrix,
};
pub use numeric::relative_difference;
