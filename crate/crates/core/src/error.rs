use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// [`Error::kind`] groups variants into the coarse classes a caller usually
/// dispatches on (malformed input, connectivity, numerics, capability).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId },

    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: NodeId, v: NodeId },

    #[error("edge ({u}, {v}) has non-positive probability weight {w}")]
    NonPositiveProbabilityWeight { u: NodeId, v: NodeId, w: f64 },

    #[error("edge ({u}, {v}) has a non-finite weight")]
    NonFiniteWeight { u: NodeId, v: NodeId },

    #[error("node {node} out of range for a graph with {n_nodes} nodes")]
    NodeOutOfRange { node: NodeId, n_nodes: usize },

    #[error("edge ({u}, {v}) not found")]
    EdgeNotFound { u: NodeId, v: NodeId },

    #[error("operation needs two distinct nodes, got {node} twice")]
    SameNode { node: NodeId },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("node {node} cannot reach root {root}")]
    RootUnreachable { root: NodeId, node: NodeId },

    #[error("directed graphs need an explicit in-tree root")]
    RootRequired,

    #[error("singular reduced Laplacian (condition estimate {condition:e}): {reason}")]
    SingularMatrix { condition: f64, reason: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("edge ({u}, {v}) has degree weight {omega}, but a nonnegative integer is required")]
    NonIntegerDegreeWeights { u: NodeId, v: NodeId, omega: f64 },

    #[error("ill-conditioned interpolation (relative residual estimate {residual:e})")]
    IllConditionedInterpolation { residual: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("enumeration exceeded the cap of {cap} trees")]
    CapExceeded { cap: usize },
}

/// Coarse classification of [`Error`] variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed graph or arguments.
    Input,
    /// No spanning tree exists (disconnected, or some node cannot reach the root).
    Connectivity,
    /// Singular system, failed residual checks, negative variances.
    Numerical,
    /// The request is outside what the operation supports.
    Capability,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            SelfLoop { .. }
            | DuplicateEdge { .. }
            | NonPositiveProbabilityWeight { .. }
            | NonFiniteWeight { .. }
            | NodeOutOfRange { .. }
            | EdgeNotFound { .. }
            | SameNode { .. }
            | DimensionMismatch { .. }
            | InvalidArgument(_)
            | RootRequired => ErrorKind::Input,
            Disconnected | RootUnreachable { .. } => ErrorKind::Connectivity,
            SingularMatrix { .. } | NumericalFailure(_) | IllConditionedInterpolation { .. } => {
                ErrorKind::Numerical
            }
            NonIntegerDegreeWeights { .. } | PreconditionViolated(_) | CapExceeded { .. } => {
                ErrorKind::Capability
            }
        }
    }
}
