//! Degree moments, edge probabilities and additive tree functionals.
//!
//! With `X = (L^[r])^{-1}` and `L1`, `L2` the reduced Laplacians of the
//! edges at `v` reweighted by `w * omega` and `w * omega^2`:
//!
//! ```text
//! E[deg_v]   = Tr[L1 X]
//! Var[deg_v] = Tr[L2 X] - Tr[L1 X L1 X]
//! ```
//!
//! Both are derivatives of `log det` of the reduced Laplacian of the graph
//! whose edges at `v` are scaled by `alpha^omega`. Only the block of `X` on
//! `v` and its neighbours is ever formed.
//!
//! For directed graphs the root of the in-trees is the removed node and the
//! degree counts both in- and out-edges.

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeId, Graph, NodeId, ScaleSpec};
use crate::laplacian::{
    build_laplacian, joint_support, reduce_with, InverseBlock, ReducedLaplacianSystem,
    SolverOptions, SparseMatrix,
};

pub use spectral::spectral_full_neighbor_moments;

/// Relative slack below zero tolerated in a computed variance before it is
/// reported as a numerical failure.
pub const VARIANCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeMoments {
    pub node: NodeId,
    pub expectation: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeProbability {
    pub edge: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub probability: f64,
}

/// One factorized reduced Laplacian serving any number of moment queries.
#[derive(Debug)]
pub struct TreeMoments<'g> {
    graph: &'g Graph,
    system: ReducedLaplacianSystem,
}

impl<'g> TreeMoments<'g> {
    /// Factorizes `L^[r]`. `root` is optional for undirected graphs and
    /// names the in-tree root for directed ones.
    pub fn new(graph: &'g Graph, root: Option<NodeId>) -> Result<Self> {
        Self::with_options(graph, root, SolverOptions::default())
    }

    pub fn with_options(graph: &'g Graph, root: Option<NodeId>, options: SolverOptions) -> Result<Self> {
        if graph.has_signed_weights() {
            return Err(Error::PreconditionViolated(
                "probability weights must be positive".into(),
            ));
        }
        let root = graph.spanning_root(root)?;
        let system = reduce_with(&build_laplacian(graph), root, options)?;
        Ok(Self { graph, system })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn root(&self) -> NodeId {
        self.system.removed()
    }

    pub fn system(&self) -> &ReducedLaplacianSystem {
        &self.system
    }

    /// Reduced Laplacian of `G_v` with weights `w * omega^p`.
    fn node_carrier(&self, v: NodeId, p: u32) -> Result<SparseMatrix> {
        let g = self
            .graph
            .neighborhood_subgraph(v)?
            .scale_at_node(&ScaleSpec::omega_power(v, p))?;
        self.system.restrict(&build_laplacian(&g))
    }

    /// Reduced Laplacian of the edges joining `v` and `u`, weights
    /// `w * omega^2`; empty when they are not adjacent.
    fn pair_carrier(&self, v: NodeId, u: NodeId) -> Result<SparseMatrix> {
        let g = self
            .graph
            .neighborhood_subgraph(v)?
            .neighborhood_subgraph(u)?
            .scale_at_node(&ScaleSpec::omega_power(v, 2))?;
        self.system.restrict(&build_laplacian(&g))
    }

    fn block(&self, ms: &[&SparseMatrix]) -> Result<InverseBlock> {
        self.system.inverse_block(joint_support(ms))
    }

    pub fn expected_degree(&self, v: NodeId) -> Result<f64> {
        let l1 = self.node_carrier(v, 1)?;
        Ok(self.block(&[&l1])?.trace(&l1))
    }

    pub fn degree_variance(&self, v: NodeId) -> Result<f64> {
        Ok(self.degree_moments(v)?.variance)
    }

    pub fn degree_moments(&self, v: NodeId) -> Result<DegreeMoments> {
        let l1 = self.node_carrier(v, 1)?;
        let l2 = self.node_carrier(v, 2)?;
        let x = self.block(&[&l1, &l2])?;
        Ok(DegreeMoments {
            node: v,
            expectation: x.trace(&l1),
            variance: settle_variance(x.trace(&l2), x.quadratic_trace(&l1, &l1))?,
        })
    }

    pub fn degree_covariance(&self, v: NodeId, u: NodeId) -> Result<f64> {
        self.graph.check_node(v)?;
        self.graph.check_node(u)?;
        if u == v {
            return Err(Error::SameNode { node: v });
        }
        let l1v = self.node_carrier(v, 1)?;
        let l1u = self.node_carrier(u, 1)?;
        let l2 = self.pair_carrier(v, u)?;
        let x = self.block(&[&l1v, &l1u, &l2])?;
        Ok(x.trace(&l2) - x.quadratic_trace(&l1v, &l1u))
    }

    /// Covariance matrix of the degrees of `nodes`, variances on the
    /// diagonal, from a single block of the inverse.
    pub fn covariance_matrix(&self, nodes: &[NodeId]) -> Result<Vec<Vec<f64>>> {
        let l1: Vec<SparseMatrix> = nodes
            .iter()
            .map(|&v| self.node_carrier(v, 1))
            .collect::<Result<_>>()?;
        let l2: Vec<SparseMatrix> = nodes
            .iter()
            .map(|&v| self.node_carrier(v, 2))
            .collect::<Result<_>>()?;
        let all: Vec<&SparseMatrix> = l1.iter().chain(&l2).collect();
        let x = self.block(&all)?;
        let k = nodes.len();
        let mut cov = vec![vec![0.0; k]; k];
        for a in 0..k {
            cov[a][a] = settle_variance(x.trace(&l2[a]), x.quadratic_trace(&l1[a], &l1[a]))?;
            for b in a + 1..k {
                if nodes[a] == nodes[b] {
                    return Err(Error::SameNode { node: nodes[a] });
                }
                let pair = self.pair_carrier(nodes[a], nodes[b])?;
                // The pair carrier lives inside the support of l1[a].
                let c = x.trace(&pair) - x.quadratic_trace(&l1[a], &l1[b]);
                cov[a][b] = c;
                cov[b][a] = c;
            }
        }
        Ok(cov)
    }

    /// `Pr(e in T)` for the edge `u -> v` (or `{u, v}`).
    pub fn edge_probability(&self, u: NodeId, v: NodeId) -> Result<f64> {
        self.graph.check_node(u)?;
        self.graph.check_node(v)?;
        let id = self
            .graph
            .find_edge(u, v)
            .ok_or(Error::EdgeNotFound { u, v })?;
        let e = self.graph.edge(id);
        let rows: Vec<usize> = [e.u, e.v].iter().filter_map(|&n| self.system.row_of(n)).collect();
        let x = self.system.inverse_block(rows)?;
        Ok(self.edge_probability_from(e, &x))
    }

    /// Every edge's inclusion probability, in edge-id order.
    pub fn edge_probabilities(&self) -> Result<Vec<EdgeProbability>> {
        let mut rows: Vec<usize> = self
            .graph
            .edges()
            .iter()
            .flat_map(|e| [e.u, e.v])
            .filter_map(|n| self.system.row_of(n))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        let x = self.system.inverse_block(rows)?;
        Ok(self
            .graph
            .edges()
            .iter()
            .enumerate()
            .map(|(edge, e)| EdgeProbability {
                edge,
                u: e.u,
                v: e.v,
                probability: self.edge_probability_from(e, &x),
            })
            .collect())
    }

    /// Effective-resistance form, with the removed node's row and column
    /// absent from `x`.
    fn edge_probability_from(&self, e: &Edge, x: &InverseBlock) -> f64 {
        let (ru, rv) = (self.system.row_of(e.u), self.system.row_of(e.v));
        if self.graph.is_directed() {
            // An in-tree holds u -> v iff u's single out-edge is this one.
            match (ru, rv) {
                (None, _) => 0.0,
                (Some(i), None) => e.w * x.get(i, i),
                (Some(i), Some(j)) => e.w * (x.get(i, i) - x.get(i, j)),
            }
        } else {
            match (ru, rv) {
                (None, None) => unreachable!("an edge has two distinct endpoints"),
                (None, Some(j)) => e.w * x.get(j, j),
                (Some(i), None) => e.w * x.get(i, i),
                (Some(i), Some(j)) => e.w * (x.get(i, i) + x.get(j, j) - 2.0 * x.get(i, j)),
            }
        }
    }

    /// `sum over edges at v of omega(e) * Pr(e in T)`.
    pub fn expected_degree_via_edges(&self, v: NodeId) -> Result<f64> {
        self.graph.check_node(v)?;
        let mut rows: Vec<usize> = std::iter::once(v)
            .chain(self.graph.neighbors(v))
            .filter_map(|n| self.system.row_of(n))
            .collect();
        rows.sort_unstable();
        rows.dedup();
        let x = self.system.inverse_block(rows)?;
        Ok(self
            .graph
            .incident_edges(v)
            .iter()
            .map(|&id| {
                let e = self.graph.edge(id);
                e.omega * self.edge_probability_from(e, &x)
            })
            .sum())
    }

    /// Reduced Laplacian of the whole graph with weights `w * omega^p`.
    fn global_carrier(&self, p: i32) -> Result<SparseMatrix> {
        let g = self.graph.reweighted(|e| e.w * e.omega.powi(p))?;
        self.system.restrict(&build_laplacian(&g))
    }

    /// `E[sum of omega over tree edges]`.
    pub fn decomposable_expectation(&self) -> Result<f64> {
        let l1 = self.global_carrier(1)?;
        Ok(self.block(&[&l1])?.trace(&l1))
    }

    /// `Var[sum of omega over tree edges]`.
    pub fn decomposable_variance(&self) -> Result<f64> {
        let l1 = self.global_carrier(1)?;
        let l2 = self.global_carrier(2)?;
        let x = self.block(&[&l1, &l2])?;
        settle_variance(x.trace(&l2), x.quadratic_trace(&l1, &l1))
    }
}

/// `second - square`, clamped to zero when it is negative only by rounding.
fn settle_variance(second: f64, square: f64) -> Result<f64> {
    let var = second - square;
    let slack = VARIANCE_TOLERANCE * second.abs().max(square.abs());
    if var >= 0.0 {
        Ok(var)
    } else if var >= -slack {
        Ok(0.0)
    } else {
        Err(Error::NumericalFailure(format!(
            "variance {var:e} is negative beyond tolerance ({second:e} - {square:e})"
        )))
    }
}

pub fn expected_degree(g: &Graph, v: NodeId, r: Option<NodeId>) -> Result<f64> {
    TreeMoments::new(g, r)?.expected_degree(v)
}

pub fn degree_variance(g: &Graph, v: NodeId, r: Option<NodeId>) -> Result<f64> {
    TreeMoments::new(g, r)?.degree_variance(v)
}

pub fn degree_moments(g: &Graph, v: NodeId, r: Option<NodeId>) -> Result<DegreeMoments> {
    TreeMoments::new(g, r)?.degree_moments(v)
}

pub fn degree_covariance(g: &Graph, v: NodeId, u: NodeId, r: Option<NodeId>) -> Result<f64> {
    if u == v {
        return Err(Error::SameNode { node: v });
    }
    TreeMoments::new(g, r)?.degree_covariance(v, u)
}

pub fn edge_probability(g: &Graph, (u, v): (NodeId, NodeId), r: Option<NodeId>) -> Result<f64> {
    if g.find_edge(u, v).is_none() {
        g.check_node(u)?;
        g.check_node(v)?;
        return Err(Error::EdgeNotFound { u, v });
    }
    TreeMoments::new(g, r)?.edge_probability(u, v)
}

pub fn expected_degree_via_edges(g: &Graph, v: NodeId, r: Option<NodeId>) -> Result<f64> {
    TreeMoments::new(g, r)?.expected_degree_via_edges(v)
}

pub fn decomposable_expectation(g: &Graph, r: Option<NodeId>) -> Result<f64> {
    TreeMoments::new(g, r)?.decomposable_expectation()
}

pub fn decomposable_variance(g: &Graph, r: Option<NodeId>) -> Result<f64> {
    TreeMoments::new(g, r)?.decomposable_variance()
}

pub mod spectral {
    //! Moments of a node adjacent to every other node through identical
    //! edges, from the spectrum of the graph with that node deleted.

    use nalgebra::{DMatrix, SymmetricEigen};

    use crate::error::{Error, Result};
    use crate::graph::{Graph, NodeId};
    use crate::numeric::CompensatedSum;

    /// `(E, Var)` of the degree of `v`, given that each edge at `v` has
    /// `w = kappa1` and `omega = kappa2`:
    ///
    /// ```text
    /// E   = sum_i kappa1 kappa2 / (lambda_i + kappa1)
    /// Var = sum_i kappa1 kappa2^2 lambda_i / (lambda_i + kappa1)^2
    /// ```
    ///
    /// with `lambda_i` the Laplacian eigenvalues of `G - v`.
    pub fn spectral_full_neighbor_moments(
        g: &Graph,
        v: NodeId,
        kappa1: f64,
        kappa2: f64,
    ) -> Result<(f64, f64)> {
        g.check_node(v)?;
        if g.is_directed() {
            return Err(Error::PreconditionViolated(
                "the spectral form needs an undirected graph".into(),
            ));
        }
        if !(kappa1 > 0.0 && kappa1.is_finite() && kappa2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need kappa1 > 0 and finite kappa2, got ({kappa1}, {kappa2})"
            )));
        }
        if !g.is_universal(v) {
            return Err(Error::PreconditionViolated(format!(
                "node {v} is not adjacent to every other node"
            )));
        }
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if let Some(&id) = g
            .incident_edges(v)
            .iter()
            .find(|&&id| !same(g.edge(id).w, kappa1) || !same(g.edge(id).omega, kappa2))
        {
            let e = g.edge(id);
            return Err(Error::PreconditionViolated(format!(
                "edge ({}, {}) has (w, omega) = ({}, {}), expected ({kappa1}, {kappa2})",
                e.u, e.v, e.w, e.omega
            )));
        }

        let n = g.n_nodes() - 1;
        let index = |x: NodeId| if x < v { x } else { x - 1 };
        let mut lap = DMatrix::<f64>::zeros(n, n);
        for e in g.edges().iter().filter(|e| !e.touches(v)) {
            let (a, b) = (index(e.u), index(e.v));
            lap[(a, a)] += e.w;
            lap[(b, b)] += e.w;
            lap[(a, b)] -= e.w;
            lap[(b, a)] -= e.w;
        }
        let eigen = SymmetricEigen::new(lap);
        // Laplacian spectra are nonnegative; clip rounding noise.
        let lambdas: Vec<f64> = eigen.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let e: CompensatedSum = lambdas
            .iter()
            .map(|&l| kappa1 * kappa2 / (l + kappa1))
            .collect();
        let var: CompensatedSum = lambdas
            .iter()
            .map(|&l| kappa1 * kappa2 * kappa2 * l / (l + kappa1).powi(2))
            .collect();
        Ok((e.value(), var.value()))
    }
}
