//! Graph Laplacians and factorized reduced Laplacians.
//!
//! The reduced Laplacian `L^[r]` (row and column of node `r` removed) is the
//! workhorse behind every tree statistic: its determinant is the total tree
//! weight, and traces against its inverse give the moments. Small systems are
//! factorized densely; larger ones use [`sparse_lu`].

mod sparse;
mod sparse_lu;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use rayon::prelude::*;

pub use sparse::SparseMatrix;
use sparse_lu::SparseLu;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// `L = D - A` for undirected graphs and `L = D - A^T` for directed ones,
/// where `D` holds weighted (out-)degrees under the probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    matrix: SparseMatrix,
    directed: bool,
}

impl LaplacianMatrix {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.matrix.get(i, j)
    }
}

impl std::ops::Add for &LaplacianMatrix {
    type Output = LaplacianMatrix;

    fn add(self, rhs: &LaplacianMatrix) -> LaplacianMatrix {
        assert_eq!(self.dim(), rhs.dim());
        LaplacianMatrix {
            matrix: SparseMatrix::from_triplets(
                self.dim(),
                self.matrix.iter().chain(rhs.matrix.iter()),
            ),
            directed: self.directed,
        }
    }
}

pub fn build_laplacian(g: &Graph) -> LaplacianMatrix {
    let lap = assemble(g);
    debug_assert!(g.n_nodes() == 0 || {
        let v = 0;
        let split = &assemble(&g.neighborhood_subgraph(v).unwrap())
            + &assemble(&g.complement_subgraph(v).unwrap());
        let agrees = split
            .matrix
            .iter()
            .all(|(i, j, x)| (x - lap.get(i, j)).abs() <= 1e-12 * x.abs().max(1.0));
        agrees
    });
    lap
}

fn assemble(g: &Graph) -> LaplacianMatrix {
    let mut triplets = Vec::with_capacity(4 * g.n_edges());
    for e in g.edges() {
        triplets.push((e.u, e.u, e.w));
        triplets.push((e.v, e.u, -e.w));
        if !g.is_directed() {
            triplets.push((e.v, e.v, e.w));
            triplets.push((e.u, e.v, -e.w));
        }
    }
    LaplacianMatrix {
        matrix: SparseMatrix::from_triplets(g.n_nodes(), triplets),
        directed: g.is_directed(),
    }
}

/// Tuning knobs for [`reduce_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest accepted `||A x - b||_inf / ||b||_inf` after one refinement step.
    pub residual_tol: f64,
    /// Condition estimates above this declare the system singular.
    pub max_condition: f64,
    /// A pivot at or below `pivot_tol * max|a_ij|` declares the system singular.
    pub pivot_tol: f64,
    /// Systems of at least this dimension use the sparse factorization.
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-9,
            max_condition: 1e14,
            pivot_tol: 1e-13,
            dense_threshold: 64,
        }
    }
}

/// Sign and log-magnitude of a determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogDet {
    /// `sign * exp(ln_abs)`; overflows to infinity for huge determinants.
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Empty,
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
    Sparse(SparseLu),
}

/// A factorized `L^[r]` together with the node-to-row bookkeeping.
///
/// Rows follow node order with `r` skipped. All query methods take `&self`
/// and may be used from several threads at once.
#[derive(Debug)]
pub struct ReducedLaplacianSystem {
    removed: NodeId,
    directed: bool,
    rows: Vec<Option<usize>>,
    nodes: Vec<NodeId>,
    matrix: SparseMatrix,
    factor: Factor,
    log_det: LogDet,
    condition: f64,
    options: SolverOptions,
    max_residual: AtomicU64,
}

/// Reduces and factorizes with default [`SolverOptions`].
pub fn reduce(lap: &LaplacianMatrix, r: NodeId) -> Result<ReducedLaplacianSystem> {
    reduce_with(lap, r, SolverOptions::default())
}

pub fn reduce_with(
    lap: &LaplacianMatrix,
    r: NodeId,
    options: SolverOptions,
) -> Result<ReducedLaplacianSystem> {
    let n = lap.dim();
    if r >= n {
        return Err(Error::NodeOutOfRange { node: r, n_nodes: n });
    }
    if let Some(node) = first_unlinked(lap, r) {
        return Err(Error::SingularMatrix {
            condition: f64::INFINITY,
            reason: format!("node {node} has no path to the removed node {r}"),
        });
    }
    let nodes: Vec<NodeId> = (0..n).filter(|&i| i != r).collect();
    let mut rows = vec![None; n];
    for (row, &node) in nodes.iter().enumerate() {
        rows[node] = Some(row);
    }
    let matrix = SparseMatrix::from_triplets(
        nodes.len(),
        lap.matrix
            .iter()
            .filter_map(|(i, j, x)| Some((rows[i]?, rows[j]?, x))),
    );
    let dim = matrix.dim();
    let singular = |condition: f64, reason: String| Error::SingularMatrix { condition, reason };
    let scale = matrix.max_abs();

    let (factor, log_det, condition) = if dim == 0 {
        (Factor::Empty, LogDet { sign: 1.0, ln_abs: 0.0 }, 1.0)
    } else if dim < options.dense_threshold {
        let dense = matrix.to_dense();
        let norm = matrix.norm_one();
        if lap.directed {
            let lu = dense.lu();
            let diag = lu.u().diagonal();
            check_pivots(diag.iter().copied(), scale, options.pivot_tol).map_err(|p| {
                singular(f64::INFINITY, format!("pivot {p:e} underflows the matrix scale"))
            })?;
            let log_det = diag.iter().fold(LogDet { sign: 1.0, ln_abs: 0.0 }, |acc, &p| LogDet {
                sign: acc.sign * p.signum(),
                ln_abs: acc.ln_abs + p.abs().ln(),
            });
            // The row permutation flips the sign once per transposition.
            let sign = log_det.sign * lu.p().determinant::<f64>();
            let inverse = lu
                .try_inverse()
                .ok_or_else(|| singular(f64::INFINITY, "LU inverse failed".into()))?;
            let condition = norm * column_norm(&inverse);
            (
                Factor::Lu(lu),
                LogDet { sign, ln_abs: log_det.ln_abs },
                condition,
            )
        } else {
            let chol = Cholesky::new(dense)
                .ok_or_else(|| singular(f64::INFINITY, "matrix is not positive definite".into()))?;
            let diag = chol.l_dirty().diagonal();
            check_pivots(diag.iter().map(|d| d * d), scale, options.pivot_tol).map_err(|p| {
                singular(f64::INFINITY, format!("pivot {p:e} underflows the matrix scale"))
            })?;
            let ln_abs = 2.0 * diag.iter().map(|d| d.ln()).sum::<f64>();
            let condition = norm * column_norm(&chol.inverse());
            (Factor::Cholesky(chol), LogDet { sign: 1.0, ln_abs }, condition)
        }
    } else {
        let lu = SparseLu::factor(&matrix, options.pivot_tol).map_err(|b| {
            singular(
                f64::INFINITY,
                format!("pivot {:e} at elimination step {} underflows the matrix scale", b.pivot, b.step),
            )
        })?;
        let (sign, ln_abs) = lu.log_det();
        let condition = matrix.norm_one() * estimate_inverse_norm(&lu, dim);
        (Factor::Sparse(lu), LogDet { sign, ln_abs }, condition)
    };

    if !(condition <= options.max_condition) {
        return Err(singular(
            condition,
            format!("condition estimate exceeds {:e}", options.max_condition),
        ));
    }

    Ok(ReducedLaplacianSystem {
        removed: r,
        directed: lap.directed,
        rows,
        nodes,
        matrix,
        factor,
        log_det,
        condition,
        options,
        max_residual: AtomicU64::new(0f64.to_bits()),
    })
}

/// A node whose row/column pattern gives it no path to `r`.
///
/// Row `j` of the Laplacian lists every `i` with an edge `i -> j`, so a
/// breadth-first search over rows starting at `r` visits exactly the nodes
/// that reach `r`.
fn first_unlinked(lap: &LaplacianMatrix, r: NodeId) -> Option<NodeId> {
    let n = lap.dim();
    let mut seen = vec![false; n];
    seen[r] = true;
    let mut queue = VecDeque::from([r]);
    while let Some(x) = queue.pop_front() {
        for &(i, a) in lap.matrix.row(x) {
            if i != x && a != 0.0 && !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen.iter().position(|&s| !s)
}

fn check_pivots(pivots: impl Iterator<Item = f64>, scale: f64, tol: f64) -> Result<(), f64> {
    for p in pivots {
        if !(p.abs() > tol * scale) {
            return Err(p);
        }
    }
    Ok(())
}

fn column_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of `||A^{-1}||_1`.
fn estimate_inverse_norm(lu: &SparseLu, n: usize) -> f64 {
    let mut x = vec![1.0 / n as f64; n];
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x);
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = lu.solve_transpose(&xi);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bj, bm), (j, v)| if v.abs() > bm { (j, v.abs()) } else { (bj, bm) });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx {
            break;
        }
        x = vec![0.0; n];
        x[j] = 1.0;
    }
    estimate
}

impl ReducedLaplacianSystem {
    pub fn removed(&self) -> NodeId {
        self.removed
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Matrix row of `node`, or `None` for the removed node.
    pub fn row_of(&self, node: NodeId) -> Option<usize> {
        self.rows.get(node).copied().flatten()
    }

    pub fn node_at(&self, row: usize) -> NodeId {
        self.nodes[row]
    }

    /// The reduced matrix itself, in row coordinates.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn log_det(&self) -> LogDet {
        self.log_det
    }

    pub fn determinant(&self) -> f64 {
        self.log_det.value()
    }

    /// 1-norm condition estimate (exact below the dense threshold).
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn options(&self) -> SolverOptions {
        self.options
    }

    /// Largest relative residual seen by any solve so far.
    pub fn max_residual(&self) -> f64 {
        f64::from_bits(self.max_residual.load(Ordering::Relaxed))
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.factor, Factor::Sparse(_))
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Empty => Vec::new(),
            Factor::Cholesky(c) => c.solve(&DVector::from_column_slice(b)).as_slice().to_vec(),
            Factor::Lu(lu) => lu
                .solve(&DVector::from_column_slice(b))
                .expect("factorization was checked to be nonsingular")
                .as_slice()
                .to_vec(),
            Factor::Sparse(lu) => lu.solve(b),
        }
    }

    /// Solves `L^[r] x = b` in row coordinates, with one step of iterative
    /// refinement and a residual check.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        let mut x = self.raw_solve(b);
        let residual = |x: &[f64]| -> Vec<f64> {
            self.matrix
                .mul_vec(x)
                .iter()
                .zip(b)
                .map(|(ax, bi)| bi - ax)
                .collect()
        };
        let correction = self.raw_solve(&residual(&x));
        x.iter_mut().zip(&correction).for_each(|(xi, di)| *xi += di);

        let b_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if b_norm > 0.0 {
            let r_norm = residual(&x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rel = r_norm / b_norm;
            self.max_residual.fetch_max_f64(rel);
            if !(rel <= self.options.residual_tol) {
                return Err(Error::NumericalFailure(format!(
                    "solve residual {rel:e} exceeds tolerance {:e}",
                    self.options.residual_tol
                )));
            }
        }
        Ok(x)
    }

    /// Columns of `(L^[r])^{-1}` for the given rows.
    fn inverse_columns(&self, rows: &[usize]) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        rows.par_iter()
            .map(|&j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.solve(&e)
            })
            .collect()
    }

    /// The block of the inverse on `rows x rows`.
    pub(crate) fn inverse_block(&self, rows: Vec<usize>) -> Result<InverseBlock> {
        let columns = self.inverse_columns(&rows)?;
        let k = rows.len();
        let values = DMatrix::from_fn(k, k, |a, b| columns[b][rows[a]]);
        let position = rows.iter().enumerate().map(|(p, &r)| (r, p)).collect();
        Ok(InverseBlock {
            rows,
            position,
            values,
        })
    }

    /// Restricts a full-size matrix (indexed by node) to the reduced rows.
    pub fn restrict(&self, lap: &LaplacianMatrix) -> Result<SparseMatrix> {
        if lap.dim() != self.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rows.len(),
                found: lap.dim(),
            });
        }
        Ok(SparseMatrix::from_triplets(
            self.dim(),
            lap.matrix
                .iter()
                .filter_map(|(i, j, x)| Some((self.row_of(i)?, self.row_of(j)?, x))),
        ))
    }

    fn check_dim(&self, m: &SparseMatrix) -> Result<()> {
        if m.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.dim(),
            })
        }
    }
}

trait AtomicF64Max {
    fn fetch_max_f64(&self, value: f64);
}

impl AtomicF64Max for AtomicU64 {
    fn fetch_max_f64(&self, value: f64) {
        let mut current = self.load(Ordering::Relaxed);
        while f64::from_bits(current) < value {
            match self.compare_exchange_weak(current, value.to_bits(), Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => break,
                Err(seen) => current = seen,
            }
        }
    }
}

/// Dense block `X[S, S]` of `X = (L^[r])^{-1}` for a row set `S`.
#[derive(Debug, Clone)]
pub(crate) struct InverseBlock {
    rows: Vec<usize>,
    position: HashMap<usize, usize>,
    values: DMatrix<f64>,
}

impl InverseBlock {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(self.position[&i], self.position[&j])]
    }

    /// Projects `m` onto the block; every entry of `m` must fall inside it.
    fn compress(&self, m: &SparseMatrix) -> DMatrix<f64> {
        let k = self.rows.len();
        let mut out = DMatrix::zeros(k, k);
        for (i, j, x) in m.iter() {
            out[(self.position[&i], self.position[&j])] += x;
        }
        out
    }

    /// `Tr[M X]`.
    pub fn trace(&self, m: &SparseMatrix) -> f64 {
        m.iter().map(|(a, b, x)| x * self.get(b, a)).sum()
    }

    /// `Tr[M1 X M2 X]`.
    pub fn quadratic_trace(&self, m1: &SparseMatrix, m2: &SparseMatrix) -> f64 {
        let a = self.compress(m1) * &self.values;
        let b = self.compress(m2) * &self.values;
        (a * b).trace()
    }
}

/// Union of the supports of the given matrices, sorted.
pub(crate) fn joint_support(ms: &[&SparseMatrix]) -> Vec<usize> {
    let mut s: Vec<usize> = ms.iter().flat_map(|m| m.support()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Total weight of the spanning trees (undirected) or of the in-trees rooted
/// at the removed node (directed). Infinite when the determinant overflows;
/// see [`log_tree_total_weight`].
pub fn tree_total_weight(sys: &ReducedLaplacianSystem) -> f64 {
    sys.determinant()
}

pub fn log_tree_total_weight(sys: &ReducedLaplacianSystem) -> f64 {
    sys.log_det().ln_abs
}

/// Entries of `(L^[r])^{-1}` on `nodes x nodes`, computed with one solve per
/// node.
#[derive(Debug, Clone)]
pub struct SelectedInverse {
    nodes: Vec<NodeId>,
    values: DMatrix<f64>,
}

impl SelectedInverse {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn entry(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let a = self.nodes.iter().position(|&x| x == u)?;
        let b = self.nodes.iter().position(|&x| x == v)?;
        Some(self.values[(a, b)])
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }
}

pub fn selected_inverse_entries(
    sys: &ReducedLaplacianSystem,
    nodes: &[NodeId],
) -> Result<SelectedInverse> {
    let mut rows = Vec::with_capacity(nodes.len());
    for &node in nodes {
        if node >= sys.rows.len() {
            return Err(Error::NodeOutOfRange {
                node,
                n_nodes: sys.rows.len(),
            });
        }
        let row = sys.row_of(node).ok_or_else(|| {
            Error::PreconditionViolated(format!("node {node} is the removed node"))
        })?;
        rows.push(row);
    }
    let columns = sys.inverse_columns(&rows)?;
    let k = rows.len();
    Ok(SelectedInverse {
        nodes: nodes.to_vec(),
        values: DMatrix::from_fn(k, k, |a, b| columns[b][rows[a]]),
    })
}

/// `Tr[M (L^[r])^{-1}]` for `M` in reduced row coordinates, solving only for
/// the rows `M` touches.
pub fn trace_product(sys: &ReducedLaplacianSystem, m: &SparseMatrix) -> Result<f64> {
    sys.check_dim(m)?;
    let block = sys.inverse_block(m.support())?;
    Ok(block.trace(m))
}

/// `Tr[M1 X M2 X]` with `X = (L^[r])^{-1}`.
pub fn quadratic_trace(
    sys: &ReducedLaplacianSystem,
    m1: &SparseMatrix,
    m2: &SparseMatrix,
) -> Result<f64> {
    sys.check_dim(m1)?;
    sys.check_dim(m2)?;
    let block = sys.inverse_block(joint_support(&[m1, m2]))?;
    Ok(block.quadratic_trace(m1, m2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, directed: bool, edges: &[(usize, usize, f64)]) -> Graph {
        Graph::new(n, directed, edges.iter().map(|&(u, v, w)| (u, v, w, 1.0))).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0)))
            .collect();
        graph(n, false, &edges)
    }

    fn dense(l: &LaplacianMatrix) -> Vec<Vec<f64>> {
        let m = l.matrix().to_dense();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(
            dense(&build_laplacian(&complete(3))),
            vec![vec![2.0, -1.0, -1.0], vec![-1.0, 2.0, -1.0], vec![-1.0, -1.0, 2.0]]
        );
        let tri = graph(3, false, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]);
        assert_eq!(
            dense(&build_laplacian(&tri)),
            vec![vec![4.0, -1.0, -3.0], vec![-1.0, 3.0, -2.0], vec![-3.0, -2.0, 5.0]]
        );
        let d = Graph::new(2, true, [(0, 1, 2.0, 1.0)]).unwrap();
        let l = build_laplacian(&d);
        assert_eq!(dense(&l), vec![vec![2.0, 0.0], vec![-2.0, 0.0]]);
        assert!(l.is_directed());
        assert!(!l.matrix().is_symmetric());
    }

    #[test]
    fn undirected_rows_sum_to_zero_and_split_at_every_node() {
        let g = graph(4, false, &[(0, 1, 0.5), (1, 2, 2.0), (2, 3, 1.5), (0, 3, 4.0), (0, 2, 1.0)]);
        let l = build_laplacian(&g);
        assert!(l.matrix().is_symmetric());
        for i in 0..4 {
            let s: f64 = l.matrix().row(i).iter().map(|e| e.1).sum();
            assert!(s.abs() < 1e-12);
        }
        for v in 0..4 {
            let sum = &build_laplacian(&g.neighborhood_subgraph(v).unwrap())
                + &build_laplacian(&g.complement_subgraph(v).unwrap());
            assert_eq!(dense(&sum), dense(&l));
        }
    }

    #[test]
    fn reduce_examples() {
        let sys = reduce(&build_laplacian(&complete(3)), 2).unwrap();
        assert_eq!(dense(&LaplacianMatrix { matrix: sys.matrix().clone(), directed: false }),
            vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
        assert!(close(tree_total_weight(&sys), 3.0, 1e-14));

        let path = graph(3, false, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let sys = reduce(&build_laplacian(&path), 0).unwrap();
        assert!(close(tree_total_weight(&sys), 1.0, 1e-14));

        let split = graph(4, false, &[(0, 1, 1.0), (2, 3, 1.0)]);
        assert!(matches!(
            reduce(&build_laplacian(&split), 0),
            Err(Error::SingularMatrix { .. })
        ));
        assert!(matches!(reduce(&build_laplacian(&split), 7), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn tree_weights() {
        let tri = graph(3, false, &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]);
        let sys = reduce(&build_laplacian(&tri), 1).unwrap();
        assert!(close(tree_total_weight(&sys), 11.0, 1e-14));
        let sys = reduce(&build_laplacian(&complete(5)), 0).unwrap();
        assert!(close(tree_total_weight(&sys), 125.0, 1e-13));
        assert!(close(log_tree_total_weight(&sys), 125f64.ln(), 1e-13));
    }

    #[test]
    fn directed_tree_weight_counts_in_trees() {
        // in-trees rooted at 2: {0->2, 1->2} and {0->1, 1->2}
        let (a, b, c) = (2.0, 3.0, 5.0);
        let d = Graph::new(3, true, [(0, 2, a, 1.0), (0, 1, b, 1.0), (1, 2, c, 1.0)]).unwrap();
        let sys = reduce(&build_laplacian(&d), 2).unwrap();
        assert!(close(tree_total_weight(&sys), a * c + b * c, 1e-14));
        assert!(matches!(reduce(&build_laplacian(&d), 0), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn selected_inverse_examples() {
        let sys = reduce(&build_laplacian(&complete(3)), 2).unwrap();
        let inv = selected_inverse_entries(&sys, &[0, 1]).unwrap();
        let expect = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for (a, row) in expect.iter().enumerate() {
            for (b, &x) in row.iter().enumerate() {
                assert!(close(inv.entry(a, b).unwrap(), x, 1e-14));
            }
        }

        let path = graph(3, false, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let sys = reduce(&build_laplacian(&path), 2).unwrap();
        let inv = selected_inverse_entries(&sys, &[0, 1]).unwrap();
        assert!(close(inv.entry(0, 0).unwrap(), 2.0, 1e-14));
        assert!(close(inv.entry(0, 1).unwrap(), 1.0, 1e-14));
        assert!(close(inv.entry(1, 1).unwrap(), 1.0, 1e-14));

        let sys = reduce(&build_laplacian(&complete(4)), 3).unwrap();
        let inv = selected_inverse_entries(&sys, &[0]).unwrap();
        assert!(close(inv.entry(0, 0).unwrap(), 0.5, 1e-14));
        assert!(matches!(
            selected_inverse_entries(&sys, &[3]),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn trace_product_examples() {
        let sys = reduce(&build_laplacian(&complete(3)), 2).unwrap();
        assert!(close(trace_product(&sys, &SparseMatrix::identity(2)).unwrap(), 4.0 / 3.0, 1e-14));
        assert_eq!(trace_product(&sys, &SparseMatrix::zeros(2)).unwrap(), 0.0);
        assert!(close(trace_product(&sys, &sys.matrix().clone()).unwrap(), 2.0, 1e-14));
        assert!(matches!(
            trace_product(&sys, &SparseMatrix::identity(3)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    fn grid(w: usize, h: usize) -> Graph {
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    edges.push((i, i + 1, 1.0 + ((i * 7) % 5) as f64));
                }
                if y + 1 < h {
                    edges.push((i, i + w, 0.5 + ((i * 3) % 4) as f64));
                }
            }
        }
        graph(w * h, false, &edges)
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let g = grid(5, 4);
        let l = build_laplacian(&g);
        let dense_sys = reduce(&l, 7).unwrap();
        let sparse_sys = reduce_with(&l, 7, SolverOptions { dense_threshold: 0, ..Default::default() }).unwrap();
        assert!(!dense_sys.is_sparse());
        assert!(sparse_sys.is_sparse());
        assert!(close(dense_sys.log_det().ln_abs, sparse_sys.log_det().ln_abs, 1e-12));
        let c_dense = dense_sys.condition_estimate();
        let c_sparse = sparse_sys.condition_estimate();
        // Hager's estimate is a lower bound that is usually exact.
        assert!(c_sparse <= c_dense * (1.0 + 1e-9) && c_sparse >= 0.3 * c_dense);

        let nodes = [0, 3, 12, 19];
        let a = selected_inverse_entries(&dense_sys, &nodes).unwrap();
        let b = selected_inverse_entries(&sparse_sys, &nodes).unwrap();
        for &u in &nodes {
            for &v in &nodes {
                assert!(close(a.entry(u, v).unwrap(), b.entry(u, v).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn sparse_directed_matches_dense() {
        let mut edges = Vec::new();
        for i in 0..12usize {
            edges.push((i, (i + 1) % 12, 1.0 + (i % 3) as f64, 1.0));
            edges.push(((i + 5) % 12, i, 0.5 + (i % 4) as f64, 1.0));
        }
        let g = Graph::new(12, true, edges).unwrap();
        let l = build_laplacian(&g);
        let a = reduce(&l, 4).unwrap();
        let b = reduce_with(&l, 4, SolverOptions { dense_threshold: 0, ..Default::default() }).unwrap();
        assert!(close(a.log_det().ln_abs, b.log_det().ln_abs, 1e-12));
        assert_eq!(a.log_det().sign, 1.0);
        assert_eq!(b.log_det().sign, 1.0);
        let s = a.matrix().clone();
        assert!(close(quadratic_trace(&a, &s, &s).unwrap(), 11.0, 1e-12));
        assert!(close(quadratic_trace(&b, &s, &s).unwrap(), 11.0, 1e-12));
    }

    #[test]
    fn large_grid_uses_sparse_factorization() {
        let g = grid(12, 10);
        let sys = reduce(&build_laplacian(&g), 0).unwrap();
        assert!(sys.is_sparse());
        let b: Vec<f64> = (0..sys.dim()).map(|i| (i as f64).sin()).collect();
        let x = sys.solve(&b).unwrap();
        let r = sys.matrix().mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-10);
        }
        assert!(sys.max_residual() <= 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_connected() -> impl Strategy<Value = Graph> {
            (3usize..8).prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(0.1f64..10.0, n - 1),
                    proptest::collection::vec(any::<usize>(), n - 1),
                    proptest::collection::vec((0usize..n, 0usize..n, 0.1f64..10.0), 0..n * 2),
                )
                    .prop_map(|(n, tree_w, parents, extra)| {
                        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
                        for v in 1..n {
                            edges.push((parents[v - 1] % v, v, tree_w[v - 1]));
                        }
                        for (u, v, w) in extra {
                            let key = (u.min(v), u.max(v));
                            if u != v && !edges.iter().any(|&(a, b, _)| (a.min(b), a.max(b)) == key) {
                                edges.push((u, v, w));
                            }
                        }
                        graph(n, false, &edges)
                    })
            })
        }

        proptest! {
            #[test]
            fn cofactors_agree(g in arb_connected()) {
                let l = build_laplacian(&g);
                let base = reduce(&l, 0).unwrap().log_det().ln_abs;
                for r in 1..g.n_nodes() {
                    let other = reduce(&l, r).unwrap().log_det().ln_abs;
                    prop_assert!((base.exp() - other.exp()).abs() <= 1e-9 * base.exp());
                }
            }

            #[test]
            fn inverse_is_symmetric(g in arb_connected(), r in 0usize..8) {
                let r = r % g.n_nodes();
                let sys = reduce(&build_laplacian(&g), r).unwrap();
                let nodes: Vec<_> = (0..g.n_nodes()).filter(|&v| v != r).collect();
                let inv = selected_inverse_entries(&sys, &nodes).unwrap();
                for &u in &nodes {
                    for &v in &nodes {
                        let (a, b) = (inv.entry(u, v).unwrap(), inv.entry(v, u).unwrap());
                        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
                    }
                }
                prop_assert!(sys.max_residual() <= 1e-9);
            }
        }
    }
}
