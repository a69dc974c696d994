//! Full degree distributions from determinants of node-scaled graphs.
//!
//! Scaling the probability weight of every edge at `v` by `alpha^omega(e)`
//! multiplies a tree's weight by `alpha^deg_v(T)`, so
//!
//! ```text
//! det L^[r](G scaled at v by alpha^omega) = sum_k c_k alpha^k
//! ```
//!
//! where `c_k` is the total weight of trees in which `v` has degree `k`. The
//! polynomial `P(x) = sum_k (-1)^k c_k x^k` therefore satisfies
//! `P(-alpha) = det(...)`, and its coefficients are recovered by
//! interpolating that determinant at `d + 1` points, `d` being the largest
//! feasible degree. This needs nonnegative integer degree weights at `v`.
//!
//! Two interpolation modes exist. [`InterpolationMode::Exact`] evaluates the
//! determinants in rational arithmetic at `alpha = 1, ..., d + 1` and solves
//! exactly. [`InterpolationMode::Floating`] evaluates them in floating point
//! and solves the interpolation exactly in rationals, switching from the
//! integer nodes to Chebyshev nodes on `[0.5, 2]` when the Vandermonde
//! condition number passes `1e12`; it reports a propagated error bound.

mod exact;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, ScaleSpec};
use crate::laplacian::{build_laplacian, reduce_with, SolverOptions};
use crate::numeric::CompensatedSum;

/// Largest feasible degree the interpolation accepts.
pub const MAX_INTERPOLATION_DEGREE: usize = 128;

/// Vandermonde 1-norm condition number past which the integer nodes are
/// abandoned for Chebyshev nodes.
pub const VANDERMONDE_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterpolationMode {
    Exact,
    #[default]
    Floating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionOptions {
    pub mode: InterpolationMode,
    /// Floating mode: coefficients below `truncation * sum |c|` become zero.
    pub truncation: f64,
    /// Floating mode: largest tolerated propagated error, relative to the
    /// total tree weight.
    pub max_error: f64,
    pub solver: SolverOptions,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        Self {
            mode: InterpolationMode::Floating,
            truncation: 1e-9,
            max_error: 1e-6,
            solver: SolverOptions::default(),
        }
    }
}

impl DistributionOptions {
    pub fn exact() -> Self {
        Self {
            mode: InterpolationMode::Exact,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLayout {
    Integer,
    Chebyshev,
}

/// How a set of coefficients was recovered.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationDiagnostics {
    pub mode: InterpolationMode,
    pub layout: NodeLayout,
    /// The scaling values the determinant was evaluated at.
    pub nodes: Vec<f64>,
    /// 1-norm condition number of the Vandermonde matrix (per axis).
    pub vandermonde_condition: f64,
    /// Bound on the coefficient error relative to the total weight; zero in
    /// exact mode.
    pub error_bound: f64,
    /// Number of coefficients zeroed by truncation.
    pub truncated: usize,
}

/// Coefficients `c_k` (total weight of trees with `deg_v = k`) of the
/// degree polynomial `P(x) = sum_k (-1)^k c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePolynomial {
    pub node: NodeId,
    pub coefficients: Vec<f64>,
    pub diagnostics: InterpolationDiagnostics,
}

impl DegreePolynomial {
    /// `P(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// The `order`-th derivative of `P` at `x`.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        let o = order as usize;
        self.coefficients
            .iter()
            .enumerate()
            .skip(o)
            .map(|(k, &c)| {
                let falling: f64 = (k - o + 1..=k).map(|j| j as f64).product();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * c * falling * x.powi((k - o) as i32)
            })
            .collect::<CompensatedSum>()
            .value()
    }

    /// `P(-1)`, the total tree weight.
    pub fn total_weight(&self) -> f64 {
        self.evaluate(-1.0)
    }

    /// `-P'(-1) / P(-1)`.
    pub fn expectation(&self) -> f64 {
        -self.derivative(-1.0, 1) / self.total_weight()
    }

    /// `P''(-1)/P(-1) - (P'(-1)/P(-1))^2 - P'(-1)/P(-1)`.
    pub fn variance(&self) -> f64 {
        let p = self.total_weight();
        let d1 = self.derivative(-1.0, 1) / p;
        let d2 = self.derivative(-1.0, 2) / p;
        d2 - d1 * d1 - d1
    }

    pub fn distribution(&self) -> DegreeDistribution {
        let total = self.coefficients.iter().copied().collect::<CompensatedSum>().value();
        DegreeDistribution {
            node: self.node,
            probabilities: self
                .coefficients
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0.0)
                .map(|(k, &c)| (k as u64, c / total))
                .collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pub node: NodeId,
    /// Degree to probability, zero atoms omitted.
    pub probabilities: BTreeMap<u64, f64>,
    pub diagnostics: InterpolationDiagnostics,
}

impl DegreeDistribution {
    pub fn probability(&self, k: u64) -> f64 {
        self.probabilities.get(&k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().map(|(&k, &p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probabilities
            .iter()
            .map(|(&k, &p)| p * (k as f64 - m).powi(2))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDegreeDistribution {
    pub v: NodeId,
    pub u: NodeId,
    /// `(deg_v, deg_u)` to probability, zero atoms omitted.
    pub probabilities: BTreeMap<(u64, u64), f64>,
    pub diagnostics: [InterpolationDiagnostics; 2],
}

impl JointDegreeDistribution {
    pub fn marginal_v(&self) -> BTreeMap<u64, f64> {
        self.marginal(|(a, _)| a)
    }

    pub fn marginal_u(&self) -> BTreeMap<u64, f64> {
        self.marginal(|(_, b)| b)
    }

    fn marginal(&self, pick: impl Fn((u64, u64)) -> u64) -> BTreeMap<u64, f64> {
        let mut out: BTreeMap<u64, CompensatedSum> = BTreeMap::new();
        for (&key, &p) in &self.probabilities {
            out.entry(pick(key)).or_default().add(p);
        }
        out.into_iter().map(|(k, s)| (k, s.value())).collect()
    }

    pub fn covariance(&self) -> f64 {
        let mean = |f: &dyn Fn(u64, u64) -> f64| -> f64 {
            self.probabilities
                .iter()
                .map(|(&(a, b), &p)| p * f(a, b))
                .collect::<CompensatedSum>()
                .value()
        };
        let mv = mean(&|a, _| a as f64);
        let mu = mean(&|_, b| b as f64);
        mean(&|a, b| (a as f64 - mv) * (b as f64 - mu))
    }
}

/// `P(-alpha)`: the total tree weight after scaling the edges at `v` by
/// `alpha^omega`.
pub fn evaluate_tree_polynomial(g: &Graph, v: NodeId, alpha: f64, r: Option<NodeId>) -> Result<f64> {
    let root = g.spanning_root(r)?;
    let scaled = g.scale_at_node(&ScaleSpec::power_alpha(v, alpha))?;
    Ok(reduce_with(&build_laplacian(&scaled), root, SolverOptions::default())?.determinant())
}

/// Sum of the (nonnegative integer) degree weights at `v`, the largest
/// degree `v` can reach.
fn max_degree(g: &Graph, v: NodeId) -> Result<usize> {
    g.check_node(v)?;
    let mut d = 0usize;
    for &id in g.incident_edges(v) {
        let e = g.edge(id);
        if !(e.omega >= 0.0 && e.omega.fract() == 0.0 && e.omega <= MAX_INTERPOLATION_DEGREE as f64) {
            return Err(Error::NonIntegerDegreeWeights {
                u: e.u,
                v: e.v,
                omega: e.omega,
            });
        }
        d += e.omega as usize;
    }
    if d > MAX_INTERPOLATION_DEGREE {
        return Err(Error::CapExceeded {
            cap: MAX_INTERPOLATION_DEGREE,
        });
    }
    Ok(d)
}

/// Interpolation nodes along one axis, with `|V^{-1}|` for error bounds.
struct Axis {
    layout: NodeLayout,
    points: Vec<f64>,
    exact_points: Vec<BigRational>,
    /// `|V^{-1}|`, rows indexed by power, columns by point.
    abs_inverse: DMatrix<f64>,
    condition: f64,
}

impl Axis {
    fn new(d: usize, mode: InterpolationMode) -> Self {
        let integer: Vec<f64> = (1..=d + 1).map(|a| a as f64).collect();
        let axis = Self::with_points(NodeLayout::Integer, integer);
        if mode == InterpolationMode::Exact || axis.condition <= VANDERMONDE_CONDITION_LIMIT {
            return axis;
        }
        let m = d + 1;
        let chebyshev = (0..m)
            .map(|i| {
                let theta = std::f64::consts::PI * (2 * i + 1) as f64 / (2 * m) as f64;
                1.25 + 0.75 * theta.cos()
            })
            .collect();
        Self::with_points(NodeLayout::Chebyshev, chebyshev)
    }

    fn with_points(layout: NodeLayout, points: Vec<f64>) -> Self {
        let abs_inverse = lagrange_abs_inverse(&points);
        let m = points.len();
        let v_norm = (0..m)
            .map(|k| points.iter().map(|x| x.abs().powi(k as i32)).sum::<f64>())
            .fold(0.0, f64::max);
        let inv_norm = (0..m)
            .map(|i| abs_inverse.column(i).sum())
            .fold(0.0, f64::max);
        Self {
            layout,
            exact_points: points.iter().map(|&x| exact::rational(x)).collect(),
            points,
            abs_inverse,
            condition: v_norm * inv_norm,
        }
    }

    fn diagnostics(&self, mode: InterpolationMode, error_bound: f64, truncated: usize) -> InterpolationDiagnostics {
        InterpolationDiagnostics {
            mode,
            layout: self.layout,
            nodes: self.points.clone(),
            vandermonde_condition: self.condition,
            error_bound,
            truncated,
        }
    }
}

/// `|V^{-1}|` from the Lagrange basis: column `i` holds the coefficients of
/// `prod_{j != i} (x - x_j) / (x_i - x_j)`.
fn lagrange_abs_inverse(xs: &[f64]) -> DMatrix<f64> {
    let m = xs.len();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut poly = vec![1.0];
        let mut scale = 1.0;
        for (_, &xj) in xs.iter().enumerate().filter(|&(j, _)| j != i) {
            let mut next = vec![0.0; poly.len() + 1];
            for (k, &c) in poly.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * xj;
            }
            poly = next;
            scale *= xs[i] - xj;
        }
        for (k, c) in poly.iter().enumerate() {
            out[(k, i)] = (c / scale).abs();
        }
    }
    out
}

/// Relative error of one floating-point determinant evaluation, taken as a
/// small multiple of the unit roundoff times the matrix dimension.
fn determinant_error(n: usize) -> f64 {
    8.0 * n as f64 * f64::EPSILON
}

pub fn degree_polynomial(
    g: &Graph,
    v: NodeId,
    r: Option<NodeId>,
    opts: &DistributionOptions,
) -> Result<DegreePolynomial> {
    let d = max_degree(g, v)?;
    let root = g.spanning_root(r)?;
    let axis = Axis::new(d, opts.mode);

    let values: Vec<BigRational> = match opts.mode {
        InterpolationMode::Exact => axis
            .exact_points
            .par_iter()
            .map(|a| exact::scaled_determinant(g, root, &[(v, a.clone())]))
            .collect(),
        InterpolationMode::Floating => axis
            .points
            .par_iter()
            .map(|&a| {
                let scaled = g.scale_at_node(&ScaleSpec::power_alpha(v, a))?;
                let det = reduce_with(&build_laplacian(&scaled), root, opts.solver)?.determinant();
                Ok(exact::rational(finite_determinant(det)?))
            })
            .collect::<Result<_>>()?,
    };

    let coeffs = exact::interpolate(&axis.exact_points, &values);
    let (coefficients, error_bound, truncated) = match opts.mode {
        InterpolationMode::Exact => (coeffs.iter().map(exact::to_f64).collect(), 0.0, 0),
        InterpolationMode::Floating => {
            let abs_values: Vec<f64> = values.iter().map(|x| exact::to_f64(&x.abs())).collect();
            let propagated = &axis.abs_inverse * nalgebra::DVector::from_vec(abs_values);
            let eps = determinant_error(g.n_nodes());
            let bound = propagated.iter().map(|x| x * eps).fold(0.0, f64::max);
            settle_coefficients(&coeffs, bound, opts)?
        }
    };
    Ok(DegreePolynomial {
        node: v,
        coefficients,
        diagnostics: axis.diagnostics(opts.mode, error_bound, truncated),
    })
}

fn finite_determinant(det: f64) -> Result<f64> {
    if det.is_finite() {
        Ok(det)
    } else {
        Err(Error::NumericalFailure(
            "tree weight overflows; use the exact mode or rescale the weights".into(),
        ))
    }
}

/// Applies the truncation rule and the error budget to floating-mode
/// coefficients. `bound` is an absolute error bound on each coefficient.
fn settle_coefficients(
    coeffs: &[BigRational],
    bound: f64,
    opts: &DistributionOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let values: Vec<f64> = coeffs.iter().map(exact::to_f64).collect();
    let scale = values.iter().map(|c| c.abs()).sum::<f64>();
    let relative = if scale > 0.0 { bound / scale } else { f64::INFINITY };
    if !(relative <= opts.max_error) {
        return Err(Error::IllConditionedInterpolation { residual: relative });
    }
    let cut = opts.truncation * scale;
    let mut truncated = 0;
    let mut out = Vec::with_capacity(values.len());
    for c in values {
        if c.abs() < cut.max(bound) {
            truncated += usize::from(c != 0.0);
            out.push(0.0);
        } else if c < 0.0 {
            return Err(Error::IllConditionedInterpolation { residual: relative });
        } else {
            out.push(c);
        }
    }
    Ok((out, relative, truncated))
}

pub fn degree_distribution(
    g: &Graph,
    v: NodeId,
    r: Option<NodeId>,
    opts: &DistributionOptions,
) -> Result<DegreeDistribution> {
    Ok(degree_polynomial(g, v, r, opts)?.distribution())
}

/// `(E, Var)` of `deg_v` from the derivatives of the degree polynomial at -1.
pub fn moments_from_polynomial(
    g: &Graph,
    v: NodeId,
    r: Option<NodeId>,
    opts: &DistributionOptions,
) -> Result<(f64, f64)> {
    let p = degree_polynomial(g, v, r, opts)?;
    Ok((p.expectation(), p.variance()))
}

/// Joint law of `(deg_v, deg_u)` from the bivariate polynomial
/// `sum c_{k,l} alpha^k beta^l = det L^[r]` of the graph scaled by
/// `alpha^omega` at `v` and `beta^omega` at `u`, interpolated on a tensor
/// grid.
pub fn joint_degree_distribution(
    g: &Graph,
    v: NodeId,
    u: NodeId,
    r: Option<NodeId>,
    opts: &DistributionOptions,
) -> Result<JointDegreeDistribution> {
    let dv = max_degree(g, v)?;
    let du = max_degree(g, u)?;
    if u == v {
        return Err(Error::SameNode { node: v });
    }
    let root = g.spanning_root(r)?;
    let (av, au) = (Axis::new(dv, opts.mode), Axis::new(du, opts.mode));
    let grid: Vec<(usize, usize)> = (0..=dv).flat_map(|i| (0..=du).map(move |j| (i, j))).collect();

    let flat: Vec<BigRational> = match opts.mode {
        InterpolationMode::Exact => grid
            .par_iter()
            .map(|&(i, j)| {
                exact::scaled_determinant(
                    g,
                    root,
                    &[(v, av.exact_points[i].clone()), (u, au.exact_points[j].clone())],
                )
            })
            .collect(),
        InterpolationMode::Floating => grid
            .par_iter()
            .map(|&(i, j)| {
                let scaled = g
                    .scale_at_node(&ScaleSpec::power_alpha(v, av.points[i]))?
                    .scale_at_node(&ScaleSpec::power_alpha(u, au.points[j]))?;
                let det = reduce_with(&build_laplacian(&scaled), root, opts.solver)?.determinant();
                Ok(exact::rational(finite_determinant(det)?))
            })
            .collect::<Result<_>>()?,
    };
    let at = |i: usize, j: usize| &flat[i * (du + 1) + j];

    // Interpolate along beta for every alpha, then along alpha per power of beta.
    let along_u: Vec<Vec<BigRational>> = (0..=dv)
        .map(|i| {
            let ys: Vec<BigRational> = (0..=du).map(|j| at(i, j).clone()).collect();
            exact::interpolate(&au.exact_points, &ys)
        })
        .collect();
    let mut coeffs = vec![vec![BigRational::zero(); du + 1]; dv + 1];
    for l in 0..=du {
        let ys: Vec<BigRational> = along_u.iter().map(|row| row[l].clone()).collect();
        for (k, c) in exact::interpolate(&av.exact_points, &ys).into_iter().enumerate() {
            coeffs[k][l] = c;
        }
    }

    let flat_coeffs: Vec<BigRational> = coeffs.iter().flatten().cloned().collect();
    let (values, error_bound, truncated) = match opts.mode {
        InterpolationMode::Exact => (flat_coeffs.iter().map(exact::to_f64).collect(), 0.0, 0),
        InterpolationMode::Floating => {
            let abs_p = DMatrix::from_fn(dv + 1, du + 1, |i, j| exact::to_f64(&at(i, j).abs()));
            let propagated = &av.abs_inverse * abs_p * au.abs_inverse.transpose();
            let eps = determinant_error(g.n_nodes());
            let bound = propagated.iter().map(|x| x * eps).fold(0.0, f64::max);
            settle_coefficients(&flat_coeffs, bound, opts)?
        }
    };
    let total = values.iter().copied().collect::<CompensatedSum>().value();
    let probabilities = values
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .map(|(idx, &c)| (((idx / (du + 1)) as u64, (idx % (du + 1)) as u64), c / total))
        .collect();
    Ok(JointDegreeDistribution {
        v,
        u,
        probabilities,
        diagnostics: [
            av.diagnostics(opts.mode, error_bound, truncated),
            au.diagnostics(opts.mode, error_bound, truncated),
        ],
    })
}

/// Exact coefficients `c_k` of the degree polynomial of `v`.
pub fn exact_degree_coefficients(g: &Graph, v: NodeId, r: Option<NodeId>) -> Result<Vec<BigRational>> {
    let d = max_degree(g, v)?;
    let root = g.spanning_root(r)?;
    let xs: Vec<BigRational> = (1..=d as i64 + 1).map(|a| BigRational::from_integer(a.into())).collect();
    let ys: Vec<BigRational> = xs
        .par_iter()
        .map(|a| exact::scaled_determinant(g, root, &[(v, a.clone())]))
        .collect();
    Ok(exact::interpolate(&xs, &ys))
}

/// Exact total tree weight `det L^[r]`.
pub fn exact_tree_weight(g: &Graph, r: Option<NodeId>) -> Result<BigRational> {
    let root = g.spanning_root(r)?;
    Ok(exact::scaled_determinant(g, root, &[]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        Graph::new(n, false, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0, 1.0)))).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn both_modes() -> [DistributionOptions; 2] {
        [DistributionOptions::exact(), DistributionOptions::default()]
    }

    #[test]
    fn polynomial_evaluation_examples() {
        assert!(close(evaluate_tree_polynomial(&complete(3), 0, 1.0, None).unwrap(), 3.0, 1e-12));
        assert!(close(evaluate_tree_polynomial(&complete(3), 0, 2.0, None).unwrap(), 8.0, 1e-12));
        assert!(close(evaluate_tree_polynomial(&path3(), 1, 3.0, None).unwrap(), 9.0, 1e-12));
    }

    #[test]
    fn distribution_examples() {
        for opts in both_modes() {
            let k4 = degree_distribution(&complete(4), 1, None, &opts).unwrap();
            let expect = [(1, 9.0 / 16.0), (2, 6.0 / 16.0), (3, 1.0 / 16.0)];
            assert_eq!(k4.probabilities.len(), 3);
            for (k, p) in expect {
                assert!(close(k4.probability(k), p, 1e-12), "{opts:?}");
            }
            let path = degree_distribution(&path3(), 1, None, &opts).unwrap();
            assert_eq!(path.probabilities.into_iter().collect::<Vec<_>>(), vec![(2, 1.0)]);
            let k3 = degree_distribution(&complete(3), 0, None, &opts).unwrap();
            assert!(close(k3.probability(1), 2.0 / 3.0, 1e-12));
            assert!(close(k3.probability(2), 1.0 / 3.0, 1e-12));
        }
    }

    #[test]
    fn polynomial_moments_examples() {
        for opts in both_modes() {
            let (e, var) = moments_from_polynomial(&complete(3), 0, None, &opts).unwrap();
            assert!(close(e, 4.0 / 3.0, 1e-12) && close(var, 2.0 / 9.0, 1e-12));
            let (e, var) = moments_from_polynomial(&path3(), 1, None, &opts).unwrap();
            assert!(close(e, 2.0, 1e-12) && close(var, 0.0, 1e-12));
            let (e, var) = moments_from_polynomial(&complete(4), 3, None, &opts).unwrap();
            assert!(close(e, 1.5, 1e-12) && close(var, 0.375, 1e-12));
        }
    }

    #[test]
    fn exact_coefficients_are_tree_counts() {
        let c = exact_degree_coefficients(&complete(3), 0, None).unwrap();
        let ints: Vec<i64> = c.iter().map(|x| exact::to_f64(x) as i64).collect();
        assert_eq!(ints, vec![0, 2, 1]);
        assert_eq!(
            exact_tree_weight(&complete(5), None).unwrap(),
            BigRational::from_integer(125.into())
        );
    }

    #[test]
    fn joint_examples() {
        for opts in both_modes() {
            let j = joint_degree_distribution(&complete(3), 0, 1, None, &opts).unwrap();
            let keys: Vec<_> = j.probabilities.keys().copied().collect();
            assert_eq!(keys, vec![(1, 1), (1, 2), (2, 1)]);
            assert!(j.probabilities.values().all(|&p| close(p, 1.0 / 3.0, 1e-12)));
            assert!(close(j.covariance(), -1.0 / 9.0, 1e-12));

            let j = joint_degree_distribution(&path3(), 0, 1, None, &opts).unwrap();
            assert_eq!(j.probabilities.into_iter().collect::<Vec<_>>(), vec![((1, 2), 1.0)]);

            let j = joint_degree_distribution(&complete(4), 0, 1, None, &opts).unwrap();
            for marginal in [j.marginal_v(), j.marginal_u()] {
                for (k, p) in [(1, 9.0 / 16.0), (2, 6.0 / 16.0), (3, 1.0 / 16.0)] {
                    assert!(close(marginal[&k], p, 1e-12));
                }
            }
        }
    }

    #[test]
    fn rejects_non_integer_degree_weights() {
        let g = Graph::new(3, false, [(0, 1, 1.0, 0.5), (1, 2, 1.0, 1.0)]).unwrap();
        assert!(matches!(
            degree_distribution(&g, 1, None, &DistributionOptions::default()),
            Err(Error::NonIntegerDegreeWeights { .. })
        ));
        // Node 2 never touches the fractional edge.
        assert!(degree_distribution(&g, 2, None, &DistributionOptions::default()).is_ok());
        let neg = Graph::new(2, false, [(0, 1, 1.0, -1.0)]).unwrap();
        assert!(degree_distribution(&neg, 0, None, &DistributionOptions::exact()).is_err());
    }

    #[test]
    fn zero_degree_weights_give_a_point_mass() {
        let g = complete(4).with_degree_weights(|_, _| 0.0).unwrap();
        let d = degree_distribution(&g, 0, None, &DistributionOptions::default()).unwrap();
        assert_eq!(d.probabilities.into_iter().collect::<Vec<_>>(), vec![(0, 1.0)]);
    }

    #[test]
    fn large_degrees_switch_to_chebyshev_nodes() {
        let opts = DistributionOptions::default();
        let p = degree_polynomial(&complete(11), 0, None, &opts).unwrap();
        assert_eq!(p.diagnostics.layout, NodeLayout::Chebyshev);
        assert!(p.diagnostics.error_bound <= opts.max_error);
        assert!(close(p.expectation(), 1.0 + 9.0 / 11.0, 1e-6));

        // Past the error budget the floating mode refuses; the exact one does not.
        let g = complete(16);
        assert!(matches!(
            degree_polynomial(&g, 0, None, &opts),
            Err(Error::IllConditionedInterpolation { .. })
        ));
        let exact = degree_polynomial(&g, 0, None, &DistributionOptions::exact()).unwrap();
        assert_eq!(exact.diagnostics.layout, NodeLayout::Integer);
        assert!(close(exact.expectation(), 1.0 + 14.0 / 16.0, 1e-12));
    }

    #[test]
    fn directed_distribution() {
        let g = Graph::new(3, true, [(0, 2, 2.0, 1.0), (0, 1, 3.0, 1.0), (1, 2, 5.0, 1.0)]).unwrap();
        let d = degree_distribution(&g, 1, Some(2), &DistributionOptions::exact()).unwrap();
        assert!(close(d.probability(1), 0.4, 1e-12));
        assert!(close(d.probability(2), 0.6, 1e-12));
    }
}
