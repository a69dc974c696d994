//! Brute-force enumeration of spanning trees and in-trees.
//!
//! Every statistic in the rest of the crate has a direct-summation
//! counterpart here. The enumerators are exponential and meant for graphs
//! of a handful of nodes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::numeric::CompensatedSum;

pub const DEFAULT_CAP: usize = 1_000_000;

/// One spanning tree (or in-tree), as sorted edge ids plus its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSample {
    pub edges: Vec<EdgeId>,
    pub weight: f64,
}

impl TreeSample {
    pub fn from_edges(g: &Graph, mut edges: Vec<EdgeId>) -> Self {
        edges.sort_unstable();
        let weight = edges.iter().map(|&id| g.edge(id).w).product();
        Self { edges, weight }
    }

    /// Weighted degree of `node` in this tree.
    pub fn degree(&self, g: &Graph, node: NodeId) -> f64 {
        self.edges
            .iter()
            .map(|&id| g.edge(id))
            .filter(|e| e.touches(node))
            .map(|e| e.omega)
            .sum()
    }

    /// `sum of omega` over the tree's edges.
    pub fn degree_weight_sum(&self, g: &Graph) -> f64 {
        self.edges.iter().map(|&id| g.edge(id).omega).sum()
    }

    pub fn contains(&self, edge: EdgeId) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }
}

/// Checks the tree invariants: `n - 1` edges, acyclic and spanning when
/// undirected; one out-edge per non-root node, none at the root, and every
/// node reaching the root when directed.
pub fn is_valid_tree(g: &Graph, tree: &TreeSample, root: Option<NodeId>) -> bool {
    let n = g.n_nodes();
    if tree.edges.len() + 1 != n || tree.edges.iter().any(|&id| id >= g.n_edges()) {
        return false;
    }
    if g.is_directed() {
        let Some(root) = root else { return false };
        let mut next = vec![None; n];
        for &id in &tree.edges {
            let e = g.edge(id);
            if e.u == root || next[e.u].is_some() {
                return false;
            }
            next[e.u] = Some(e.v);
        }
        (0..n).all(|start| {
            let mut x = start;
            for _ in 0..n {
                if x == root {
                    return true;
                }
                match next[x] {
                    Some(y) => x = y,
                    None => return false,
                }
            }
            x == root
        })
    } else {
        let mut uf = UnionFind::new(n);
        tree.edges.iter().all(|&id| {
            let e = g.edge(id);
            uf.union(e.u, e.v)
        })
    }
}

/// Lists every spanning tree (undirected) or every in-tree rooted at `root`
/// (directed), in a deterministic order.
///
/// Undirected enumeration walks the edges in id order, branching on
/// "contract" (take the edge if it joins two components) and "delete" (skip
/// it if the remaining edges still connect the graph). Directed enumeration
/// gives each non-root node one out-edge in turn, rejecting choices that
/// close a cycle.
pub fn enumerate_spanning_trees(
    g: &Graph,
    root: Option<NodeId>,
    cap: usize,
) -> Result<Vec<TreeSample>> {
    let root = g.spanning_root(root)?;
    let mut out = Vec::new();
    if g.is_directed() {
        let mut next = vec![None; g.n_nodes()];
        let mut chosen = Vec::with_capacity(g.n_nodes() - 1);
        in_trees(g, root, 0, &mut next, &mut chosen, cap, &mut out)?;
    } else {
        let mut uf = UnionFind::new(g.n_nodes());
        let mut chosen = Vec::with_capacity(g.n_nodes() - 1);
        let mut deleted = vec![false; g.n_edges()];
        spanning_trees(g, 0, &mut uf, &mut chosen, &mut deleted, cap, &mut out)?;
    }
    Ok(out)
}

fn push_tree(g: &Graph, chosen: &[EdgeId], cap: usize, out: &mut Vec<TreeSample>) -> Result<()> {
    if out.len() >= cap {
        return Err(Error::CapExceeded { cap });
    }
    out.push(TreeSample::from_edges(g, chosen.to_vec()));
    Ok(())
}

fn spanning_trees(
    g: &Graph,
    next: EdgeId,
    uf: &mut UnionFind,
    chosen: &mut Vec<EdgeId>,
    deleted: &mut [bool],
    cap: usize,
    out: &mut Vec<TreeSample>,
) -> Result<()> {
    if chosen.len() + 1 == g.n_nodes() {
        return push_tree(g, chosen, cap, out);
    }
    if next == g.n_edges() {
        return Ok(());
    }
    let e = g.edge(next);
    let mark = uf.checkpoint();
    if uf.union(e.u, e.v) {
        chosen.push(next);
        spanning_trees(g, next + 1, uf, chosen, deleted, cap, out)?;
        chosen.pop();
        uf.rollback(mark);
    }
    deleted[next] = true;
    if still_connected(g, deleted) {
        spanning_trees(g, next + 1, uf, chosen, deleted, cap, out)?;
    }
    deleted[next] = false;
    Ok(())
}

fn still_connected(g: &Graph, deleted: &[bool]) -> bool {
    let mut uf = UnionFind::new(g.n_nodes());
    let mut parts = g.n_nodes();
    for (id, e) in g.edges().iter().enumerate() {
        if !deleted[id] && uf.union(e.u, e.v) {
            parts -= 1;
        }
    }
    parts == 1
}

fn in_trees(
    g: &Graph,
    root: NodeId,
    node: NodeId,
    next: &mut Vec<Option<NodeId>>,
    chosen: &mut Vec<EdgeId>,
    cap: usize,
    out: &mut Vec<TreeSample>,
) -> Result<()> {
    if node == g.n_nodes() {
        return push_tree(g, chosen, cap, out);
    }
    if node == root {
        return in_trees(g, root, node + 1, next, chosen, cap, out);
    }
    for &id in g.incident_edges(node) {
        let e = g.edge(id);
        if e.u != node || closes_cycle(next, node, e.v) {
            continue;
        }
        next[node] = Some(e.v);
        chosen.push(id);
        in_trees(g, root, node + 1, next, chosen, cap, out)?;
        chosen.pop();
        next[node] = None;
    }
    Ok(())
}

/// Whether following assigned out-edges from `target` leads back to `node`.
fn closes_cycle(next: &[Option<NodeId>], node: NodeId, target: NodeId) -> bool {
    let mut x = target;
    loop {
        if x == node {
            return true;
        }
        match next[x] {
            Some(y) => x = y,
            None => return false,
        }
    }
}

/// One atom of a degree distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeAtom {
    pub degree: f64,
    pub probability: f64,
}

/// Gibbs-weighted statistics by direct summation over all trees.
#[derive(Debug, Clone)]
pub struct ExhaustiveReport {
    pub root: NodeId,
    pub tree_count: usize,
    pub total_weight: f64,
    pub expectation: Vec<f64>,
    pub variance: Vec<f64>,
    /// Full covariance matrix of the node degrees, variances on the diagonal.
    pub covariance: Vec<Vec<f64>>,
    /// Per-node atoms sorted by degree.
    pub distribution: Vec<Vec<DegreeAtom>>,
    pub edge_probability: Vec<f64>,
    /// Mean of `sum of omega over tree edges`.
    pub decomposable_expectation: f64,
    pub decomposable_variance: f64,
}

impl ExhaustiveReport {
    /// Probability of each integer degree of `node`; `None` when some degree
    /// is not an integer.
    pub fn integer_distribution(&self, node: NodeId) -> Option<Vec<(i64, f64)>> {
        self.distribution[node]
            .iter()
            .map(|a| (a.degree.fract() == 0.0).then_some((a.degree as i64, a.probability)))
            .collect()
    }
}

pub fn brute_report(g: &Graph, root: Option<NodeId>) -> Result<ExhaustiveReport> {
    brute_report_with_cap(g, root, DEFAULT_CAP)
}

pub fn brute_report_with_cap(g: &Graph, root: Option<NodeId>, cap: usize) -> Result<ExhaustiveReport> {
    let root = g.spanning_root(root)?;
    let trees = enumerate_spanning_trees(g, Some(root), cap)?;
    Ok(report_from_trees(g, root, &trees))
}

/// Builds the report from an already enumerated tree list.
pub fn report_from_trees(g: &Graph, root: NodeId, trees: &[TreeSample]) -> ExhaustiveReport {
    let n = g.n_nodes();
    let total: f64 = trees.iter().map(|t| t.weight).collect::<CompensatedSum>().value();
    let probs: Vec<f64> = trees.iter().map(|t| t.weight / total).collect();
    let degrees: Vec<Vec<f64>> = trees
        .iter()
        .map(|t| (0..n).map(|v| t.degree(g, v)).collect())
        .collect();

    let mean = |f: &dyn Fn(usize) -> f64| -> f64 {
        probs
            .iter()
            .enumerate()
            .map(|(t, p)| p * f(t))
            .collect::<CompensatedSum>()
            .value()
    };

    let expectation: Vec<f64> = (0..n).map(|v| mean(&|t| degrees[t][v])).collect();
    let covariance: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            (0..n)
                .map(|u| {
                    mean(&|t| (degrees[t][v] - expectation[v]) * (degrees[t][u] - expectation[u]))
                })
                .collect()
        })
        .collect();
    let variance = (0..n).map(|v| covariance[v][v]).collect();

    let distribution = (0..n)
        .map(|v| {
            let mut atoms: Vec<(f64, f64)> =
                degrees.iter().zip(&probs).map(|(d, &p)| (d[v], p)).collect();
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, CompensatedSum)> = Vec::new();
            for (d, p) in atoms {
                match merged.last_mut() {
                    Some((k, acc)) if *k == d => acc.add(p),
                    _ => {
                        let mut acc = CompensatedSum::default();
                        acc.add(p);
                        merged.push((d, acc));
                    }
                }
            }
            merged
                .into_iter()
                .map(|(degree, acc)| DegreeAtom {
                    degree,
                    probability: acc.value(),
                })
                .collect()
        })
        .collect();

    let edge_probability = (0..g.n_edges())
        .map(|id| {
            trees
                .iter()
                .zip(&probs)
                .filter(|(t, _)| t.contains(id))
                .map(|(_, &p)| p)
                .collect::<CompensatedSum>()
                .value()
        })
        .collect();

    let sums: Vec<f64> = trees.iter().map(|t| t.degree_weight_sum(g)).collect();
    let decomposable_expectation = mean(&|t| sums[t]);
    let decomposable_variance = mean(&|t| (sums[t] - decomposable_expectation).powi(2));

    ExhaustiveReport {
        root,
        tree_count: trees.len(),
        total_weight: total,
        expectation,
        variance,
        covariance,
        distribution,
        edge_probability,
        decomposable_expectation,
        decomposable_variance,
    }
}

/// Joint law of the (integer-valued) degrees of `v` and `u`, as sorted
/// `((deg_v, deg_u), probability)` pairs.
pub fn joint_degree_table(
    g: &Graph,
    trees: &[TreeSample],
    v: NodeId,
    u: NodeId,
) -> Vec<((i64, i64), f64)> {
    let total: f64 = trees.iter().map(|t| t.weight).collect::<CompensatedSum>().value();
    let mut table: std::collections::BTreeMap<(i64, i64), CompensatedSum> = Default::default();
    for t in trees {
        let key = (t.degree(g, v).round() as i64, t.degree(g, u).round() as i64);
        table.entry(key).or_default().add(t.weight / total);
    }
    table.into_iter().map(|(k, s)| (k, s.value())).collect()
}

/// Exact total weight, reading every probability weight as the binary
/// rational it is.
pub fn exact_total_weight(g: &Graph, trees: &[TreeSample]) -> BigRational {
    let weights: Vec<BigRational> = g
        .edges()
        .iter()
        .map(|e| BigRational::from_float(e.w).expect("weights are finite"))
        .collect();
    trees.iter().fold(BigRational::zero(), |acc, t| {
        acc + t
            .edges
            .iter()
            .fold(BigRational::one(), |p, &id| p * &weights[id])
    })
}

/// Integer tree count as a big integer, for unweighted sanity checks.
pub fn tree_count(g: &Graph, root: Option<NodeId>, cap: usize) -> Result<BigInt> {
    Ok(BigInt::from(enumerate_spanning_trees(g, root, cap)?.len()))
}

/// Union-find with an undo log (no path compression, union by size).
#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<(usize, usize)>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.log.push((a, b));
        true
    }

    fn checkpoint(&self) -> usize {
        self.log.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.log.len() > mark {
            let (a, b) = self.log.pop().unwrap();
            self.parent[b] = b;
            self.size[a] -= self.size[b];
        }
    }
}
