//! Dual-weighted graphs.
//!
//! Every edge carries a *probability weight* `w > 0`, which drives the Gibbs
//! distribution over spanning trees, and a *degree weight* `omega`, which
//! defines what a node's degree in a tree means. The two are independent:
//! `omega` may be zero or negative.
//!
//! Node-scaled graphs (see [`ScaleSpec`]) are the one place where the
//! positivity of `w` is relaxed. Scaling by `omega^p` with odd `p` and a
//! negative `omega` yields a signed weight; such graphs are only ever used
//! to assemble Laplacian-shaped matrices, never as tree distributions.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Tail for directed graphs; the smaller endpoint for undirected ones.
    pub u: NodeId,
    /// Head for directed graphs; the larger endpoint for undirected ones.
    pub v: NodeId,
    /// Probability weight.
    pub w: f64,
    /// Degree weight.
    pub omega: f64,
}

impl Edge {
    pub fn touches(&self, node: NodeId) -> bool {
        self.u == node || self.v == node
    }

    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn opposite(&self, node: NodeId) -> Option<NodeId> {
        if self.u == node {
            Some(self.v)
        } else if self.v == node {
            Some(self.u)
        } else {
            None
        }
    }
}

/// A simple graph with probability and degree weights on every edge.
///
/// Immutable after construction. Connectivity (or root reachability for
/// directed graphs) is not enforced here; operations that need it check it.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    directed: bool,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    lookup: HashMap<(NodeId, NodeId), EdgeId>,
}

impl Graph {
    /// Builds a graph from `(u, v, w, omega)` tuples.
    ///
    /// Undirected edges are canonicalized so that `u < v`. Self-loops,
    /// parallel edges and non-positive probability weights are rejected.
    pub fn new<I>(n_nodes: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64, f64)>,
    {
        let mut out = Vec::new();
        for (u, v, w, omega) in edges {
            for node in [u, v] {
                if node >= n_nodes {
                    return Err(Error::NodeOutOfRange { node, n_nodes });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            if !w.is_finite() || !omega.is_finite() {
                return Err(Error::NonFiniteWeight { u, v });
            }
            if w <= 0.0 {
                return Err(Error::NonPositiveProbabilityWeight { u, v, w });
            }
            let (u, v) = if directed || u < v { (u, v) } else { (v, u) };
            out.push(Edge { u, v, w, omega });
        }
        Self::assemble(n_nodes, directed, out)
    }

    fn assemble(n_nodes: usize, directed: bool, edges: Vec<Edge>) -> Result<Self> {
        let mut incident = vec![Vec::new(); n_nodes];
        let mut lookup = HashMap::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            if lookup.insert((e.u, e.v), id).is_some() {
                return Err(Error::DuplicateEdge { u: e.u, v: e.v });
            }
            incident[e.u].push(id);
            incident[e.v].push(id);
        }
        Ok(Self {
            n_nodes,
            directed,
            edges,
            incident,
            lookup,
        })
    }

    /// Same node set and orientation, new edge list. Zero weights are dropped,
    /// signed weights are kept.
    fn with_edges(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut kept = Vec::new();
        for e in edges {
            if !e.w.is_finite() {
                return Err(Error::NonFiniteWeight { u: e.u, v: e.v });
            }
            if e.w != 0.0 {
                kept.push(e);
            }
        }
        Self::assemble(self.n_nodes, self.directed, kept)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Ids of the edges touching `node` (both orientations when directed).
    pub fn incident_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.incident[node]
    }

    /// Looks up an edge by endpoints. Undirected lookups accept either order;
    /// directed lookups mean `u -> v`.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let key = if self.directed || u < v { (u, v) } else { (v, u) };
        self.lookup.get(&key).copied()
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node < self.n_nodes {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node,
                n_nodes: self.n_nodes,
            })
        }
    }

    /// `true` when some edge has a non-positive probability weight, which can
    /// only happen for graphs produced by [`Graph::scale_at_node`].
    pub fn has_signed_weights(&self) -> bool {
        self.edges.iter().any(|e| e.w <= 0.0)
    }

    /// Sum of the degree weights of the edges incident to `node`.
    pub fn weighted_degree(&self, node: NodeId) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.incident[node]
            .iter()
            .map(|&id| self.edges[id].omega)
            .sum())
    }

    /// Sum of the probability weights of the edges incident to `node`.
    pub fn strength(&self, node: NodeId) -> f64 {
        self.incident[node].iter().map(|&id| self.edges[id].w).sum()
    }

    /// Distinct neighbors of `node`, in incident-edge order.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let mut seen = Vec::new();
        self.incident[node].iter().filter_map(move |&id| {
            let other = self.edges[id].opposite(node)?;
            if seen.contains(&other) {
                None
            } else {
                seen.push(other);
                Some(other)
            }
        })
    }

    /// `true` when `node` shares an edge with every other node.
    pub fn is_universal(&self, node: NodeId) -> bool {
        self.neighbors(node).count() == self.n_nodes - 1
    }

    /// The subgraph holding only the edges incident to `node`.
    pub fn neighborhood_subgraph(&self, node: NodeId) -> Result<Self> {
        self.check_node(node)?;
        self.with_edges(self.edges.iter().copied().filter(|e| e.touches(node)))
    }

    /// The subgraph holding every edge not incident to `node`.
    pub fn complement_subgraph(&self, node: NodeId) -> Result<Self> {
        self.check_node(node)?;
        self.with_edges(self.edges.iter().copied().filter(|e| !e.touches(node)))
    }

    /// Multiplies the probability weight of every edge incident to
    /// `spec.node` by the factor its [`ScaleMode`] assigns to that edge.
    ///
    /// Edges whose weight becomes exactly zero are dropped. With
    /// [`ScaleMode::OmegaPower`] and negative degree weights the result may
    /// carry signed weights.
    pub fn scale_at_node(&self, spec: &ScaleSpec) -> Result<Self> {
        self.check_node(spec.node)?;
        if let ScaleMode::PowerAlpha(alpha) = spec.mode {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "scaling base must be positive and finite, got {alpha}"
                )));
            }
        }
        let scaled = self.edges.iter().enumerate().map(|(id, e)| {
            if e.touches(spec.node) {
                Edge {
                    w: e.w * spec.factor(id, e),
                    ..*e
                }
            } else {
                *e
            }
        });
        self.with_edges(scaled)
    }

    /// Same topology with each probability weight replaced by `f(edge)`.
    pub fn reweighted(&self, f: impl Fn(&Edge) -> f64) -> Result<Self> {
        self.with_edges(self.edges.iter().map(|e| Edge { w: f(e), ..*e }))
    }

    /// Same graph with every degree weight replaced by `f(edge)`.
    pub fn with_degree_weights(&self, f: impl Fn(EdgeId, &Edge) -> f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| Edge { omega: f(id, e), ..*e });
        self.with_edges(edges)
    }

    /// `true` for an undirected graph whose edges connect all nodes.
    /// Edge orientation is ignored for directed graphs.
    pub fn is_connected(&self) -> bool {
        if self.n_nodes == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_nodes];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.n_nodes
    }

    /// First node (by index) with no directed path to `root`, if any.
    pub fn first_unreachable(&self, root: NodeId) -> Option<NodeId> {
        let mut reaches = vec![false; self.n_nodes];
        reaches[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &id in &self.incident[x] {
                let e = &self.edges[id];
                if e.v == x && !reaches[e.u] {
                    reaches[e.u] = true;
                    queue.push_back(e.u);
                }
            }
        }
        reaches.iter().position(|&r| !r)
    }

    /// Checks that spanning trees exist and settles the root.
    ///
    /// Undirected graphs must be connected and take any root (the node with
    /// the largest probability-weighted degree by default). Directed graphs
    /// need an explicit root that every node can reach.
    pub fn spanning_root(&self, root: Option<NodeId>) -> Result<NodeId> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidArgument(
                "spanning-tree statistics need at least two nodes".into(),
            ));
        }
        if let Some(r) = root {
            self.check_node(r)?;
        }
        if self.directed {
            let root = root.ok_or(Error::RootRequired)?;
            match self.first_unreachable(root) {
                Some(node) => Err(Error::RootUnreachable { root, node }),
                None => Ok(root),
            }
        } else if !self.is_connected() {
            Err(Error::Disconnected)
        } else {
            Ok(root.unwrap_or_else(|| self.default_root()))
        }
    }

    /// Node of maximum probability-weighted degree; ties go to the lowest index.
    pub fn default_root(&self) -> NodeId {
        let mut best = 0;
        for node in 1..self.n_nodes {
            if self.strength(node) > self.strength(best) {
                best = node;
            }
        }
        best
    }
}

/// Builds a [`Graph`]; see [`Graph::new`].
pub fn build_graph<I>(n_nodes: usize, directed: bool, edges: I) -> Result<Graph>
where
    I: IntoIterator<Item = (NodeId, NodeId, f64, f64)>,
{
    Graph::new(n_nodes, directed, edges)
}

/// How [`Graph::scale_at_node`] computes the factor of each incident edge.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleMode {
    /// `alpha^omega(e)`.
    PowerAlpha(f64),
    /// `omega(e)^p`.
    OmegaPower(u32),
    /// Explicit per-edge factors; incident edges missing from the map keep
    /// their weight.
    Custom(BTreeMap<EdgeId, f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSpec {
    pub node: NodeId,
    pub mode: ScaleMode,
}

impl ScaleSpec {
    pub fn power_alpha(node: NodeId, alpha: f64) -> Self {
        Self {
            node,
            mode: ScaleMode::PowerAlpha(alpha),
        }
    }

    pub fn omega_power(node: NodeId, p: u32) -> Self {
        Self {
            node,
            mode: ScaleMode::OmegaPower(p),
        }
    }

    fn factor(&self, id: EdgeId, e: &Edge) -> f64 {
        match &self.mode {
            ScaleMode::PowerAlpha(alpha) => alpha.powf(e.omega),
            ScaleMode::OmegaPower(p) => e.omega.powi(*p as i32),
            ScaleMode::Custom(map) => map.get(&id).copied().unwrap_or(1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (0, 2, 1.0, 1.0)]).unwrap()
    }

    fn k4() -> Graph {
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v, 1.0, 1.0));
            }
        }
        Graph::new(4, false, edges).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)]).unwrap()
    }

    fn edge_pairs(g: &Graph) -> Vec<(NodeId, NodeId)> {
        g.edges().iter().map(|e| (e.u, e.v)).collect()
    }

    #[test]
    fn build_rejects_invalid_edges() {
        assert_eq!(
            Graph::new(3, false, [(0, 1, 1.0, 1.0), (0, 1, 2.0, 1.0)]),
            Err(Error::DuplicateEdge { u: 0, v: 1 })
        );
        assert_eq!(
            Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 0, 2.0, 1.0)]),
            Err(Error::DuplicateEdge { u: 0, v: 1 })
        );
        assert_eq!(
            Graph::new(3, false, [(2, 2, 1.0, 1.0)]),
            Err(Error::SelfLoop { node: 2 })
        );
        assert_eq!(
            Graph::new(3, false, [(0, 3, 1.0, 1.0)]),
            Err(Error::NodeOutOfRange { node: 3, n_nodes: 3 })
        );
        assert!(matches!(
            Graph::new(3, false, [(0, 1, 0.0, 1.0)]),
            Err(Error::NonPositiveProbabilityWeight { .. })
        ));
        assert!(matches!(
            Graph::new(3, false, [(0, 1, f64::NAN, 1.0)]),
            Err(Error::NonFiniteWeight { .. })
        ));
    }

    #[test]
    fn build_canonicalizes_undirected_only() {
        let g = Graph::new(3, false, [(2, 0, 1.0, 1.0)]).unwrap();
        assert_eq!(edge_pairs(&g), vec![(0, 2)]);
        assert_eq!(g.find_edge(2, 0), Some(0));

        let d = Graph::new(2, true, [(1, 0, 0.5, 2.0), (0, 1, 0.5, 2.0)]).unwrap();
        assert_eq!(edge_pairs(&d), vec![(1, 0), (0, 1)]);
        assert_eq!(d.find_edge(0, 1), Some(1));
        assert!(d.is_directed());
    }

    #[test]
    fn scale_power_alpha() {
        let g = k3().scale_at_node(&ScaleSpec::power_alpha(0, 2.0)).unwrap();
        let w: Vec<f64> = g.edges().iter().map(|e| e.w).collect();
        assert_eq!(w, vec![2.0, 1.0, 2.0]);

        let tri = Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 2, 2.0, 1.0), (0, 2, 3.0, 1.0)])
            .unwrap()
            .scale_at_node(&ScaleSpec::power_alpha(1, 3.0))
            .unwrap();
        let w: Vec<f64> = tri.edges().iter().map(|e| e.w).collect();
        assert_eq!(w, vec![3.0, 6.0, 3.0]);
    }

    #[test]
    fn scale_alpha_one_is_identity() {
        let g = k4();
        assert_eq!(g.scale_at_node(&ScaleSpec::power_alpha(2, 1.0)).unwrap(), g);
    }

    #[test]
    fn scale_omega_power_on_neighborhood() {
        let g = k3()
            .neighborhood_subgraph(0)
            .unwrap()
            .scale_at_node(&ScaleSpec::omega_power(0, 1))
            .unwrap();
        assert_eq!(edge_pairs(&g), vec![(0, 1), (0, 2)]);
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn scale_drops_zeroed_edges_and_keeps_signs() {
        let g = Graph::new(3, false, [(0, 1, 2.0, 0.0), (0, 2, 1.0, -3.0), (1, 2, 1.0, 1.0)])
            .unwrap();
        let s = g.scale_at_node(&ScaleSpec::omega_power(0, 1)).unwrap();
        assert_eq!(edge_pairs(&s), vec![(0, 2), (1, 2)]);
        assert_eq!(s.edges()[0].w, -3.0);
        assert!(s.has_signed_weights());

        let custom = g
            .scale_at_node(&ScaleSpec {
                node: 1,
                mode: ScaleMode::Custom(BTreeMap::from([(0, 5.0), (1, 7.0), (2, 0.5)])),
            })
            .unwrap();
        let w: Vec<f64> = custom.edges().iter().map(|e| e.w).collect();
        // edge 1 is not incident to node 1
        assert_eq!(w, vec![10.0, 1.0, 0.5]);

        assert!(g.scale_at_node(&ScaleSpec::power_alpha(0, 0.0)).is_err());
        assert!(g.scale_at_node(&ScaleSpec::power_alpha(5, 2.0)).is_err());
    }

    #[test]
    fn neighborhood_and_complement() {
        assert_eq!(edge_pairs(&k3().neighborhood_subgraph(0).unwrap()), vec![(0, 1), (0, 2)]);
        assert_eq!(edge_pairs(&k3().complement_subgraph(0).unwrap()), vec![(1, 2)]);
        assert_eq!(edge_pairs(&path3().neighborhood_subgraph(2).unwrap()), vec![(1, 2)]);
        assert_eq!(edge_pairs(&path3().complement_subgraph(2).unwrap()), vec![(0, 1)]);
        let n = k4().neighborhood_subgraph(3).unwrap();
        assert_eq!(n.n_edges(), 3);
        assert!(n.edges().iter().all(|e| e.touches(3)));
        assert_eq!(k4().complement_subgraph(3).unwrap().n_edges(), 3);
        assert_eq!(n.n_nodes(), 4);
    }

    #[test]
    fn weighted_degrees() {
        assert_eq!(k3().weighted_degree(0).unwrap(), 2.0);
        let tri = Graph::new(3, false, [(0, 1, 1.0, 0.5), (1, 2, 1.0, 1.0), (0, 2, 1.0, -1.0)])
            .unwrap();
        assert_eq!(tri.weighted_degree(0).unwrap(), -0.5);
        for v in 0..4 {
            assert_eq!(k4().weighted_degree(v).unwrap(), 3.0);
        }
        assert!(k4().weighted_degree(4).is_err());
    }

    #[test]
    fn directed_degree_counts_both_orientations() {
        let d = Graph::new(3, true, [(0, 2, 1.0, 1.0), (0, 1, 1.0, 2.0), (1, 2, 1.0, 4.0)]).unwrap();
        assert_eq!(d.weighted_degree(1).unwrap(), 6.0);
        assert_eq!(d.first_unreachable(2), None);
        assert_eq!(d.first_unreachable(0), Some(1));
        assert_eq!(d.spanning_root(None), Err(Error::RootRequired));
        assert_eq!(
            d.spanning_root(Some(1)),
            Err(Error::RootUnreachable { root: 1, node: 2 })
        );
    }

    #[test]
    fn spanning_root_defaults_to_heaviest_node() {
        let g = Graph::new(4, false, [(0, 1, 1.0, 1.0), (1, 2, 5.0, 1.0), (2, 3, 1.0, 1.0)]).unwrap();
        assert_eq!(g.spanning_root(None).unwrap(), 1);
        assert_eq!(g.spanning_root(Some(3)).unwrap(), 3);
        let split = Graph::new(4, false, [(0, 1, 1.0, 1.0), (2, 3, 1.0, 1.0)]).unwrap();
        assert_eq!(split.spanning_root(None), Err(Error::Disconnected));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph() -> impl Strategy<Value = Graph> {
            (2usize..7).prop_flat_map(|n| {
                let pairs: Vec<(usize, usize)> =
                    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
                let m = pairs.len();
                (
                    Just(n),
                    Just(pairs),
                    proptest::collection::vec(any::<bool>(), m),
                    proptest::collection::vec(0.1f64..10.0, m),
                )
                    .prop_map(|(n, pairs, keep, ws)| {
                        let edges = pairs
                            .into_iter()
                            .zip(keep)
                            .zip(ws)
                            .filter(|((_, k), _)| *k)
                            .map(|(((u, v), _), w)| (u, v, w, 1.0));
                        Graph::new(n, false, edges).unwrap()
                    })
            })
        }

        proptest! {
            #[test]
            fn neighborhood_and_complement_partition_edges(g in arb_graph(), pick in 0usize..7) {
                let v = pick % g.n_nodes();
                let a = g.neighborhood_subgraph(v).unwrap();
                let b = g.complement_subgraph(v).unwrap();
                prop_assert_eq!(a.n_edges() + b.n_edges(), g.n_edges());
                for e in g.edges() {
                    let in_a = a.find_edge(e.u, e.v).is_some();
                    let in_b = b.find_edge(e.u, e.v).is_some();
                    prop_assert!(in_a != in_b);
                }
            }

            #[test]
            fn unit_omega_degree_counts_neighbors(g in arb_graph(), pick in 0usize..7) {
                let v = pick % g.n_nodes();
                prop_assert_eq!(g.weighted_degree(v).unwrap(), g.neighbors(v).count() as f64);
            }
        }
    }
}
