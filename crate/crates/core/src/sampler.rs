//! Exact sampling of spanning trees and in-trees with Wilson's algorithm.
//!
//! A loop-erased random walk from each node not yet in the tree runs until
//! it hits the tree; the walk steps along an edge with probability
//! proportional to its weight `w`. Undirected walks may use an edge in
//! either direction, directed walks only along its orientation, absorbing
//! at the root. In both cases the tree law is `Pr(T) ∝ prod w(e)`.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Samples are drawn in chunks of [`CHUNK`]; chunk
//! `c` uses stream `c` of that generator, so results are identical for any
//! number of worker threads.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::oracle::TreeSample;

/// Samples per random stream.
pub const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    /// In-tree root when directed; walk root when undirected (default 0).
    pub root: Option<NodeId>,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            root: None,
        }
    }

    pub fn with_root(self, root: NodeId) -> Self {
        Self {
            root: Some(root),
            ..self
        }
    }
}

/// Per-node transition tables for the walk.
#[derive(Debug, Clone)]
pub struct WilsonSampler<'g> {
    graph: &'g Graph,
    root: NodeId,
    /// `(edge, target, cumulative weight)` per node.
    steps: Vec<Vec<(EdgeId, NodeId, f64)>>,
}

impl<'g> WilsonSampler<'g> {
    pub fn new(graph: &'g Graph, root: Option<NodeId>) -> Result<Self> {
        if graph.has_signed_weights() {
            return Err(Error::PreconditionViolated(
                "sampling needs positive probability weights".into(),
            ));
        }
        let root = if graph.is_directed() {
            graph.spanning_root(root)?
        } else {
            graph.spanning_root(Some(root.unwrap_or(0)))?
        };
        let steps = (0..graph.n_nodes())
            .map(|x| {
                let mut acc = 0.0;
                graph
                    .incident_edges(x)
                    .iter()
                    .filter_map(|&id| {
                        let e = graph.edge(id);
                        let target = if graph.is_directed() {
                            (e.u == x).then_some(e.v)?
                        } else {
                            e.opposite(x)?
                        };
                        acc += e.w;
                        Some((id, target, acc))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { graph, root, steps })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    fn step(&self, x: NodeId, rng: &mut ChaCha20Rng) -> (EdgeId, NodeId) {
        let table = &self.steps[x];
        let total = table.last().expect("walks only visit nodes that reach the root").2;
        let target = rng.random::<f64>() * total;
        let pos = table.partition_point(|&(_, _, c)| c <= target).min(table.len() - 1);
        (table[pos].0, table[pos].1)
    }

    pub fn sample(&self, rng: &mut ChaCha20Rng) -> TreeSample {
        let n = self.graph.n_nodes();
        let mut in_tree = vec![false; n];
        let mut next: Vec<Option<(EdgeId, NodeId)>> = vec![None; n];
        in_tree[self.root] = true;
        for start in 0..n {
            let mut x = start;
            while !in_tree[x] {
                let hop = self.step(x, rng);
                next[x] = Some(hop);
                x = hop.1;
            }
            // Retrace: the last exit from each node erases the loops.
            let mut x = start;
            while !in_tree[x] {
                in_tree[x] = true;
                x = next[x].expect("walk left this node").1;
            }
        }
        let edges = (0..n)
            .filter(|&x| x != self.root)
            .map(|x| next[x].expect("every non-root node has an exit").0)
            .collect();
        TreeSample::from_edges(self.graph, edges)
    }

    fn chunk_rng(seed: u64, chunk: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        rng
    }

    /// Folds `f` over the samples of each chunk in parallel, returning the
    /// per-chunk states in chunk order.
    fn chunked<S: Send>(&self, cfg: &SamplerConfig, init: impl Fn() -> S + Sync, f: impl Fn(&mut S, TreeSample) + Sync) -> Vec<S> {
        let chunks = cfg.samples.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = Self::chunk_rng(cfg.seed, c);
                let mut state = init();
                let count = CHUNK.min(cfg.samples - c * CHUNK);
                for _ in 0..count {
                    f(&mut state, self.sample(&mut rng));
                }
                state
            })
            .collect()
    }
}

fn check_config(cfg: &SamplerConfig) -> Result<()> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    Ok(())
}

/// One tree, drawn from the first sample position of `cfg`'s stream.
pub fn wilson_sample(g: &Graph, cfg: &SamplerConfig) -> Result<TreeSample> {
    let sampler = WilsonSampler::new(g, cfg.root)?;
    Ok(sampler.sample(&mut WilsonSampler::chunk_rng(cfg.seed, 0)))
}

/// `cfg.samples` independent trees, in a fixed order.
pub fn sample_trees(g: &Graph, cfg: &SamplerConfig) -> Result<Vec<TreeSample>> {
    check_config(cfg)?;
    let sampler = WilsonSampler::new(g, cfg.root)?;
    Ok(sampler
        .chunked(cfg, Vec::new, |acc, t| acc.push(t))
        .into_iter()
        .flatten()
        .collect())
}

/// Streaming mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Welford {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    fn sample_variance(&self) -> f64 {
        if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub nodes: Vec<NodeId>,
    pub samples: usize,
    pub mean: Vec<f64>,
    /// Unbiased sample variance.
    pub variance: Vec<f64>,
    /// `sqrt(variance / samples)`.
    pub std_error: Vec<f64>,
}

/// Sample mean and variance of the weighted degrees of `nodes`.
pub fn monte_carlo_moments(g: &Graph, nodes: &[NodeId], cfg: &SamplerConfig) -> Result<EmpiricalMoments> {
    check_config(cfg)?;
    for &v in nodes {
        g.check_node(v)?;
    }
    let sampler = WilsonSampler::new(g, cfg.root)?;
    let stats = sampler
        .chunked(
            cfg,
            || vec![Welford::default(); nodes.len()],
            |acc, t| {
                for (w, &v) in acc.iter_mut().zip(nodes) {
                    w.push(t.degree(g, v));
                }
            },
        )
        .into_iter()
        .reduce(|a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect())
        .expect("at least one chunk");
    let variance: Vec<f64> = stats.iter().map(Welford::sample_variance).collect();
    Ok(EmpiricalMoments {
        nodes: nodes.to_vec(),
        samples: cfg.samples,
        mean: stats.iter().map(|w| w.mean).collect(),
        std_error: variance.iter().map(|v| (v / cfg.samples as f64).sqrt()).collect(),
        variance,
    })
}

/// Fraction of sampled trees containing each edge, in edge-id order.
pub fn edge_frequencies(g: &Graph, cfg: &SamplerConfig) -> Result<Vec<f64>> {
    check_config(cfg)?;
    let sampler = WilsonSampler::new(g, cfg.root)?;
    let counts = sampler
        .chunked(
            cfg,
            || vec![0u64; g.n_edges()],
            |acc, t| {
                for &id in &t.edges {
                    acc[id] += 1;
                }
            },
        )
        .into_iter()
        .reduce(|a, b| a.into_iter().zip(b).map(|(x, y)| x + y).collect())
        .expect("at least one chunk");
    Ok(counts.into_iter().map(|c| c as f64 / cfg.samples as f64).collect())
}
