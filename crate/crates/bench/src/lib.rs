//! Workloads shared by the benchmarks.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use treedeg::Graph;

/// `side × side` grid with unit weights.
pub fn grid(side: usize) -> Graph {
    let id = |r: usize, c: usize| r * side + c;
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                edges.push((id(r, c), id(r, c + 1), 1.0, 1.0));
            }
            if r + 1 < side {
                edges.push((id(r, c), id(r + 1, c), 1.0, 1.0));
            }
        }
    }
    Graph::new(side * side, false, edges).expect("grid is valid")
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, false, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0, 1.0)))).expect("valid")
}

/// Connected graph on `n` nodes with about `extra * n` edges beyond a random
/// tree, weights in `[0.5, 2)` and integer degree weights in `1..=max_omega`.
pub fn random_sparse(n: usize, extra: usize, max_omega: u32, seed: u64) -> Graph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    let mut add = |u: usize, v: usize, rng: &mut ChaCha20Rng| {
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v, rng.random_range(0.5..2.0), rng.random_range(1..=max_omega) as f64));
        }
    };
    for v in 1..n {
        let u = rng.random_range(0..v);
        add(u, v, &mut rng);
    }
    for _ in 0..extra * n {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        add(u, v, &mut rng);
    }
    Graph::new(n, false, edges).expect("valid")
}
