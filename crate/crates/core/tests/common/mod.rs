#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use treedeg::{Graph, NodeId};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, false, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0, 1.0)))).unwrap()
}

/// Hub `rim` joined to every node of the cycle `0..rim`.
pub fn wheel(rim: usize) -> Graph {
    let edges = (0..rim)
        .map(|i| (i, (i + 1) % rim, 1.0, 1.0))
        .chain((0..rim).map(|i| (i, rim, 1.0, 1.0)));
    Graph::new(rim + 1, false, edges).unwrap()
}

pub fn weighted_triangle() -> Graph {
    Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 2, 2.0, 1.0), (0, 2, 3.0, 1.0)]).unwrap()
}

/// Connected undirected graph: a random spanning tree plus each remaining
/// pair with probability `density`.
pub fn random_connected(
    rng: &mut ChaCha20Rng,
    n: usize,
    density: f64,
    mut weight: impl FnMut(&mut ChaCha20Rng) -> (f64, f64),
) -> Graph {
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !pairs.contains(&(u, v)) && rng.random::<f64>() < density {
                pairs.push((u, v));
            }
        }
    }
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| {
            let (w, omega) = weight(rng);
            (u, v, w, omega)
        })
        .collect();
    Graph::new(n, false, edges).unwrap()
}

/// Directed graph in which every node reaches `root`: each other node gets
/// an edge towards an earlier node of a random order starting at the root,
/// then each remaining ordered pair is added with probability `density`.
pub fn random_rooted(
    rng: &mut ChaCha20Rng,
    n: usize,
    root: NodeId,
    density: f64,
    mut weight: impl FnMut(&mut ChaCha20Rng) -> (f64, f64),
) -> Graph {
    let mut order: Vec<NodeId> = (0..n).filter(|&x| x != root).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order.insert(0, root);
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((order[i], order[rng.random_range(0..i)]));
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && !pairs.contains(&(u, v)) && rng.random::<f64>() < density {
                pairs.push((u, v));
            }
        }
    }
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| {
            let (w, omega) = weight(rng);
            (u, v, w, omega)
        })
        .collect();
    Graph::new(n, true, edges).unwrap()
}

/// `w ~ U(0.1, 10)`, `omega ~ U(-2, 2)`.
pub fn real_weights(rng: &mut ChaCha20Rng) -> (f64, f64) {
    (rng.random_range(0.1..10.0), rng.random_range(-2.0..2.0))
}

/// `w ~ U(0.1, 10)`, `omega` uniform on `{0, 1, 2, 3}`.
pub fn integer_weights(rng: &mut ChaCha20Rng) -> (f64, f64) {
    (rng.random_range(0.1..10.0), rng.random_range(0..4u32) as f64)
}

pub fn rel(a: f64, b: f64) -> f64 {
    treedeg::relative_difference(a, b)
}
