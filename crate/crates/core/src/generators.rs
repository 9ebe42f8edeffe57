//! Seeded random graph families used by tests, benchmarks and the CLI.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::factorizer::stream_rng;
use crate::multigraph::MultiGraph;

/// Erdős–Rényi `G(n, p)`; weights drawn log-uniformly from `[lo, hi]`
/// (all ones when `lo == hi == 1`).
pub fn erdos_renyi(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> MultiGraph {
    let mut rng = stream_rng(seed, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v, log_uniform(&mut rng, lo, hi)));
            }
        }
    }
    MultiGraph::from_edge_list(n, &edges).expect("generated edges are valid")
}

/// The first connected `G(n, p)` sample at or after `seed`, with its seed.
pub fn connected_erdos_renyi(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> (MultiGraph, u64) {
    (seed..)
        .map(|s| (erdos_renyi(n, p, lo, hi, s), s))
        .find(|(g, _)| g.is_connected())
        .expect("unbounded search")
}

/// A random spanning tree plus each remaining pair with probability `p`;
/// always connected.
pub fn random_connected(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> MultiGraph {
    let mut rng = stream_rng(seed, 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i], order[j], log_uniform(&mut rng, lo, hi)));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v, log_uniform(&mut rng, lo, hi)));
            }
        }
    }
    MultiGraph::from_edge_list(n, &edges).expect("generated edges are valid")
}

/// `degree`-regular multigraph as a union of `degree / 2` random Hamiltonian
/// cycles; connected, parallel edges possible. `degree` must be even.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> MultiGraph {
    assert!(degree % 2 == 0 && degree >= 2, "degree must be even and positive");
    assert!(n >= 3, "need at least 3 vertices");
    let mut rng = stream_rng(seed, 2);
    let mut edges = Vec::with_capacity(n * degree / 2);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..degree / 2 {
        order.shuffle(&mut rng);
        for i in 0..n {
            edges.push((order[i], order[(i + 1) % n], 1.0));
        }
    }
    MultiGraph::from_edge_list(n, &edges).expect("generated edges are valid")
}

/// Star `K_{1, leaves}` with center 0 and unit weights.
pub fn star(leaves: usize) -> MultiGraph {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v, 1.0)).collect();
    MultiGraph::from_edge_list(leaves + 1, &edges).expect("valid star")
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let (a, b) = (lo.ln(), hi.ln());
    (a + (b - a) * rng.gen::<f64>()).exp()
}
