//! Seeded random networks for property suites and the `verify` battery.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, Graph, Network};
use crate::operators::ScaleWeightPair;

/// Edge probability used for random test graphs.
pub const DEFAULT_EDGE_PROBABILITY: f64 = 0.15;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi `G(n, p)` conditioned on connectivity (by rejection).
pub fn connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    assert!(n >= 2 && p > 0.0);
    loop {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        if let Ok(g) = Graph::new(n, &edges) {
            return g;
        }
    }
}

/// Random recursive tree: node `k` attaches to a uniform earlier node.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Graph {
    let edges: Vec<Edge> = (2..=n).map(|k| (rng.random_range(1..k), k)).collect();
    Graph::new(n, &edges).expect("recursive trees are connected")
}

/// A uniformly random spanning tree of `g` (random edge order + union-find),
/// returned in the order the edges were accepted.
pub fn random_spanning_tree<R: Rng>(rng: &mut R, g: &Graph) -> Vec<Edge> {
    let mut edges = g.edges().to_vec();
    for i in (1..edges.len()).rev() {
        edges.swap(i, rng.random_range(0..=i));
    }
    let mut parent: Vec<usize> = (0..g.node_count()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(g.node_count() - 1);
    for (i, j) in edges {
        let (a, b) = (find(&mut parent, i - 1), find(&mut parent, j - 1));
        if a != b {
            parent[a] = b;
            tree.push((i, j));
        }
    }
    tree
}

/// Time scales and weights drawn uniformly from `range`.
pub fn scale_weights<R: Rng>(rng: &mut R, n: usize, m: usize, range: (f64, f64)) -> ScaleWeightPair {
    let eps = DVector::from_fn(n, |_, _| rng.random_range(range.0..range.1));
    let w = DVector::from_fn(m, |_, _| rng.random_range(range.0..range.1));
    ScaleWeightPair::new(eps, w).expect("positive range")
}

/// A connected graph with its default spanning tree and random parameters.
pub struct RandomInstance {
    pub net: Network,
    pub params: ScaleWeightPair,
}

pub fn instance<R: Rng>(rng: &mut R, n: usize, p: f64, range: (f64, f64)) -> RandomInstance {
    let net = Network::new(connected_graph(rng, n, p)).expect("connected");
    let params = scale_weights(rng, n, net.graph.edge_count(), range);
    RandomInstance { net, params }
}
