#![allow(dead_code)]

use std::path::PathBuf;

use h2_consensus::graph::Network;
use h2_consensus::random::{self, RandomInstance};
use h2_consensus::spec_file::{LoadedNetwork, NetworkSpecFile};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const P: f64 = 0.15;
pub const RANGE: (f64, f64) = (0.1, 2.0);

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load_fixture(name: &str) -> LoadedNetwork {
    NetworkSpecFile::read(&fixture(name)).unwrap().load(None).unwrap()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &v| a.max(v.abs()))
}

/// A random instance with `3 ≤ n ≤ 12`.
pub fn small_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let n = rng.random_range(3..=12);
    random::instance(rng, n, P, RANGE)
}

/// Like [`small_instance`] but redrawn until the graph has a cycle.
pub fn cyclic_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    loop {
        let inst = small_instance(rng);
        if !inst.net.graph.is_tree() {
            return inst;
        }
    }
}

/// Up to `k` spanning trees of `net`'s graph with pairwise different edge sets,
/// the default one first.
pub fn distinct_trees(rng: &mut ChaCha8Rng, net: &Network, k: usize) -> Vec<Network> {
    let g = &net.graph;
    let mut seen: Vec<Vec<(usize, usize)>> = vec![sorted(net.ordering.tree_edges())];
    let mut out = vec![net.clone()];
    for _ in 0..200 {
        if out.len() == k {
            break;
        }
        let tree = random::random_spanning_tree(rng, g);
        let key = sorted(&tree);
        if !seen.contains(&key) {
            seen.push(key);
            out.push(Network::with_tree(g.clone(), &tree).unwrap());
        }
    }
    out
}

fn sorted(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut v = edges.to_vec();
    v.sort();
    v
}
