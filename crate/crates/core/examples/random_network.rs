//! Prints a JSON network spec for a seeded random connected graph.
//!
//! cargo run --example random_network -- [nodes] [seed] [edge_prob]

use h2_consensus::random;
use h2_consensus::spec_file::{NetworkSpecFile, NoiseSpec};
use h2_consensus::Network;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(10, |s| s.parse().expect("node count"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));
    let p: f64 = args.get(2).map_or(random::DEFAULT_EDGE_PROBABILITY, |s| s.parse().expect("probability"));

    let mut rng = random::rng(seed);
    let graph = random::connected_graph(&mut rng, n, p);
    let net = Network::new(graph).expect("connected");
    let params = random::scale_weights(&mut rng, n, net.graph.edge_count(), (0.5, 2.0));
    let spec = NetworkSpecFile::from_network(
        &net,
        &params,
        Some(NoiseSpec {
            sigma_omega: 1.0,
            sigma_v: 1.0,
            omega: None,
            gamma: None,
        }),
    );
    println!("{}", spec.to_json());
}
