//! Budgeted time-scale design on a seeded random graph: greedy knapsack
//! against the projected-gradient reference.
//!
//! cargo run --example design_budgeted -- [mu] [seed]

use h2_consensus::design::{p1_solve, p1_solve_reference, P1Config};
use h2_consensus::random;
use h2_consensus::Network;
use nalgebra::DVector;

fn main() -> h2_consensus::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mu: f64 = args.first().map_or(510.5, |s| s.parse().expect("mu"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));

    let mut rng = random::rng(seed);
    let g = random::connected_graph(&mut rng, 10, random::DEFAULT_EDGE_PROBABILITY);
    let net = Network::new(g.clone())?;
    let w = DVector::from_element(g.edge_count(), 1.0);
    let cfg = P1Config { eps_min: 0.01, eps_max: 2.0, mu };

    let greedy = p1_solve(&net, &w, &cfg)?;
    let reference = p1_solve_reference(&net, &w, &cfg)?;
    println!("node  degree  epsilon   constraint");
    for (i, d) in g.degrees().iter().enumerate() {
        println!("{:>4}  {:>6}  {:>8.4}  {:?}", i + 1, d, greedy.epsilon[i], greedy.active_constraints[i]);
    }
    println!("sum 1/eps = {} (mu = {mu})", greedy.inverse_sum());
    println!("objective greedy {:.10}  reference {:.10}", greedy.objective, reference.objective);
    Ok(())
}
