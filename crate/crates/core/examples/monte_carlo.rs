//! Empirical squared H2 norm from simulated noisy consensus, next to the
//! analytic value.
//!
//! cargo run --release --example monte_carlo -- [spec.json] [seed]

use std::path::PathBuf;

use h2_consensus::h2::h2_norm;
use h2_consensus::operators::edge_system;
use h2_consensus::sim::{simulate_edge_system, simulate_node_system, SimConfig};
use h2_consensus::spec_file::NetworkSpecFile;
use h2_consensus::OutputMode;

fn main() -> h2_consensus::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/triangle.json")
    });
    let seed: u64 = args.get(1).map_or(0, |s| s.parse().expect("seed"));
    let l = NetworkSpecFile::read(&path)?.load(None)?;
    let cfg = SimConfig { seed, ..SimConfig::default() };

    let sys = edge_system(&l.net.incidence, &l.net.cut, &l.params, &l.noise, OutputMode::Sigma)?;
    let analytic = h2_norm(&sys)?.squared;
    let edge = simulate_edge_system(&sys, &cfg)?;
    let node = simulate_node_system(&l.net, &l.params, &l.noise, OutputMode::Sigma, &cfg)?;

    println!("analytic    {analytic:.5}");
    for (label, r) in [("edge level", &edge), ("node level", &node.result)] {
        let z = (r.h2_squared_estimate - analytic) / r.standard_error;
        println!("{label}  {:.5} +- {:.5}  (z = {z:+.2})", r.h2_squared_estimate, r.standard_error);
    }
    println!("max |x_c - T^T x_tau| at the horizon: {:.2e}", node.cycle_residual_max);
    Ok(())
}
