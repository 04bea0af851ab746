//! Eigenvalue brackets on the squared H2 norm for a network with
//! correlated (non-separable) noise, read from a spec file.
//!
//! cargo run --example covariance_bounds -- [spec.json]

use std::path::PathBuf;

use h2_consensus::bounds::{covariance_h2_bounds, gramian_trace_bounds};
use h2_consensus::operators::edge_system;
use h2_consensus::spec_file::NetworkSpecFile;
use h2_consensus::OutputMode;

fn main() -> h2_consensus::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/square_general_noise.json")
    });
    let l = NetworkSpecFile::read(&path)?.load(None)?;
    let (inc, cb) = (&l.net.incidence, &l.net.cut);

    for mode in [OutputMode::Sigma, OutputMode::SigmaHat] {
        let sys = edge_system(inc, cb, &l.params, &l.noise, mode)?;
        let g = gramian_trace_bounds(&sys)?;
        let c = covariance_h2_bounds(inc, cb, &l.params, &l.noise, mode)?;
        println!("{}", mode.name());
        println!("  gramian trace  {:>10.5} <= {:.5} <= {:.5}", g.lower, g.value, g.upper);
        println!("  covariance     {:>10.5} <= {:.5} <= {:.5}", c.lower, c.value, c.upper);
        let k = c.components;
        println!("  lambda(Q) in [{:.4}, {:.4}], lambda(G) in [{:.4}, {:.4}]", k.omega_cov_min, k.omega_cov_max, k.gamma_cov_min, k.gamma_cov_max);
    }
    Ok(())
}
