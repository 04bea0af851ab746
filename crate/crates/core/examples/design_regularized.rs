//! Decentralized time-scale rule: every node picks its own time scale from
//! its degree alone.
//!
//! cargo run --example design_regularized -- [h] [r]

use h2_consensus::design::{p2_objective, p2_solve, p2_unconstrained, P2Config};
use h2_consensus::graph::{Graph, Network};

fn main() -> h2_consensus::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let h: f64 = args.first().map_or(1.0, |s| s.parse().expect("h"));
    let r: f64 = args.get(1).map_or(1.0, |s| s.parse().expect("r"));
    let cfg = P2Config { h, r, eps_min: 0.05, eps_max: 2.0 };

    let g = Graph::new(6, &[(1, 2), (2, 3), (3, 4), (3, 5), (3, 6)])?;
    let net = Network::new(g.clone())?;
    let sol = p2_solve(&g, &cfg)?;
    for (i, d) in g.degrees().iter().enumerate() {
        println!(
            "node {} deg {} -> eps {:.4} (unclamped {:.4}, {:?})",
            i + 1,
            d,
            sol.epsilon[i],
            p2_unconstrained(*d as f64, h, r),
            sol.active_constraints[i]
        );
    }
    println!("objective {:.6}, via trace {:.6}", sol.objective, p2_objective(&net.incidence, &net.cut, &sol.epsilon, &cfg)?);
    Ok(())
}
