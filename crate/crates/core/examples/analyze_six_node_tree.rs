//! H2 breakdown of the six-node tree under both time-scale assignments.
//!
//! cargo run --example analyze_six_node_tree

use h2_consensus::graph::{Graph, Network};
use h2_consensus::h2::{analyze, tree_h2_closed_form};
use h2_consensus::{NoiseModel, ScaleWeightPair};

fn main() -> h2_consensus::Result<()> {
    let edges = [(1, 2), (2, 3), (3, 4), (3, 5), (3, 6)];
    let g = Graph::new(6, &edges)?;
    let net = Network::new(g.clone())?;
    println!("degrees {:?}", g.degrees());

    for eps in [[0.1, 0.2, 0.4, 0.1, 0.1, 0.1], [0.1, 0.2, 0.1, 0.1, 0.1, 0.4]] {
        let sw = ScaleWeightPair::from_slices(&eps, &[1.0; 5])?;
        let report = analyze(&net, &sw, &NoiseModel::default())?;
        let sep = report.separable.expect("default noise is separable");
        println!("eps {eps:?}");
        println!("  term_W {:.6}  term_E {:.6}", sep.sigma.term_w, sep.sigma.term_e);
        println!("  H2^2 {:.6} (Lyapunov)  {:.6} (tree formula)", report.h2_sigma.squared, tree_h2_closed_form(&g, &sw, 1.0, 1.0)?);
        println!("  K {}", sep.k_ratio);
    }
    Ok(())
}
