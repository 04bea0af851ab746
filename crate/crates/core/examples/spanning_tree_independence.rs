//! The full-output norm and both separated terms do not depend on the
//! spanning tree; the tree-state-only output does.
//!
//! cargo run --example spanning_tree_independence

use h2_consensus::graph::{Graph, Network};
use h2_consensus::h2::separated_h2;
use h2_consensus::verify::reorder;
use h2_consensus::{OutputMode, ScaleWeightPair};

fn main() -> h2_consensus::Result<()> {
    // a 4-cycle with a chord
    let g = Graph::new(4, &[(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)])?;
    let base = Network::new(g.clone())?;
    let sw = ScaleWeightPair::from_slices(&[0.5, 1.0, 1.5, 0.8], &[1.0, 0.7, 2.0, 1.2, 0.5])?;

    let trees: [&[(usize, usize)]; 3] = [
        base.ordering.tree_edges(),
        &[(1, 2), (2, 3), (3, 4)],
        &[(1, 4), (3, 4), (2, 3)],
    ];
    println!("{:<26} {:>10} {:>10} {:>10} {:>12}", "tree", "term_W", "term_E", "H2^2", "H2^2 (hat)");
    for tree in trees {
        let net = Network::with_tree(g.clone(), tree)?;
        let p = reorder(&base, &net, &sw);
        let s = separated_h2(&net.incidence, &net.cut, &p, 1.0, 1.0, OutputMode::Sigma)?;
        let h = separated_h2(&net.incidence, &net.cut, &p, 1.0, 1.0, OutputMode::SigmaHat)?;
        println!(
            "{:<26} {:>10.6} {:>10.6} {:>10.6} {:>12.6}",
            format!("{:?}", net.ordering.tree_edges()),
            s.term_w,
            s.term_e,
            s.total(),
            h.total()
        );
    }
    Ok(())
}
