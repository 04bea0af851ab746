//! The edge-agreement change of coordinates splits the node dynamics into
//! the tree-edge block and the consensus mode.
//!
//! cargo run --example similarity_transform

use h2_consensus::graph::{Graph, Network};
use h2_consensus::operators::{cycle_gram, scaled_edge_laplacian, scaled_laplacian, similarity_transform};
use h2_consensus::ScaleWeightPair;

fn main() -> h2_consensus::Result<()> {
    let g = Graph::new(3, &[(1, 2), (2, 3), (1, 3)])?;
    let net = Network::new(g)?;
    let sw = ScaleWeightPair::from_slices(&[1.0, 0.5, 2.0], &[1.0, 2.0, 0.5])?;
    let (inc, cb) = (&net.incidence, &net.cut);

    println!("tree edges {:?}, cycle edges {:?}", net.ordering.tree_edges(), net.ordering.cycle_edges());
    println!("T = {:.4}", cb.t_tree_cycle);

    let pair = similarity_transform(inc, cb, &sw)?;
    let node = scaled_laplacian(inc, &sw)?;
    let a = scaled_edge_laplacian(inc, &sw)? * cycle_gram(cb, &sw);
    println!("S^-1 E^-1 L_w S = {:.4}", &pair.s_v_inv * &node * &pair.s_v);
    println!("A = {:.4}", a);
    println!("eig(A) = {:.4}", a.complex_eigenvalues().map(|z| z.re));
    Ok(())
}
