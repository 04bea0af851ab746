//! Runs the invariant battery on seeded random graphs and prints one line
//! per invariant.
//!
//! cargo run --example verify_suite -- [nodes] [count] [seed]

use h2_consensus::verify::{run_random_suite, RandomSuite};

fn main() -> h2_consensus::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d = RandomSuite::default();
    let suite = RandomSuite {
        nodes: args.first().map_or(d.nodes, |s| s.parse().expect("nodes")),
        count: args.get(1).map_or(d.count, |s| s.parse().expect("count")),
        seed: args.get(2).map_or(d.seed, |s| s.parse().expect("seed")),
        ..d
    };
    let report = run_random_suite(&suite)?;
    for inv in &report.invariants {
        println!(
            "{} {:<32} {:.2e} (tol {:.0e}, {} instances)",
            if inv.passed { "PASS" } else { "FAIL" },
            inv.name,
            inv.max_violation,
            inv.tolerance,
            inv.instances
        );
    }
    std::process::exit(if report.all_passed { 0 } else { 1 });
}
