//! Invariant battery run by `h2net verify`.
//!
//! Each check reports the largest violation seen across all instances. A
//! violation is a nonnegative number compared against the check's tolerance.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::bounds::{covariance_h2_bounds, extreme_eigenvalues};
use crate::error::Result;
use crate::graph::Network;
use crate::h2::{
    closed_form_gramian, controllability_gramian, cycle_contributions, h2_norm, k_ratio,
    separated_h2, tree_h2_closed_form,
};
use crate::operators::{
    edge_system, scaled_edge_laplacian, scaled_laplacian, similarity_transform, NoiseModel,
    OutputMode, ScaleWeightPair,
};
use crate::random;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub instances: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub instances: usize,
    pub invariants: Vec<InvariantResult>,
    pub all_passed: bool,
}

/// Accumulates per-invariant worst cases.
#[derive(Debug, Default)]
pub struct Battery {
    checks: BTreeMap<&'static str, (f64, f64, usize)>,
    instances: usize,
}

impl Battery {
    pub fn record(&mut self, name: &'static str, violation: f64, tolerance: f64) {
        let entry = self.checks.entry(name).or_insert((0.0, tolerance, 0));
        // NaN counts as a failure
        entry.0 = if violation.is_nan() || entry.0.is_nan() {
            f64::NAN
        } else {
            entry.0.max(violation)
        };
        entry.2 += 1;
    }

    pub fn finish(self) -> VerifyReport {
        let invariants: Vec<InvariantResult> = self
            .checks
            .into_iter()
            .map(|(name, (v, tol, count))| InvariantResult {
                name: name.to_string(),
                max_violation: v,
                tolerance: tol,
                instances: count,
                passed: v <= tol,
            })
            .collect();
        let all_passed = invariants.iter().all(|r| r.passed);
        VerifyReport {
            instances: self.instances,
            invariants,
            all_passed,
        }
    }

    /// Runs every check on one instance. `alt_trees` are additional spanning
    /// trees used for the tree-invariance checks.
    pub fn check_instance(
        &mut self,
        net: &Network,
        sw: &ScaleWeightPair,
        noise: &NoiseModel,
        alt_trees: &[Network],
    ) -> Result<()> {
        self.instances += 1;
        let (inc, cb) = (&net.incidence, &net.cut);
        let n = inc.node_count();
        let t = inc.tree_count();

        self.record(
            "incidence_column_sums",
            inc.d.row_sum().amax(),
            0.0,
        );
        self.record(
            "cut_basis_identity",
            (&inc.d_tree * &cb.r - &inc.d).amax(),
            1e-10,
        );

        // similarity transform and spectrum
        let sim = similarity_transform(inc, cb, sw)?;
        let a = scaled_edge_laplacian(inc, sw)? * crate::operators::cycle_gram(cb, sw);
        let mut block = DMatrix::zeros(n, n);
        block.view_mut((0, 0), (t, t)).copy_from(&a);
        let node_op = scaled_laplacian(inc, sw)?;
        self.record(
            "similarity_transform",
            (&sim.s_v_inv * &node_op * &sim.s_v - block).amax(),
            1e-7,
        );
        self.record(
            "similarity_inverse",
            (&sim.s_v * &sim.s_v_inv - DMatrix::identity(n, n)).amax(),
            1e-8,
        );
        let mut node_ev: Vec<f64> = node_op.complex_eigenvalues().iter().map(|z| z.re).collect();
        let mut edge_ev: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.re).collect();
        edge_ev.push(0.0);
        node_ev.sort_by(f64::total_cmp);
        edge_ev.sort_by(f64::total_cmp);
        let spectrum = node_ev
            .iter()
            .zip(&edge_ev)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        self.record("spectrum_preserved", spectrum, 1e-7);
        let min_re = edge_ev[1..].iter().copied().fold(f64::INFINITY, f64::min);
        self.record("positive_stability", (-min_re).max(0.0), 0.0);

        // Lyapunov route for the supplied noise
        let sys = edge_system(inc, cb, sw, noise, OutputMode::Sigma)?;
        let gram = controllability_gramian(&sys)?;
        let (g_lo, _) = extreme_eigenvalues(&gram.x);
        self.record("gramian_positive_definite", (-g_lo).max(0.0), 0.0);
        let hat = edge_system(inc, cb, sw, noise, OutputMode::SigmaHat)?;
        for (s, name) in [(&sys, "covariance_bounds_sigma"), (&hat, "covariance_bounds_sigma_hat")] {
            let b = covariance_h2_bounds(inc, cb, sw, noise, s.mode)?;
            self.record(name, (-b.slack()).max(0.0), 1e-9);
        }

        // separable quantities at the supplied intensities
        let (so, sv) = (noise.sigma_omega, noise.sigma_v);
        let sep_noise = NoiseModel::separable(so, sv);
        let sep_sigma = edge_system(inc, cb, sw, &sep_noise, OutputMode::Sigma)?;
        let sep_hat = edge_system(inc, cb, sw, &sep_noise, OutputMode::SigmaHat)?;
        let numeric = controllability_gramian(&sep_sigma)?;
        let closed = closed_form_gramian(inc, cb, sw, so, sv)?;
        self.record(
            "closed_form_gramian",
            (&numeric.x - &closed.x).amax(),
            1e-7,
        );

        let h_sigma = h2_norm(&sep_sigma)?.squared;
        let h_hat = h2_norm(&sep_hat)?.squared;
        let s_sigma = separated_h2(inc, cb, sw, so, sv, OutputMode::Sigma)?;
        let s_hat = separated_h2(inc, cb, sw, so, sv, OutputMode::SigmaHat)?;
        self.record("decomposition_sigma", (s_sigma.total() - h_sigma).abs(), 1e-8);
        self.record("decomposition_sigma_hat", (s_hat.total() - h_hat).abs(), 1e-8);

        let cyc = cycle_contributions(inc, cb, sw, so, sv)?;
        self.record(
            "hat_relation_w",
            (s_sigma.term_w - s_hat.term_w - cyc.cycle_w).abs(),
            1e-9,
        );
        self.record(
            "hat_relation_e",
            (s_sigma.term_e - s_hat.term_e - cyc.cycle_e).abs(),
            1e-9,
        );
        self.record(
            "cycle_terms_nonnegative",
            (-cyc.cycle_w.min(cyc.cycle_e)).max(0.0),
            1e-12,
        );

        let les = scaled_edge_laplacian(inc, sw)?;
        let trace = (cb.r.transpose() * &les * &cb.r).trace();
        let degree_sum: f64 = net
            .graph
            .degrees()
            .iter()
            .zip(sw.epsilon().iter())
            .map(|(&d, e)| d as f64 / e)
            .sum();
        self.record("trace_identity", (trace - degree_sum).abs(), 1e-9);

        let k = k_ratio(inc, cb, sw)?;
        let k_violation = if k > 0.0 { (k - 1.0).max(0.0) } else { 1.0 };
        self.record("k_ratio_in_unit_interval", k_violation, 1e-12);
        if net.graph.is_tree() {
            self.record("k_ratio_one_on_trees", (k - 1.0).abs(), 1e-12);
            let formula = tree_h2_closed_form(&net.graph, sw, so, sv)?;
            self.record("tree_formula", (formula - h_sigma).abs(), 1e-8);
        }

        // cycle states are determined by tree states
        let x = DVector::from_fn(n, |i, _| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5);
        let x_tau = inc.d_tree.transpose() * &x;
        let x_c = inc.d_cycle.transpose() * &x;
        self.record(
            "cycle_state_reconstruction",
            (x_c - cb.t_tree_cycle.transpose() * x_tau).amax(),
            1e-8,
        );

        for alt in alt_trees {
            let alt_sw = reorder(net, alt, sw);
            let (ai, ac) = (&alt.incidence, &alt.cut);
            let alt_sys = edge_system(ai, ac, &alt_sw, &sep_noise, OutputMode::Sigma)?;
            let alt_s = separated_h2(ai, ac, &alt_sw, so, sv, OutputMode::Sigma)?;
            self.record(
                "spanning_tree_invariance",
                (h2_norm(&alt_sys)?.squared - h_sigma)
                    .abs()
                    .max((alt_s.term_w - s_sigma.term_w).abs())
                    .max((alt_s.term_e - s_sigma.term_e).abs()),
                1e-8,
            );
        }
        Ok(())
    }
}

/// Re-indexes edge weights from one ordering of a graph to another.
pub fn reorder(from: &Network, to: &Network, sw: &ScaleWeightPair) -> ScaleWeightPair {
    let mut w = DVector::zeros(sw.weights().len());
    for (k, &e) in from.ordering.edges().iter().enumerate() {
        w[to.ordering.index_of(e).expect("same graph")] = sw.weights()[k];
    }
    ScaleWeightPair::new(sw.epsilon().clone(), w).expect("already validated")
}

/// Random positive definite factor `F` (so `F Fᵀ` is a covariance).
pub fn random_factor<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let f = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    f + DMatrix::identity(dim, dim) * (dim as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomSuite {
    pub nodes: usize,
    pub count: usize,
    pub seed: u64,
    pub edge_probability: f64,
    pub trees_only: bool,
}

impl Default for RandomSuite {
    fn default() -> Self {
        RandomSuite {
            nodes: 10,
            count: 50,
            seed: 2024,
            edge_probability: random::DEFAULT_EDGE_PROBABILITY,
            trees_only: false,
        }
    }
}

/// Runs the battery on seeded random instances. Every other instance uses
/// random non-separable covariance factors for the bound checks.
pub fn run_random_suite(suite: &RandomSuite) -> Result<VerifyReport> {
    let mut rng = random::rng(suite.seed);
    let mut battery = Battery::default();
    for k in 0..suite.count {
        let graph = if suite.trees_only {
            random::random_tree(&mut rng, suite.nodes)
        } else {
            random::connected_graph(&mut rng, suite.nodes, suite.edge_probability)
        };
        let net = Network::new(graph.clone())?;
        let sw = random::scale_weights(&mut rng, suite.nodes, graph.edge_count(), (0.1, 2.0));
        let alt: Vec<Network> = (0..2)
            .map(|_| Network::with_tree(graph.clone(), &random::random_spanning_tree(&mut rng, &graph)))
            .collect::<Result<_>>()?;
        let noise = if k % 2 == 1 {
            let mut nm = NoiseModel::general(
                random_factor(&mut rng, suite.nodes),
                random_factor(&mut rng, graph.edge_count()),
            );
            nm.sigma_omega = rng.random_range(0.5..2.0);
            nm.sigma_v = rng.random_range(0.5..2.0);
            nm
        } else {
            NoiseModel::separable(rng.random_range(0.5..2.0), rng.random_range(0.5..2.0))
        };
        battery.check_instance(&net, &sw, &noise, &alt)?;
    }
    Ok(battery.finish())
}
