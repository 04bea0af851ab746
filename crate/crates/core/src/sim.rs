//! Monte Carlo estimation of the squared H2 norm.
//!
//! The noise-driven system `ẋ = F x + G ξ` (unit-intensity white `ξ`) is
//! stepped from `x_0 = 0`, and `E‖z‖²` is estimated by the time average of
//! `‖z_k‖²` after a burn-in, then averaged over independent trials.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::operators::{
    scaled_laplacian, EdgeSystem, NoiseModel, OutputMode, ScaleWeightPair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `x_{k+1} = x_k + dt F x_k + √dt G ξ_k`.
    #[default]
    EulerMaruyama,
    /// Exact transition `e^{F dt}` with the exact one-step noise covariance
    /// (Van Loan). No step-size bias.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub burn_in: f64,
    pub trials: usize,
    pub seed: u64,
    pub integrator: Integrator,
    /// Record every `stride`-th step of trial 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_stride: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            horizon: 200.0,
            burn_in: 20.0,
            trials: 8,
            seed: 0,
            integrator: Integrator::EulerMaruyama,
            trajectory_stride: None,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.dt.is_finite() && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter("dt and horizon must be positive".into()));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "burn_in must lie in [0, horizon), got {}",
                self.burn_in
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        if self.trajectory_stride == Some(0) {
            return Err(Error::InvalidParameter("trajectory stride must be positive".into()));
        }
        if self.steps() <= self.burn_steps() {
            return Err(Error::InvalidParameter("no samples after burn-in".into()));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    fn burn_steps(&self) -> usize {
        (self.burn_in / self.dt).floor() as usize
    }
}

/// One recorded sample: time, tree-edge state, output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x_tau: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub h2_squared_estimate: f64,
    pub standard_error: f64,
    pub per_trial: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_sample: Option<Vec<TrajectorySample>>,
}

/// Mean and standard error of independent trial means.
pub fn estimate_h2(trial_means: &[f64]) -> Result<(f64, f64)> {
    let k = trial_means.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let mean = trial_means.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return Ok((mean, 0.0));
    }
    let var = trial_means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok((mean, (var / k as f64).sqrt()))
}

/// Largest Euler–Maruyama step keeping `x ← (I - dt A) x` mean stable,
/// `min_λ 2 Re λ / |λ|²` over the eigenvalues of `A`.
pub fn max_stable_dt(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| 2.0 * z.re / z.norm_sqr())
        .fold(f64::INFINITY, f64::min)
}

/// `x_{k+1} = Φ x_k + L ξ_k` with `ξ_k ~ N(0, I)`.
struct Stepper {
    transition: DMatrix<f64>,
    noise: DMatrix<f64>,
}

impl Stepper {
    fn new(drift: &DMatrix<f64>, diffusion: &DMatrix<f64>, dt: f64, integrator: Integrator) -> Self {
        let d = drift.nrows();
        match integrator {
            Integrator::EulerMaruyama => Stepper {
                transition: DMatrix::identity(d, d) + drift * dt,
                noise: diffusion * dt.sqrt(),
            },
            Integrator::Exact => {
                // Van Loan: exp([[-F, GGᵀ], [0, Fᵀ]] dt) = [[·, Φ⁻¹Q], [0, Φᵀ]]
                let mut block = DMatrix::zeros(2 * d, 2 * d);
                block.view_mut((0, 0), (d, d)).copy_from(&(-drift * dt));
                block
                    .view_mut((0, d), (d, d))
                    .copy_from(&(diffusion * diffusion.transpose() * dt));
                block.view_mut((d, d), (d, d)).copy_from(&(drift.transpose() * dt));
                let e = block.exp();
                let phi = e.view((d, d), (d, d)).transpose();
                let q = &phi * e.view((0, d), (d, d));
                let q = (&q + q.transpose()) * 0.5;
                let eig = q.symmetric_eigen();
                let mut factor = eig.eigenvectors.clone();
                for (mut col, &lam) in factor.column_iter_mut().zip(eig.eigenvalues.iter()) {
                    col *= lam.max(0.0).sqrt();
                }
                Stepper {
                    transition: phi,
                    noise: factor,
                }
            }
        }
    }
}

/// Output map applied to the simulated state.
struct Observer {
    /// Tree-edge states from the simulated state.
    to_tree: Option<DMatrix<f64>>,
    output: DMatrix<f64>,
}

struct TrialOutcome {
    mean: f64,
    trajectory: Option<Vec<TrajectorySample>>,
    final_state: DVector<f64>,
}

fn run_trial(
    stepper: &Stepper,
    observer: &Observer,
    cfg: &SimConfig,
    trial: usize,
    record: bool,
) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);

    let d = stepper.transition.nrows();
    let mut x = DVector::<f64>::zeros(d);
    let mut next = DVector::<f64>::zeros(d);
    let mut xi = DVector::<f64>::zeros(stepper.noise.ncols());
    let mut tree = DVector::<f64>::zeros(observer.output.ncols());
    let mut z = DVector::<f64>::zeros(observer.output.nrows());

    let (steps, burn) = (cfg.steps(), cfg.burn_steps());
    let stride = cfg.trajectory_stride.filter(|_| record);
    let mut trajectory = stride.map(|_| Vec::new());
    let mut acc = 0.0;

    for k in 1..=steps {
        for v in xi.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        next.gemv(1.0, &stepper.transition, &x, 0.0);
        next.gemv(1.0, &stepper.noise, &xi, 1.0);
        std::mem::swap(&mut x, &mut next);

        match &observer.to_tree {
            Some(map) => tree.gemv(1.0, map, &x, 0.0),
            None => tree.copy_from(&x),
        }
        z.gemv(1.0, &observer.output, &tree, 0.0);
        if k > burn {
            acc += z.norm_squared();
        }
        if let (Some(s), Some(traj)) = (stride, trajectory.as_mut()) {
            if k % s == 0 {
                traj.push(TrajectorySample {
                    t: k as f64 * cfg.dt,
                    x_tau: tree.as_slice().to_vec(),
                    z: z.as_slice().to_vec(),
                });
            }
        }
    }
    TrialOutcome {
        mean: acc / (steps - burn) as f64,
        trajectory,
        final_state: x,
    }
}

fn run_trials(
    stepper: &Stepper,
    observer: &Observer,
    cfg: &SimConfig,
) -> Result<(SimResult, Vec<DVector<f64>>)> {
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(stepper, observer, cfg, trial, trial == 0))
        .collect();
    let per_trial: Vec<f64> = outcomes.iter().map(|o| o.mean).collect();
    let (estimate, se) = estimate_h2(&per_trial)?;
    let mut finals = Vec::with_capacity(outcomes.len());
    let mut trajectory = None;
    for o in outcomes {
        if o.trajectory.is_some() {
            trajectory = o.trajectory;
        }
        finals.push(o.final_state);
    }
    Ok((
        SimResult {
            h2_squared_estimate: estimate,
            standard_error: se,
            per_trial,
            trajectory_sample: trajectory,
        },
        finals,
    ))
}

fn check_step(a: &DMatrix<f64>, cfg: &SimConfig) -> Result<()> {
    if cfg.integrator == Integrator::EulerMaruyama {
        let max_dt = max_stable_dt(a);
        if !(cfg.dt < max_dt) {
            return Err(Error::UnstableStep { dt: cfg.dt, max_dt });
        }
    }
    Ok(())
}

/// Simulates the tree-edge system directly.
pub fn simulate_edge_system(sys: &EdgeSystem, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    check_step(&sys.a, cfg)?;
    let stepper = Stepper::new(&(-&sys.a), &sys.b, cfg.dt, cfg.integrator);
    let observer = Observer {
        to_tree: None,
        output: sys.c.clone(),
    };
    Ok(run_trials(&stepper, &observer, cfg)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSimResult {
    pub result: SimResult,
    /// Largest `|x_c − Tᵀ x_τ|` over the final node states of all trials.
    pub cycle_residual_max: f64,
    /// `εᵀx / ε_s` at the horizon, per trial. This component is unobserved.
    pub consensus_final: Vec<f64>,
}

/// Simulates the full node dynamics `ẋ = −E⁻¹L_w x + E⁻¹Ω ŵ − E⁻¹DΓ v̂` and
/// observes the edge projection `x_τ = D_τᵀ x`.
pub fn simulate_node_system(
    net: &Network,
    sw: &ScaleWeightPair,
    noise: &NoiseModel,
    mode: OutputMode,
    cfg: &SimConfig,
) -> Result<NodeSimResult> {
    cfg.validate()?;
    noise.validate()?;
    let inc = &net.incidence;
    let sys = crate::operators::edge_system(inc, &net.cut, sw, noise, mode)?;
    check_step(&sys.a, cfg)?;

    let n = inc.node_count();
    let m = inc.edge_count();
    let drift = -scaled_laplacian(inc, sw)?;
    let inv_eps = sw.epsilon().map(|e| 1.0 / e);
    let mut diffusion = DMatrix::zeros(n, n + m);
    let mut process = noise.omega_matrix(sw)?;
    let mut measurement = -(&inc.d * noise.gamma_matrix(sw)?);
    for ((mut p, mut q), &k) in process
        .row_iter_mut()
        .zip(measurement.row_iter_mut())
        .zip(inv_eps.iter())
    {
        p *= k;
        q *= k;
    }
    diffusion.view_mut((0, 0), (n, n)).copy_from(&process);
    diffusion.view_mut((0, n), (n, m)).copy_from(&measurement);

    let stepper = Stepper::new(&drift, &diffusion, cfg.dt, cfg.integrator);
    let observer = Observer {
        to_tree: Some(inc.d_tree.transpose()),
        output: sys.c.clone(),
    };
    let (mut result, finals) = run_trials(&stepper, &observer, cfg)?;

    let eps_s = sw.epsilon_sum();
    let consensus_final = finals
        .iter()
        .map(|x| sw.epsilon().dot(x) / eps_s)
        .collect();

    let t = &net.cut.t_tree_cycle;
    let cycle_residual_max = finals
        .iter()
        .map(|x| {
            let x_tau = inc.d_tree.transpose() * x;
            let x_c = inc.d_cycle.transpose() * x;
            (x_c - t.transpose() * x_tau).amax()
        })
        .fold(0.0, f64::max);

    if cfg.trajectory_stride.is_none() {
        result.trajectory_sample = None;
    }
    Ok(NodeSimResult {
        result,
        cycle_residual_max,
        consensus_final,
    })
}

/// Writes `t,x_tau_1,...,z_1,...` followed by one row per sample.
pub fn write_trajectory_csv<W: Write>(mut out: W, samples: &[TrajectorySample]) -> std::io::Result<()> {
    let (nx, nz) = samples
        .first()
        .map(|s| (s.x_tau.len(), s.z.len()))
        .unwrap_or((0, 0));
    let mut header = vec!["t".to_string()];
    header.extend((1..=nx).map(|i| format!("x_tau_{i}")));
    header.extend((1..=nz).map(|i| format!("z_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        let row: Vec<String> = std::iter::once(s.t)
            .chain(s.x_tau.iter().copied())
            .chain(s.z.iter().copied())
            .map(|v| format!("{v}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::operators::edge_system;

    fn single_edge(noise: &NoiseModel) -> EdgeSystem {
        let p = Network::new(Graph::new(2, &[(1, 2)]).unwrap()).unwrap();
        edge_system(&p.incidence, &p.cut, &ScaleWeightPair::unit(2, 1), noise, OutputMode::SigmaHat)
            .unwrap()
    }

    fn quick() -> SimConfig {
        SimConfig {
            dt: 1e-3,
            horizon: 20.0,
            burn_in: 2.0,
            trials: 4,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn estimate_basics() {
        assert_eq!(estimate_h2(&[1.5]).unwrap(), (1.5, 0.0));
        assert_eq!(estimate_h2(&[1.0, 2.0]).unwrap(), (1.5, 0.5));
        assert_eq!(estimate_h2(&[]), Err(Error::EmptyInput));
        let v = [1.0, 2.0, 4.0, 3.0, 0.5, 1.5, 2.5, 3.5];
        let (mean, se) = estimate_h2(&v).unwrap();
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 7.0).sqrt();
        assert!((se - sd / 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_input_gives_zero() {
        let mut sys = single_edge(&NoiseModel::default());
        sys.b.fill(0.0);
        let r = simulate_edge_system(&sys, &quick()).unwrap();
        assert_eq!(r.h2_squared_estimate, 0.0);
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn unstable_step_reports_bound() {
        let sys = single_edge(&NoiseModel::default());
        let cfg = SimConfig { dt: 1.5, horizon: 30.0, burn_in: 0.0, ..quick() };
        assert_eq!(
            simulate_edge_system(&sys, &cfg),
            Err(Error::UnstableStep { dt: 1.5, max_dt: 1.0 })
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let sys = single_edge(&NoiseModel::default());
        let a = simulate_edge_system(&sys, &quick()).unwrap();
        let b = simulate_edge_system(&sys, &quick()).unwrap();
        assert_eq!(a, b);
        let c = simulate_edge_system(&sys, &SimConfig { seed: 43, ..quick() }).unwrap();
        assert_ne!(a.per_trial, c.per_trial);
    }

    #[test]
    fn noise_scale_is_linear() {
        let cfg = quick();
        let base = simulate_edge_system(&single_edge(&NoiseModel::separable(1.0, 1.0)), &cfg).unwrap();
        let twice = simulate_edge_system(&single_edge(&NoiseModel::separable(2.0, 2.0)), &cfg).unwrap();
        // same random stream, so the ratio is exact up to rounding
        assert!((twice.h2_squared_estimate.sqrt() / base.h2_squared_estimate.sqrt() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn exact_discretization_matches_scalar_transition() {
        let sys = single_edge(&NoiseModel::default());
        let s = Stepper::new(&(-&sys.a), &sys.b, 0.01, Integrator::Exact);
        assert!((s.transition[(0, 0)] - (-0.02f64).exp()).abs() < 1e-14);
        // Q = 6 (1 - e^{-4 dt}) / 4
        let q = 6.0 * (1.0 - (-0.04f64).exp()) / 4.0;
        assert!((s.noise[(0, 0)].powi(2) - q).abs() < 1e-12);
    }

    #[test]
    fn trajectory_csv_header() {
        let sys = single_edge(&NoiseModel::default());
        let cfg = SimConfig { trajectory_stride: Some(1000), ..quick() };
        let r = simulate_edge_system(&sys, &cfg).unwrap();
        let traj = r.trajectory_sample.unwrap();
        assert_eq!(traj.len(), 20);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x_tau_1,z_1\n"));
        assert_eq!(text.lines().count(), 21);
    }
}
