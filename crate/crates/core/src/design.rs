//! Time-scale design.
//!
//! Both problems are posed in the inverse time scales `y_i = 1/ε_i`. Because
//! `tr(Rᵀ L_{e,s} R) = Σ_i deg_i / ε_i` for every connected graph, the
//! time-scale part of the objective is linear in `y` with the node degrees as
//! coefficients:
//!
//! * the budgeted problem (`P1`) is a continuous knapsack and is solved
//!   exactly by filling the cheapest (lowest-degree) nodes first;
//! * the regularized problem (`P2`) separates per node and has the closed-form
//!   minimizer `ε_i = (deg_i / (h r))^{1/(r+1)}`, clamped to the box.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CutBasis, Graph, IncidenceDecomposition, Network};
use crate::h2::separated_h2;
use crate::operators::{scaled_edge_laplacian, OutputMode, ScaleWeightPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P1Config {
    pub eps_min: f64,
    pub eps_max: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P2Config {
    pub h: f64,
    pub r: f64,
    pub eps_min: f64,
    pub eps_max: f64,
}

fn check_box(eps_min: f64, eps_max: f64) -> Result<()> {
    if !(eps_min > 0.0 && eps_min < eps_max && eps_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps_min < eps_max, got [{eps_min}, {eps_max}]"
        )));
    }
    Ok(())
}

impl P1Config {
    pub fn validate(&self) -> Result<()> {
        check_box(self.eps_min, self.eps_max)?;
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        Ok(())
    }

    /// Largest feasible budget, `n / ε_min`.
    pub fn max_mu(&self, n: usize) -> f64 {
        n as f64 / self.eps_min
    }

    /// Budget satisfied by the all-slow assignment, `n / ε_max`.
    pub fn slack_mu(&self, n: usize) -> f64 {
        n as f64 / self.eps_max
    }
}

impl P2Config {
    pub fn validate(&self) -> Result<()> {
        check_box(self.eps_min, self.eps_max)?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {}", self.h)));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be >= 1, got {}", self.r)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveConstraint {
    /// `ε_i = ε_max`.
    AtSlowBound,
    /// `ε_i = ε_min`.
    AtFastBound,
    Interior,
    /// The single node that absorbs the remainder of the budget.
    Fractional,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSolution {
    pub epsilon: Vec<f64>,
    pub objective: f64,
    pub active_constraints: Vec<ActiveConstraint>,
}

impl DesignSolution {
    pub fn inverse_sum(&self) -> f64 {
        self.epsilon.iter().map(|e| 1.0 / e).sum()
    }
}

/// Per-node coefficients of the time-scale term: the unweighted degrees.
pub fn p1_cost_coefficients(g: &Graph) -> Vec<f64> {
    g.degrees().into_iter().map(|d| d as f64).collect()
}

/// `½[tr(Rᵀ(RWRᵀ)⁻¹R) + tr(Rᵀ L_{e,s} R)]` with unit noise intensities.
pub fn p1_objective(net: &Network, weights: &DVector<f64>, epsilon: &[f64]) -> Result<f64> {
    let sw = ScaleWeightPair::new(DVector::from_column_slice(epsilon), weights.clone())?;
    let s = separated_h2(&net.incidence, &net.cut, &sw, 1.0, 1.0, OutputMode::Sigma)?;
    Ok(s.total())
}

fn check_mu(n: usize, cfg: &P1Config) -> Result<()> {
    cfg.validate()?;
    let max = cfg.max_mu(n);
    if cfg.mu > max {
        return Err(Error::InfeasibleMu { mu: cfg.mu, max });
    }
    Ok(())
}

/// Exact solution of the budgeted problem by greedy filling.
///
/// All nodes start at the slow bound; nodes are then switched to the fast
/// bound in ascending order of degree (ties by ascending id) until
/// `Σ 1/ε_i = μ`, with at most one node left in between.
pub fn p1_solve(net: &Network, weights: &DVector<f64>, cfg: &P1Config) -> Result<DesignSolution> {
    let g = &net.graph;
    let n = g.node_count();
    check_mu(n, cfg)?;

    let (y_slow, y_fast) = (1.0 / cfg.eps_max, 1.0 / cfg.eps_min);
    let mut epsilon = vec![cfg.eps_max; n];
    let mut active = vec![ActiveConstraint::AtSlowBound; n];

    let mut need = cfg.mu - n as f64 * y_slow;
    if need > 0.0 {
        let deg = g.degrees();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (deg[i], i));
        let room = y_fast - y_slow;
        for i in order {
            if need <= 0.0 {
                break;
            }
            if need >= room {
                epsilon[i] = cfg.eps_min;
                active[i] = ActiveConstraint::AtFastBound;
                need -= room;
            } else {
                epsilon[i] = 1.0 / (y_slow + need);
                active[i] = ActiveConstraint::Fractional;
                need = 0.0;
            }
        }
    }

    let objective = p1_objective(net, weights, &epsilon)?;
    Ok(DesignSolution {
        epsilon,
        objective,
        active_constraints: active,
    })
}

/// Euclidean projection onto `{lo ≤ y ≤ hi, Σ y ≥ μ}`.
///
/// The solution is `clamp(z + λ)` with the smallest `λ ≥ 0` meeting the
/// budget; `λ` is found exactly by walking the sorted breakpoints of the
/// piecewise-linear map `λ ↦ Σ clamp(z_i + λ)`.
fn project_box_halfspace(z: &[f64], lo: f64, hi: f64, mu: f64) -> Vec<f64> {
    let clamp_shift = |lambda: f64| -> Vec<f64> { z.iter().map(|&v| (v + lambda).clamp(lo, hi)).collect() };
    let base = clamp_shift(0.0);
    if base.iter().sum::<f64>() >= mu {
        return base;
    }
    let mut breaks: Vec<f64> = z
        .iter()
        .flat_map(|&v| [lo - v, hi - v])
        .filter(|&b| b > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    let total = |lambda: f64| -> f64 { z.iter().map(|&v| (v + lambda).clamp(lo, hi)).sum() };
    let mut left = 0.0;
    let mut f_left = total(0.0);
    for b in breaks {
        let f_b = total(b);
        if f_b >= mu {
            // linear on [left, b]
            let lambda = if f_b > f_left {
                left + (mu - f_left) * (b - left) / (f_b - f_left)
            } else {
                b
            };
            return clamp_shift(lambda);
        }
        left = b;
        f_left = f_b;
    }
    clamp_shift(left)
}

/// Settings for the projected-gradient reference solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSettings {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        ReferenceSettings {
            max_iterations: 100_000,
            tolerance: 1e-13,
        }
    }
}

/// Independent solver for the budgeted problem: projected gradient descent in
/// `y = 1/ε` on the trace objective. The gradient is assembled node by node
/// from `tr(Rᵀ L_{e,s} R)` itself, not from the degree shortcut.
pub fn p1_solve_reference(
    net: &Network,
    weights: &DVector<f64>,
    cfg: &P1Config,
) -> Result<DesignSolution> {
    p1_solve_reference_with(net, weights, cfg, ReferenceSettings::default())
}

pub fn p1_solve_reference_with(
    net: &Network,
    weights: &DVector<f64>,
    cfg: &P1Config,
    settings: ReferenceSettings,
) -> Result<DesignSolution> {
    let n = net.graph.node_count();
    check_mu(n, cfg)?;
    let (lo, hi) = (1.0 / cfg.eps_max, 1.0 / cfg.eps_min);

    let grad = trace_gradient(&net.incidence, &net.cut, n)?;
    let step = 1.0 / grad.iter().copied().fold(0.0, f64::max);

    let mut y = project_box_halfspace(&vec![0.5 * (lo + hi); n], lo, hi, cfg.mu);
    let mut converged = false;
    for _ in 0..settings.max_iterations {
        let z: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - step * gi).collect();
        let next = project_box_halfspace(&z, lo, hi, cfg.mu);
        let change = next
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        y = next;
        if change <= settings.tolerance * hi {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(settings.max_iterations));
    }

    let epsilon: Vec<f64> = y.iter().map(|&v| (1.0 / v).clamp(cfg.eps_min, cfg.eps_max)).collect();
    let active = epsilon
        .iter()
        .map(|&e| tag(e, cfg.eps_min, cfg.eps_max, 1e-9, ActiveConstraint::Fractional))
        .collect();
    let objective = p1_objective(net, weights, &epsilon)?;
    Ok(DesignSolution {
        epsilon,
        objective,
        active_constraints: active,
    })
}

/// `∂/∂y_i ½tr(Rᵀ L_{e,s}(y) R)`. The trace is linear in `y`, so a unit
/// finite difference from `y = 0` is exact.
fn trace_gradient(inc: &IncidenceDecomposition, cb: &CutBasis, n: usize) -> Result<Vec<f64>> {
    if inc.node_count() != n {
        return Err(Error::DimensionMismatch("node count".into()));
    }
    // E⁻¹ = e_i e_iᵀ
    Ok((0..n)
        .map(|i| {
            let row = inc.d_tree.row(i);
            let les = row.transpose() * row;
            0.5 * (cb.r.transpose() * les * &cb.r).trace()
        })
        .collect())
}

fn tag(e: f64, lo: f64, hi: f64, tol: f64, between: ActiveConstraint) -> ActiveConstraint {
    if (e - hi).abs() <= tol * hi {
        ActiveConstraint::AtSlowBound
    } else if (e - lo).abs() <= tol * lo {
        ActiveConstraint::AtFastBound
    } else {
        between
    }
}

/// Unclamped per-node minimizer `(deg / (h r))^{1/(r+1)}`.
pub fn p2_unconstrained(degree: f64, h: f64, r: f64) -> f64 {
    (degree / (h * r)).powf(1.0 / (r + 1.0))
}

/// Per-node objective `½ deg/ε + (h/2) ε^r`.
pub fn p2_node_objective(degree: f64, epsilon: f64, h: f64, r: f64) -> f64 {
    0.5 * degree / epsilon + 0.5 * h * epsilon.powf(r)
}

/// Decentralized assignment: each node needs only its own degree.
pub fn p2_solve(g: &Graph, cfg: &P2Config) -> Result<DesignSolution> {
    cfg.validate()?;
    let mut epsilon = Vec::with_capacity(g.node_count());
    let mut active = Vec::with_capacity(g.node_count());
    let mut objective = 0.0;
    for d in g.degrees() {
        let d = d as f64;
        let raw = p2_unconstrained(d, cfg.h, cfg.r);
        let e = raw.clamp(cfg.eps_min, cfg.eps_max);
        active.push(if raw >= cfg.eps_max {
            ActiveConstraint::AtSlowBound
        } else if raw <= cfg.eps_min {
            ActiveConstraint::AtFastBound
        } else {
            ActiveConstraint::Interior
        });
        objective += p2_node_objective(d, e, cfg.h, cfg.r);
        epsilon.push(e);
    }
    Ok(DesignSolution {
        epsilon,
        objective,
        active_constraints: active,
    })
}

/// `½ tr(Rᵀ L_{e,s} R) + (h/2) Σ ε_i^r`, evaluated through the trace.
pub fn p2_objective(
    inc: &IncidenceDecomposition,
    cb: &CutBasis,
    epsilon: &[f64],
    cfg: &P2Config,
) -> Result<f64> {
    let sw = ScaleWeightPair::new(
        DVector::from_column_slice(epsilon),
        DVector::from_element(inc.edge_count(), 1.0),
    )?;
    let les = scaled_edge_laplacian(inc, &sw)?;
    let trace = (cb.r.transpose() * les * &cb.r).trace();
    let reg: f64 = epsilon.iter().map(|e| e.powf(cfg.r)).sum();
    Ok(0.5 * trace + 0.5 * cfg.h * reg)
}
