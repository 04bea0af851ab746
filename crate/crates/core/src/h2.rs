//! H2 performance of the tree-edge systems.
//!
//! All "performance" values are squared norms, `tr(C X* Cᵀ)`; the norm itself
//! is reported alongside as its square root. Under the separable noise choice
//! the Gramian has the closed form `X* = ½(σ_ω²(RWRᵀ)⁻¹ + σ_v² L_{e,s})`, which
//! splits the squared norm into an edge-weight term and a time-scale term.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CutBasis, Graph, IncidenceDecomposition, Network};
use crate::lyapunov::{solve_lyapunov, Gramian};
use crate::operators::{
    cycle_gram, edge_system, scaled_edge_laplacian, EdgeSystem, NoiseModel, OutputMode,
    ScaleWeightPair,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H2Value {
    pub squared: f64,
    pub norm: f64,
}

impl H2Value {
    fn from_squared(squared: f64) -> Self {
        H2Value {
            squared,
            norm: squared.max(0.0).sqrt(),
        }
    }
}

/// `X*` from the generic solver, i.e. `A X + X Aᵀ = B Bᵀ`.
pub fn controllability_gramian(sys: &EdgeSystem) -> Result<Gramian> {
    solve_lyapunov(&sys.a, &(&sys.b * sys.b.transpose()))
}

/// `tr(C X* Cᵀ)` through a Lyapunov solve.
pub fn h2_norm(sys: &EdgeSystem) -> Result<H2Value> {
    let x = controllability_gramian(sys)?;
    Ok(H2Value::from_squared((&sys.c * x.x * sys.c.transpose()).trace()))
}

fn inverse_cycle_gram(cb: &CutBasis, sw: &ScaleWeightPair) -> Result<DMatrix<f64>> {
    Ok(cycle_gram(cb, sw)
        .cholesky()
        .ok_or(Error::SingularCycleGram)?
        .inverse())
}

/// The separable-noise Gramian in closed form.
pub fn closed_form_gramian(
    inc: &IncidenceDecomposition,
    cb: &CutBasis,
    sw: &ScaleWeightPair,
    sigma_omega: f64,
    sigma_v: f64,
) -> Result<Gramian> {
    let inv = inverse_cycle_gram(cb, sw)?;
    let les = scaled_edge_laplacian(inc, sw)?;
    Ok(Gramian {
        x: (inv * sigma_omega.powi(2) + les * sigma_v.powi(2)) * 0.5,
    })
}

/// Edge-weight and time-scale contributions to the squared H2 norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparatedH2 {
    pub term_w: f64,
    pub term_e: f64,
}

impl SeparatedH2 {
    pub fn total(&self) -> f64 {
        self.term_w + self.term_e
    }
}

pub fn separated_h2(
    inc: &IncidenceDecomposition,
    cb: &CutBasis,
    sw: &ScaleWeightPair,
    sigma_omega: f64,
    sigma_v: f64,
    mode: OutputMode,
) -> Result<SeparatedH2> {
    let inv = inverse_cycle_gram(cb, sw)?;
    let les = scaled_edge_laplacian(inc, sw)?;
    let (tw, te) = match mode {
        OutputMode::Sigma => {
            let rt = cb.r.transpose();
            ((&rt * inv * &cb.r).trace(), (&rt * les * &cb.r).trace())
        }
        OutputMode::SigmaHat => (inv.trace(), les.trace()),
    };
    Ok(SeparatedH2 {
        term_w: 0.5 * sigma_omega.powi(2) * tw,
        term_e: 0.5 * sigma_v.powi(2) * te,
    })
}

/// What observing the cycle states adds on top of the tree-only output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleContributions {
    pub cycle_w: f64,
    pub cycle_e: f64,
}

pub fn cycle_contributions(
    inc: &IncidenceDecomposition,
    cb: &CutBasis,
    sw: &ScaleWeightPair,
    sigma_omega: f64,
    sigma_v: f64,
) -> Result<CycleContributions> {
    let t = &cb.t_tree_cycle;
    if t.ncols() == 0 {
        return Ok(CycleContributions {
            cycle_w: 0.0,
            cycle_e: 0.0,
        });
    }
    let inv = inverse_cycle_gram(cb, sw)?;
    let les = scaled_edge_laplacian(inc, sw)?;
    Ok(CycleContributions {
        cycle_w: 0.5 * sigma_omega.powi(2) * (t.transpose() * inv * t).trace(),
        cycle_e: 0.5 * sigma_v.powi(2) * (t.transpose() * les * t).trace(),
    })
}

/// `½(σ_ω² Σ 1/w_k + σ_v² Σ deg_i/ε_i)`, valid only on trees.
pub fn tree_h2_closed_form(
    g: &Graph,
    sw: &ScaleWeightPair,
    sigma_omega: f64,
    sigma_v: f64,
) -> Result<f64> {
    if !g.is_tree() {
        return Err(Error::NotATree {
            nodes: g.node_count(),
            edges: g.edge_count(),
        });
    }
    if sw.epsilon().len() != g.node_count() || sw.weights().len() != g.edge_count() {
        return Err(Error::DimensionMismatch(
            "parameters do not match the graph".into(),
        ));
    }
    let weight_sum: f64 = sw.weights().iter().map(|w| 1.0 / w).sum();
    let degree_sum: f64 = g
        .degrees()
        .iter()
        .zip(sw.epsilon().iter())
        .map(|(&d, e)| d as f64 / e)
        .sum();
    Ok(0.5 * (sigma_omega.powi(2) * weight_sum + sigma_v.powi(2) * degree_sum))
}

/// `K = H2(Σ̂,E) / H2(Σ,E)`; the noise intensity cancels.
pub fn k_ratio(inc: &IncidenceDecomposition, cb: &CutBasis, sw: &ScaleWeightPair) -> Result<f64> {
    let les = scaled_edge_laplacian(inc, sw)?;
    let full = (cb.r.transpose() * &les * &cb.r).trace();
    Ok(les.trace() / full)
}

/// Separable-noise breakdown for both outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparableBreakdown {
    pub sigma: SeparatedH2,
    pub sigma_hat: SeparatedH2,
    pub cycle: CycleContributions,
    pub k_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub h2_sigma: H2Value,
    pub h2_sigma_hat: H2Value,
    /// Present only for separable noise.
    pub separable: Option<SeparableBreakdown>,
}

/// Full analysis of one network under one parameter set.
pub fn analyze(net: &Network, sw: &ScaleWeightPair, noise: &NoiseModel) -> Result<H2Report> {
    let (inc, cb) = (&net.incidence, &net.cut);
    let sigma = edge_system(inc, cb, sw, noise, OutputMode::Sigma)?;
    // both modes share A and B, so one Gramian serves both outputs
    let x = controllability_gramian(&sigma)?;
    let h2_sigma = H2Value::from_squared((&sigma.c * &x.x * sigma.c.transpose()).trace());
    let h2_sigma_hat = H2Value::from_squared(x.x.trace());

    let separable = if noise.is_separable() {
        let (so, sv) = (noise.sigma_omega, noise.sigma_v);
        Some(SeparableBreakdown {
            sigma: separated_h2(inc, cb, sw, so, sv, OutputMode::Sigma)?,
            sigma_hat: separated_h2(inc, cb, sw, so, sv, OutputMode::SigmaHat)?,
            cycle: cycle_contributions(inc, cb, sw, so, sv)?,
            k_ratio: k_ratio(inc, cb, sw)?,
        })
    } else {
        None
    };
    Ok(H2Report {
        h2_sigma,
        h2_sigma_hat,
        separable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::lyapunov::lyapunov_residual;

    fn net(n: usize, edges: &[(usize, usize)]) -> Network {
        Network::new(Graph::new(n, edges).unwrap()).unwrap()
    }

    fn six_node_tree() -> Network {
        net(6, &[(1, 2), (2, 3), (3, 4), (3, 5), (3, 6)])
    }

    #[test]
    fn single_edge_values() {
        let p = net(2, &[(1, 2)]);
        let sw = ScaleWeightPair::unit(2, 1);
        let sys = edge_system(&p.incidence, &p.cut, &sw, &NoiseModel::default(), OutputMode::SigmaHat)
            .unwrap();
        let h = h2_norm(&sys).unwrap();
        assert!((h.squared - 1.5).abs() < 1e-14);
        assert!((h.norm - 1.5f64.sqrt()).abs() < 1e-14);
        let x = closed_form_gramian(&p.incidence, &p.cut, &sw, 1.0, 1.0).unwrap();
        assert!((x.x[(0, 0)] - 1.5).abs() < 1e-14);
        assert!((tree_h2_closed_form(&p.graph, &sw, 1.0, 1.0).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn six_node_tree_assignments() {
        let t = six_node_tree();
        let sw1 = ScaleWeightPair::from_slices(&[0.1, 0.2, 0.4, 0.1, 0.1, 0.1], &[1.0; 5]).unwrap();
        let s = separated_h2(&t.incidence, &t.cut, &sw1, 1.0, 1.0, OutputMode::Sigma).unwrap();
        assert!((s.term_e - 30.0).abs() < 1e-9);
        assert!((s.term_w - 2.5).abs() < 1e-9);
        assert!((tree_h2_closed_form(&t.graph, &sw1, 1.0, 1.0).unwrap() - 32.5).abs() < 1e-9);

        let sw2 = ScaleWeightPair::from_slices(&[0.1, 0.2, 0.1, 0.1, 0.1, 0.4], &[1.0; 5]).unwrap();
        let s = separated_h2(&t.incidence, &t.cut, &sw2, 1.0, 1.0, OutputMode::SigmaHat).unwrap();
        assert!((s.term_e - 41.25).abs() < 1e-9);

        let r = analyze(&t, &sw1, &NoiseModel::default()).unwrap();
        assert!((r.h2_sigma.squared - 32.5).abs() < 1e-9);
        assert_eq!(r.separable.unwrap().k_ratio, 1.0);
    }

    #[test]
    fn tree_closed_form_needs_tree() {
        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        assert!(matches!(
            tree_h2_closed_form(&tri.graph, &ScaleWeightPair::unit(3, 3), 1.0, 1.0),
            Err(Error::NotATree { .. })
        ));
    }

    #[test]
    fn tree_closed_gramian_is_diagonal_form() {
        let t = six_node_tree();
        let sw = ScaleWeightPair::from_slices(&[0.3, 0.5, 1.2, 0.9, 0.4, 1.7], &[0.5, 1.0, 2.0, 1.5, 0.25])
            .unwrap();
        let x = closed_form_gramian(&t.incidence, &t.cut, &sw, 1.0, 1.0).unwrap();
        let les = scaled_edge_laplacian(&t.incidence, &sw).unwrap();
        let winv = DMatrix::from_diagonal(&sw.weights().map(|w| 1.0 / w));
        assert!((x.x - (winv + les) * 0.5).amax() < 1e-12);
    }

    #[test]
    fn triangle_cycle_terms_and_k() {
        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        let sw = ScaleWeightPair::unit(3, 3);
        let c = cycle_contributions(&tri.incidence, &tri.cut, &sw, 1.0, 1.0).unwrap();
        // L_{e,s} = [[2,1],[1,2]], T = [-1,1]ᵀ → Tᵀ L T = 2; (RRᵀ)⁻¹ = [[2,1],[1,2]]/3 → 2/3
        assert!((c.cycle_e - 1.0).abs() < 1e-12);
        assert!((c.cycle_w - 1.0 / 3.0).abs() < 1e-12);
        // tr(L_{e,s}) = 4, tr(Rᵀ L R) = Σ deg/ε = 6
        let k = k_ratio(&tri.incidence, &tri.cut, &sw).unwrap();
        assert!((k - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_satisfies_lyapunov_on_triangle() {
        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        let sw = ScaleWeightPair::from_slices(&[0.4, 1.0, 1.9], &[0.7, 0.2, 1.3]).unwrap();
        let noise = NoiseModel::separable(0.8, 1.6);
        let sys = edge_system(&tri.incidence, &tri.cut, &sw, &noise, OutputMode::Sigma).unwrap();
        let x = closed_form_gramian(&tri.incidence, &tri.cut, &sw, 0.8, 1.6).unwrap();
        let q = &sys.b * sys.b.transpose();
        assert!(lyapunov_residual(&sys.a, &x.x, &q) < 1e-10);
        let numeric = controllability_gramian(&sys).unwrap();
        assert!((numeric.x - &x.x).amax() < 1e-9);
    }

    #[test]
    fn general_noise_has_no_breakdown() {
        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        let noise = NoiseModel::general(DMatrix::identity(3, 3) * 2.0, DMatrix::identity(3, 3));
        let r = analyze(&tri, &ScaleWeightPair::unit(3, 3), &noise).unwrap();
        assert!(r.separable.is_none());
        assert!(r.h2_sigma.squared >= r.h2_sigma_hat.squared);
    }
}
