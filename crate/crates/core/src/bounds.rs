//! Eigenvalue brackets on the squared H2 norm.
//!
//! `tr(Bᵀ P_O B)` is bracketed by the extreme eigenvalues of `B Bᵀ` times
//! `tr(P_O)`; splitting `B Bᵀ = B_τᵀ Q B_τ + B_cᵀ G B_c` and applying the
//! Rayleigh product bound to each term gives a bracket in terms of the noise
//! covariances `Q = ΩΩᵀ`, `G = ΓΓᵀ` alone.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CutBasis, IncidenceDecomposition};
use crate::lyapunov::{observability_gramian_of, ObservabilityGramian};
use crate::operators::{edge_system, scaled_edge_laplacian, EdgeSystem, NoiseModel, OutputMode, ScaleWeightPair};

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = symmetrize(m).symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn observability_gramian(sys: &EdgeSystem) -> Result<ObservabilityGramian> {
    let p = observability_gramian_of(&sys.a, &sys.c)?;
    let (lo, _) = extreme_eigenvalues(&p.p);
    assert!(lo > 0.0, "observability Gramian is not positive definite");
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundComponents {
    pub omega_cov_min: f64,
    pub omega_cov_max: f64,
    pub gamma_cov_min: f64,
    pub gamma_cov_max: f64,
    /// Extremes of `B_τᵀ B_τ = D_τᵀ E⁻² D_τ`.
    pub b_tree_min: f64,
    pub b_tree_max: f64,
    /// Extremes of `B_cᵀ B_c = L_{e,s} R Rᵀ L_{e,s}`.
    pub b_cycle_min: f64,
    pub b_cycle_max: f64,
    pub bbt_min: f64,
    pub bbt_max: f64,
    pub observability_trace: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub components: BoundComponents,
}

impl BoundReport {
    /// Smallest of `value - lower` and `upper - value`; negative means the
    /// bracket is violated.
    pub fn slack(&self) -> f64 {
        (self.value - self.lower).min(self.upper - self.value)
    }
}

/// `λ_min(BBᵀ) tr(P_O) ≤ tr(Bᵀ P_O B) ≤ λ_max(BBᵀ) tr(P_O)`.
pub fn gramian_trace_bounds(sys: &EdgeSystem) -> Result<BoundReport> {
    let p = observability_gramian(sys)?;
    let bbt = &sys.b * sys.b.transpose();
    let (lo, hi) = extreme_eigenvalues(&bbt);
    let trace = p.p.trace();
    let value = (sys.b.transpose() * &p.p * &sys.b).trace();
    Ok(BoundReport {
        lower: lo * trace,
        value,
        upper: hi * trace,
        components: BoundComponents {
            bbt_min: lo,
            bbt_max: hi,
            observability_trace: trace,
            ..Default::default()
        },
    })
}

/// Bound pair for the extreme eigenvalues of `Zᵀ M Z`, with the actual
/// extremes for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighBounds {
    pub lower: f64,
    pub upper: f64,
    pub actual_min: f64,
    pub actual_max: f64,
}

pub fn rayleigh_product_bounds(m: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<RayleighBounds> {
    if !m.is_square() || m.nrows() != z.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "M is {}x{}, Z is {}x{}",
            m.nrows(),
            m.ncols(),
            z.nrows(),
            z.ncols()
        )));
    }
    let smallest_sv = if z.ncols() > z.nrows() {
        0.0
    } else {
        z.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
    };
    if !(smallest_sv > 1e-10) {
        return Err(Error::RankDeficientZ(smallest_sv));
    }
    let (m_lo, m_hi) = extreme_eigenvalues(m);
    let (z_lo, z_hi) = extreme_eigenvalues(&(z.transpose() * z));
    let (lo, hi) = extreme_eigenvalues(&(z.transpose() * m * z));
    Ok(RayleighBounds {
        lower: m_lo * z_lo,
        upper: m_hi * z_hi,
        actual_min: lo,
        actual_max: hi,
    })
}

/// Bracket on `H2²` from the noise covariance eigenvalues.
pub fn covariance_h2_bounds(
    inc: &IncidenceDecomposition,
    cb: &CutBasis,
    sw: &ScaleWeightPair,
    noise: &NoiseModel,
    mode: OutputMode,
) -> Result<BoundReport> {
    let sys = edge_system(inc, cb, sw, noise, mode)?;
    let base = gramian_trace_bounds(&sys)?;

    let omega = noise.omega_matrix(sw)?;
    let gamma = noise.gamma_matrix(sw)?;
    let q = &omega * omega.transpose();
    let g = &gamma * gamma.transpose();

    let inv_eps = sw.epsilon().map(|x| 1.0 / x);
    let mut b_tree = inc.d_tree.clone();
    for (mut row, &k) in b_tree.row_iter_mut().zip(inv_eps.iter()) {
        row *= k;
    }
    let b_cycle = cb.r.transpose() * scaled_edge_laplacian(inc, sw)?;

    let tree = rayleigh_product_bounds(&q, &b_tree)?;
    let cycle = rayleigh_product_bounds(&g, &b_cycle)?;
    let (q_lo, q_hi) = extreme_eigenvalues(&q);
    let (g_lo, g_hi) = extreme_eigenvalues(&g);
    let (bt_lo, bt_hi) = extreme_eigenvalues(&(b_tree.transpose() * &b_tree));
    let (bc_lo, bc_hi) = extreme_eigenvalues(&(b_cycle.transpose() * &b_cycle));

    let trace = base.components.observability_trace;
    Ok(BoundReport {
        lower: (tree.lower + cycle.lower) * trace,
        value: base.value,
        upper: (tree.upper + cycle.upper) * trace,
        components: BoundComponents {
            omega_cov_min: q_lo,
            omega_cov_max: q_hi,
            gamma_cov_min: g_lo,
            gamma_cov_max: g_hi,
            b_tree_min: bt_lo,
            b_tree_max: bt_hi,
            b_cycle_min: bc_lo,
            b_cycle_max: bc_hi,
            ..base.components
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Network};

    fn net(n: usize, edges: &[(usize, usize)]) -> Network {
        Network::new(Graph::new(n, edges).unwrap()).unwrap()
    }

    #[test]
    fn observability_identity() {
        let sys = EdgeSystem {
            a: DMatrix::identity(3, 3),
            b: DMatrix::identity(3, 3),
            c: DMatrix::identity(3, 3),
            mode: OutputMode::SigmaHat,
        };
        let p = observability_gramian(&sys).unwrap();
        assert!((p.p - DMatrix::identity(3, 3) * 0.5).amax() < 1e-14);
    }

    #[test]
    fn scalar_system_collapses() {
        let p = net(2, &[(1, 2)]);
        let sys = edge_system(
            &p.incidence,
            &p.cut,
            &ScaleWeightPair::unit(2, 1),
            &NoiseModel::default(),
            OutputMode::SigmaHat,
        )
        .unwrap();
        let r = gramian_trace_bounds(&sys).unwrap();
        assert!((r.components.bbt_min - 6.0).abs() < 1e-12);
        assert!((r.components.observability_trace - 0.25).abs() < 1e-14);
        for v in [r.lower, r.value, r.upper] {
            assert!((v - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_orthogonal_rows_are_strict() {
        let sys = EdgeSystem {
            a: DMatrix::identity(2, 2),
            b: DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]),
            c: DMatrix::identity(2, 2),
            mode: OutputMode::SigmaHat,
        };
        let r = gramian_trace_bounds(&sys).unwrap();
        // P = I/2, BBᵀ = diag(9, 1): 1·1 < 5 < 9·1
        assert!((r.lower - 1.0).abs() < 1e-12);
        assert!((r.value - 5.0).abs() < 1e-12);
        assert!((r.upper - 9.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_trivial_cases() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let r = rayleigh_product_bounds(&m, &DMatrix::identity(2, 2)).unwrap();
        assert!((r.lower - r.actual_min).abs() < 1e-12);
        assert!((r.upper - r.actual_max).abs() < 1e-12);

        let z = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 2.0, 0.0, 1.0]);
        let r = rayleigh_product_bounds(&DMatrix::identity(3, 3), &z).unwrap();
        assert!((r.lower - r.actual_min).abs() < 1e-12);
        assert!((r.upper - r.actual_max).abs() < 1e-12);

        let flat = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            rayleigh_product_bounds(&DMatrix::identity(2, 2), &flat),
            Err(Error::RankDeficientZ(_))
        ));
    }

    #[test]
    fn covariance_bounds_bracket_single_edge() {
        let p = net(2, &[(1, 2)]);
        let r = covariance_h2_bounds(
            &p.incidence,
            &p.cut,
            &ScaleWeightPair::unit(2, 1),
            &NoiseModel::default(),
            OutputMode::SigmaHat,
        )
        .unwrap();
        // B_τᵀB_τ = 2, B_cᵀB_c = 4, Q = I, G = 1 → (2 + 4)·0.25 both sides
        assert!((r.lower - 1.5).abs() < 1e-12);
        assert!((r.upper - 1.5).abs() < 1e-12);
        assert!((r.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn identity_scaled_factors_reduce_to_weyl_sum() {
        let tri = net(4, &[(1, 2), (2, 3), (1, 3), (3, 4)]);
        let sw = ScaleWeightPair::from_slices(&[0.5, 1.0, 1.5, 0.8], &[1.0, 2.0, 0.5, 1.2]).unwrap();
        let noise = NoiseModel::general(DMatrix::identity(4, 4) * 0.7, DMatrix::identity(4, 4) * 1.3);
        let r = covariance_h2_bounds(&tri.incidence, &tri.cut, &sw, &noise, OutputMode::Sigma).unwrap();
        let c = r.components;
        let p = c.observability_trace;
        let lower = (0.49 * c.b_tree_min + 1.69 * c.b_cycle_min) * p;
        let upper = (0.49 * c.b_tree_max + 1.69 * c.b_cycle_max) * p;
        assert!((r.lower - lower).abs() < 1e-10 * upper);
        assert!((r.upper - upper).abs() < 1e-10 * upper);
        assert!(r.lower <= c.bbt_min * p + 1e-9);
        assert!(c.bbt_max * p <= r.upper + 1e-9);
        assert!(r.slack() >= -1e-9);
    }
}
