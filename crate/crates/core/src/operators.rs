//! Laplacian-type operators, the node-to-edge similarity transform, and the
//! tree-edge state-space systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{CutBasis, IncidenceDecomposition};

/// Per-node time scales `ε` (diagonal of `E`) and per-edge weights `w`
/// (diagonal of `W`, in `κ` order).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleWeightPair {
    epsilon: DVector<f64>,
    weights: DVector<f64>,
}

impl ScaleWeightPair {
    pub fn new(epsilon: DVector<f64>, weights: DVector<f64>) -> Result<Self> {
        check_positive("epsilon", epsilon.as_slice())?;
        check_positive("weight", weights.as_slice())?;
        Ok(ScaleWeightPair { epsilon, weights })
    }

    pub fn from_slices(epsilon: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(epsilon),
            DVector::from_column_slice(weights),
        )
    }

    /// All time scales and weights equal to one.
    pub fn unit(n: usize, m: usize) -> Self {
        ScaleWeightPair {
            epsilon: DVector::from_element(n, 1.0),
            weights: DVector::from_element(m, 1.0),
        }
    }

    pub fn epsilon(&self) -> &DVector<f64> {
        &self.epsilon
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `ε_s = Σ ε_i`.
    pub fn epsilon_sum(&self) -> f64 {
        self.epsilon.sum()
    }

    pub fn with_epsilon(&self, epsilon: DVector<f64>) -> Result<Self> {
        Self::new(epsilon, self.weights.clone())
    }

    fn check_dims(&self, inc: &IncidenceDecomposition) -> Result<()> {
        if self.epsilon.len() != inc.node_count() || self.weights.len() != inc.edge_count() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes and {} edges; got {} time scales and {} weights",
                inc.node_count(),
                inc.edge_count(),
                self.epsilon.len(),
                self.weights.len()
            )));
        }
        Ok(())
    }
}

fn check_positive(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(k) => Err(Error::InvalidParameter(format!(
            "{what} #{} must be positive and finite, got {}",
            k + 1,
            values[k]
        ))),
        None => Ok(()),
    }
}

/// A noise covariance factor: either an explicit square matrix or the
/// separable choice `σ·E^{1/2}` (resp. `σ·W^{1/2}`).
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceFactor {
    Separable,
    Matrix(DMatrix<f64>),
}

/// Process noise enters through `Ω`, measurement noise through `Γ`.
/// Explicit factor matrices are used as given; the intensities only scale the
/// separable factors.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub sigma_omega: f64,
    pub sigma_v: f64,
    pub omega: CovarianceFactor,
    pub gamma: CovarianceFactor,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::separable(1.0, 1.0)
    }
}

impl NoiseModel {
    pub fn separable(sigma_omega: f64, sigma_v: f64) -> Self {
        NoiseModel {
            sigma_omega,
            sigma_v,
            omega: CovarianceFactor::Separable,
            gamma: CovarianceFactor::Separable,
        }
    }

    pub fn general(omega: DMatrix<f64>, gamma: DMatrix<f64>) -> Self {
        NoiseModel {
            sigma_omega: 1.0,
            sigma_v: 1.0,
            omega: CovarianceFactor::Matrix(omega),
            gamma: CovarianceFactor::Matrix(gamma),
        }
    }

    pub fn is_separable(&self) -> bool {
        self.omega == CovarianceFactor::Separable && self.gamma == CovarianceFactor::Separable
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("sigma", &[self.sigma_omega, self.sigma_v])
    }

    /// `Ω`, materialized for the given time scales.
    pub fn omega_matrix(&self, sw: &ScaleWeightPair) -> Result<DMatrix<f64>> {
        materialize(&self.omega, self.sigma_omega, sw.epsilon(), "omega")
    }

    /// `Γ`, materialized for the given weights.
    pub fn gamma_matrix(&self, sw: &ScaleWeightPair) -> Result<DMatrix<f64>> {
        materialize(&self.gamma, self.sigma_v, sw.weights(), "gamma")
    }
}

fn materialize(
    factor: &CovarianceFactor,
    sigma: f64,
    diag: &DVector<f64>,
    name: &str,
) -> Result<DMatrix<f64>> {
    match factor {
        CovarianceFactor::Separable => Ok(DMatrix::from_diagonal(&diag.map(|x| sigma * x.sqrt()))),
        CovarianceFactor::Matrix(m) => {
            if m.nrows() != diag.len() || m.ncols() != diag.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{name} factor must be {0}x{0}, got {1}x{2}",
                    diag.len(),
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(m.clone())
        }
    }
}

fn inverse_diagonal(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&v.map(|x| 1.0 / x))
}

/// `L_w = D W Dᵀ`.
pub fn weighted_laplacian(inc: &IncidenceDecomposition, sw: &ScaleWeightPair) -> Result<DMatrix<f64>> {
    sw.check_dims(inc)?;
    let dw = scale_columns(&inc.d, sw.weights());
    Ok(&dw * inc.d.transpose())
}

/// `E^{-1} L_w`, the node-level consensus operator.
pub fn scaled_laplacian(inc: &IncidenceDecomposition, sw: &ScaleWeightPair) -> Result<DMatrix<f64>> {
    let lw = weighted_laplacian(inc, sw)?;
    Ok(inverse_diagonal(sw.epsilon()) * lw)
}

/// `L_{e,s} = D_τᵀ E^{-1} D_τ`.
pub fn scaled_edge_laplacian(
    inc: &IncidenceDecomposition,
    sw: &ScaleWeightPair,
) -> Result<DMatrix<f64>> {
    sw.check_dims(inc)?;
    let inv_eps = sw.epsilon().map(|x| 1.0 / x);
    let scaled = scale_rows(&inc.d_tree, &inv_eps);
    Ok(inc.d_tree.transpose() * scaled)
}

/// `R W Rᵀ`.
pub fn cycle_gram(cb: &CutBasis, sw: &ScaleWeightPair) -> DMatrix<f64> {
    scale_columns(&cb.r, sw.weights()) * cb.r.transpose()
}

fn scale_columns(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (mut col, &k) in out.column_iter_mut().zip(s.iter()) {
        col *= k;
    }
    out
}

fn scale_rows(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (mut row, &k) in out.row_iter_mut().zip(s.iter()) {
        row *= k;
    }
    out
}

/// `S_v` and its inverse, mapping node states to `[x_τ; x_1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub s_v: DMatrix<f64>,
    pub s_v_inv: DMatrix<f64>,
}

pub fn similarity_transform(
    inc: &IncidenceDecomposition,
    _cb: &CutBasis,
    sw: &ScaleWeightPair,
) -> Result<SimilarityPair> {
    let n = inc.node_count();
    let t = inc.tree_count();
    let les = scaled_edge_laplacian(inc, sw)?;
    let les_inv = les
        .cholesky()
        .ok_or(Error::SingularTreeGram)?
        .inverse();
    let inv_eps = sw.epsilon().map(|x| 1.0 / x);

    let mut s_v = DMatrix::zeros(n, n);
    s_v.view_mut((0, 0), (n, t))
        .copy_from(&(scale_rows(&inc.d_tree, &inv_eps) * les_inv));
    s_v.column_mut(t).fill(1.0);

    let mut s_v_inv = DMatrix::zeros(n, n);
    s_v_inv
        .view_mut((0, 0), (t, n))
        .copy_from(&inc.d_tree.transpose());
    let eps_s = sw.epsilon_sum();
    s_v_inv
        .row_mut(t)
        .copy_from(&(sw.epsilon().transpose() / eps_s));

    Ok(SimilarityPair { s_v, s_v_inv })
}

/// Output of the tree-edge system: `Sigma` observes all edge states through
/// `Rᵀ`, `SigmaHat` observes only the spanning-tree states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputMode {
    Sigma,
    SigmaHat,
}

impl OutputMode {
    pub fn name(self) -> &'static str {
        match self {
            OutputMode::Sigma => "sigma",
            OutputMode::SigmaHat => "sigma_hat",
        }
    }
}

/// `ẋ_τ = -A x_τ + B [ŵ; v̂]`, `z = C x_τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub mode: OutputMode,
}

impl EdgeSystem {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
}

pub fn edge_system(
    inc: &IncidenceDecomposition,
    cb: &CutBasis,
    sw: &ScaleWeightPair,
    noise: &NoiseModel,
    mode: OutputMode,
) -> Result<EdgeSystem> {
    noise.validate()?;
    let n = inc.node_count();
    let m = inc.edge_count();
    let t = inc.tree_count();

    let les = scaled_edge_laplacian(inc, sw)?;
    let a = &les * cycle_gram(cb, sw);

    let omega = noise.omega_matrix(sw)?;
    let gamma = noise.gamma_matrix(sw)?;
    let inv_eps = sw.epsilon().map(|x| 1.0 / x);
    let process = inc.d_tree.transpose() * scale_rows(&omega, &inv_eps);
    let measurement = -(&les * &cb.r * gamma);

    let mut b = DMatrix::zeros(t, n + m);
    b.view_mut((0, 0), (t, n)).copy_from(&process);
    b.view_mut((0, n), (t, m)).copy_from(&measurement);

    let min_re = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !(min_re > 0.0) {
        return Err(Error::UnstablePair(min_re));
    }

    let c = match mode {
        OutputMode::Sigma => cb.r.transpose(),
        OutputMode::SigmaHat => DMatrix::identity(t, t),
    };
    Ok(EdgeSystem { a, b, c, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Network};

    fn net(n: usize, edges: &[(usize, usize)]) -> Network {
        Network::new(Graph::new(n, edges).unwrap()).unwrap()
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(ScaleWeightPair::from_slices(&[1.0, 0.0], &[1.0]).is_err());
        assert!(ScaleWeightPair::from_slices(&[1.0, 1.0], &[-1.0]).is_err());
        assert!(ScaleWeightPair::from_slices(&[1.0, f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let p = net(2, &[(1, 2)]);
        let sw = ScaleWeightPair::from_slices(&[1.0, 1.0, 1.0], &[1.0]).unwrap();
        assert!(matches!(
            weighted_laplacian(&p.incidence, &sw),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn laplacians_of_small_graphs() {
        let p = net(2, &[(1, 2)]);
        let sw = ScaleWeightPair::unit(2, 1);
        assert_eq!(
            weighted_laplacian(&p.incidence, &sw).unwrap(),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        assert_eq!(scaled_edge_laplacian(&p.incidence, &sw).unwrap()[(0, 0)], 2.0);
        let sw = ScaleWeightPair::from_slices(&[0.5, 0.25], &[1.0]).unwrap();
        assert_eq!(scaled_edge_laplacian(&p.incidence, &sw).unwrap()[(0, 0)], 6.0);

        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        let l = weighted_laplacian(&tri.incidence, &ScaleWeightPair::unit(3, 3)).unwrap();
        let expected = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { -1.0 });
        assert_eq!(l, expected);
        assert!((l * DVector::from_element(3, 1.0)).amax() == 0.0);
    }

    #[test]
    fn edge_laplacian_diagonal_is_inverse_scale_sum() {
        let tree = net(6, &[(1, 2), (2, 3), (3, 4), (3, 5), (3, 6)]);
        let eps = [0.1, 0.2, 0.4, 0.1, 0.1, 0.1];
        let sw = ScaleWeightPair::from_slices(&eps, &[1.0; 5]).unwrap();
        let les = scaled_edge_laplacian(&tree.incidence, &sw).unwrap();
        for (k, &(i, j)) in tree.ordering.edges().iter().enumerate() {
            assert!((les[(k, k)] - (1.0 / eps[i - 1] + 1.0 / eps[j - 1])).abs() < 1e-12);
        }
        let unit = scaled_edge_laplacian(&tree.incidence, &ScaleWeightPair::unit(6, 5)).unwrap();
        assert!((unit.trace() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_on_single_edge() {
        let p = net(2, &[(1, 2)]);
        let sw = ScaleWeightPair::unit(2, 1);
        let sim = similarity_transform(&p.incidence, &p.cut, &sw).unwrap();
        let lws = scaled_laplacian(&p.incidence, &sw).unwrap();
        let out = &sim.s_v_inv * lws * &sim.s_v;
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert!((out - expected).amax() < 1e-12);
        assert!((&sim.s_v * &sim.s_v_inv - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn similarity_blocks_on_triangle() {
        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        let sw = ScaleWeightPair::from_slices(&[0.3, 1.1, 0.7], &[0.5, 1.5, 2.0]).unwrap();
        let sim = similarity_transform(&tri.incidence, &tri.cut, &sw).unwrap();
        let out = &sim.s_v_inv * scaled_laplacian(&tri.incidence, &sw).unwrap() * &sim.s_v;
        let a = scaled_edge_laplacian(&tri.incidence, &sw).unwrap() * cycle_gram(&tri.cut, &sw);
        assert!((out.view((0, 0), (2, 2)) - &a).amax() < 1e-10);
        assert!(out.row(2).amax() < 1e-10);
        assert!(out.column(2).amax() < 1e-10);
    }

    #[test]
    fn edge_system_on_single_edge() {
        let p = net(2, &[(1, 2)]);
        let sys = edge_system(
            &p.incidence,
            &p.cut,
            &ScaleWeightPair::unit(2, 1),
            &NoiseModel::default(),
            OutputMode::SigmaHat,
        )
        .unwrap();
        assert_eq!(sys.a, DMatrix::from_element(1, 1, 2.0));
        assert_eq!(sys.b, DMatrix::from_row_slice(1, 3, &[1.0, -1.0, -2.0]));
        assert_eq!(sys.c, DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn tree_modes_share_dynamics() {
        let tree = net(4, &[(1, 2), (2, 3), (2, 4)]);
        let sw = ScaleWeightPair::from_slices(&[0.2, 0.9, 1.3, 0.4], &[1.0, 0.3, 2.0]).unwrap();
        let noise = NoiseModel::separable(0.7, 1.3);
        let s = edge_system(&tree.incidence, &tree.cut, &sw, &noise, OutputMode::Sigma).unwrap();
        let h = edge_system(&tree.incidence, &tree.cut, &sw, &noise, OutputMode::SigmaHat).unwrap();
        assert_eq!(s.a, h.a);
        assert_eq!(s.b, h.b);
        assert_eq!(s.c, h.c);
    }

    #[test]
    fn triangle_system_is_stable() {
        let tri = net(3, &[(1, 2), (2, 3), (1, 3)]);
        let sys = edge_system(
            &tri.incidence,
            &tri.cut,
            &ScaleWeightPair::unit(3, 3),
            &NoiseModel::default(),
            OutputMode::Sigma,
        )
        .unwrap();
        assert_eq!(sys.a.shape(), (2, 2));
        assert_eq!(sys.b.shape(), (2, 6));
        assert_eq!(sys.c.shape(), (3, 2));
        // L_{e,s} = [[2,1],[1,2]], RWRᵀ = [[2,-1],[-1,2]] → A = [[3,0],[0,3]]
        assert!((&sys.a - DMatrix::from_diagonal_element(2, 2, 3.0)).amax() < 1e-12);
    }

    #[test]
    fn explicit_factor_must_be_square_of_right_size() {
        let p = net(2, &[(1, 2)]);
        let noise = NoiseModel::general(DMatrix::identity(3, 3), DMatrix::identity(1, 1));
        assert!(matches!(
            edge_system(&p.incidence, &p.cut, &ScaleWeightPair::unit(2, 1), &noise, OutputMode::Sigma),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
