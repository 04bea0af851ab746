//! Dense solvers for `A X + X Aᵀ = Q` where every eigenvalue of `A` has a
//! positive real part (equivalently `-A` is Hurwitz).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Above this state dimension [`LyapunovMethod::Auto`] switches from the
/// Kronecker system to Bartels–Stewart.
pub const KRONECKER_MAX_DIM: usize = 40;

/// Absolute residual tolerance, scaled by `max(1, ‖Q‖_max)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LyapunovMethod {
    #[default]
    Auto,
    Kronecker,
    BartelsStewart,
}

/// Controllability-type Gramian `X*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    pub x: DMatrix<f64>,
}

/// Observability Gramian `P_O`, solving `Aᵀ P + P A = Cᵀ C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityGramian {
    pub p: DMatrix<f64>,
}

pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Gramian> {
    solve_lyapunov_with(a, q, LyapunovMethod::Auto)
}

pub fn solve_lyapunov_with(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    method: LyapunovMethod,
) -> Result<Gramian> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, Q is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    if n == 0 {
        return Ok(Gramian { x: DMatrix::zeros(0, 0) });
    }
    let min_re = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !(min_re > 0.0) {
        return Err(Error::UnstableA(min_re));
    }

    let use_kron = match method {
        LyapunovMethod::Auto => n <= KRONECKER_MAX_DIM,
        LyapunovMethod::Kronecker => true,
        LyapunovMethod::BartelsStewart => false,
    };
    let x = if use_kron {
        kronecker(a, q)?
    } else {
        bartels_stewart(a, q)?
    };
    let x = (&x + x.transpose()) * 0.5;

    let residual = lyapunov_residual(a, &x, q);
    let tolerance = RESIDUAL_TOL * q.amax().max(1.0);
    if !(residual <= tolerance) {
        return Err(Error::IllConditioned { residual, tolerance });
    }
    Ok(Gramian { x })
}

/// `‖A X + X Aᵀ − Q‖_max`.
pub fn lyapunov_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (a * x + x * a.transpose() - q).amax()
}

fn kronecker(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = nalgebra::DVector::from_column_slice(q.as_slice());
    let sol = op.lu().solve(&rhs).ok_or(Error::UnstableA(0.0))?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

/// Splits a real quasi-upper-triangular matrix into 1×1 and 2×2 diagonal
/// blocks, returned as `(start, size)`.
fn schur_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let scale = t.amax().max(1.0);
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)].abs() > 1e-13 * scale {
            blocks.push((k, 2));
            k += 2;
        } else {
            blocks.push((k, 1));
            k += 1;
        }
    }
    blocks
}

fn bartels_stewart(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let (u, t) = a.clone().schur().unpack();
    let c = u.transpose() * q * &u;
    let blocks = schur_blocks(&t);
    let mut y = DMatrix::<f64>::zeros(n, n);

    // Y_kl depends on Y_pl (p > k) and Y_kq (q > l); sweep both backwards.
    for &(k0, ks) in blocks.iter().rev() {
        for &(l0, ls) in blocks.iter().rev() {
            let mut rhs = c.view((k0, l0), (ks, ls)).into_owned();
            let tail_k = n - (k0 + ks);
            if tail_k > 0 {
                rhs -= t.view((k0, k0 + ks), (ks, tail_k)) * y.view((k0 + ks, l0), (tail_k, ls));
            }
            let tail_l = n - (l0 + ls);
            if tail_l > 0 {
                rhs -= y.view((k0, l0 + ls), (ks, tail_l))
                    * t.view((l0, l0 + ls), (ls, tail_l)).transpose();
            }
            let tkk = t.view((k0, k0), (ks, ks)).into_owned();
            let tll = t.view((l0, l0), (ls, ls)).into_owned();
            let op = DMatrix::<f64>::identity(ls, ls).kronecker(&tkk)
                + tll.kronecker(&DMatrix::<f64>::identity(ks, ks));
            let sol = op
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(rhs.as_slice()))
                .ok_or(Error::UnstableA(0.0))?;
            y.view_mut((k0, l0), (ks, ls))
                .copy_from_slice(sol.as_slice());
        }
    }
    Ok(&u * y * u.transpose())
}

pub fn observability_gramian_of(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<ObservabilityGramian> {
    let g = solve_lyapunov(&a.transpose(), &(c.transpose() * c))?;
    Ok(ObservabilityGramian { p: g.x })
}
