//! Newton solves for the momentum-matching first step and the discrete
//! Euler–Lagrange recursion, posed in real coordinates `(Re x, Im x)`.

use nalgebra::{DMatrix, DVector};

use super::DiscreteLagrangian;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianMode {
    /// From the discrete Lagrangian's Hessian.
    Analytic,
    /// Central differences of the real residual map.
    FiniteDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub jacobian: JacobianMode,
    /// Singular values below `rcond · σ_max` are dropped from each update, so
    /// gauge directions of the restricted problems get a minimum-norm step.
    pub rcond: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iterations: 50,
            jacobian: JacobianMode::Analytic,
            rcond: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub solution: CVector,
    /// Number of Newton updates applied.
    pub iterations: usize,
    /// Euclidean norm of the final residual.
    pub residual: f64,
}

fn conj(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

/// `∇1 L_Δ(x_j, x̄_j, x, x̄) + ∇3 L_Δ(x_{j−1}, x̄_{j−1}, x_j, x̄_j)`.
pub fn del_residual(ld: &dyn DiscreteLagrangian, prev: &CVector, curr: &CVector, next: &CVector) -> CVector {
    let [g1, ..] = ld.gradient(curr, &conj(curr), next, &conj(next));
    let [_, _, g3, _] = ld.gradient(prev, &conj(prev), curr, &conj(curr));
    g1 + g3
}

/// `P0 + ∇1 L_Δ(x0, x̄0, x1, x̄1)`, with `P0` the continuous momentum at `x0`.
pub fn initial_residual(ld: &dyn DiscreteLagrangian, x0: &CVector, x1: &CVector) -> CVector {
    let [g1, ..] = ld.gradient(x0, &conj(x0), x1, &conj(x1));
    ld.initial_momentum(x0) + g1
}

/// Solve for `x1` from `x0` by matching the continuous momentum.
pub fn initial_step(ld: &dyn DiscreteLagrangian, x0: &CVector, opts: &NewtonOptions) -> Result<NewtonReport> {
    check_len(ld, x0)?;
    let p0 = ld.initial_momentum(x0);
    let xb0 = conj(x0);
    let residual = |x: &CVector| {
        let [g1, ..] = ld.gradient(x0, &xb0, x, &conj(x));
        &p0 + g1
    };
    let jac = |x: &CVector| second_slot_blocks(ld, x0, x);
    newton(residual, jac, x0.clone(), opts)
}

/// Solve the discrete Euler–Lagrange equation for the point after `curr`.
/// The initial guess is the linear extrapolation `2·curr − prev`.
pub fn del_step(ld: &dyn DiscreteLagrangian, prev: &CVector, curr: &CVector, opts: &NewtonOptions) -> Result<NewtonReport> {
    check_len(ld, prev)?;
    check_len(ld, curr)?;
    let [_, _, g3, _] = ld.gradient(prev, &conj(prev), curr, &conj(curr));
    let xb = conj(curr);
    let residual = |x: &CVector| {
        let [g1, ..] = ld.gradient(curr, &xb, x, &conj(x));
        g1 + &g3
    };
    let jac = |x: &CVector| second_slot_blocks(ld, curr, x);
    let guess = curr * C64::new(2.0, 0.0) - prev;
    newton(residual, jac, guess, opts)
}

fn check_len(ld: &dyn DiscreteLagrangian, x: &CVector) -> Result<()> {
    if x.len() != ld.dim() {
        return Err(Error::dim(format!("point of length {} for Lagrangian of dimension {}", x.len(), ld.dim())));
    }
    Ok(())
}

/// `(∂∇1/∂x1, ∂∇1/∂x̄1)` at `(x0, conj x0, x1, conj x1)`.
fn second_slot_blocks(ld: &dyn DiscreteLagrangian, x0: &CVector, x1: &CVector) -> (CMatrix, CMatrix) {
    let n = ld.dim();
    let h = ld.hessian(x0, &conj(x0), x1, &conj(x1));
    (
        h.view((0, 2 * n), (n, n)).into_owned(),
        h.view((0, 3 * n), (n, n)).into_owned(),
    )
}

fn to_real(v: &CVector) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |k, _| if k < n { v[k].re } else { v[k - n].im })
}

fn from_real(v: &DVector<f64>) -> CVector {
    let n = v.len() / 2;
    CVector::from_fn(n, |k, _| C64::new(v[k], v[k + n]))
}

/// For `dR = A dx + B dx̄`, the Jacobian of `(Re R, Im R)` in `(Re x, Im x)`.
fn real_jacobian(a: &CMatrix, b: &CMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let s = a + b;
    let d = a - b;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            j[(r, c)] = s[(r, c)].re;
            j[(r, c + n)] = -d[(r, c)].im;
            j[(r + n, c)] = s[(r, c)].im;
            j[(r + n, c + n)] = d[(r, c)].re;
        }
    }
    j
}

fn fd_real_jacobian(residual: &impl Fn(&CVector) -> CVector, x: &CVector, step: f64) -> DMatrix<f64> {
    let xr = to_real(x);
    let m = xr.len();
    let mut j = DMatrix::zeros(m, m);
    for k in 0..m {
        let mut p = xr.clone();
        let mut q = xr.clone();
        p[k] += step;
        q[k] -= step;
        let col = (to_real(&residual(&from_real(&p))) - to_real(&residual(&from_real(&q)))) / (2.0 * step);
        j.set_column(k, &col);
    }
    j
}

fn newton(
    residual: impl Fn(&CVector) -> CVector,
    jacobian: impl Fn(&CVector) -> (CMatrix, CMatrix),
    guess: CVector,
    opts: &NewtonOptions,
) -> Result<NewtonReport> {
    let mut x = guess;
    let mut r = residual(&x);
    let mut norm = r.norm();
    for iteration in 0..=opts.max_iterations {
        if !norm.is_finite() {
            return Err(Error::NewtonFailed { iterations: iteration, residual: norm });
        }
        if norm < opts.tol {
            return Ok(NewtonReport { solution: x, iterations: iteration, residual: norm });
        }
        if iteration == opts.max_iterations {
            break;
        }
        let j = match opts.jacobian {
            JacobianMode::Analytic => {
                let (a, b) = jacobian(&x);
                real_jacobian(&a, &b)
            }
            JacobianMode::FiniteDifference { step } => fd_real_jacobian(&residual, &x, step),
        };
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::NewtonFailed { iterations: iteration, residual: norm });
        }
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        if !(smax > 0.0) {
            return Err(Error::SingularJacobian);
        }
        let delta = svd
            .solve(&(-to_real(&r)), opts.rcond * smax)
            .map_err(|_| Error::SingularJacobian)?;
        x += from_real(&delta);
        r = residual(&x);
        norm = r.norm();
    }
    Err(Error::NewtonFailed { iterations: opts.max_iterations, residual: norm })
}
