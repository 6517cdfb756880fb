//! Variational integrators for Lagrangians linear in the velocities.
//!
//! A first-order Lagrangian is a function `L(x, x̄, v, v̄)` of four complex
//! argument blocks, with the barred blocks treated as independent variables.
//! Gradients and Hessians are holomorphic partial derivatives in that
//! four-block layout. Trajectories impose `x̄ = conj(x)` when solving the
//! discrete Euler–Lagrange equations.

mod integrate;
mod newton;
mod product;
mod separable;

pub use integrate::{
    integrate_discretize_then_restrict, integrate_full, integrate_restrict_then_discretize, DiscreteTrajectory,
    IntegrationOptions, TrajectoryKind, TrajectoryStatus,
};
pub use newton::{del_residual, del_step, initial_residual, initial_step, JacobianMode, NewtonOptions, NewtonReport};
pub use product::ProductMap;
pub use separable::{separable_lagrangian, RestrictedDiscreteLagrangian, SeparableLagrangian};

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::{CMatrix, CVector, C64};

/// `[g_x, g_x̄, g_v, g_v̄]`.
pub type Gradient = [CVector; 4];

pub trait FirstOrderLagrangian {
    /// Length of each argument block.
    fn dim(&self) -> usize;
    fn value(&self, x: &CVector, xb: &CVector, v: &CVector, vb: &CVector) -> C64;
    fn gradient(&self, x: &CVector, xb: &CVector, v: &CVector, vb: &CVector) -> Gradient;
    /// `4·dim × 4·dim`, blocks ordered `x, x̄, v, v̄`.
    fn hessian(&self, x: &CVector, xb: &CVector, v: &CVector, vb: &CVector) -> CMatrix;

    /// `∂L/∂v` at `(x, conj x)`; independent of the velocity for these Lagrangians.
    fn momentum(&self, x: &CVector) -> CVector {
        let z = CVector::zeros(self.dim());
        let [_, _, p, _] = self.gradient(x, &x.map(|c| c.conj()), &z, &z);
        p
    }
}

/// A two-point discrete Lagrangian `L_Δ(x0, x̄0, x1, x̄1)`.
pub trait DiscreteLagrangian {
    fn dim(&self) -> usize;
    fn dt(&self) -> f64;
    fn value(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> C64;
    /// `[∇1, ∇2, ∇3, ∇4]`.
    fn gradient(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> Gradient;
    fn hessian(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> CMatrix;
    /// Continuous momentum matched by the first discrete step.
    fn initial_momentum(&self, x0: &CVector) -> CVector;
}

/// `L = (i/2)(x̄ᵀv − v̄ᵀx) − x̄ᵀ H x`.
#[derive(Debug, Clone)]
pub struct SeLagrangian {
    h: CMatrix,
}

impl SeLagrangian {
    pub fn new(h: &HermitianOperator) -> Self {
        SeLagrangian { h: h.matrix().clone() }
    }

    pub fn operator(&self) -> &CMatrix {
        &self.h
    }
}

pub fn se_lagrangian(h: &HermitianOperator) -> SeLagrangian {
    SeLagrangian::new(h)
}

const HALF_I: C64 = C64::new(0.0, 0.5);

impl FirstOrderLagrangian for SeLagrangian {
    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn value(&self, x: &CVector, xb: &CVector, v: &CVector, vb: &CVector) -> C64 {
        HALF_I * (xb.dot(v) - vb.dot(x)) - xb.dot(&(&self.h * x))
    }

    fn gradient(&self, x: &CVector, xb: &CVector, v: &CVector, vb: &CVector) -> Gradient {
        [
            -(vb * HALF_I) - self.h.transpose() * xb,
            v * HALF_I - &self.h * x,
            xb * HALF_I,
            -(x * HALF_I),
        ]
    }

    fn hessian(&self, _x: &CVector, _xb: &CVector, _v: &CVector, _vb: &CVector) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(4 * n, 4 * n);
        let id = CMatrix::identity(n, n);
        m.view_mut((0, n), (n, n)).copy_from(&(-self.h.transpose()));
        m.view_mut((n, 0), (n, n)).copy_from(&(-&self.h));
        m.view_mut((0, 3 * n), (n, n)).copy_from(&(&id * -HALF_I));
        m.view_mut((3 * n, 0), (n, n)).copy_from(&(&id * -HALF_I));
        m.view_mut((n, 2 * n), (n, n)).copy_from(&(&id * HALF_I));
        m.view_mut((2 * n, n), (n, n)).copy_from(&(&id * HALF_I));
        m
    }
}

/// `L_Δ = Δt · L(α x0 + (1−α) x1, α x̄0 + (1−α) x̄1, (x1−x0)/Δt, (x̄1−x̄0)/Δt)`.
#[derive(Debug, Clone)]
pub struct AlphaDiscretization<L> {
    base: L,
    alpha: f64,
    dt: f64,
}

impl<L: FirstOrderLagrangian> AlphaDiscretization<L> {
    pub fn new(base: L, alpha: f64, dt: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::arg(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::arg(format!("dt must be positive, got {dt}")));
        }
        Ok(AlphaDiscretization { base, alpha, dt })
    }

    pub fn base(&self) -> &L {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn arguments(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> [CVector; 4] {
        let a = C64::new(self.alpha, 0.0);
        let b = C64::new(1.0 - self.alpha, 0.0);
        let r = C64::new(1.0 / self.dt, 0.0);
        [
            x0 * a + x1 * b,
            xb0 * a + xb1 * b,
            (x1 - x0) * r,
            (xb1 - xb0) * r,
        ]
    }

    /// Rows: continuous arguments; columns: discrete arguments.
    fn chain(&self) -> [[f64; 4]; 4] {
        let (a, b, r) = (self.alpha, 1.0 - self.alpha, 1.0 / self.dt);
        [
            [a, 0.0, b, 0.0],
            [0.0, a, 0.0, b],
            [-r, 0.0, r, 0.0],
            [0.0, -r, 0.0, r],
        ]
    }
}

pub fn discrete_lagrangian_alpha<L: FirstOrderLagrangian>(base: L, alpha: f64, dt: f64) -> Result<AlphaDiscretization<L>> {
    AlphaDiscretization::new(base, alpha, dt)
}

impl<L: FirstOrderLagrangian> DiscreteLagrangian for AlphaDiscretization<L> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn value(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> C64 {
        let [x, xb, v, vb] = self.arguments(x0, xb0, x1, xb1);
        self.base.value(&x, &xb, &v, &vb) * self.dt
    }

    fn gradient(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> Gradient {
        let [x, xb, v, vb] = self.arguments(x0, xb0, x1, xb1);
        let g = self.base.gradient(&x, &xb, &v, &vb);
        let c = self.chain();
        let n = self.dim();
        std::array::from_fn(|col| {
            let mut acc = CVector::zeros(n);
            for (row, gr) in g.iter().enumerate() {
                if c[row][col] != 0.0 {
                    acc += gr * C64::new(c[row][col] * self.dt, 0.0);
                }
            }
            acc
        })
    }

    fn hessian(&self, x0: &CVector, xb0: &CVector, x1: &CVector, xb1: &CVector) -> CMatrix {
        let [x, xb, v, vb] = self.arguments(x0, xb0, x1, xb1);
        let h = self.base.hessian(&x, &xb, &v, &vb);
        let n = self.dim();
        let mut chain = CMatrix::zeros(4 * n, 4 * n);
        let id = CMatrix::identity(n, n);
        for (row, coeffs) in self.chain().iter().enumerate() {
            for (col, &c) in coeffs.iter().enumerate() {
                if c != 0.0 {
                    chain.view_mut((row * n, col * n), (n, n)).copy_from(&(&id * C64::new(c, 0.0)));
                }
            }
        }
        chain.transpose() * h * chain * C64::new(self.dt, 0.0)
    }

    fn initial_momentum(&self, x0: &CVector) -> CVector {
        self.base.momentum(x0)
    }
}
