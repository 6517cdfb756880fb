//! Trajectory drivers: momentum-matching start followed by the two-term
//! discrete Euler–Lagrange recursion. Iterates are never renormalized.

use super::newton::{del_step, initial_step, NewtonOptions};
use super::separable::{RestrictedDiscreteLagrangian, SeparableLagrangian};
use super::{AlphaDiscretization, DiscreteLagrangian, SeLagrangian};
use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::state::{ComponentState, FullState};
use crate::CVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub newton: NewtonOptions,
    /// Stop once any component norm (or the full norm) exceeds this multiple
    /// of its initial value. `None` disables the check.
    pub blow_up_factor: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            newton: NewtonOptions::default(),
            blow_up_factor: Some(2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    /// Points are full state vectors.
    Full,
    /// Points are stacked component vectors.
    Components,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryStatus {
    Completed,
    /// The point at `step` exceeded the blow-up threshold; it is the last one stored.
    BlowUp { step: usize, time: f64 },
    /// No solution could be found for the point at `step`.
    SolverFailed { step: usize, time: f64, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrajectory {
    pub points: Vec<CVector>,
    pub dims: Vec<usize>,
    pub kind: TrajectoryKind,
    pub dt: f64,
    pub status: TrajectoryStatus,
    /// Newton updates used for each point after the first.
    pub iterations: Vec<usize>,
    /// Final residual norm for each point after the first.
    pub residuals: Vec<f64>,
}

impl DiscreteTrajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points.len()).map(|j| j as f64 * self.dt).collect()
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn component_states(&self) -> Result<Vec<ComponentState>> {
        if self.kind != TrajectoryKind::Components {
            return Err(Error::arg("trajectory holds full states"));
        }
        self.points
            .iter()
            .map(|p| ComponentState::from_stacked(p.as_slice(), &self.dims))
            .collect()
    }

    /// Full states; tensor products for component runs.
    pub fn full_states(&self) -> Result<Vec<FullState>> {
        match self.kind {
            TrajectoryKind::Full => self
                .points
                .iter()
                .map(|p| FullState::new(p.clone(), self.dims.clone()))
                .collect(),
            TrajectoryKind::Components => Ok(self.component_states()?.iter().map(ComponentState::tensor_product).collect()),
        }
    }

    /// Per-point norms: one entry for full runs, one per component otherwise.
    pub fn norms(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| point_norms(p, self.kind, &self.dims)).collect()
    }
}

fn point_norms(p: &CVector, kind: TrajectoryKind, dims: &[usize]) -> Vec<f64> {
    match kind {
        TrajectoryKind::Full => vec![p.norm()],
        TrajectoryKind::Components => {
            let mut off = 0;
            dims.iter()
                .map(|&d| {
                    let n = p.rows(off, d).norm();
                    off += d;
                    n
                })
                .collect()
        }
    }
}

fn run(
    ld: &dyn DiscreteLagrangian,
    x0: CVector,
    steps: usize,
    kind: TrajectoryKind,
    dims: Vec<usize>,
    opts: &IntegrationOptions,
) -> Result<DiscreteTrajectory> {
    if steps == 0 {
        return Err(Error::arg("steps must be at least 1"));
    }
    let dt = ld.dt();
    let initial = point_norms(&x0, kind, &dims);
    let mut traj = DiscreteTrajectory {
        points: vec![x0],
        dims,
        kind,
        dt,
        status: TrajectoryStatus::Completed,
        iterations: Vec::with_capacity(steps),
        residuals: Vec::with_capacity(steps),
    };
    for j in 1..=steps {
        let attempt = if j == 1 {
            initial_step(ld, &traj.points[0], &opts.newton)
        } else {
            del_step(ld, &traj.points[j - 2], &traj.points[j - 1], &opts.newton)
        };
        let report = match attempt {
            Ok(r) => r,
            Err(e) => {
                traj.status = TrajectoryStatus::SolverFailed { step: j, time: j as f64 * dt, message: e.to_string() };
                return Ok(traj);
            }
        };
        traj.iterations.push(report.iterations);
        traj.residuals.push(report.residual);
        let norms = point_norms(&report.solution, kind, &traj.dims);
        traj.points.push(report.solution);
        if let Some(f) = opts.blow_up_factor {
            if norms.iter().zip(&initial).any(|(n, n0)| *n > f * n0) {
                traj.status = TrajectoryStatus::BlowUp { step: j, time: j as f64 * dt };
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}

/// Variational integration of the full Schrödinger Lagrangian.
pub fn integrate_full(
    h: &HermitianOperator,
    alpha: f64,
    dt: f64,
    steps: usize,
    psi0: &FullState,
    opts: &IntegrationOptions,
) -> Result<DiscreteTrajectory> {
    if h.dims() != psi0.dims() {
        return Err(Error::dim(format!("operator dims {:?} do not match state dims {:?}", h.dims(), psi0.dims())));
    }
    let ld = AlphaDiscretization::new(SeLagrangian::new(h), alpha, dt)?;
    run(&ld, psi0.amplitudes().clone(), steps, TrajectoryKind::Full, psi0.dims().to_vec(), opts)
}

/// Restrict the Lagrangian to separable states, then discretize.
pub fn integrate_restrict_then_discretize(
    h: &HermitianOperator,
    alpha: f64,
    dt: f64,
    steps: usize,
    state0: &ComponentState,
    opts: &IntegrationOptions,
) -> Result<DiscreteTrajectory> {
    let dims = check_component_dims(h, state0)?;
    let sep = SeparableLagrangian::new(SeLagrangian::new(h), &dims)?;
    let ld = AlphaDiscretization::new(sep, alpha, dt)?;
    run(&ld, state0.stacked(), steps, TrajectoryKind::Components, dims, opts)
}

/// Discretize the full Lagrangian, then restrict the discrete action to
/// separable grid points. The first step matches the momentum of the
/// continuous separable Lagrangian.
pub fn integrate_discretize_then_restrict(
    h: &HermitianOperator,
    alpha: f64,
    dt: f64,
    steps: usize,
    state0: &ComponentState,
    opts: &IntegrationOptions,
) -> Result<DiscreteTrajectory> {
    let dims = check_component_dims(h, state0)?;
    let ld = RestrictedDiscreteLagrangian::new(AlphaDiscretization::new(SeLagrangian::new(h), alpha, dt)?, &dims)?;
    run(&ld, state0.stacked(), steps, TrajectoryKind::Components, dims, opts)
}

fn check_component_dims(h: &HermitianOperator, state0: &ComponentState) -> Result<Vec<usize>> {
    let dims = state0.dims();
    if h.dims() != dims.as_slice() {
        return Err(Error::dim(format!("operator dims {:?} do not match state dims {:?}", h.dims(), dims)));
    }
    Ok(dims)
}
