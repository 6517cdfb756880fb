//! Exact flows through Hermitian eigendecompositions and the Lie-Trotter and
//! Strang splittings of the separable equations.

use std::collections::BTreeMap;

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::reduced::partially_reduced;
use crate::state::{check_finite, hermitian_deviation, tensor_product, ComponentState, FullState, Ket};
use crate::{CMatrix, CVector, C64};

/// Symmetry tolerance accepted by [`hermitian_expm_apply`].
pub const EXPM_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplittingScheme {
    LieTrotter,
    Strang,
}

/// Cached eigendecomposition `H = U diag(λ) U†` for repeated `exp(−itH)`.
#[derive(Debug, Clone)]
pub struct HermitianExp {
    vectors: CMatrix,
    values: DVector<f64>,
}

impl HermitianExp {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::dim("matrix exponential needs a square matrix"));
        }
        check_finite(h, "operator")?;
        let deviation = hermitian_deviation(h);
        if deviation > EXPM_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(HermitianExp {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// `exp(−itH)` as a matrix.
    pub fn operator(&self, t: f64) -> CMatrix {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(−itH) v`.
    pub fn apply(&self, t: f64, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::dim(format!(
                "vector of length {} for operator of side {}",
                v.len(),
                self.dim()
            )));
        }
        if t == 0.0 {
            return Ok(v.clone());
        }
        let mut coeffs = self.vectors.adjoint() * v;
        for (c, p) in coeffs.iter_mut().zip(self.phases(t)) {
            *c *= p;
        }
        Ok(&self.vectors * coeffs)
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.values.iter().map(|&l| C64::from_polar(1.0, -t * l)).collect()
    }
}

/// `exp(−itH) v` through an eigendecomposition of `H`.
pub fn hermitian_expm_apply(h: &CMatrix, t: f64, v: &CVector) -> Result<CVector> {
    HermitianExp::new(h)?.apply(t, v)
}

/// `exp(−itH) ψ0`.
pub fn se_flow(h: &HermitianOperator, t: f64, psi0: &FullState) -> Result<FullState> {
    check_dims(h, psi0.dims())?;
    let out = hermitian_expm_apply(h.matrix(), t, psi0.amplitudes())?;
    FullState::new(out, psi0.dims().to_vec())
}

/// Exact SE states at `t_j = j·dt`, `j = 0..=steps`, from one eigendecomposition.
pub fn se_evolve(h: &HermitianOperator, psi0: &FullState, dt: f64, steps: usize) -> Result<Trajectory> {
    check_grid(dt, steps)?;
    check_dims(h, psi0.dims())?;
    let exp = HermitianExp::new(h.matrix())?;
    let mut states = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let t = j as f64 * dt;
        let v = if j == 0 {
            psi0.amplitudes().clone()
        } else {
            exp.apply(t, psi0.amplitudes())?
        };
        states.push(FullState::new(v, psi0.dims().to_vec())?);
    }
    let norms = states.iter().map(FullState::norm).collect();
    let mut traj = Trajectory::new(grid(dt, steps));
    traj.full_states = Some(states);
    traj.insert("norm", Series::Real(norms))?;
    Ok(traj)
}

/// Part `k` propagated for time `t` under its partially reduced operator.
pub fn sse_component_flow(h: &HermitianOperator, state: &ComponentState, k: usize, t: f64) -> Result<Ket> {
    let hk = partially_reduced(h, state, k)?;
    let v = hermitian_expm_apply(hk.matrix(), t, state.part(k).as_vector())?;
    Ket::from_vector(v)
}

/// One Lie-Trotter step: parts are updated in order, each against the
/// context in which earlier parts already carry their new values.
pub fn lie_trotter_step(h: &HermitianOperator, state: &ComponentState, dt: f64) -> Result<ComponentState> {
    check_step(dt)?;
    let mut next = state.clone();
    for l in 0..state.len() {
        let part = sse_component_flow(h, &next, l, dt)?;
        next.replace_part(l, part)?;
    }
    Ok(next)
}

/// One Strang step.
///
/// For two parts: half step on part 2, full step on part 1, half step on
/// part 2. For more parts: half steps on parts 1..N−1, a full step on part N,
/// then half steps back down to part 1.
pub fn strang_step(h: &HermitianOperator, state: &ComponentState, dt: f64) -> Result<ComponentState> {
    let n = state.len();
    let order: Vec<usize> = if n == 2 { vec![1, 0] } else { (0..n).collect() };
    palindromic_step(h, state, dt, &order)
}

/// Symmetric composition: half steps on `order[..n-1]`, a full step on
/// `order[n-1]`, then half steps on `order[..n-1]` reversed.
pub fn palindromic_step(h: &HermitianOperator, state: &ComponentState, dt: f64, order: &[usize]) -> Result<ComponentState> {
    check_step(dt)?;
    let n = state.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::arg(format!("{order:?} is not an ordering of {n} parts")));
    }
    let (last, outer) = order.split_last().expect("n >= 2");
    let mut next = state.clone();
    for &k in outer {
        let p = sse_component_flow(h, &next, k, 0.5 * dt)?;
        next.replace_part(k, p)?;
    }
    let p = sse_component_flow(h, &next, *last, dt)?;
    next.replace_part(*last, p)?;
    for &k in outer.iter().rev() {
        let p = sse_component_flow(h, &next, k, 0.5 * dt)?;
        next.replace_part(k, p)?;
    }
    Ok(next)
}

pub fn step(scheme: SplittingScheme, h: &HermitianOperator, state: &ComponentState, dt: f64) -> Result<ComponentState> {
    match scheme {
        SplittingScheme::LieTrotter => lie_trotter_step(h, state, dt),
        SplittingScheme::Strang => strang_step(h, state, dt),
    }
}

/// Iterate a splitting step `steps` times. Records component states, their
/// tensor products, the full norm and each part's norm (`norm_a{j}`, 1-based).
pub fn evolve(
    scheme: SplittingScheme,
    h: &HermitianOperator,
    state0: &ComponentState,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_grid(dt, steps)?;
    if h.dims() != state0.dims().as_slice() {
        return Err(Error::dim(format!(
            "operator dims {:?} do not match state dims {:?}",
            h.dims(),
            state0.dims()
        )));
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state0.clone());
    for _ in 0..steps {
        let next = step(scheme, h, states.last().expect("non-empty"), dt)?;
        states.push(next);
    }
    Trajectory::from_components(grid(dt, steps), states)
}

/// A named per-time-point diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum Series {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl Series {
    pub fn len(&self) -> usize {
        match self {
            Series::Real(v) => v.len(),
            Series::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Series::Real(v) => Some(v),
            Series::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[C64]> {
        match self {
            Series::Complex(v) => Some(v),
            Series::Real(_) => None,
        }
    }
}

/// States and diagnostics on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub full_states: Option<Vec<FullState>>,
    pub component_states: Option<Vec<ComponentState>>,
    pub diagnostics: BTreeMap<String, Series>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>) -> Self {
        Trajectory {
            times,
            full_states: None,
            component_states: None,
            diagnostics: BTreeMap::new(),
        }
    }

    /// Component run with tensor products and norm diagnostics filled in.
    pub fn from_components(times: Vec<f64>, states: Vec<ComponentState>) -> Result<Self> {
        if states.len() != times.len() {
            return Err(Error::dim(format!("{} states for {} times", states.len(), times.len())));
        }
        let full: Vec<FullState> = states.iter().map(tensor_product).collect();
        let mut traj = Trajectory::new(times);
        traj.insert("norm", Series::Real(full.iter().map(FullState::norm).collect()))?;
        for j in 0..states[0].len() {
            let norms = states.iter().map(|s| s.part(j).norm()).collect();
            traj.insert(&format!("norm_a{}", j + 1), Series::Real(norms))?;
        }
        traj.full_states = Some(full);
        traj.component_states = Some(states);
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }

    pub fn insert(&mut self, name: &str, series: Series) -> Result<()> {
        if series.len() != self.times.len() {
            return Err(Error::dim(format!(
                "series '{name}' has {} points, trajectory has {}",
                series.len(),
                self.times.len()
            )));
        }
        self.diagnostics.insert(name.to_string(), series);
        Ok(())
    }

    pub fn real(&self, name: &str) -> Option<&[f64]> {
        self.diagnostics.get(name).and_then(Series::as_real)
    }

    /// Full states, from storage or rebuilt from component states.
    pub fn full(&self) -> Option<Vec<FullState>> {
        if let Some(f) = &self.full_states {
            return Some(f.clone());
        }
        self.component_states
            .as_ref()
            .map(|c| c.iter().map(tensor_product).collect())
    }
}

/// `t_j = j·dt` for `j = 0..=steps`.
pub fn grid(dt: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|j| j as f64 * dt).collect()
}

fn check_grid(dt: f64, steps: usize) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::arg(format!("dt must be positive, got {dt}")));
    }
    if steps == 0 {
        return Err(Error::arg("steps must be at least 1"));
    }
    Ok(())
}

fn check_step(dt: f64) -> Result<()> {
    if dt.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("step size"))
    }
}

fn check_dims(h: &HermitianOperator, dims: &[usize]) -> Result<()> {
    if h.dims() != dims {
        return Err(Error::dim(format!("operator dims {:?} do not match state dims {:?}", h.dims(), dims)));
    }
    Ok(())
}
