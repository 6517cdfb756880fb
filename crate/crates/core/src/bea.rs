//! Modified equations for splitting schemes on the two-party exchange system,
//! the associated modified Hamiltonian, and an adaptive Runge–Kutta solver
//! used to integrate truncations of them.
//!
//! Right-hand sides act on a pair `(a, b)` with `q = ⟨a|b⟩` re-evaluated at
//! the current state. Truncations are selected by indicator factors so every
//! order shares one code path.

use crate::error::{Error, Result};
use crate::hamiltonian::swap_hamiltonian;
use crate::propagate::SplittingScheme;
use crate::reduced::reduce_matrix;
use crate::state::{ComponentState, Ket};
use crate::{CMatrix, CVector, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Smallest step the solver will take before giving up.
pub const MIN_STEP: f64 = 1e-14;

/// A truncation of the modified vector field for one splitting scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedRhs {
    scheme: SplittingScheme,
    order: usize,
    dt: f64,
}

impl ModifiedRhs {
    /// Lie-Trotter admits orders 0, 1, 2; Strang admits 0 and 2.
    pub fn new(scheme: SplittingScheme, order: usize, dt: f64) -> Result<Self> {
        check_order(scheme, order)?;
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::arg(format!("dt must be finite and non-negative, got {dt}")));
        }
        Ok(ModifiedRhs { scheme, order, dt })
    }

    pub fn scheme(&self) -> SplittingScheme {
        self.scheme
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn eval(&self, a: &CVector, b: &CVector) -> Result<(CVector, CVector)> {
        match self.scheme {
            SplittingScheme::LieTrotter => trotter_modified_rhs(self.order, self.dt, a, b),
            SplittingScheme::Strang => strang_modified_rhs(self.order, self.dt, a, b),
        }
    }

    /// The field on the stacked vector `[a; b]`.
    pub fn stacked(&self, y: &CVector) -> Result<CVector> {
        let (a, b) = split(y)?;
        let (da, db) = self.eval(&a, &b)?;
        Ok(join(&da, &db))
    }
}

fn check_order(scheme: SplittingScheme, order: usize) -> Result<()> {
    let ok = match scheme {
        SplittingScheme::LieTrotter => order <= 2,
        SplittingScheme::Strang => order == 0 || order == 2,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::arg(format!("truncation order {order} is not available for {scheme:?}")))
    }
}

fn check_pair(a: &CVector, b: &CVector) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::dim(format!("components have lengths {} and {}", a.len(), b.len())));
    }
    Ok(())
}

fn ind(order: usize, k: usize) -> f64 {
    if order >= k {
        1.0
    } else {
        0.0
    }
}

/// `(c_P |b⟩⟨b| + c_1) |a⟩` without forming the projector.
fn proj_plus_shift(cp: C64, c1: C64, a: &CVector, b: &CVector) -> CVector {
    let ba = b.dotc(a);
    b * (cp * ba) + a * c1
}

/// Lie-Trotter modified field truncated at `dt^order`.
pub fn trotter_modified_rhs(order: usize, dt: f64, a: &CVector, b: &CVector) -> Result<(CVector, CVector)> {
    check_order(SplittingScheme::LieTrotter, order)?;
    check_pair(a, b)?;
    let q2 = a.dotc(b).norm_sqr();
    let (o1, o2) = (ind(order, 1), ind(order, 2));
    let second = -I * (dt * dt * (q2 - 1.0) * o2 / 6.0);
    let shift = C64::new(0.5 * dt * q2 * o1, 0.0);
    let da = proj_plus_shift(-I - 0.5 * dt * o1 + second, shift, a, b);
    let db = proj_plus_shift(-I + 0.5 * dt * o1 + second, -shift, b, a);
    Ok((da, db))
}

/// Strang modified field truncated at `dt^order`.
pub fn strang_modified_rhs(order: usize, dt: f64, a: &CVector, b: &CVector) -> Result<(CVector, CVector)> {
    check_order(SplittingScheme::Strang, order)?;
    check_pair(a, b)?;
    let q2 = a.dotc(b).norm_sqr();
    let o2 = ind(order, 2);
    let h2 = dt * dt * o2;
    let shift = h2 * q2 / 8.0;
    let da = proj_plus_shift(-I * (1.0 - h2 / 24.0 * (1.0 + 2.0 * q2)), -I * shift, a, b);
    let db = proj_plus_shift(-I * (1.0 - h2 / 24.0 * (1.0 - 4.0 * q2)), I * shift, b, a);
    Ok((da, db))
}

/// `(1 − ½iΔt + ⅙Δt²(|q|²−1)) S + ½iΔt|q|² 1` with `S` the two-qubit swap.
/// Not Hermitian for `dt ≠ 0`.
pub fn modified_hamiltonian(q: C64, dt: f64) -> CMatrix {
    let q2 = q.norm_sqr();
    let s = swap_hamiltonian(2).expect("qubit swap").into_matrix();
    let c = C64::new(1.0 + dt * dt * (q2 - 1.0) / 6.0, -0.5 * dt);
    s * c + CMatrix::identity(4, 4) * (I * (0.5 * dt * q2))
}

/// Separable equations `ȧ_k = −i M_k a_k` where `M_k` is `m` contracted
/// against the other component (as in the Hermitian case, but without
/// symmetrization).
pub fn operator_sse_rhs(m: &CMatrix, a: &CVector, b: &CVector) -> Result<(CVector, CVector)> {
    check_pair(a, b)?;
    let parts = [Ket::from_vector(a.clone())?, Ket::from_vector(b.clone())?];
    let ma = reduce_matrix(m, &parts, 0)?;
    let mb = reduce_matrix(m, &parts, 1)?;
    Ok(((ma * a) * -I, (mb * b) * -I))
}

fn split(y: &CVector) -> Result<(CVector, CVector)> {
    if y.len() % 2 != 0 || y.is_empty() {
        return Err(Error::dim(format!("stacked pair needs even length, got {}", y.len())));
    }
    let d = y.len() / 2;
    Ok((y.rows(0, d).into_owned(), y.rows(d, d).into_owned()))
}

fn join(a: &CVector, b: &CVector) -> CVector {
    CVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: None,
            max_steps: 10_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    /// Stacked states `[a; b]` at `times`.
    pub states: Vec<CVector>,
    /// Accepted steps.
    pub steps: usize,
    pub rejected: usize,
}

impl OdeSolution {
    /// Split each stacked state back into a two-part component state.
    pub fn component_states(&self) -> Result<Vec<ComponentState>> {
        self.states
            .iter()
            .map(|y| {
                let (a, b) = split(y)?;
                ComponentState::new(vec![Ket::from_vector(a)?, Ket::from_vector(b)?])
            })
            .collect()
    }
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

fn lin(y: &CVector, terms: &[(f64, &CVector)]) -> CVector {
    let mut out = y.clone();
    for &(c, k) in terms {
        out.axpy(C64::new(c, 0.0), k, C64::new(1.0, 0.0));
    }
    out
}

fn err_norm(err: &CVector, y0: &CVector, y1: &CVector, opts: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (u, v))| {
            let sk = opts.atol + opts.rtol * u.norm().max(v.norm());
            (e.norm() / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Adaptive Dormand–Prince 5(4) with PI step control and fourth-order dense
/// output. The solution is reported at `t_eval`, which must be strictly
/// increasing; integration starts at `t_eval[0]` from `y0`.
pub fn dopri5<F>(mut f: F, y0: &CVector, t_eval: &[f64], opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &CVector) -> Result<CVector>,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::arg("tolerances must be positive"));
    }
    if t_eval.is_empty() || t_eval.iter().any(|t| !t.is_finite()) || t_eval.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("sample times must be finite and strictly increasing"));
    }
    if y0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("initial value"));
    }
    let t_end = *t_eval.last().expect("non-empty");
    let mut t = t_eval[0];
    let mut y = y0.clone();
    let mut sol = OdeSolution {
        times: vec![t],
        states: vec![y.clone()],
        steps: 0,
        rejected: 0,
    };
    if t_eval.len() == 1 {
        return Ok(sol);
    }
    let mut next = 1;
    let mut k1 = f(t, &y)?;
    let mut h = match opts.h_init {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::arg(format!("initial step must be positive, got {h}"))),
        None => initial_step(&mut f, t, &y, &k1, opts)?,
    }
    .min(t_end - t);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while next < t_eval.len() {
        if sol.steps + sol.rejected >= opts.max_steps {
            return Err(Error::arg(format!("exceeded {} steps at t = {t}", opts.max_steps)));
        }
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        } else if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let k2 = f(t + C2 * h, &lin(&y, &[(h * A21, &k1)]))?;
        let k3 = f(t + C3 * h, &lin(&y, &[(h * A31, &k1), (h * A32, &k2)]))?;
        let k4 = f(t + C4 * h, &lin(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]))?;
        let k5 = f(
            t + C5 * h,
            &lin(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
        )?;
        let k6 = f(
            t + h,
            &lin(&y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
        )?;
        let y1 = lin(&y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
        let k7 = f(t + h, &y1)?;
        let err = lin(
            &CVector::zeros(y.len()),
            &[(h * E1, &k1), (h * E3, &k3), (h * E4, &k4), (h * E5, &k5), (h * E6, &k6), (h * E7, &k7)],
        );
        let e = err_norm(&err, &y, &y1, opts);

        if !e.is_finite() {
            sol.rejected += 1;
            last_rejected = true;
            h *= FAC_MIN;
            continue;
        }
        let fac11 = e.powf(0.2 - BETA * 0.75);
        if e <= 1.0 {
            // dense output coefficients for the accepted step
            let ydiff = &y1 - &y;
            let bspl = &k1 * C64::new(h, 0.0) - &ydiff;
            let r4 = &ydiff - &k7 * C64::new(h, 0.0) - &bspl;
            let zero = CVector::zeros(y.len());
            let r5 = lin(
                &zero,
                &[(h * D1, &k1), (h * D3, &k3), (h * D4, &k4), (h * D5, &k5), (h * D6, &k6), (h * D7, &k7)],
            );
            let t1 = if last { t_end } else { t + h };
            while next < t_eval.len() && (t_eval[next] <= t1 || (last && next == t_eval.len() - 1)) {
                let te = t_eval[next];
                let yi = if te == t1 {
                    y1.clone()
                } else {
                    let th = (te - t) / h;
                    let th1 = 1.0 - th;
                    let inner = &bspl + (&r4 + &r5 * C64::new(th1, 0.0)) * C64::new(th, 0.0);
                    &y + (&ydiff + inner * C64::new(th1, 0.0)) * C64::new(th, 0.0)
                };
                sol.times.push(te);
                sol.states.push(yi);
                next += 1;
            }
            sol.steps += 1;
            t = t1;
            y = y1;
            k1 = k7;
            let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = e.max(1e-4);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            sol.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
        }
    }
    Ok(sol)
}

/// Starting step from the size of the solution and its first two derivatives.
fn initial_step<F>(f: &mut F, t: f64, y: &CVector, k1: &CVector, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &CVector) -> Result<CVector>,
{
    let scaled = |v: &CVector| {
        let n = v.len() as f64;
        let s: f64 = v
            .iter()
            .zip(y.iter())
            .map(|(z, u)| (z.norm() / (opts.atol + opts.rtol * u.norm())).powi(2))
            .sum();
        (s / n).sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(k1);
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let k2 = f(t + h0, &lin(y, &[(h0, k1)]))?;
    let d2 = scaled(&(&k2 - k1)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

/// Integrate a truncated modified equation from `(a0, b0)`, sampling at
/// `t_eval`, with absolute and relative tolerance `tol`.
pub fn rk_integrate(rhs: &ModifiedRhs, a0: &Ket, b0: &Ket, t_eval: &[f64], tol: f64) -> Result<OdeSolution> {
    if !(tol > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tol}")));
    }
    check_pair(a0.as_vector(), b0.as_vector())?;
    let y0 = join(a0.as_vector(), b0.as_vector());
    dopri5(|_, y| rhs.stacked(y), &y0, t_eval, &OdeOptions::with_tol(tol))
}

/// Max over samples of the Euclidean norm of the stacked difference.
pub fn max_stacked_deviation(x: &[ComponentState], y: &[ComponentState]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim(format!("{} samples vs {}", x.len(), y.len())));
    }
    let mut worst: f64 = 0.0;
    for (u, v) in x.iter().zip(y) {
        if u.dims() != v.dims() {
            return Err(Error::dim("component dimensions differ"));
        }
        worst = worst.max((u.stacked() - v.stacked()).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_swap::{exact_sse_swap, SwapInitialData};
    use crate::hamiltonian::swap_hamiltonian;
    use crate::reduced::partially_reduced;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_pair(seed: u64, d: usize) -> (CVector, CVector) {
        let mut rng = rand_pcg::Pcg32::seed_from_u64(seed);
        let mut draw = || {
            let v = CVector::from_fn(d, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            });
            v.normalize()
        };
        let a = draw();
        let b = draw();
        (a, b)
    }

    fn sse_rhs(a: &CVector, b: &CVector) -> (CVector, CVector) {
        let h = swap_hamiltonian(a.len()).unwrap();
        let s = ComponentState::new(vec![Ket::from_vector(a.clone()).unwrap(), Ket::from_vector(b.clone()).unwrap()]).unwrap();
        let ha = partially_reduced(&h, &s, 0).unwrap();
        let hb = partially_reduced(&h, &s, 1).unwrap();
        ((ha.matrix() * a) * -I, (hb.matrix() * b) * -I)
    }

    fn q_rate(da: &CVector, db: &CVector, a: &CVector, b: &CVector) -> C64 {
        da.dotc(b) + a.dotc(db)
    }

    #[test]
    fn orders_are_validated() {
        assert!(ModifiedRhs::new(SplittingScheme::LieTrotter, 3, 0.1).is_err());
        assert!(ModifiedRhs::new(SplittingScheme::Strang, 1, 0.1).is_err());
        assert!(ModifiedRhs::new(SplittingScheme::Strang, 2, -0.1).is_err());
        let (a, b) = random_pair(1, 2);
        assert!(trotter_modified_rhs(3, 0.1, &a, &b).is_err());
        assert!(strang_modified_rhs(1, 0.1, &a, &b).is_err());
        assert!(trotter_modified_rhs(0, 0.1, &a, &CVector::zeros(3)).is_err());
    }

    #[test]
    fn order_zero_is_the_separable_field() {
        for seed in 0..10 {
            let (a, b) = random_pair(seed, 2);
            let (sa, sb) = sse_rhs(&a, &b);
            let (ta, tb) = trotter_modified_rhs(0, 0.3, &a, &b).unwrap();
            let (ua, ub) = strang_modified_rhs(0, 0.3, &a, &b).unwrap();
            for (x, y) in [(&ta, &sa), (&tb, &sb), (&ua, &sa), (&ub, &sb)] {
                assert!((x - y).norm() < 1e-14);
            }
            let (va, vb) = strang_modified_rhs(2, 0.0, &a, &b).unwrap();
            assert!((va - &sa).norm() < 1e-14 && (vb - &sb).norm() < 1e-14);
        }
    }

    #[test]
    fn trotter_first_order_terms() {
        let (a, b) = random_pair(7, 2);
        let dt = 0.25;
        let q2 = a.dotc(&b).norm_sqr();
        let (a0, b0) = trotter_modified_rhs(0, dt, &a, &b).unwrap();
        let (a1, b1) = trotter_modified_rhs(1, dt, &a, &b).unwrap();
        let pb_a = &b * b.dotc(&a);
        let pa_b = &a * a.dotc(&b);
        let want_a = (&pb_a * C64::new(-0.5, 0.0) + &a * C64::new(0.5 * q2, 0.0)) * C64::new(dt, 0.0);
        let want_b = (&pa_b * C64::new(0.5, 0.0) - &b * C64::new(0.5 * q2, 0.0)) * C64::new(dt, 0.0);
        assert!((a1 - a0 - want_a).norm() < 1e-15);
        assert!((&b1 - b0 - want_b).norm() < 1e-15);

        let (a2, b2) = trotter_modified_rhs(2, dt, &a, &b).unwrap();
        let c = -I * (dt * dt * (q2 - 1.0) / 6.0);
        assert!((a2 - trotter_modified_rhs(1, dt, &a, &b).unwrap().0 - &pb_a * c).norm() < 1e-15);
        assert!((b2 - b1 - &pa_b * c).norm() < 1e-15);
    }

    #[test]
    fn strang_second_order_terms() {
        let (a, b) = random_pair(8, 3);
        let dt = 0.2;
        let q2 = a.dotc(&b).norm_sqr();
        let (a0, b0) = strang_modified_rhs(0, dt, &a, &b).unwrap();
        let (a2, b2) = strang_modified_rhs(2, dt, &a, &b).unwrap();
        let pb_a = &b * b.dotc(&a);
        let pa_b = &a * a.dotc(&b);
        let h2 = dt * dt;
        let want_a = (&pb_a * C64::new(-(1.0 + 2.0 * q2) / 24.0, 0.0) + &a * C64::new(q2 / 8.0, 0.0)) * (-I * h2);
        let want_b = (&pa_b * C64::new(-(1.0 - 4.0 * q2) / 24.0, 0.0) - &b * C64::new(q2 / 8.0, 0.0)) * (-I * h2);
        assert!((a2 - a0 - want_a).norm() < 1e-15);
        assert!((b2 - b0 - want_b).norm() < 1e-15);
    }

    #[test]
    fn modified_hamiltonian_expansion() {
        let s = swap_hamiltonian(2).unwrap().into_matrix();
        let q = C64::new(0.3, -0.4);
        assert_eq!(modified_hamiltonian(q, 0.0), s);
        let dt = 1e-3;
        let lin = (modified_hamiltonian(q, dt) - &s) / C64::new(dt, 0.0);
        let want = &s * C64::new(0.0, -0.5) + CMatrix::identity(4, 4) * C64::new(0.0, 0.5 * q.norm_sqr());
        assert!((lin - want).camax() < 1e-3);
    }

    #[test]
    fn modified_hamiltonian_field_on_the_a_component() {
        // the first component's field agrees exactly with the order-2 truncation
        for seed in 0..5 {
            let (a, b) = random_pair(seed + 20, 2);
            let q = a.dotc(&b);
            for dt in [1e-3, 1e-2, 1e-1] {
                let (ma, _) = operator_sse_rhs(&modified_hamiltonian(q, dt), &a, &b).unwrap();
                let (ta, _) = trotter_modified_rhs(2, dt, &a, &b).unwrap();
                assert!((ma - ta).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn adjoint_modified_hamiltonian_gives_the_b_equation() {
        // the b-equation of the truncation is generated by the adjoint of Ĥmod;
        // Ĥmod itself differs there by −Δt·q·(a − q̄ b)
        for seed in 0..5 {
            let (a, b) = random_pair(seed + 40, 2);
            let q = a.dotc(&b);
            let dt = 0.05;
            let hm = modified_hamiltonian(q, dt);
            let (_, mb) = operator_sse_rhs(&hm.adjoint(), &a, &b).unwrap();
            let (_, tb) = trotter_modified_rhs(2, dt, &a, &b).unwrap();
            assert!((&mb - &tb).norm() < 1e-14);
            let (_, nb) = operator_sse_rhs(&hm, &a, &b).unwrap();
            let gap = (&a - &b * q.conj()) * (-q * dt);
            assert!((nb - tb - gap).norm() < 1e-14);
        }
    }

    #[test]
    fn rk_constant_and_scalar_exponential() {
        let y0 = CVector::from_vec(vec![C64::new(0.3, 0.1), C64::new(-1.0, 2.0)]);
        let ts: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
        let sol = dopri5(|_, y| Ok(CVector::zeros(y.len())), &y0, &ts, &OdeOptions::default()).unwrap();
        assert!(sol.states.iter().all(|y| *y == y0));

        let tol = 1e-12;
        let one = CVector::from_element(1, C64::new(1.0, 0.0));
        let sol = dopri5(|_, y| Ok(y * -I), &one, &ts, &OdeOptions::with_tol(tol)).unwrap();
        assert_eq!(sol.times, ts);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - C64::from_polar(1.0, -t)).norm() < 10.0 * tol, "t={t}");
        }
        assert!(sol.steps > 0);
    }

    #[test]
    fn dense_output_between_steps() {
        // few steps, many samples: interpolation must stay near fourth order
        let ts: Vec<f64> = (0..=1000).map(|k| 0.003 * k as f64).collect();
        let one = CVector::from_element(1, C64::new(1.0, 0.0));
        let sol = dopri5(|_, y| Ok(y * -I), &one, &ts, &OdeOptions::with_tol(1e-8)).unwrap();
        assert!(sol.steps < 200);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - C64::from_polar(1.0, -t)).norm() < 1e-7);
        }
    }

    #[test]
    fn rk_order_zero_matches_closed_form() {
        let data = SwapInitialData::reference();
        let tol = 1e-12;
        let ts: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
        let rhs = ModifiedRhs::new(SplittingScheme::LieTrotter, 0, 0.01).unwrap();
        let sol = rk_integrate(&rhs, data.a0(), data.b0(), &ts, tol).unwrap();
        let got = sol.component_states().unwrap();
        let want: Vec<_> = ts.iter().map(|&t| exact_sse_swap(&data, t)).collect();
        assert!(max_stacked_deviation(&got, &want).unwrap() < 10.0 * tol);
    }

    fn strang_shadowing_errors(order: &[usize], dt: f64) -> (f64, f64) {
        use crate::propagate::palindromic_step;
        let h = swap_hamiltonian(2).unwrap();
        let data = SwapInitialData::reference();
        let steps = (2.0 / dt).round() as usize;
        let ts: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        let mut split = vec![data.component_state()];
        for _ in 0..steps {
            split.push(palindromic_step(&h, split.last().unwrap(), dt, order).unwrap());
        }
        let err = |k| {
            let rhs = ModifiedRhs::new(SplittingScheme::Strang, k, dt).unwrap();
            let sol = rk_integrate(&rhs, data.a0(), data.b0(), &ts, 1e-13).unwrap();
            max_stacked_deviation(&split, &sol.component_states().unwrap()).unwrap()
        };
        (err(0), err(2))
    }

    #[test]
    fn strang_truncation_shadows_the_composition_starting_on_the_first_part() {
        // half steps on a, full step on b
        let (e0, e2) = strang_shadowing_errors(&[0, 1], 0.01);
        assert!(e2 < 1e-2 * e0, "err0 {e0:e}, err2 {e2:e}");
        // the mirrored composition is only marginally closer than the plain field
        let (m0, m2) = strang_shadowing_errors(&[1, 0], 0.01);
        assert!(m2 > 0.5 * m0, "err0 {m0:e}, err2 {m2:e}");
    }

    #[test]
    fn rk_rejects_bad_input_and_underflows() {
        let one = CVector::from_element(1, C64::new(1.0, 0.0));
        assert!(dopri5(|_, y| Ok(y.clone()), &one, &[0.0, 0.0], &OdeOptions::default()).is_err());
        assert!(dopri5(|_, y| Ok(y.clone()), &one, &[0.0, 1.0], &OdeOptions::with_tol(0.0)).is_err());
        // y' = y² blows up at t = 1
        let r = dopri5(|_, y| Ok(y.component_mul(y)), &one, &[0.0, 2.0], &OdeOptions::default());
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })), "{r:?}");
        let data = SwapInitialData::reference();
        let rhs = ModifiedRhs::new(SplittingScheme::Strang, 2, 0.01).unwrap();
        assert!(rk_integrate(&rhs, data.a0(), data.b0(), &[0.0, 1.0], -1.0).is_err());
    }

    proptest! {
        #[test]
        fn order_two_conserves_q(seed in 0u64..10_000, dt in 0.0f64..0.5) {
            let (a, b) = random_pair(seed, 2);
            let (da, db) = trotter_modified_rhs(2, dt, &a, &b).unwrap();
            prop_assert!(q_rate(&da, &db, &a, &b).norm() < 1e-13);
        }

        #[test]
        fn strang_fields_conserve_q(seed in 0u64..10_000, dt in 0.0f64..0.5, d in 2usize..5) {
            let (a, b) = random_pair(seed, d);
            for order in [0, 2] {
                let (da, db) = strang_modified_rhs(order, dt, &a, &b).unwrap();
                prop_assert!(q_rate(&da, &db, &a, &b).norm() < 1e-13);
            }
        }

        #[test]
        fn solution_times_increase(tf in 0.1f64..3.0, n in 2usize..40) {
            let ts: Vec<f64> = (0..n).map(|k| tf * k as f64 / (n - 1) as f64).collect();
            let data = SwapInitialData::reference();
            let rhs = ModifiedRhs::new(SplittingScheme::LieTrotter, 2, 0.01).unwrap();
            let sol = rk_integrate(&rhs, data.a0(), data.b0(), &ts, 1e-10).unwrap();
            prop_assert_eq!(sol.times.len(), n);
            prop_assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(sol.states.iter().all(|y| y.iter().all(|z| z.re.is_finite() && z.im.is_finite())));
        }
    }
}
