//! Closed-form solutions for the two-party exchange Hamiltonian. Kept apart
//! from the integrators so tests can compare the two independently.

use crate::error::{Error, Result};
use crate::state::{ComponentState, FullState, Ket};
use crate::C64;

/// Below this `|q|` the separable solution is stationary.
pub const ORTHOGONAL_Q: f64 = 1e-14;
const NORM_TOL: f64 = 1e-12;

/// Normalized initial components with cached `q = ⟨a0|b0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapInitialData {
    a0: Ket,
    b0: Ket,
    q: C64,
}

impl SwapInitialData {
    pub fn new(a0: Ket, b0: Ket) -> Result<Self> {
        if a0.dim() != b0.dim() {
            return Err(Error::dim(format!("components have dimensions {} and {}", a0.dim(), b0.dim())));
        }
        for (name, k) in [("a0", &a0), ("b0", &b0)] {
            if (k.norm() - 1.0).abs() > NORM_TOL {
                return Err(Error::arg(format!("{name} must be normalized, norm is {}", k.norm())));
            }
        }
        let q = a0.inner(&b0)?;
        Ok(SwapInitialData { a0, b0, q })
    }

    /// Reference qubit data: `|0⟩` and `(|0⟩+|1⟩)/√2`.
    pub fn reference() -> Self {
        let a0 = Ket::basis(2, 0).expect("valid basis");
        let b0 = Ket::from_real(&[1.0, 1.0]).and_then(|k| k.normalized()).expect("valid ket");
        Self::new(a0, b0).expect("normalized")
    }

    pub fn a0(&self) -> &Ket {
        &self.a0
    }

    pub fn b0(&self) -> &Ket {
        &self.b0
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn component_state(&self) -> ComponentState {
        ComponentState::new(vec![self.a0.clone(), self.b0.clone()]).expect("two parts")
    }
}

/// `cos t · a0⊗b0 − i sin t · b0⊗a0`.
pub fn exact_se_swap(data: &SwapInitialData, t: f64) -> FullState {
    let ab = data.a0.as_vector().kronecker(data.b0.as_vector());
    let ba = data.b0.as_vector().kronecker(data.a0.as_vector());
    let v = ab * C64::new(t.cos(), 0.0) - ba * C64::new(0.0, t.sin());
    let d = data.a0.dim();
    FullState::new(v, vec![d, d]).expect("consistent dims")
}

/// `a(t) = cos(|q|t) a0 − i (q*/|q|) sin(|q|t) b0`,
/// `b(t) = cos(|q|t) b0 − i (q/|q|) sin(|q|t) a0`.
pub fn exact_sse_swap(data: &SwapInitialData, t: f64) -> ComponentState {
    let m = data.q.norm();
    if m < ORTHOGONAL_Q {
        return data.component_state();
    }
    let (s, c) = (m * t).sin_cos();
    let phase = data.q / m;
    let i = C64::new(0.0, 1.0);
    let a = data.a0.as_vector() * C64::new(c, 0.0) - data.b0.as_vector() * (i * phase.conj() * s);
    let b = data.b0.as_vector() * C64::new(c, 0.0) - data.a0.as_vector() * (i * phase * s);
    ComponentState::new(vec![
        Ket::from_vector(a).expect("finite"),
        Ket::from_vector(b).expect("finite"),
    ])
    .expect("two parts")
}

/// One Lie-Trotter step written out:
/// `a'' = a + q*(e^{−iΔt}−1) b`, `b'' = q(1−e^{iΔt}) a + (1+2|q|²(cos Δt−1)) b`.
pub fn lie_trotter_swap_closed_form(a: &Ket, b: &Ket, dt: f64) -> Result<ComponentState> {
    let q = a.inner(b)?;
    let e = C64::from_polar(1.0, -dt);
    let a2 = a.as_vector() + b.as_vector() * (q.conj() * (e - 1.0));
    let b2 = a.as_vector() * (q * (1.0 - e.conj()))
        + b.as_vector() * C64::new(1.0 + 2.0 * q.norm_sqr() * (dt.cos() - 1.0), 0.0);
    ComponentState::new(vec![Ket::from_vector(a2)?, Ket::from_vector(b2)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ket(v: &[(f64, f64)]) -> Ket {
        Ket::new(v.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn se_solution_values() {
        let d = SwapInitialData::reference();
        let psi = exact_se_swap(&d, 0.0);
        assert_eq!(psi, d.component_state().tensor_product());
        let psi = exact_se_swap(&d, std::f64::consts::FRAC_PI_2);
        let ba = d.b0().as_vector().kronecker(d.a0().as_vector()) * C64::new(0.0, -1.0);
        assert!((psi.amplitudes() - ba).camax() < 1e-15);
    }

    #[test]
    fn sse_solution_values() {
        let d = SwapInitialData::reference();
        assert_abs_diff_eq!(d.q().re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(exact_sse_swap(&d, 0.0), d.component_state());
        let t = 1.7;
        let s = exact_sse_swap(&d, t);
        let w = t / 2f64.sqrt();
        let want = d.a0().as_vector() * C64::new(w.cos(), 0.0) - d.b0().as_vector() * C64::new(0.0, w.sin());
        assert!((s.part(0).as_vector() - want).camax() < 1e-15);

        let orth = SwapInitialData::new(Ket::basis(2, 0).unwrap(), Ket::basis(2, 1).unwrap()).unwrap();
        assert_eq!(exact_sse_swap(&orth, 5.0), orth.component_state());
    }

    #[test]
    fn initial_data_validation() {
        assert!(SwapInitialData::new(ket(&[(1.0, 0.0), (1.0, 0.0)]), Ket::basis(2, 0).unwrap()).is_err());
        assert!(SwapInitialData::new(Ket::basis(3, 0).unwrap(), Ket::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn closed_form_step_limits() {
        let d = SwapInitialData::reference();
        assert_eq!(lie_trotter_swap_closed_form(d.a0(), d.b0(), 0.0).unwrap(), d.component_state());
        // local error against the exact solution is second order
        let err = |dt: f64| {
            let step = lie_trotter_swap_closed_form(d.a0(), d.b0(), dt).unwrap();
            (step.stacked() - exact_sse_swap(&d, dt).stacked()).norm()
        };
        let mut dt = 1e-3;
        while dt <= 0.1 {
            let c = err(dt) / (dt * dt);
            assert!(c > 0.05 && c < 1.0, "C = {c} at {dt}");
            dt *= 2.0;
        }
    }

    fn arb_unit() -> impl Strategy<Value = Ket> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2)
            .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-2)
            .prop_map(|v| ket(&v).normalized().unwrap())
    }

    proptest! {
        #[test]
        fn sse_conserves_norms_and_q(a in arb_unit(), b in arb_unit(), t in -20.0f64..20.0) {
            let d = SwapInitialData::new(a, b).unwrap();
            let s = exact_sse_swap(&d, t);
            prop_assert!((s.part(0).norm() - 1.0).abs() < 1e-12);
            prop_assert!((s.part(1).norm() - 1.0).abs() < 1e-12);
            prop_assert!((s.part(0).inner(s.part(1)).unwrap() - d.q()).norm() < 1e-12);
            prop_assert!((exact_se_swap(&d, t).norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn closed_form_conserves(a in arb_unit(), b in arb_unit(), dt in 0.0f64..1.0) {
            let s = lie_trotter_swap_closed_form(&a, &b, dt).unwrap();
            prop_assert!((s.part(0).norm() - 1.0).abs() < 1e-12);
            prop_assert!((s.part(1).norm() - 1.0).abs() < 1e-12);
            prop_assert!((s.part(0).inner(s.part(1)).unwrap() - a.inner(&b).unwrap()).norm() < 1e-12);
        }
    }
}
