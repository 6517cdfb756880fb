//! Diagnostics computed across trajectories: overlaps, the nuclear-norm rate
//! of change of the state projector, marginal purities and empirical
//! convergence orders.

use crate::error::{Error, Result};
use crate::propagate::Trajectory;
use crate::state::{bloch_vector, nuclear_norm, purity, FullState};
use crate::{CMatrix, C64};

/// Relative tolerance when comparing two time grids.
const GRID_TOL: f64 = 1e-12;

fn full_states(traj: &Trajectory) -> Result<Vec<FullState>> {
    traj.full()
        .ok_or_else(|| Error::arg("trajectory carries no states"))
}

/// `⟨ψ_SE(t)|ψ_SSE(t)⟩` pointwise. Component trajectories are expanded to
/// tensor products first.
pub fn overlap_series(se: &Trajectory, sse: &Trajectory) -> Result<Vec<C64>> {
    if se.times.len() != sse.times.len() {
        return Err(Error::dim(format!("grids have {} and {} points", se.len(), sse.len())));
    }
    for (t, s) in se.times.iter().zip(&sse.times) {
        if (t - s).abs() > GRID_TOL * t.abs().max(1.0) {
            return Err(Error::arg(format!("time grids differ ({t} vs {s})")));
        }
    }
    let x = full_states(se)?;
    let y = full_states(sse)?;
    x.iter().zip(&y).map(|(u, v)| u.inner(v)).collect()
}

/// `‖d/dt |ψ⟩⟨ψ|‖_nucl` by centered differences of the projector, with
/// second-order one-sided differences at the two ends.
pub fn rate_of_change_nuclear(traj: &Trajectory, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::arg(format!("dt must be positive, got {dt}")));
    }
    if traj.len() < 3 {
        return Err(Error::arg(format!("need at least 3 points, got {}", traj.len())));
    }
    let rho: Vec<CMatrix> = full_states(traj)?.iter().map(FullState::projector).collect();
    let n = rho.len();
    let c = |x: f64| C64::new(x, 0.0);
    let inv = c(1.0 / (2.0 * dt));
    (0..n)
        .map(|j| {
            let d = if j == 0 {
                (&rho[1] * c(4.0) - &rho[0] * c(3.0) - &rho[2]) * inv
            } else if j == n - 1 {
                (&rho[n - 1] * c(3.0) - &rho[n - 2] * c(4.0) + &rho[n - 3]) * inv
            } else {
                (&rho[j + 1] - &rho[j - 1]) * inv
            };
            nuclear_norm(&d)
        })
        .collect()
}

/// `tr(ρ_k²)` of the marginal on subsystem `k` at every time point.
pub fn purity_series(traj: &Trajectory, k: usize) -> Result<Vec<f64>> {
    full_states(traj)?
        .iter()
        .map(|psi| {
            let n2 = psi.norm().powi(2);
            let rho = psi.reduced_density(k)?;
            Ok(purity(&rho) / (n2 * n2))
        })
        .collect()
}

/// Bloch coordinates of the (normalized) marginal on qubit `k`.
pub fn bloch_series(traj: &Trajectory, k: usize) -> Result<Vec<[f64; 3]>> {
    full_states(traj)?
        .iter()
        .map(|psi| {
            let rho = psi.reduced_density(k)?;
            let rho = rho.unscale(psi.norm().powi(2));
            bloch_vector(&((&rho + rho.adjoint()) * C64::new(0.5, 0.0)))
        })
        .collect()
}

/// Least-squares slope of `log(error)` against `log(dt)`.
pub fn convergence_order(dts: &[f64], errors: &[f64]) -> Result<f64> {
    if dts.len() != errors.len() {
        return Err(Error::dim(format!("{} step sizes vs {} errors", dts.len(), errors.len())));
    }
    if dts.len() < 3 {
        return Err(Error::arg("need at least 3 (dt, error) pairs"));
    }
    if dts.iter().chain(errors).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::arg("step sizes and errors must be positive and finite"));
    }
    let x: Vec<f64> = dts.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("step sizes must not all be equal"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_swap::{exact_se_swap, exact_sse_swap, SwapInitialData};
    use crate::hamiltonian::{local_sum_hamiltonian, random_hermitian, swap_hamiltonian, HermitianOperator};
    use crate::propagate::{evolve, grid, se_evolve, Series, SplittingScheme};
    use crate::state::{ComponentState, Ket};
    use crate::CVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_vector(seed: u64, n: usize) -> CVector {
        let mut rng = rand_pcg::Pcg32::seed_from_u64(seed);
        CVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .normalize()
    }

    fn full_traj(times: Vec<f64>, states: Vec<FullState>) -> Trajectory {
        let mut t = Trajectory::new(times);
        t.full_states = Some(states);
        t
    }

    #[test]
    fn overlap_at_start_is_one() {
        let data = SwapInitialData::reference();
        let h = swap_hamiltonian(2).unwrap();
        let se = se_evolve(&h, &data.component_state().tensor_product(), 0.01, 10).unwrap();
        let sse = evolve(SplittingScheme::Strang, &h, &data.component_state(), 0.01, 10).unwrap();
        let ov = overlap_series(&se, &sse).unwrap();
        assert!((ov[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let short = evolve(SplittingScheme::Strang, &h, &data.component_state(), 0.01, 9).unwrap();
        assert!(overlap_series(&se, &short).is_err());
        let shifted = evolve(SplittingScheme::Strang, &h, &data.component_state(), 0.011, 10).unwrap();
        assert!(overlap_series(&se, &shifted).is_err());
    }

    #[test]
    fn swap_overlap_against_closed_forms() {
        let data = SwapInitialData::reference();
        let t = 1.0;
        let psi = exact_se_swap(&data, t);
        let s = exact_sse_swap(&data, t);
        let (a, b) = (s.part(0).as_slice(), s.part(1).as_slice());
        // explicit index sum of ⟨ψ|a⊗b⟩
        let mut want = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                want += psi.as_slice()[2 * i + j].conj() * a[i] * b[j];
            }
        }
        let se = full_traj(vec![0.0, t], vec![exact_se_swap(&data, 0.0), psi]);
        let sse = Trajectory::from_components(vec![0.0, t], vec![data.component_state(), s]).unwrap();
        let got = overlap_series(&se, &sse).unwrap();
        assert!((got[1] - want).norm() < 1e-15);

        // integrators reproduce the same value
        let h = swap_hamiltonian(2).unwrap();
        let se = se_evolve(&h, &data.component_state().tensor_product(), 1e-3, 1000).unwrap();
        let sse = evolve(SplittingScheme::Strang, &h, &data.component_state(), 1e-3, 1000).unwrap();
        let got = overlap_series(&se, &sse).unwrap();
        assert!((got[1000] - want).norm() < 1e-5);
    }

    #[test]
    fn decoupled_overlap_has_unit_modulus() {
        let locals = [random_hermitian(1, 3).unwrap(), random_hermitian(1, 4).unwrap()];
        let h = local_sum_hamiltonian(&locals, &[2, 2]).unwrap();
        let s0 = ComponentState::new(vec![
            Ket::from_vector(random_vector(1, 2)).unwrap(),
            Ket::from_vector(random_vector(2, 2)).unwrap(),
        ])
        .unwrap();
        let se = se_evolve(&h, &s0.tensor_product(), 0.1, 100).unwrap();
        let sse = evolve(SplittingScheme::LieTrotter, &h, &s0, 0.1, 100).unwrap();
        for z in overlap_series(&se, &sse).unwrap() {
            assert!((z.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_of_constant_trajectory_is_zero() {
        let psi = FullState::new(random_vector(5, 4), vec![2, 2]).unwrap();
        let traj = full_traj(grid(0.1, 5), vec![psi; 6]);
        assert!(rate_of_change_nuclear(&traj, 0.1).unwrap().iter().all(|&r| r < 1e-14));
        let short = full_traj(grid(0.1, 1), vec![FullState::new(random_vector(5, 4), vec![2, 2]).unwrap(); 2]);
        assert!(rate_of_change_nuclear(&short, 0.1).is_err());
        assert!(rate_of_change_nuclear(&traj, 0.0).is_err());
    }

    fn commutator_rate(h: &HermitianOperator, psi: &FullState) -> f64 {
        let rho = psi.projector();
        let d = (h.matrix() * &rho - &rho * h.matrix()) * C64::new(0.0, -1.0);
        nuclear_norm(&d).unwrap()
    }

    #[test]
    fn se_rate_matches_commutator_at_second_order() {
        let data = SwapInitialData::reference();
        let h = swap_hamiltonian(2).unwrap();
        let psi0 = data.component_state().tensor_product();
        let mut errs = vec![];
        for dt in [0.02, 0.01] {
            let steps = (2.0 / dt) as usize;
            let se = se_evolve(&h, &psi0, dt, steps).unwrap();
            let rate = rate_of_change_nuclear(&se, dt).unwrap();
            let states = se.full().unwrap();
            let err = rate
                .iter()
                .zip(&states)
                .map(|(r, s)| (r - commutator_rate(&h, s)).abs())
                .fold(0.0, f64::max);
            errs.push(err);
            // the orbit is unitarily equivalent to its start, so the rate is flat
            let r0 = commutator_rate(&h, &states[0]);
            assert!(rate.iter().all(|r| (r - r0).abs() < 10.0 * dt * dt));
        }
        assert!(errs[0] < 1e-3);
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rate_ignores_time_dependent_phase() {
        let h = random_hermitian(2, 9).unwrap();
        let psi0 = FullState::new(random_vector(3, 4), vec![2, 2]).unwrap();
        let dt = 0.01;
        let se = se_evolve(&h, &psi0, dt, 200).unwrap();
        let phased: Vec<FullState> = se
            .full()
            .unwrap()
            .iter()
            .zip(&se.times)
            .map(|(s, &t)| {
                FullState::new(s.amplitudes() * C64::from_polar(1.0, 3.0 * t * t + t), vec![2, 2]).unwrap()
            })
            .collect();
        let a = rate_of_change_nuclear(&se, dt).unwrap();
        let b = rate_of_change_nuclear(&full_traj(se.times.clone(), phased), dt).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn purity_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = FullState::new(CVector::from_vec(vec![C64::new(r, 0.0), 0.0.into(), 0.0.into(), C64::new(r, 0.0)]), vec![2, 2]).unwrap();
        let basis = FullState::new(CVector::from_vec(vec![0.0.into(), 1.0.into(), 0.0.into(), 0.0.into()]), vec![2, 2]).unwrap();
        let traj = full_traj(vec![0.0, 1.0], vec![bell, basis]);
        for k in 0..2 {
            let p = purity_series(&traj, k).unwrap();
            assert!((p[0] - 0.5).abs() < 1e-15);
            assert!((p[1] - 1.0).abs() < 1e-15);
        }
        assert!(purity_series(&traj, 2).is_err());

        let h = random_hermitian(3, 11).unwrap();
        let s0 = ComponentState::new((0..3).map(|j| Ket::from_vector(random_vector(j + 30, 2)).unwrap()).collect()).unwrap();
        let sse = evolve(SplittingScheme::Strang, &h, &s0, 0.05, 100).unwrap();
        for k in 0..3 {
            assert!(purity_series(&sse, k).unwrap().iter().all(|p| (p - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn bloch_series_of_reference_data() {
        let data = SwapInitialData::reference();
        let traj = Trajectory::from_components(vec![0.0], vec![data.component_state()]).unwrap();
        let b0 = bloch_series(&traj, 0).unwrap()[0];
        let b1 = bloch_series(&traj, 1).unwrap()[0];
        assert!((b0[2] - 1.0).abs() < 1e-15 && b0[0].abs() < 1e-15);
        assert!((b1[0] - 1.0).abs() < 1e-15 && b1[2].abs() < 1e-15);
    }

    #[test]
    fn convergence_order_examples() {
        let dts = [0.1, 0.05, 0.02, 0.01];
        let e1: Vec<f64> = dts.iter().map(|d| 3.0 * d).collect();
        let e2: Vec<f64> = dts.iter().map(|d| 0.5 * d * d).collect();
        assert!((convergence_order(&dts, &e1).unwrap() - 1.0).abs() < 1e-12);
        assert!((convergence_order(&dts, &e2).unwrap() - 2.0).abs() < 1e-12);
        assert!(convergence_order(&dts[..2], &e1[..2]).is_err());
        assert!(convergence_order(&dts, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(convergence_order(&[0.1, -0.1, 0.2], &[1.0, 1.0, 1.0]).is_err());
        assert!(convergence_order(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn lie_trotter_slope_end_to_end() {
        let data = SwapInitialData::reference();
        let h = swap_hamiltonian(2).unwrap();
        let want = exact_sse_swap(&data, 1.0).tensor_product();
        let dts: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let steps = (1.0 / dt).round() as usize;
                let tr = evolve(SplittingScheme::LieTrotter, &h, &data.component_state(), dt, steps).unwrap();
                let got = tr.full().unwrap().pop().unwrap();
                nuclear_norm(&(got.projector() - want.projector())).unwrap()
            })
            .collect();
        let slope = convergence_order(&dts, &errs).unwrap();
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn series_insert_roundtrip() {
        let mut t = Trajectory::new(vec![0.0, 1.0]);
        t.insert("purity1", Series::Real(vec![1.0, 1.0])).unwrap();
        assert_eq!(t.real("purity1"), Some(&[1.0, 1.0][..]));
    }

    proptest! {
        #[test]
        fn overlap_modulus_bounded(s1 in 0u64..5000, s2 in 0u64..5000) {
            let x = FullState::new(random_vector(s1, 6), vec![2, 3]).unwrap();
            let y = FullState::new(random_vector(s2 + 7919, 6), vec![2, 3]).unwrap();
            let ov = overlap_series(&full_traj(vec![0.0], vec![x]), &full_traj(vec![0.0], vec![y])).unwrap();
            prop_assert!(ov[0].norm() <= 1.0 + 1e-10);
        }

        #[test]
        fn power_law_slope_is_exact(c in 0.01f64..100.0, p in 0.5f64..5.0, n in 3usize..8) {
            let dts: Vec<f64> = (0..n).map(|k| 0.2 / 2f64.powi(k as i32)).collect();
            let errs: Vec<f64> = dts.iter().map(|d| c * d.powf(p)).collect();
            prop_assert!((convergence_order(&dts, &errs).unwrap() - p).abs() < 1e-12);
        }
    }
}
