//! Lagrangians restricted to separable states, in both orderings: the
//! continuous Lagrangian pulled back through `⊗` (then discretized), and the
//! discrete Lagrangian pulled back through `⊗` directly.

use super::product::ProductMap;
use super::{AlphaDiscretization, DiscreteLagrangian, FirstOrderLagrangian, Gradient};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// `L^sep(A, Ā, Ȧ, Ā̇) = L(⊗a_j, ⊗ā_j, Σ_j a_1⊗…⊗ȧ_j⊗…⊗a_N, …)` on stacked components.
#[derive(Debug, Clone)]
pub struct SeparableLagrangian<L> {
    base: L,
    map: ProductMap,
}

impl<L: FirstOrderLagrangian> SeparableLagrangian<L> {
    pub fn new(base: L, dims: &[usize]) -> Result<Self> {
        let map = ProductMap::new(dims)?;
        if map.full_dim() != base.dim() {
            return Err(Error::dim(format!(
                "base Lagrangian has dimension {}, dims {:?} give {}",
                base.dim(),
                dims,
                map.full_dim()
            )));
        }
        Ok(SeparableLagrangian { base, map })
    }

    pub fn base(&self) -> &L {
        &self.base
    }

    pub fn map(&self) -> &ProductMap {
        &self.map
    }

    fn lift(&self, a: &CVector, ab: &CVector, av: &CVector, avb: &CVector) -> [CVector; 4] {
        [
            self.map.phi(a),
            self.map.phi(ab),
            self.map.velocity(a, av),
            self.map.velocity(ab, avb),
        ]
    }
}

pub fn separable_lagrangian<L: FirstOrderLagrangian>(base: L, dims: &[usize]) -> Result<SeparableLagrangian<L>> {
    SeparableLagrangian::new(base, dims)
}

impl<L: FirstOrderLagrangian> FirstOrderLagrangian for SeparableLagrangian<L> {
    fn dim(&self) -> usize {
        self.map.stacked_dim()
    }

    fn value(&self, a: &CVector, ab: &CVector, av: &CVector, avb: &CVector) -> C64 {
        let [x, xb, v, vb] = self.lift(a, ab, av, avb);
        self.base.value(&x, &xb, &v, &vb)
    }

    fn gradient(&self, a: &CVector, ab: &CVector, av: &CVector, avb: &CVector) -> Gradient {
        let [x, xb, v, vb] = self.lift(a, ab, av, avb);
        let [gx, gxb, gv, gvb] = self.base.gradient(&x, &xb, &v, &vb);
        let ja = self.map.jacobian(a);
        let jab = self.map.jacobian(ab);
        let ka = self.map.velocity_jacobian(a, av);
        let kab = self.map.velocity_jacobian(ab, avb);
        [
            ja.transpose() * gx + ka.transpose() * &gv,
            jab.transpose() * gxb + kab.transpose() * &gvb,
            ja.transpose() * gv,
            jab.transpose() * gvb,
        ]
    }

    fn hessian(&self, a: &CVector, ab: &CVector, av: &CVector, avb: &CVector) -> CMatrix {
        let [x, xb, v, vb] = self.lift(a, ab, av, avb);
        let [gx, gxb, gv, gvb] = self.base.gradient(&x, &xb, &v, &vb);
        let hf = self.base.hessian(&x, &xb, &v, &vb);
        let (d, m) = (self.map.full_dim(), self.map.stacked_dim());

        let ja = self.map.jacobian(a);
        let jab = self.map.jacobian(ab);
        let mut jac = CMatrix::zeros(4 * d, 4 * m);
        jac.view_mut((0, 0), (d, m)).copy_from(&ja);
        jac.view_mut((d, m), (d, m)).copy_from(&jab);
        jac.view_mut((2 * d, 0), (d, m)).copy_from(&self.map.velocity_jacobian(a, av));
        jac.view_mut((2 * d, 2 * m), (d, m)).copy_from(&ja);
        jac.view_mut((3 * d, m), (d, m)).copy_from(&self.map.velocity_jacobian(ab, avb));
        jac.view_mut((3 * d, 3 * m), (d, m)).copy_from(&jab);

        let mut out = jac.transpose() * hf * &jac;
        let aa = self.map.second(a, &gx) + self.map.velocity_second(a, av, &gv);
        let bb = self.map.second(ab, &gxb) + self.map.velocity_second(ab, avb, &gvb);
        let av_mixed = self.map.second(a, &gv);
        let bv_mixed = self.map.second(ab, &gvb);
        add_block(&mut out, 0, 0, &aa);
        add_block(&mut out, m, m, &bb);
        add_block(&mut out, 0, 2 * m, &av_mixed);
        add_block(&mut out, 2 * m, 0, &av_mixed.transpose());
        add_block(&mut out, m, 3 * m, &bv_mixed);
        add_block(&mut out, 3 * m, m, &bv_mixed.transpose());
        out
    }
}

/// `L_Δ(⊗A0, ⊗Ā0, ⊗A1, ⊗Ā1)`: the full discrete Lagrangian restricted to
/// separable grid points.
#[derive(Debug, Clone)]
pub struct RestrictedDiscreteLagrangian<L> {
    discrete: AlphaDiscretization<L>,
    map: ProductMap,
}

impl<L: FirstOrderLagrangian> RestrictedDiscreteLagrangian<L> {
    pub fn new(discrete: AlphaDiscretization<L>, dims: &[usize]) -> Result<Self> {
        let map = ProductMap::new(dims)?;
        if map.full_dim() != discrete.dim() {
            return Err(Error::dim(format!(
                "discrete Lagrangian has dimension {}, dims {:?} give {}",
                discrete.dim(),
                dims,
                map.full_dim()
            )));
        }
        Ok(RestrictedDiscreteLagrangian { discrete, map })
    }

    pub fn map(&self) -> &ProductMap {
        &self.map
    }

    fn lift(&self, y: [&CVector; 4]) -> [CVector; 4] {
        y.map(|a| self.map.phi(a))
    }
}

impl<L: FirstOrderLagrangian> DiscreteLagrangian for RestrictedDiscreteLagrangian<L> {
    fn dim(&self) -> usize {
        self.map.stacked_dim()
    }

    fn dt(&self) -> f64 {
        self.discrete.dt()
    }

    fn value(&self, a0: &CVector, ab0: &CVector, a1: &CVector, ab1: &CVector) -> C64 {
        let [x0, xb0, x1, xb1] = self.lift([a0, ab0, a1, ab1]);
        self.discrete.value(&x0, &xb0, &x1, &xb1)
    }

    fn gradient(&self, a0: &CVector, ab0: &CVector, a1: &CVector, ab1: &CVector) -> Gradient {
        let args = [a0, ab0, a1, ab1];
        let [x0, xb0, x1, xb1] = self.lift(args);
        let g = self.discrete.gradient(&x0, &xb0, &x1, &xb1);
        std::array::from_fn(|k| self.map.jacobian(args[k]).transpose() * &g[k])
    }

    fn hessian(&self, a0: &CVector, ab0: &CVector, a1: &CVector, ab1: &CVector) -> CMatrix {
        let args = [a0, ab0, a1, ab1];
        let [x0, xb0, x1, xb1] = self.lift(args);
        let g = self.discrete.gradient(&x0, &xb0, &x1, &xb1);
        let hf = self.discrete.hessian(&x0, &xb0, &x1, &xb1);
        let (d, m) = (self.map.full_dim(), self.map.stacked_dim());
        let mut jac = CMatrix::zeros(4 * d, 4 * m);
        for (k, a) in args.iter().enumerate() {
            jac.view_mut((k * d, k * m), (d, m)).copy_from(&self.map.jacobian(a));
        }
        let mut out = jac.transpose() * hf * &jac;
        for (k, a) in args.iter().enumerate() {
            add_block(&mut out, k * m, k * m, &self.map.second(a, &g[k]));
        }
        out
    }

    /// Momentum of the continuous separable Lagrangian at `A0`.
    fn initial_momentum(&self, a0: &CVector) -> CVector {
        let x0 = self.map.phi(a0);
        self.map.jacobian(a0).transpose() * self.discrete.base().momentum(&x0)
    }
}

fn add_block(target: &mut CMatrix, row: usize, col: usize, block: &CMatrix) {
    let mut view = target.view_mut((row, col), block.shape());
    view += block;
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{discrete_lagrangian_alpha, se_lagrangian};
    use super::*;
    use crate::hamiltonian::{random_hermitian, swap_hamiltonian};
    use crate::state::{ComponentState, Ket};

    fn conj(v: &CVector) -> CVector {
        v.map(|z| z.conj())
    }

    #[test]
    fn swap_value_on_orthogonal_basis() {
        let l = separable_lagrangian(se_lagrangian(&swap_hamiltonian(2).unwrap()), &[2, 2]).unwrap();
        let s = ComponentState::new(vec![Ket::basis(2, 0).unwrap(), Ket::basis(2, 1).unwrap()]).unwrap();
        let a = s.stacked();
        let z = CVector::zeros(4);
        assert_eq!(l.value(&a, &conj(&a), &z, &z), C64::new(0.0, 0.0));
    }

    #[test]
    fn value_is_linear_in_velocities() {
        let l = separable_lagrangian(se_lagrangian(&random_hermitian(2, 1).unwrap()), &[2, 2]).unwrap();
        let a = sample(4, 1);
        let v = sample(4, 2);
        let z = CVector::zeros(4);
        let f = |s: f64| {
            let sv = &v * C64::new(s, 0.0);
            l.value(&a, &conj(&a), &sv, &conj(&sv))
        };
        let (f0, f1, f2) = (f(0.0), f(1.0), f(2.0));
        assert!((f2 - f1 * 2.0 + f0).norm() < 1e-13);
        assert!((f0 - l.value(&a, &conj(&a), &z, &z)).norm() == 0.0);
    }

    #[test]
    fn separable_derivatives() {
        for (dims, h) in [
            (vec![2, 2], random_hermitian(2, 7).unwrap()),
            (vec![2, 2, 2], random_hermitian(3, 8).unwrap()),
        ] {
            let l = separable_lagrangian(se_lagrangian(&h), &dims).unwrap();
            let m = l.dim();
            for seed in 0..10 {
                let y: [CVector; 4] = std::array::from_fn(|k| sample(m, 500 + seed * 4 + k as u64));
                let args = [&y[0], &y[1], &y[2], &y[3]];
                let fd = fd_gradient(|z| l.value(&z[0], &z[1], &z[2], &z[3]), args, 1e-6);
                assert!(rel(&flat(&l.gradient(args[0], args[1], args[2], args[3])), &fd) < 1e-6);
                let fd = fd_hessian(|z| l.gradient(&z[0], &z[1], &z[2], &z[3]), args, 1e-6);
                assert!(rel_m(&l.hessian(args[0], args[1], args[2], args[3]), &fd) < 1e-6);
            }
        }
    }

    #[test]
    fn restricted_discrete_derivatives() {
        let h = random_hermitian(2, 9).unwrap();
        let ld = RestrictedDiscreteLagrangian::new(discrete_lagrangian_alpha(se_lagrangian(&h), 0.5, 0.1).unwrap(), &[2, 2]).unwrap();
        for seed in 0..10 {
            let y: [CVector; 4] = std::array::from_fn(|k| sample(4, 900 + seed * 4 + k as u64));
            let args = [&y[0], &y[1], &y[2], &y[3]];
            let fd = fd_gradient(|z| ld.value(&z[0], &z[1], &z[2], &z[3]), args, 1e-6);
            assert!(rel(&flat(&ld.gradient(args[0], args[1], args[2], args[3])), &fd) < 1e-6);
            let fd = fd_hessian(|z| ld.gradient(&z[0], &z[1], &z[2], &z[3]), args, 1e-6);
            assert!(rel_m(&ld.hessian(args[0], args[1], args[2], args[3]), &fd) < 1e-6);
        }
    }

    #[test]
    fn momentum_agrees_between_orderings() {
        let h = swap_hamiltonian(2).unwrap();
        let sep = separable_lagrangian(se_lagrangian(&h), &[2, 2]).unwrap();
        let ld = RestrictedDiscreteLagrangian::new(discrete_lagrangian_alpha(se_lagrangian(&h), 0.5, 0.1).unwrap(), &[2, 2]).unwrap();
        let a = sample(4, 3);
        assert!((sep.momentum(&a) - ld.initial_momentum(&a)).norm() < 1e-14);
    }

    #[test]
    fn dimension_checks() {
        let l = se_lagrangian(&swap_hamiltonian(2).unwrap());
        assert!(separable_lagrangian(l.clone(), &[2, 3]).is_err());
        let ld = discrete_lagrangian_alpha(l, 0.5, 0.1).unwrap();
        assert!(RestrictedDiscreteLagrangian::new(ld, &[3, 3]).is_err());
    }
}
