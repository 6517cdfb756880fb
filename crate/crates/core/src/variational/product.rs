//! Derivatives of the tensor-product map `Φ(a_1, …, a_N) = a_1 ⊗ … ⊗ a_N`
//! on stacked component vectors. All derivatives are holomorphic (no
//! conjugation), matching the treatment of barred variables as independent.

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct ProductMap {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    full: usize,
    stacked: usize,
}

impl ProductMap {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d < 2) {
            return Err(Error::dim(format!("product map needs >= 2 subsystems of dim >= 2, got {dims:?}")));
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in dims {
            offsets.push(acc);
            acc += d;
        }
        Ok(ProductMap {
            dims: dims.to_vec(),
            offsets,
            full: dims.iter().product(),
            stacked: acc,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Length of the stacked component vector.
    pub fn stacked_dim(&self) -> usize {
        self.stacked
    }

    /// Length of the tensor-product vector.
    pub fn full_dim(&self) -> usize {
        self.full
    }

    fn digits(&self, mut r: usize, out: &mut [usize]) {
        for j in (0..self.dims.len()).rev() {
            out[j] = r % self.dims[j];
            r /= self.dims[j];
        }
    }

    fn entry(&self, a: &CVector, j: usize, i: usize) -> C64 {
        a[self.offsets[j] + i]
    }

    /// `⊗_j a_j`.
    pub fn phi(&self, a: &CVector) -> CVector {
        let mut acc = CVector::from_column_slice(&a.as_slice()[..self.dims[0]]);
        for j in 1..self.dims.len() {
            let part = a.rows(self.offsets[j], self.dims[j]).into_owned();
            acc = acc.kronecker(&part);
        }
        acc
    }

    /// `Σ_j a_1 ⊗ … ⊗ v_j ⊗ … ⊗ a_N`, the tangent map applied to `v`.
    pub fn velocity(&self, a: &CVector, v: &CVector) -> CVector {
        self.jacobian(a) * v
    }

    /// `∂Φ/∂A`, of shape `full × stacked`.
    pub fn jacobian(&self, a: &CVector) -> CMatrix {
        let n = self.dims.len();
        let mut jac = CMatrix::zeros(self.full, self.stacked);
        let mut d = vec![0; n];
        for r in 0..self.full {
            self.digits(r, &mut d);
            for j in 0..n {
                let mut w = C64::new(1.0, 0.0);
                for l in 0..n {
                    if l != j {
                        w *= self.entry(a, l, d[l]);
                    }
                }
                jac[(r, self.offsets[j] + d[j])] = w;
            }
        }
        jac
    }

    /// `∂/∂A` of the velocity map at fixed `v`, of shape `full × stacked`.
    pub fn velocity_jacobian(&self, a: &CVector, v: &CVector) -> CMatrix {
        let n = self.dims.len();
        let mut jac = CMatrix::zeros(self.full, self.stacked);
        let mut d = vec![0; n];
        for r in 0..self.full {
            self.digits(r, &mut d);
            for j in 0..n {
                let mut sum = C64::new(0.0, 0.0);
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    let mut w = C64::new(1.0, 0.0);
                    for l in 0..n {
                        if l == j {
                            continue;
                        }
                        w *= if l == k { self.entry(v, l, d[l]) } else { self.entry(a, l, d[l]) };
                    }
                    sum += w;
                }
                jac[(r, self.offsets[j] + d[j])] = sum;
            }
        }
        jac
    }

    /// `Σ_r g_r ∂²Φ_r/∂A∂A`, symmetric `stacked × stacked`.
    pub fn second(&self, a: &CVector, g: &CVector) -> CMatrix {
        self.second_impl(a, None, g)
    }

    /// `Σ_r g_r ∂²V_r/∂A∂A` for the velocity map at fixed `v`.
    pub fn velocity_second(&self, a: &CVector, v: &CVector, g: &CVector) -> CMatrix {
        self.second_impl(a, Some(v), g)
    }

    fn second_impl(&self, a: &CVector, v: Option<&CVector>, g: &CVector) -> CMatrix {
        let n = self.dims.len();
        let mut out = CMatrix::zeros(self.stacked, self.stacked);
        let mut d = vec![0; n];
        for r in 0..self.full {
            let gr = g[r];
            if gr == C64::new(0.0, 0.0) {
                continue;
            }
            self.digits(r, &mut d);
            for j in 0..n {
                for l in (j + 1)..n {
                    let w = match v {
                        None => {
                            let mut w = C64::new(1.0, 0.0);
                            for p in 0..n {
                                if p != j && p != l {
                                    w *= self.entry(a, p, d[p]);
                                }
                            }
                            w
                        }
                        Some(v) => {
                            let mut sum = C64::new(0.0, 0.0);
                            for k in 0..n {
                                if k == j || k == l {
                                    continue;
                                }
                                let mut w = C64::new(1.0, 0.0);
                                for p in 0..n {
                                    if p == j || p == l {
                                        continue;
                                    }
                                    w *= if p == k { self.entry(v, p, d[p]) } else { self.entry(a, p, d[p]) };
                                }
                                sum += w;
                            }
                            sum
                        }
                    };
                    let row = self.offsets[j] + d[j];
                    let col = self.offsets[l] + d[l];
                    out[(row, col)] += gr * w;
                    out[(col, row)] += gr * w;
                }
            }
        }
        out
    }
}
