//! Partially reduced Hamiltonians: the effective operator on one subsystem
//! obtained by contracting the full operator with the other subsystems' states.

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::state::{ComponentState, Ket};
use crate::{CMatrix, C64};

/// Context parts with norm below this are rejected.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// `(⊗_{j<k}⟨a_j| ⊗ 1 ⊗ ⊗_{j>k}⟨a_j|) H (⊗_{j<k}|a_j⟩ ⊗ 1 ⊗ ⊗_{j>k}|a_j⟩) / ∏_{j≠k} ⟨a_j|a_j⟩`.
pub fn partially_reduced(h: &HermitianOperator, state: &ComponentState, k: usize) -> Result<HermitianOperator> {
    if h.dims() != state.dims().as_slice() {
        return Err(Error::dim(format!(
            "operator dims {:?} do not match state dims {:?}",
            h.dims(),
            state.dims()
        )));
    }
    let m = reduce_matrix(h.matrix(), state.parts(), k)?;
    // exact arithmetic gives a Hermitian result; remove rounding asymmetry
    let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    HermitianOperator::new(sym, vec![state.part(k).dim()])
}

/// The same contraction for an arbitrary square matrix, without symmetry checks.
pub fn reduce_matrix(m: &CMatrix, parts: &[Ket], k: usize) -> Result<CMatrix> {
    if k >= parts.len() {
        return Err(Error::arg(format!(
            "subsystem index {k} out of range for {} subsystems",
            parts.len()
        )));
    }
    let dims: Vec<usize> = parts.iter().map(Ket::dim).collect();
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::dim(format!(
            "matrix is {}x{}, subsystem dims {:?} need side {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    let mut denom = 1.0;
    for (j, part) in parts.iter().enumerate() {
        if j == k {
            continue;
        }
        let n = part.norm();
        if n < DEGENERATE_NORM {
            return Err(Error::DegenerateContext { index: j, norm: n });
        }
        denom *= n * n;
    }

    // weight[r] = ∏_{j≠k} a_j[r_j], slot[r] = r_k
    let mut weight = vec![C64::new(1.0, 0.0); total];
    let mut slot = vec![0usize; total];
    for (r, (w, s)) in weight.iter_mut().zip(slot.iter_mut()).enumerate() {
        let mut rem = r;
        for j in (0..dims.len()).rev() {
            let idx = rem % dims[j];
            rem /= dims[j];
            if j == k {
                *s = idx;
            } else {
                *w *= parts[j].as_slice()[idx];
            }
        }
    }

    let dk = dims[k];
    let mut right = CMatrix::zeros(total, dk);
    for c in 0..total {
        let wc = weight[c];
        let jc = slot[c];
        for r in 0..total {
            right[(r, jc)] += m[(r, c)] * wc;
        }
    }
    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..total {
        let wr = weight[r].conj();
        let ir = slot[r];
        for j in 0..dk {
            out[(ir, j)] += wr * right[(r, j)];
        }
    }
    Ok(out.unscale(denom))
}
