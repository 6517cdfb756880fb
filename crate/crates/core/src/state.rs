//! Pure multipartite states: subsystem kets, separable configurations, full
//! tensor-product states, and density-matrix utilities.
//!
//! Flattening convention: subsystem 0 is the slowest-varying index, so the
//! tensor product of kets agrees with the Kronecker product of matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// Tolerance for structural Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;

/// A single-subsystem state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket(CVector);

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::dim(format!(
                "ket needs at least 2 amplitudes, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("ket amplitudes"));
        }
        Ok(Ket(amplitudes))
    }

    /// Real amplitudes, e.g. `Ket::from_real(&[1.0, 1.0])`.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::arg(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self::from_vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::arg("cannot normalize the zero ket"));
        }
        Ok(Ket(self.0.unscale(n)))
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        inner(self.as_slice(), other.as_slice())
    }

    pub fn projector(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// A separable configuration `(|a_1⟩, …, |a_N⟩)` with `N ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentState {
    parts: Vec<Ket>,
}

impl ComponentState {
    pub fn new(parts: Vec<Ket>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::dim(format!(
                "a component state needs at least 2 parts, got {}",
                parts.len()
            )));
        }
        Ok(ComponentState { parts })
    }

    /// Rebuild a component state from the concatenation of its parts.
    pub fn from_stacked(stacked: &[C64], dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if stacked.len() != total {
            return Err(Error::dim(format!(
                "stacked vector has length {}, dims {:?} need {}",
                stacked.len(),
                dims,
                total
            )));
        }
        let mut offset = 0;
        let mut parts = Vec::with_capacity(dims.len());
        for &d in dims {
            parts.push(Ket::new(stacked[offset..offset + d].to_vec())?);
            offset += d;
        }
        Self::new(parts)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(Ket::dim).collect()
    }

    pub fn parts(&self) -> &[Ket] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> &Ket {
        &self.parts[k]
    }

    /// Copy of `self` with part `k` replaced.
    pub fn with_part(&self, k: usize, ket: Ket) -> Result<Self> {
        let mut next = self.clone();
        next.replace_part(k, ket)?;
        Ok(next)
    }

    pub(crate) fn replace_part(&mut self, k: usize, ket: Ket) -> Result<()> {
        let slot = self
            .parts
            .get_mut(k)
            .ok_or_else(|| Error::arg(format!("part index {k} out of range")))?;
        if slot.dim() != ket.dim() {
            return Err(Error::dim(format!(
                "part {k} has dimension {}, replacement has {}",
                slot.dim(),
                ket.dim()
            )));
        }
        *slot = ket;
        Ok(())
    }

    pub fn norms(&self) -> Vec<f64> {
        self.parts.iter().map(Ket::norm).collect()
    }

    pub fn stacked(&self) -> CVector {
        CVector::from_iterator(
            self.parts.iter().map(Ket::dim).sum(),
            self.parts.iter().flat_map(|p| p.as_slice().iter().copied()),
        )
    }

    pub fn tensor_product(&self) -> FullState {
        tensor_product(self)
    }
}

/// An unrestricted state `|ψ⟩` on the tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl FullState {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || amplitudes.len() != expected {
            return Err(Error::dim(format!(
                "state of length {} does not match dims {:?}",
                amplitudes.len(),
                dims
            )));
        }
        Ok(FullState { amplitudes, dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &FullState) -> Result<C64> {
        inner(self.as_slice(), other.as_slice())
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Reduced density matrix of subsystem `keep`, computed without forming
    /// the full projector.
    pub fn reduced_density(&self, keep: usize) -> Result<CMatrix> {
        let (outer, dk, inner_len) = split_dims(&self.dims, keep)?;
        let psi = self.as_slice();
        let mut rho = CMatrix::zeros(dk, dk);
        for p in 0..outer {
            for s in 0..inner_len {
                for i in 0..dk {
                    let zi = psi[(p * dk + i) * inner_len + s];
                    for j in 0..dk {
                        let zj = psi[(p * dk + j) * inner_len + s];
                        rho[(i, j)] += zi * zj.conj();
                    }
                }
            }
        }
        Ok(rho)
    }
}

/// A validated density matrix: Hermitian and positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::dim("density matrix must be square"));
        }
        check_finite(&entries, "density matrix")?;
        let deviation = hermitian_deviation(&entries);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let min_eig = entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::arg(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix(entries))
    }

    pub fn from_pure(psi: &[C64]) -> Self {
        let v = CVector::from_column_slice(psi);
        DensityMatrix(&v * v.adjoint())
    }

    pub fn entries(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_entries(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        purity(&self.0)
    }
}

/// Row-major multi-index product with subsystem 0 slowest.
pub fn tensor_product(state: &ComponentState) -> FullState {
    let mut acc = state.parts[0].as_vector().clone();
    for part in &state.parts[1..] {
        acc = acc.kronecker(part.as_vector());
    }
    FullState {
        amplitudes: acc,
        dims: state.dims(),
    }
}

/// `Σ conj(x_i) y_i`.
pub fn inner(x: &[C64], y: &[C64]) -> Result<C64> {
    if x.len() != y.len() {
        return Err(Error::dim(format!(
            "inner product of vectors with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a.conj() * b).sum())
}

/// Partial trace over every subsystem except `keep`.
pub fn partial_trace(rho: &CMatrix, keep: usize, dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(Error::dim(format!(
            "matrix is {}x{}, dims {:?} need {}x{}",
            rho.nrows(),
            rho.ncols(),
            dims,
            total,
            total
        )));
    }
    let (outer, dk, inner_len) = split_dims(dims, keep)?;
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..outer {
                for s in 0..inner_len {
                    acc += rho[((p * dk + i) * inner_len + s, (p * dk + j) * inner_len + s)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Bloch coordinates `(x, y, z)` of a qubit density matrix.
pub fn bloch_vector(rho: &CMatrix) -> Result<[f64; 3]> {
    if rho.shape() != (2, 2) {
        return Err(Error::dim(format!("Bloch vector needs a 2x2 matrix, got {:?}", rho.shape())));
    }
    check_finite(rho, "density matrix")?;
    let deviation = hermitian_deviation(rho);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok([
        2.0 * rho[(0, 1)].re,
        2.0 * rho[(1, 0)].im,
        (rho[(0, 0)] - rho[(1, 1)]).re,
    ])
}

/// The eight Gell-Mann matrices in the standard order `λ1 … λ8`.
pub fn gellmann_matrices() -> [CMatrix; 8] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let r3 = 1.0 / 3f64.sqrt();
    let m = |entries: [C64; 9]| DMatrix::from_row_slice(3, 3, &entries);
    [
        m([z, one, z, one, z, z, z, z, z]),
        m([z, -i, z, i, z, z, z, z, z]),
        m([one, z, z, z, -one, z, z, z, z]),
        m([z, z, one, z, z, z, one, z, z]),
        m([z, z, -i, z, z, z, i, z, z]),
        m([z, z, z, z, z, one, z, one, z]),
        m([z, z, z, z, z, -i, z, i, z]),
        m([one * r3, z, z, z, one * r3, z, z, z, -2.0 * r3 * one]),
    ]
}

/// Generalized Bloch vector `tr(ρ λ_i)` of a qutrit density matrix.
pub fn gellmann_vector(rho: &CMatrix) -> Result<[f64; 8]> {
    if rho.shape() != (3, 3) {
        return Err(Error::dim(format!(
            "generalized Bloch vector needs a 3x3 matrix, got {:?}",
            rho.shape()
        )));
    }
    check_finite(rho, "density matrix")?;
    let deviation = hermitian_deviation(rho);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut out = [0.0; 8];
    for (slot, lambda) in out.iter_mut().zip(gellmann_matrices().iter()) {
        *slot = (rho * lambda).trace().re;
    }
    Ok(out)
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> Result<f64> {
    check_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(m.clone().svd(false, false).singular_values.sum())
}

pub fn purity(rho: &CMatrix) -> f64 {
    // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Max entrywise `|M - M†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn check_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `(product of dims before k, dims[k], product of dims after k)`.
pub(crate) fn split_dims(dims: &[usize], k: usize) -> Result<(usize, usize, usize)> {
    if k >= dims.len() {
        return Err(Error::arg(format!(
            "subsystem index {k} out of range for {} subsystems",
            dims.len()
        )));
    }
    let outer = dims[..k].iter().product();
    let inner = dims[k + 1..].iter().product();
    Ok((outer, dims[k], inner))
}

#[cfg(test)]
pub(crate) fn real_vector(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}
