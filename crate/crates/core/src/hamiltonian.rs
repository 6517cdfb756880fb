//! Hamiltonian constructors: exchange (swap), seeded random Hermitian, sums of
//! local terms, and spin-1 ladder-operator correlators.
//!
//! Random matrices are drawn from PCG32 (`Lcg64Xsh32`, 64-bit state,
//! seeded through `SeedableRng::seed_from_u64`) with standard normal samples,
//! so a seed reproduces the same operator on every platform.

use std::ops::Add;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{check_finite, hermitian_deviation, HERMITIAN_TOL};
use crate::{CMatrix, C64};

/// A dense Hermitian matrix acting on `⊗_j C^{dims[j]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dim(format!("operator is {}x{}", matrix.nrows(), matrix.ncols())));
        }
        let side: usize = dims.iter().product();
        if dims.is_empty() || side != matrix.nrows() {
            return Err(Error::dim(format!(
                "operator side {} does not match dims {:?}",
                matrix.nrows(),
                dims
            )));
        }
        check_finite(&matrix, "operator")?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianOperator { matrix, dims })
    }

    /// Single-subsystem operator.
    pub fn local(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, vec![n])
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        HermitianOperator { matrix: CMatrix::zeros(n, n), dims }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        HermitianOperator { matrix: CMatrix::identity(n, n), dims }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator {
            matrix: &self.matrix * C64::new(s, 0.0),
            dims: self.dims.clone(),
        }
    }

    pub fn try_add(&self, other: &HermitianOperator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::dim(format!(
                "cannot add operators on {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(HermitianOperator {
            matrix: &self.matrix + &other.matrix,
            dims: self.dims.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: OperatorJson) -> Result<Self> {
        let n = raw.entries.len();
        if raw.entries.iter().any(|row| row.len() != n) {
            return Err(Error::dim("operator rows must form a square matrix"));
        }
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = raw.entries[i][j];
            C64::new(re, im)
        });
        HermitianOperator::new(matrix, raw.dims)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    /// Panics on mismatched dims; use [`HermitianOperator::try_add`] otherwise.
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        self.try_add(rhs).expect("operator dims must match")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorJson {
    dims: Vec<usize>,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.matrix.nrows())
            .map(|i| {
                (0..self.matrix.ncols())
                    .map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                    .collect()
            })
            .collect();
        OperatorJson { dims: self.dims.clone(), entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(deserializer)?;
        HermitianOperator::from_raw(raw).map_err(serde::de::Error::custom)
    }
}

/// `η_{k1 k2 k3}` for `k_i ∈ {0, 1}`, stored at `k1*4 + k2*2 + k3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingTensor {
    eta: [C64; 8],
}

impl CouplingTensor {
    pub fn new(eta: [C64; 8]) -> Result<Self> {
        if eta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("coupling tensor"));
        }
        Ok(CouplingTensor { eta })
    }

    pub fn get(&self, k1: usize, k2: usize, k3: usize) -> C64 {
        self.eta[k1 * 4 + k2 * 2 + k3]
    }

    pub fn entries(&self) -> &[C64; 8] {
        &self.eta
    }
}

/// Kronecker product of a list of matrices, first factor slowest.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for f in factors {
        acc = acc.kronecker(f);
    }
    acc
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` in slot `k`.
pub fn embed_local(op: &CMatrix, k: usize, dims: &[usize]) -> Result<CMatrix> {
    if k >= dims.len() || op.nrows() != dims[k] || op.ncols() != dims[k] {
        return Err(Error::dim(format!(
            "local operator of shape {:?} cannot act on slot {k} of {:?}",
            op.shape(),
            dims
        )));
    }
    let before: usize = dims[..k].iter().product();
    let after: usize = dims[k + 1..].iter().product();
    Ok(CMatrix::identity(before, before)
        .kronecker(op)
        .kronecker(&CMatrix::identity(after, after)))
}

/// The exchange operator `|a⟩⊗|b⟩ ↦ |b⟩⊗|a⟩` on `C^d ⊗ C^d`.
pub fn swap_hamiltonian(d: usize) -> Result<HermitianOperator> {
    if d < 2 {
        return Err(Error::arg(format!("swap needs subsystem dimension >= 2, got {d}")));
    }
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    HermitianOperator::new(m, vec![d, d])
}

/// A `2^n × 2^n` Hermitian matrix with independent standard normal real and
/// imaginary parts on and above the diagonal (diagonal imaginary parts zero).
///
/// Entries are drawn row by row over `j >= i`, real part first.
pub fn random_hermitian(n_qubits: usize, seed: u64) -> Result<HermitianOperator> {
    if n_qubits == 0 || n_qubits > 12 {
        return Err(Error::arg(format!("n_qubits must be in 1..=12, got {n_qubits}")));
    }
    let n = 1usize << n_qubits;
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if i == j {
                m[(i, i)] = C64::new(re, 0.0);
            } else {
                m[(i, j)] = C64::new(re, im);
                m[(j, i)] = C64::new(re, -im);
            }
        }
    }
    HermitianOperator::new(m, vec![2; n_qubits])
}

/// `Σ_j 1⊗…⊗H_j⊗…⊗1`.
pub fn local_sum_hamiltonian(locals: &[HermitianOperator], dims: &[usize]) -> Result<HermitianOperator> {
    if locals.len() != dims.len() {
        return Err(Error::dim(format!(
            "{} local terms for {} subsystems",
            locals.len(),
            dims.len()
        )));
    }
    let n: usize = dims.iter().product();
    let mut acc = CMatrix::zeros(n, n);
    for (k, op) in locals.iter().enumerate() {
        acc += embed_local(op.matrix(), k, dims)?;
    }
    HermitianOperator::new(acc, dims.to_vec())
}

/// `(J+, J-)` for angular momentum `j = 1`, basis `|−1⟩, |0⟩, |1⟩` at indices 0, 1, 2.
pub fn ladder_operators() -> (CMatrix, CMatrix) {
    let s = C64::new(2f64.sqrt(), 0.0);
    let mut jp = CMatrix::zeros(3, 3);
    jp[(1, 0)] = s;
    jp[(2, 1)] = s;
    let jm = jp.adjoint();
    (jp, jm)
}

/// `Σ_k η_k J+^{k1}⊗J+^{k2}⊗J+^{k3} + conj(η_k) J-^{k1}⊗J-^{k2}⊗J-^{k3}` on three qutrits.
///
/// The `(0,0,0)` term appears in both sums, contributing `2 Re η_000 · 1`.
pub fn correlator_hamiltonian(eta: &CouplingTensor) -> Result<HermitianOperator> {
    let (jp, jm) = ladder_operators();
    let id = CMatrix::identity(3, 3);
    let pick = |raise: bool, k: usize| -> CMatrix {
        match (k, raise) {
            (0, _) => id.clone(),
            (_, true) => jp.clone(),
            (_, false) => jm.clone(),
        }
    };
    let mut acc = CMatrix::zeros(27, 27);
    for k1 in 0..2 {
        for k2 in 0..2 {
            for k3 in 0..2 {
                let e = eta.get(k1, k2, k3);
                if e == C64::new(0.0, 0.0) {
                    continue;
                }
                let up = kron_all(&[pick(true, k1), pick(true, k2), pick(true, k3)]);
                let down = kron_all(&[pick(false, k1), pick(false, k2), pick(false, k3)]);
                acc += up * e + down * e.conj();
            }
        }
    }
    HermitianOperator::new(acc, vec![3, 3, 3])
}

/// Coupling with `η_k = 1` exactly when `k1 + k2 + k3 = r`.
pub fn r_party_eta(r: usize) -> Result<CouplingTensor> {
    if r > 3 {
        return Err(Error::arg(format!("r must be in 0..=3, got {r}")));
    }
    let mut eta = [C64::new(0.0, 0.0); 8];
    for (idx, slot) in eta.iter_mut().enumerate() {
        if idx.count_ones() as usize == r {
            *slot = C64::new(1.0, 0.0);
        }
    }
    CouplingTensor::new(eta)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0., 0.), C64::new(1., 0.), C64::new(1., 0.), C64::new(0., 0.)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(0., 0.), C64::new(0., -1.), C64::new(0., 1.), C64::new(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.), C64::new(-1., 0.)])
}
