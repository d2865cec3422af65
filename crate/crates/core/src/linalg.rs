//! Dense complex matrix helpers shared by the channel and simulator code.
//!
//! Qubit 1 is the most significant bit of a basis index, so the matrix of
//! `A ⊗ B` acts with `A` on qubit 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn projector(dim: usize, index: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(index, index)] = ONE;
    m
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

pub fn s_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I])
}

pub fn s_dagger() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -I])
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// Embeds a gate acting on `qubits` (0-based, listed in the gate's own
/// kron order) into the full `n`-qubit space.
pub fn embed(gate: &CMatrix, qubits: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let k = qubits.len();
    assert_eq!(gate.nrows(), 1 << k);
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let sub_col = gather_bits(col, qubits, n);
        for sub_row in 0..(1usize << k) {
            let amp = gate[(sub_row, sub_col)];
            if amp == ZERO {
                continue;
            }
            let row = scatter_bits(col, sub_row, qubits, n);
            out[(row, col)] += amp;
        }
    }
    out
}

/// Reads the bits of `index` at `qubits` (0-based, MSB = qubit 0) into a
/// compact index whose MSB is `qubits[0]`.
pub fn gather_bits(index: usize, qubits: &[usize], n: usize) -> usize {
    let mut out = 0;
    for &q in qubits {
        out = (out << 1) | ((index >> (n - 1 - q)) & 1);
    }
    out
}

/// Overwrites the bits of `index` at `qubits` with the bits of `value`.
pub fn scatter_bits(index: usize, value: usize, qubits: &[usize], n: usize) -> usize {
    let k = qubits.len();
    let mut out = index;
    for (pos, &q) in qubits.iter().enumerate() {
        let bit = (value >> (k - 1 - pos)) & 1;
        let shift = n - 1 - q;
        out = (out & !(1 << shift)) | (bit << shift);
    }
    out
}

/// Applies a `2^k × 2^k` gate to `qubits` (0-based, gate kron order) of an
/// `n`-qubit state vector in place.
pub fn apply_gate(state: &mut [Complex64], gate: &CMatrix, qubits: &[usize], n: usize) {
    let k = qubits.len();
    let sub = 1usize << k;
    debug_assert_eq!(gate.nrows(), sub);
    debug_assert_eq!(state.len(), 1 << n);
    let mask = qubits.iter().fold(0usize, |m, &q| m | (1 << (n - 1 - q)));
    let offsets: Vec<usize> = (0..sub).map(|v| scatter_bits(0, v, qubits, n)).collect();
    let mut buf = vec![ZERO; sub];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (v, &off) in offsets.iter().enumerate() {
            buf[v] = state[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, &b) in buf.iter().enumerate() {
                acc += gate[(r, c)] * b;
            }
            state[base | off] = acc;
        }
    }
}

/// Controlled-Z between two qubits (0-based) of a state vector.
pub fn apply_cz(state: &mut [Complex64], a: usize, b: usize, n: usize) {
    let m = (1usize << (n - 1 - a)) | (1usize << (n - 1 - b));
    for (idx, amp) in state.iter_mut().enumerate() {
        if idx & m == m {
            *amp = -*amp;
        }
    }
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) < tol
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) < tol
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix: `(eigenvalue, eigenvector)`
/// pairs sorted by descending eigenvalue.
pub fn hermitian_eigen(m: &CMatrix) -> Vec<(f64, CVector)> {
    let eig = m.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lambda)| (lambda, eig.eigenvectors.column(k).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}
