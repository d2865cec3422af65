//! Measure-and-prepare channels `Λ(ρ) = Σ_μ a_μ Tr[E_μ ρ] ρ_μ` and their
//! Pauli transfer matrices.
//!
//! Effects and preparations are stored in factored form: an effect as
//! `Σ λ_k |v_k⟩⟨v_k|` and a preparation as a mixture `Σ p_k |u_k⟩⟨u_k|`.
//! The estimator samples directly from these factors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, WirecutError};
use crate::linalg::{self, CMatrix, CVector};
use crate::par::{self, Execution};
use crate::pauli::PauliString;

pub const MAX_PTM_QUBITS: usize = 6;
const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Term {
    a: i8,
    effect: Vec<(f64, CVector)>,
    prep: Vec<(f64, CVector)>,
}

impl Term {
    /// Projective outcome `|v⟩⟨v|` followed by the pure state `|u⟩`.
    pub fn pure(a: i8, v: CVector, u: CVector) -> Self {
        Term {
            a,
            effect: vec![(1.0, v)],
            prep: vec![(1.0, u)],
        }
    }

    pub fn from_factors(a: i8, effect: Vec<(f64, CVector)>, prep: Vec<(f64, CVector)>) -> Self {
        Term { a, effect, prep }
    }

    /// Factors dense hermitian matrices by eigendecomposition.
    pub fn from_dense(a: i8, effect: &CMatrix, prep: &CMatrix) -> Result<Self> {
        if !linalg::is_hermitian(effect, STATE_TOL) || !linalg::is_hermitian(prep, STATE_TOL) {
            return Err(WirecutError::invalid(
                "effects and preparations must be hermitian",
            ));
        }
        let factor = |m: &CMatrix| -> Result<Vec<(f64, CVector)>> {
            let pairs = linalg::hermitian_eigen(m);
            if pairs.iter().any(|(l, _)| *l < -STATE_TOL) {
                return Err(WirecutError::invalid("matrix is not positive semidefinite"));
            }
            Ok(pairs.into_iter().filter(|(l, _)| *l > 1e-14).collect())
        };
        Ok(Term {
            a,
            effect: factor(effect)?,
            prep: factor(prep)?,
        })
    }

    pub fn a(&self) -> i8 {
        self.a
    }

    pub fn effect_factors(&self) -> &[(f64, CVector)] {
        &self.effect
    }

    pub fn prep_mixture(&self) -> &[(f64, CVector)] {
        &self.prep
    }

    pub fn dim(&self) -> usize {
        self.effect
            .first()
            .or(self.prep.first())
            .map_or(0, |(_, v)| v.len())
    }

    pub fn effect_matrix(&self) -> CMatrix {
        weighted_outer_sum(&self.effect, self.dim())
    }

    pub fn prep_matrix(&self) -> CMatrix {
        weighted_outer_sum(&self.prep, self.dim())
    }

    /// Real vector `Tr[E σ_l]` over the given Pauli basis.
    fn effect_pauli_vector(&self, paulis: &[PauliString]) -> (Vec<f64>, f64) {
        pauli_vector(&self.effect, paulis)
    }

    fn prep_pauli_vector(&self, paulis: &[PauliString]) -> (Vec<f64>, f64) {
        pauli_vector(&self.prep, paulis)
    }
}

fn weighted_outer_sum(factors: &[(f64, CVector)], dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for (w, v) in factors {
        m += linalg::outer(v) * Complex64::new(*w, 0.0);
    }
    m
}

/// Returns the real parts and the largest imaginary residue.
fn pauli_vector(factors: &[(f64, CVector)], paulis: &[PauliString]) -> (Vec<f64>, f64) {
    let mut imag = 0.0f64;
    let vals = paulis
        .iter()
        .map(|p| {
            let z: Complex64 = factors
                .iter()
                .map(|(w, v)| p.expectation(v.as_slice()) * *w)
                .sum();
            imag = imag.max(z.im.abs());
            z.re
        })
        .collect();
    (vals, imag)
}

#[derive(Clone, Debug)]
pub struct MPChannel {
    n: usize,
    terms: Vec<Term>,
}

impl MPChannel {
    /// Validates `Σ E_μ = I`, effect positivity, `a = ±1`, and that each
    /// preparation is a normalised mixture of unit vectors.
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if n == 0 || n > 12 {
            return Err(WirecutError::limit(format!(
                "channel width {n} outside 1..=12"
            )));
        }
        if terms.is_empty() {
            return Err(WirecutError::invalid("channel needs at least one term"));
        }
        let dim = 1usize << n;
        let mut total = CMatrix::zeros(dim, dim);
        for t in &terms {
            if t.a != 1 && t.a != -1 {
                return Err(WirecutError::invalid("coefficients a must be ±1"));
            }
            let vectors = t.effect.iter().chain(t.prep.iter());
            if vectors.clone().any(|(_, v)| v.len() != dim) {
                return Err(WirecutError::invalid(
                    "term dimension differs from channel width",
                ));
            }
            if t.effect.iter().any(|(l, _)| *l < -STATE_TOL) {
                return Err(WirecutError::invalid("POVM effect is not positive"));
            }
            let p_total: f64 = t.prep.iter().map(|(p, _)| p).sum();
            if t.prep.is_empty()
                || t.prep.iter().any(|(p, _)| *p < 0.0)
                || (p_total - 1.0).abs() > STATE_TOL
            {
                return Err(WirecutError::invalid(
                    "preparation weights must form a distribution",
                ));
            }
            if vectors
                .clone()
                .any(|(_, v)| (v.norm() - 1.0).abs() > STATE_TOL)
            {
                return Err(WirecutError::invalid("factor vectors must be normalised"));
            }
            total += t.effect_matrix();
        }
        if linalg::max_abs_diff(&total, &linalg::identity(dim)) > STATE_TOL {
            return Err(WirecutError::invalid(
                "POVM effects do not sum to the identity",
            ));
        }
        Ok(MPChannel { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Dense action on a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let dim = 1usize << self.n;
        let mut out = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let p = linalg::trace(&(t.effect_matrix() * rho));
            out += t.prep_matrix() * p * Complex64::new(t.a as f64, 0.0);
        }
        out
    }
}

/// Real `4^n × 4^n` transfer matrix in the normalised Pauli basis, indexed by
/// `PauliString::to_word`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub n: usize,
    pub entries: DMatrix<f64>,
    /// Largest imaginary part discarded while forming the entries.
    pub imag_residue: f64,
}

impl TransferMatrix {
    pub fn identity(n: usize) -> Self {
        let d = 1usize << (2 * n);
        TransferMatrix {
            n,
            entries: DMatrix::identity(d, d),
            imag_residue: 0.0,
        }
    }

    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        (&self.entries - &other.entries).abs().max()
    }

    /// Numerical rank from the singular values, cutoff `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .filter(|&&s| s > tol)
            .count()
    }
}

pub(crate) fn check_ptm_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PTM_QUBITS {
        return Err(WirecutError::limit(format!(
            "transfer matrices are limited to {MAX_PTM_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

pub fn ptm(channel: &MPChannel) -> Result<TransferMatrix> {
    weighted_ptm(channel.n, &[(1.0, channel)], Execution::default())
}

/// `Σ_i w_i · PTM(E_i)` accumulated term by term in a fixed order. Rows are
/// computed independently, so the result does not depend on `exec`.
pub fn weighted_ptm(
    n: usize,
    channels: &[(f64, &MPChannel)],
    exec: Execution,
) -> Result<TransferMatrix> {
    check_ptm_width(n)?;
    if channels.iter().any(|(_, c)| c.n != n) {
        return Err(WirecutError::invalid("channel widths differ"));
    }
    let paulis = PauliString::all(n)?;
    let d = 1usize << n;
    let big = paulis.len();
    let flat: Vec<(f64, &Term)> = channels
        .iter()
        .flat_map(|(w, c)| c.terms.iter().map(move |t| (*w * t.a as f64 / d as f64, t)))
        .collect();
    let vectors = par::map_indexed(flat.len(), exec, |i| {
        let (_, t) = flat[i];
        let (e, ie) = t.effect_pauli_vector(&paulis);
        let (r, ir) = t.prep_pauli_vector(&paulis);
        (e, r, ie.max(ir))
    });
    let imag_residue = vectors.iter().map(|v| v.2).fold(0.0, f64::max);
    let rows = par::map_indexed(big, exec, |k| {
        let mut row = vec![0.0f64; big];
        for ((w, _), (e, r, _)) in flat.iter().zip(&vectors) {
            let coef = w * r[k];
            if coef == 0.0 {
                continue;
            }
            for (slot, ev) in row.iter_mut().zip(e) {
                *slot += coef * ev;
            }
        }
        row
    });
    let entries = DMatrix::from_fn(big, big, |k, l| rows[k][l]);
    Ok(TransferMatrix {
        n,
        entries,
        imag_residue,
    })
}

/// Dense reference: `S_kl = Tr[σ_k Λ(σ_l)] / 2^n`.
pub fn ptm_dense(channel: &MPChannel) -> Result<TransferMatrix> {
    let n = channel.n;
    check_ptm_width(n)?;
    let paulis = PauliString::all(n)?;
    let d = (1usize << n) as f64;
    let big = paulis.len();
    let images: Vec<CMatrix> = paulis
        .iter()
        .map(|p| p.to_dense().map(|m| channel.apply(&m)))
        .collect::<Result<_>>()?;
    let mut imag = 0.0f64;
    let mut entries = DMatrix::zeros(big, big);
    for (k, pk) in paulis.iter().enumerate() {
        for (l, img) in images.iter().enumerate() {
            let z = pk.trace_with(img) / d;
            imag = imag.max(z.im.abs());
            entries[(k, l)] = z.re;
        }
    }
    Ok(TransferMatrix {
        n,
        entries,
        imag_residue: imag,
    })
}

pub fn ket(amps: &[Complex64]) -> CVector {
    CVector::from_column_slice(amps)
}

/// Named single-qubit states.
pub mod states {
    use super::*;

    pub fn zero() -> CVector {
        linalg::basis_vector(2, 0)
    }

    pub fn one() -> CVector {
        linalg::basis_vector(2, 1)
    }

    pub fn plus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[linalg::c(s, 0.0), linalg::c(s, 0.0)])
    }

    pub fn minus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[linalg::c(s, 0.0), linalg::c(-s, 0.0)])
    }

    pub fn plus_i() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[linalg::c(s, 0.0), linalg::c(0.0, s)])
    }

    pub fn minus_i() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[linalg::c(s, 0.0), linalg::c(0.0, -s)])
    }
}
