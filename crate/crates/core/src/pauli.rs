//! Binary-symplectic Pauli strings.
//!
//! A string on `n` qubits is a pair of bit masks `(z, x)`; bit `k` of each
//! mask refers to qubit `k + 1`. The encoded operator is
//! `(-i)^{z·x} Z^{z_1}X^{x_1} ⊗ … ⊗ Z^{z_n}X^{x_n}`, which is always one of
//! the hermitian strings over `{I, X, Y, Z}` (the `(-i)` turns `ZX` into `Y`).
//!
//! As a flat `2n`-bit vector the z-block comes first:
//! `(z_1, …, z_n, x_1, …, x_n)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WirecutError};
use crate::linalg::{self, CMatrix};

pub const MAX_QUBITS: usize = 16;
pub const MAX_DENSE_QUBITS: usize = 10;

/// A fourth root of unity, stored as the exponent of `i`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn compose(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// `Some(±1)` for real phases.
    pub fn sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        };
        f.write_str(s)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    z: u32,
    x: u32,
}

/// A Pauli string with an explicit fourth-root-of-unity prefactor.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub pauli: PauliString,
}

impl PauliString {
    pub fn new(n: usize, z: u32, x: u32) -> Result<Self> {
        check_width(n)?;
        let mask = width_mask(n);
        if z & !mask != 0 || x & !mask != 0 {
            return Err(WirecutError::invalid(format!(
                "bit masks exceed {n} qubits"
            )));
        }
        Ok(PauliString { n: n as u8, z, x })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0, 0)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn is_identity(&self) -> bool {
        self.z == 0 && self.x == 0
    }

    /// True when the string lies in `{I, Z}^{⊗n}`.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// Packs the string as a single `2n`-bit word: bit `k` is `z_{k+1}` and
    /// bit `n + k` is `x_{k+1}`.
    pub fn to_word(&self) -> u64 {
        (self.z as u64) | ((self.x as u64) << self.n)
    }

    pub fn from_word(n: usize, word: u64) -> Result<Self> {
        check_width(n)?;
        if n < 64 && word >> (2 * n) != 0 {
            return Err(WirecutError::invalid("word wider than 2n bits"));
        }
        let mask = width_mask(n) as u64;
        Self::new(n, (word & mask) as u32, ((word >> n) & mask) as u32)
    }

    /// Letter acting on `qubit` (0-based).
    pub fn letter(&self, qubit: usize) -> char {
        match ((self.z >> qubit) & 1, (self.x >> qubit) & 1) {
            (0, 0) => 'I',
            (0, 1) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    pub fn weight(&self) -> u32 {
        (self.z | self.x).count_ones()
    }

    /// Ordering key on the flat binary vector `(z_1..z_n, x_1..x_n)` read
    /// left to right.
    pub fn lex_key(&self) -> Vec<bool> {
        phi_inv(self)
    }

    /// Dense `2^n × 2^n` matrix; qubit 1 is the leftmost kron factor.
    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.n() > MAX_DENSE_QUBITS {
            return Err(WirecutError::limit(format!(
                "dense Pauli matrices are limited to {MAX_DENSE_QUBITS} qubits, got {}",
                self.n
            )));
        }
        let factors: Vec<CMatrix> = (0..self.n())
            .map(|q| match self.letter(q) {
                'I' => linalg::identity(2),
                'X' => linalg::pauli_x(),
                'Y' => linalg::pauli_y(),
                _ => linalg::pauli_z(),
            })
            .collect();
        Ok(linalg::kron_all(&factors))
    }

    /// Masks re-expressed in basis-index bit order (qubit 1 = MSB).
    fn index_masks(&self) -> (usize, usize) {
        let n = self.n();
        let mut zi = 0usize;
        let mut xi = 0usize;
        for q in 0..n {
            let shift = n - 1 - q;
            zi |= (((self.z >> q) & 1) as usize) << shift;
            xi |= (((self.x >> q) & 1) as usize) << shift;
        }
        (zi, xi)
    }

    /// The only nonzero entry of row `row` of the dense matrix: returns the
    /// column index and the entry.
    pub fn row_entry(&self, row: usize) -> (usize, Complex64) {
        let (zi, xi) = self.index_masks();
        let base = Phase::from_exponent(3 * (self.z & self.x).count_ones());
        let sign = if (zi & row).count_ones() % 2 == 1 {
            Phase::MINUS_ONE
        } else {
            Phase::PLUS_ONE
        };
        (row ^ xi, base.compose(sign).to_complex())
    }

    /// `Tr[P · A]` in `O(2^n)` using the permutation structure of `P`.
    pub fn trace_with(&self, a: &CMatrix) -> Complex64 {
        let dim = 1usize << self.n();
        assert_eq!(a.nrows(), dim);
        let (zi, xi) = self.index_masks();
        let base = Phase::from_exponent(3 * (self.z & self.x).count_ones()).to_complex();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            let col = r ^ xi;
            let v = a[(col, r)];
            if (zi & r).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc * base
    }

    /// `⟨v|P|v⟩` for a state vector of length `2^n`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let (zi, xi) = self.index_masks();
        let base = Phase::from_exponent(3 * (self.z & self.x).count_ones()).to_complex();
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, vr) in v.iter().enumerate() {
            let term = vr.conj() * v[r ^ xi];
            if (zi & r).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        acc * base
    }

    /// All `4^n` strings in word order.
    pub fn all(n: usize) -> Result<Vec<PauliString>> {
        check_width(n)?;
        if n > 8 {
            return Err(WirecutError::limit(
                "enumerating all Pauli strings beyond 8 qubits",
            ));
        }
        (0..(1u64 << (2 * n)))
            .map(|w| PauliString::from_word(n, w))
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = WirecutError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let n = s.chars().count();
        if n == 0 {
            return Err(WirecutError::Parse("empty Pauli string".into()));
        }
        check_width(n)?;
        let mut z = 0u32;
        let mut x = 0u32;
        for (q, ch) in s.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                other => {
                    return Err(WirecutError::Parse(format!(
                        "unexpected character {other:?} in Pauli string {s:?}"
                    )))
                }
            }
        }
        PauliString::new(n, z, x)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl PhasedPauli {
    pub fn to_dense(&self) -> Result<CMatrix> {
        Ok(self.pauli.to_dense()? * self.phase.to_complex())
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.phase, self.pauli)
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(WirecutError::invalid(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {n}"
        )));
    }
    Ok(())
}

fn width_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn check_same_width(p: &PauliString, q: &PauliString) -> Result<()> {
    if p.n != q.n {
        return Err(WirecutError::invalid(format!(
            "mismatched qubit counts {} and {}",
            p.n, q.n
        )));
    }
    Ok(())
}

/// Decodes a `2n`-bit vector laid out as `(z_1..z_n, x_1..x_n)`.
pub fn phi(b: &[bool]) -> Result<PauliString> {
    if b.is_empty() || !b.len().is_multiple_of(2) {
        return Err(WirecutError::invalid(format!(
            "binary vector length must be even and positive, got {}",
            b.len()
        )));
    }
    let n = b.len() / 2;
    let mut z = 0u32;
    let mut x = 0u32;
    for q in 0..n {
        if b[q] {
            z |= 1 << q;
        }
        if b[n + q] {
            x |= 1 << q;
        }
    }
    PauliString::new(n, z, x)
}

pub fn phi_inv(p: &PauliString) -> Vec<bool> {
    let n = p.n();
    (0..n)
        .map(|q| (p.z >> q) & 1 == 1)
        .chain((0..n).map(|q| (p.x >> q) & 1 == 1))
        .collect()
}

/// Symplectic inner product test: `z_p·x_q + z_q·x_p = 0 (mod 2)`.
pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    check_same_width(p, q)?;
    Ok(symplectic_product(p, q) == 0)
}

pub(crate) fn symplectic_product(p: &PauliString, q: &PauliString) -> u32 {
    ((p.z & q.x).count_ones() + (q.z & p.x).count_ones()) % 2
}

/// Product `P·Q = phase · R` with `R = φ(φ⁻¹(P) ⊕ φ⁻¹(Q))`.
pub fn multiply(p: &PauliString, q: &PauliString) -> Result<PhasedPauli> {
    check_same_width(p, q)?;
    let r = PauliString {
        n: p.n,
        z: p.z ^ q.z,
        x: p.x ^ q.x,
    };
    // φ(p)φ(q) = (-i)^{a} (-1)^{b} Z^{z_r} X^{x_r} and Z^{z_r} X^{x_r} = i^{c} φ(r)
    let a = (p.z & p.x).count_ones() + (q.z & q.x).count_ones();
    let b = (p.x & q.z).count_ones();
    let c = (r.z & r.x).count_ones();
    Ok(PhasedPauli {
        phase: Phase::from_exponent(3 * a + 2 * b + c),
        pauli: r,
    })
}
