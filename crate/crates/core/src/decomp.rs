//! Quasiprobability decompositions `Id^{⊗n} = Σ_i c_i E_i` of the identity
//! channel into measure-and-prepare channels.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::{self, states, MPChannel, Term, TransferMatrix};
use crate::clifford::{
    synthesize, verify_diagonalizes, verify_diagonalizes_symplectic, CliffordCircuit,
};
use crate::error::{Result, WirecutError};
use crate::families::{generate_partition, FamilyPartition};
use crate::linalg::{self, CMatrix, CVector};
use crate::par::Execution;
use crate::pauli::MAX_DENSE_QUBITS;

pub const PTM_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Peng,
    Optimal1q,
    Mub,
    Randomized,
    Teleport,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Peng,
        Method::Optimal1q,
        Method::Mub,
        Method::Randomized,
        Method::Teleport,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Peng => "peng",
            Method::Optimal1q => "optimal1q",
            Method::Mub => "mub",
            Method::Randomized => "randomized",
            Method::Teleport => "teleport",
        }
    }

    /// Closed-form `γ` for `n` wires. Peng and the optimal one-wire cut are
    /// applied wire by wire.
    pub fn gamma(&self, n: usize) -> Rational64 {
        let p = |b: i64, e: usize| Rational64::from_integer(b.pow(e as u32));
        match self {
            Method::Peng => p(4, n),
            Method::Optimal1q => p(3, n),
            Method::Mub | Method::Teleport => p(2, n + 1) - 1,
            Method::Randomized => p(2, n + 1) + 1,
        }
    }

    /// Closed-form channel count. For the randomized method this assumes the
    /// full Clifford group as the design.
    pub fn channel_count(&self, n: usize) -> Option<u64> {
        let p = |b: u64, e: usize| b.checked_pow(e as u32);
        match self {
            Method::Peng => p(8, n),
            Method::Optimal1q => p(3, n),
            Method::Mub => Some((1u64 << n) + 1),
            Method::Randomized => match n {
                1 => Some(25),
                2 => Some(11_521),
                _ => None,
            },
            Method::Teleport => {
                let d = 1u64 << n;
                Some(p(2, d as usize)? + d * d - d - 1)
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = WirecutError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.label() == s.to_ascii_lowercase())
            .ok_or_else(|| WirecutError::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct WeightedChannel {
    pub weight: Rational64,
    pub channel: MPChannel,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub n: usize,
    pub label: String,
    pub channels: Vec<WeightedChannel>,
}

impl Decomposition {
    pub fn new(n: usize, label: impl Into<String>, channels: Vec<WeightedChannel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(WirecutError::invalid(
                "decomposition needs at least one channel",
            ));
        }
        if channels.iter().any(|c| c.channel.n() != n) {
            return Err(WirecutError::invalid(
                "channel widths differ from decomposition width",
            ));
        }
        if channels.iter().all(|c| c.weight.is_zero()) {
            return Err(WirecutError::invalid("all weights are zero"));
        }
        Ok(Decomposition {
            n,
            label: label.into(),
            channels,
        })
    }

    /// `γ = Σ|c_i|`, exact.
    pub fn gamma(&self) -> Rational64 {
        self.channels.iter().map(|c| c.weight.abs()).sum()
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma().to_f64().unwrap_or(f64::NAN)
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn ptm_sum(&self, exec: Execution) -> Result<TransferMatrix> {
        let weighted: Vec<(f64, &MPChannel)> = self
            .channels
            .iter()
            .map(|c| (c.weight.to_f64().unwrap_or(f64::NAN), &c.channel))
            .collect();
        channel::weighted_ptm(self.n, &weighted, exec)
    }

    /// Sampling probabilities `|c_i| / γ`.
    pub fn probabilities(&self) -> Vec<f64> {
        let g = self.gamma();
        self.channels
            .iter()
            .map(|c| (c.weight.abs() / g).to_f64().unwrap_or(0.0))
            .collect()
    }
}

/// `‖Σ c_i PTM(E_i) − I‖_max`.
pub fn verify_decomposition(d: &Decomposition) -> Result<f64> {
    Ok(verify_report(d, Execution::default())?.residual)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub residual: f64,
    pub imag_residue: f64,
}

pub fn verify_report(d: &Decomposition, exec: Execution) -> Result<VerifyReport> {
    let s = d.ptm_sum(exec)?;
    Ok(VerifyReport {
        residual: s.max_abs_diff(&TransferMatrix::identity(d.n)),
        imag_residue: s.imag_residue,
    })
}

/// Lower bound on the channel count of any decomposition of `target`:
/// `max(1, ⌈(rank − 1)/(2^n − 1)⌉)`.
pub fn rank_bound_check(target: &TransferMatrix, n: usize) -> usize {
    let rank = target.rank(RANK_TOL);
    let denom = (1usize << n) - 1;
    (rank.saturating_sub(1)).div_ceil(denom).max(1)
}

fn channel(n: usize, weight: Rational64, terms: Vec<Term>) -> Result<WeightedChannel> {
    Ok(WeightedChannel {
        weight,
        channel: MPChannel::new(n, terms)?,
    })
}

fn r(num: i64, den: i64) -> Rational64 {
    Rational64::new(num, den)
}

pub fn build_peng_1q() -> Decomposition {
    use states::*;
    let half = r(1, 2);
    type Row = (Rational64, [(i8, CVector, CVector); 2]);
    let rows: Vec<Row> = vec![
        (half, [(1, zero(), zero()), (1, one(), zero())]),
        (half, [(1, zero(), one()), (1, one(), one())]),
        (half, [(1, plus(), plus()), (-1, minus(), plus())]),
        (-half, [(1, plus(), minus()), (-1, minus(), minus())]),
        (half, [(1, plus_i(), plus_i()), (-1, minus_i(), plus_i())]),
        (
            -half,
            [(1, plus_i(), minus_i()), (-1, minus_i(), minus_i())],
        ),
        (half, [(1, zero(), zero()), (-1, one(), zero())]),
        (-half, [(1, zero(), one()), (-1, one(), one())]),
    ];
    let channels = rows
        .into_iter()
        .map(|(c, terms)| {
            let terms = terms
                .into_iter()
                .map(|(a, e, p)| Term::pure(a, e, p))
                .collect();
            channel(1, c, terms).expect("valid table")
        })
        .collect();
    Decomposition::new(1, "peng", channels).expect("nonempty")
}

pub fn build_optimal_1q() -> Decomposition {
    use states::*;
    let one_r = Rational64::from_integer(1);
    let channels = vec![
        channel(
            1,
            one_r,
            vec![
                Term::pure(1, plus(), plus()),
                Term::pure(1, minus(), minus()),
            ],
        ),
        channel(
            1,
            one_r,
            vec![
                Term::pure(1, plus_i(), plus_i()),
                Term::pure(1, minus_i(), minus_i()),
            ],
        ),
        channel(
            1,
            -one_r,
            vec![Term::pure(1, zero(), one()), Term::pure(1, one(), zero())],
        ),
    ]
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .expect("valid table");
    Decomposition::new(1, "optimal1q", channels).expect("nonempty")
}

/// `ρ_j = Σ_{k≠j} |k⟩⟨k| / (2^n − 1)` as an explicit mixture.
pub fn complement_mixture(n: usize, j: usize) -> Vec<(f64, CVector)> {
    let d = 1usize << n;
    let p = 1.0 / (d - 1) as f64;
    (0..d)
        .filter(|&k| k != j)
        .map(|k| (p, linalg::basis_vector(d, k)))
        .collect()
}

pub fn build_mub_nq(
    n: usize,
    partition: &FamilyPartition,
    circuits: &[CliffordCircuit],
) -> Result<Decomposition> {
    let d = 1usize << n;
    if partition.n != n || partition.families.len() != d + 1 || circuits.len() != d {
        return Err(WirecutError::invalid(
            "partition and circuit counts must match 2^n + 1 and 2^n",
        ));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(WirecutError::limit(
            "MUB channels are built densely up to 10 qubits",
        ));
    }
    let mut channels = Vec::with_capacity(d + 1);
    for (u, fam) in circuits.iter().zip(&partition.families) {
        let ok = if n <= 6 {
            verify_diagonalizes(u, fam)
        } else {
            verify_diagonalizes_symplectic(u, fam)
        };
        if u.n() != n || !ok {
            return Err(WirecutError::invalid(
                "circuit does not diagonalise its family",
            ));
        }
        let dense = u.to_dense()?;
        let terms = (0..d)
            .map(|j| {
                let col: CVector = dense.column(j).into_owned();
                Term::pure(1, col.clone(), col)
            })
            .collect();
        channels.push(channel(n, Rational64::from_integer(1), terms)?);
    }
    let terms = (0..d)
        .map(|j| {
            Term::from_factors(
                1,
                vec![(1.0, linalg::basis_vector(d, j))],
                complement_mixture(n, j),
            )
        })
        .collect();
    channels.push(channel(
        n,
        Rational64::from_integer(-(d as i64 - 1)),
        terms,
    )?);
    Decomposition::new(n, "mub", channels)
}

/// Generates the partition, synthesises its circuits and builds the
/// decomposition.
pub fn build_mub(n: usize) -> Result<Decomposition> {
    let part = generate_partition(n)?;
    let circuits = part.families[..part.families.len() - 1]
        .iter()
        .map(synthesize)
        .collect::<Result<Vec<_>>>()?;
    build_mub_nq(n, &part, &circuits)
}

/// Randomized-measurement decomposition
/// `(2^n+1) E_V[Σ_i Tr[V|i⟩⟨i|V† •] V|i⟩⟨i|V†] − 2^n Σ_i Tr[|i⟩⟨i| •] I/2^n`.
pub fn build_randomized_nq(
    n: usize,
    unitary_set: &[(CMatrix, Rational64)],
) -> Result<Decomposition> {
    channel::check_ptm_width(n)?;
    let d = 1usize << n;
    if unitary_set.is_empty() {
        return Err(WirecutError::invalid("empty unitary set"));
    }
    let total: Rational64 = unitary_set.iter().map(|(_, p)| *p).sum();
    if total != Rational64::from_integer(1) || unitary_set.iter().any(|(_, p)| p.is_negative()) {
        return Err(WirecutError::invalid(
            "probabilities must be nonnegative and sum to 1",
        ));
    }
    let scale = Rational64::from_integer(d as i64 + 1);
    let mut channels = Vec::with_capacity(unitary_set.len() + 1);
    for (v, p) in unitary_set {
        if v.nrows() != d || !linalg::is_unitary(v, 1e-10) {
            return Err(WirecutError::invalid(
                "set element is not a unitary of the right size",
            ));
        }
        let terms = (0..d)
            .map(|i| {
                let col: CVector = v.column(i).into_owned();
                Term::pure(1, col.clone(), col)
            })
            .collect();
        channels.push(channel(n, scale * p, terms)?);
    }
    let maximally_mixed: Vec<(f64, CVector)> = (0..d)
        .map(|k| (1.0 / d as f64, linalg::basis_vector(d, k)))
        .collect();
    let terms = (0..d)
        .map(|i| {
            Term::from_factors(
                1,
                vec![(1.0, linalg::basis_vector(d, i))],
                maximally_mixed.clone(),
            )
        })
        .collect();
    channels.push(channel(n, Rational64::from_integer(-(d as i64)), terms)?);
    let dec = Decomposition::new(n, "randomized", channels)?;
    let residual = verify_decomposition(&dec)?;
    if residual > PTM_TOL {
        return Err(WirecutError::DesignViolation { residual });
    }
    Ok(dec)
}

/// The `n`-qubit Clifford group modulo global phase (`n ≤ 2`), generated by
/// breadth-first search from H, S and CZ.
pub fn clifford_group(n: usize) -> Result<Vec<CMatrix>> {
    if n == 0 || n > 2 {
        return Err(WirecutError::limit(
            "Clifford groups are enumerated for n ≤ 2 only",
        ));
    }
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(linalg::embed(&linalg::hadamard(), &[q], n));
        gens.push(linalg::embed(&linalg::s_gate(), &[q], n));
    }
    if n == 2 {
        let cz = CMatrix::from_diagonal(&CVector::from_column_slice(&[
            linalg::ONE,
            linalg::ONE,
            linalg::ONE,
            -linalg::ONE,
        ]));
        gens.push(cz);
    }
    let start = linalg::identity(1 << n);
    let mut seen: HashMap<Vec<(i64, i64)>, usize> = HashMap::new();
    let mut elems = vec![start.clone()];
    seen.insert(phase_key(&start), 0);
    let mut frontier = 0;
    while frontier < elems.len() {
        let cur = elems[frontier].clone();
        frontier += 1;
        for g in &gens {
            let next = g * &cur;
            let key = phase_key(&next);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                e.insert(elems.len());
                elems.push(next);
            }
        }
    }
    Ok(elems)
}

/// Rounded entries after removing the global phase of the first nonzero
/// entry (column-major).
fn phase_key(m: &CMatrix) -> Vec<(i64, i64)> {
    let pivot = m
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or(linalg::ONE);
    let phase = pivot / pivot.norm();
    m.iter()
        .map(|z| {
            let w = z / phase;
            ((w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64)
        })
        .collect()
}

/// Teleportation-based decomposition with the Bell pair replaced by
/// `Σ_r c_r |e_r⟩⟨e_r| ⊗ |e_r*⟩⟨e_r*| − 2^{-n} Σ_{j≠k} |j⟩⟨j| ⊗ |k⟩⟨k|`.
/// The Bell-basis measurement and the Pauli correction are folded into the
/// effects and preparations.
pub fn build_teleport_nq(n: usize) -> Result<Decomposition> {
    if n == 0 || n > 2 {
        return Err(WirecutError::limit(
            "teleportation decomposition is limited to n ≤ 2",
        ));
    }
    let d = 1usize << n;
    let big = (1usize << d) - 1;
    let c_r = r(d as i64, big as i64);
    let mut channels = Vec::new();
    for rr in 1..=big {
        let e: CVector = CVector::from_fn(d, |j, _| {
            let s = ((1usize << j) - 1) as f64;
            Complex64::from_polar(
                1.0 / (d as f64).sqrt(),
                2.0 * PI * rr as f64 * s / big as f64,
            )
        });
        let e_conj = e.map(|z| z.conj());
        channels.push(channel(n, c_r, teleport_terms(n, &e, &e_conj))?);
    }
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let terms = teleport_terms(n, &linalg::basis_vector(d, j), &linalg::basis_vector(d, k));
            channels.push(channel(n, r(-1, d as i64), terms)?);
        }
    }
    Decomposition::new(n, "teleport", channels)
}

/// Terms `|w_μ⟩⟨w_μ|` and `V_μ|f⟩` for the resource `|e⟩_C ⊗ |f⟩_B`.
fn teleport_terms(n: usize, e: &CVector, f: &CVector) -> Vec<Term> {
    let d = 1usize << n;
    let total = 2 * n;
    let a_qubits: Vec<usize> = (0..n).collect();
    let c_qubits: Vec<usize> = (n..total).collect();
    let mut terms = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // |μ⟩ with A bits a, C bits b
            let idx = linalg::scatter_bits(
                linalg::scatter_bits(0, a, &a_qubits, total),
                b,
                &c_qubits,
                total,
            );
            let mut state = vec![linalg::ZERO; 1 << total];
            state[idx] = linalg::ONE;
            // W† = CX · H: Hadamards on A first, then CX(A_l → C_l)
            for &q in &a_qubits {
                linalg::apply_gate(&mut state, &linalg::hadamard(), &[q], total);
            }
            for l in 0..n {
                linalg::apply_gate(&mut state, &linalg::cnot(), &[l, n + l], total);
            }
            let w = CVector::from_fn(d, |i, _| {
                (0..d)
                    .map(|c| {
                        let full = linalg::scatter_bits(
                            linalg::scatter_bits(0, i, &a_qubits, total),
                            c,
                            &c_qubits,
                            total,
                        );
                        e[c].conj() * state[full]
                    })
                    .sum()
            });
            let norm = w.norm();
            let v_mu = pauli_correction(n, a, b);
            let prep = &v_mu * f;
            terms.push(Term::from_factors(
                1,
                vec![(norm * norm, w / Complex64::new(norm, 0.0))],
                vec![(1.0, prep)],
            ));
        }
    }
    terms
}

/// `⊗_l Z^{a_l} X^{b_l}` with bit `l` of `a`, `b` read MSB first.
fn pauli_correction(n: usize, a: usize, b: usize) -> CMatrix {
    let factors: Vec<CMatrix> = (0..n)
        .map(|l| {
            let shift = n - 1 - l;
            let mut m = linalg::identity(2);
            if (b >> shift) & 1 == 1 {
                m = linalg::pauli_x() * m;
            }
            if (a >> shift) & 1 == 1 {
                m = linalg::pauli_z() * m;
            }
            m
        })
        .collect();
    linalg::kron_all(&factors)
}

/// Product decomposition of independent cuts; the result acts on the
/// concatenated wires.
pub fn tensor_product(parts: &[Decomposition]) -> Result<Decomposition> {
    let first = parts
        .first()
        .ok_or_else(|| WirecutError::invalid("empty product"))?;
    let mut acc = first.clone();
    for next in &parts[1..] {
        let n = acc.n + next.n;
        let mut channels = Vec::with_capacity(acc.m() * next.m());
        for a in &acc.channels {
            for b in &next.channels {
                let mut terms = Vec::new();
                for ta in a.channel.terms() {
                    for tb in b.channel.terms() {
                        terms.push(Term::from_factors(
                            ta.a() * tb.a(),
                            kron_factors(ta.effect_factors(), tb.effect_factors()),
                            kron_factors(ta.prep_mixture(), tb.prep_mixture()),
                        ));
                    }
                }
                channels.push(channel(n, a.weight * b.weight, terms)?);
            }
        }
        let label = if acc.label == next.label {
            acc.label.clone()
        } else {
            format!("{}x{}", acc.label, next.label)
        };
        acc = Decomposition::new(n, label, channels)?;
    }
    Ok(acc)
}

fn kron_factors(a: &[(f64, CVector)], b: &[(f64, CVector)]) -> Vec<(f64, CVector)> {
    a.iter()
        .flat_map(|(wa, va)| b.iter().map(move |(wb, vb)| (wa * wb, va.kronecker(vb))))
        .collect()
}

/// Builds the named decomposition on `n` wires with default parameters.
pub fn build(method: Method, n: usize) -> Result<Decomposition> {
    match method {
        Method::Peng => tensor_power(&build_peng_1q(), n),
        Method::Optimal1q => tensor_power(&build_optimal_1q(), n),
        Method::Mub => build_mub(n),
        Method::Randomized => {
            let group = clifford_group(n)?;
            let p = r(1, group.len() as i64);
            let set: Vec<(CMatrix, Rational64)> = group.into_iter().map(|u| (u, p)).collect();
            build_randomized_nq(n, &set)
        }
        Method::Teleport => build_teleport_nq(n),
    }
}

fn tensor_power(d: &Decomposition, n: usize) -> Result<Decomposition> {
    if n == 0 || n > 4 {
        return Err(WirecutError::limit(
            "wire-by-wire products are limited to 4 wires",
        ));
    }
    tensor_product(&vec![d.clone(); n])
}

#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
pub struct TermJson {
    pub a: i8,
    pub effect: MatrixJson,
    pub prep: MatrixJson,
}

#[derive(Serialize, Deserialize)]
pub struct ChannelJson {
    pub weight: f64,
    pub weight_exact: String,
    pub terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
pub struct MetadataJson {
    pub label: String,
    pub n: usize,
    pub gamma: f64,
    pub gamma_exact: String,
    pub m: usize,
}

#[derive(Serialize, Deserialize)]
pub struct DecompositionJson {
    pub metadata: MetadataJson,
    pub channels: Vec<ChannelJson>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let data = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        MatrixJson { dim, data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.dim * self.dim {
            return Err(WirecutError::Parse(
                "matrix data length differs from dim²".into(),
            ));
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |r, c| {
            let [re, im] = self.data[r * self.dim + c];
            Complex64::new(re, im)
        }))
    }
}

impl Decomposition {
    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            metadata: MetadataJson {
                label: self.label.clone(),
                n: self.n,
                gamma: self.gamma_f64(),
                gamma_exact: self.gamma().to_string(),
                m: self.m(),
            },
            channels: self
                .channels
                .iter()
                .map(|c| ChannelJson {
                    weight: c.weight.to_f64().unwrap_or(f64::NAN),
                    weight_exact: c.weight.to_string(),
                    terms: c
                        .channel
                        .terms()
                        .iter()
                        .map(|t| TermJson {
                            a: t.a(),
                            effect: MatrixJson::from_matrix(&t.effect_matrix()),
                            prep: MatrixJson::from_matrix(&t.prep_matrix()),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(doc: &DecompositionJson) -> Result<Self> {
        let n = doc.metadata.n;
        let channels = doc
            .channels
            .iter()
            .map(|c| {
                let weight = c
                    .weight_exact
                    .parse::<Rational64>()
                    .ok()
                    .or_else(|| Rational64::approximate_float(c.weight))
                    .ok_or_else(|| {
                        WirecutError::Parse(format!("bad weight {:?}", c.weight_exact))
                    })?;
                let terms = c
                    .terms
                    .iter()
                    .map(|t| Term::from_dense(t.a, &t.effect.to_matrix()?, &t.prep.to_matrix()?))
                    .collect::<Result<Vec<_>>>()?;
                channel(n, weight, terms)
            })
            .collect::<Result<Vec<_>>>()?;
        Decomposition::new(n, doc.metadata.label.clone(), channels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peng_numbers() {
        let d = build_peng_1q();
        assert_eq!(d.gamma(), Rational64::from_integer(4));
        assert_eq!(d.m(), 8);
        assert!(verify_decomposition(&d).unwrap() < PTM_TOL);
    }

    #[test]
    fn perturbed_peng_is_detected() {
        let mut d = build_peng_1q();
        d.channels[2].weight += r(1, 100);
        assert!(verify_decomposition(&d).unwrap() >= 0.005);
    }

    #[test]
    fn optimal_numbers() {
        let d = build_optimal_1q();
        assert_eq!(d.gamma(), Rational64::from_integer(3));
        assert_eq!(d.m(), 3);
        assert_eq!(d.channels[2].weight, Rational64::from_integer(-1));
        assert!(verify_decomposition(&d).unwrap() < PTM_TOL);
    }

    #[test]
    fn mub_small() {
        for n in 1..=3 {
            let d = build_mub(n).unwrap();
            assert_eq!(d.gamma(), Method::Mub.gamma(n));
            assert_eq!(d.m() as u64, Method::Mub.channel_count(n).unwrap());
            let rep = verify_report(&d, Execution::default()).unwrap();
            assert!(rep.residual < PTM_TOL, "n={n} {rep:?}");
            assert!(rep.imag_residue < 1e-12);
        }
    }

    #[test]
    fn mub_one_qubit_matches_optimal_channels() {
        let d = build_mub(1).unwrap();
        let last = d.channels.last().unwrap();
        assert_eq!(last.weight, Rational64::from_integer(-1));
        let prep0 = last.channel.terms()[0].prep_matrix();
        assert!(linalg::max_abs_diff(&prep0, &linalg::projector(2, 1)) < 1e-15);
    }

    #[test]
    fn rejects_unverified_circuits() {
        let part = generate_partition(1).unwrap();
        let h = CliffordCircuit::new(1, vec![vec![crate::clifford::Gate::H(1)]]).unwrap();
        let err = build_mub_nq(1, &part, &[h.clone(), h]).unwrap_err();
        assert!(matches!(err, WirecutError::InvalidInput(_)));
    }

    #[test]
    fn clifford_group_sizes() {
        assert_eq!(clifford_group(1).unwrap().len(), 24);
        assert!(clifford_group(3).is_err());
    }

    #[test]
    fn randomized_one_qubit() {
        let d = build(Method::Randomized, 1).unwrap();
        assert_eq!(d.gamma(), Rational64::from_integer(5));
        assert_eq!(d.m(), 25);
        assert!(d.m() >= 16 - 2 * 4 + 3);
    }

    #[test]
    fn non_design_is_rejected() {
        let half = r(1, 2);
        let set = vec![(linalg::identity(2), half), (linalg::hadamard(), half)];
        match build_randomized_nq(1, &set) {
            Err(WirecutError::DesignViolation { residual }) => assert!(residual > 1e-3),
            other => panic!("expected design violation, got {other:?}"),
        }
    }

    #[test]
    fn teleport_one_wire() {
        let d = build_teleport_nq(1).unwrap();
        assert_eq!(d.m(), 5);
        assert_eq!(d.gamma(), Rational64::from_integer(3));
        assert!(verify_decomposition(&d).unwrap() < PTM_TOL);
        assert!(matches!(
            build_teleport_nq(3),
            Err(WirecutError::ResourceLimit(_))
        ));
    }

    #[test]
    fn bell_pair_identity() {
        // Σ_r c_r |e_r e_r*⟩⟨·| − 2^{-n} Σ_{j≠k} |jk⟩⟨jk| equals the Bell projector
        for n in 1..=2usize {
            let d = 1usize << n;
            let big = (1usize << d) - 1;
            let c_r = d as f64 / big as f64;
            let mut acc = CMatrix::zeros(d * d, d * d);
            for rr in 1..=big {
                let e = CVector::from_fn(d, |j, _| {
                    let s = ((1usize << j) - 1) as f64;
                    Complex64::from_polar(
                        1.0 / (d as f64).sqrt(),
                        2.0 * PI * rr as f64 * s / big as f64,
                    )
                });
                let pair = e.kronecker(&e.map(|z| z.conj()));
                acc += linalg::outer(&pair) * Complex64::new(c_r, 0.0);
            }
            for j in 0..d {
                for k in 0..d {
                    if j != k {
                        acc -= linalg::projector(d * d, j * d + k)
                            * Complex64::new(1.0 / d as f64, 0.0);
                    }
                }
            }
            let bell = CVector::from_fn(d * d, |i, _| {
                if i / d == i % d {
                    Complex64::new(1.0 / (d as f64).sqrt(), 0.0)
                } else {
                    linalg::ZERO
                }
            });
            assert!(
                linalg::max_abs_diff(&acc, &linalg::outer(&bell)) < 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn rank_bounds() {
        assert_eq!(rank_bound_check(&TransferMatrix::identity(1), 1), 3);
        assert_eq!(rank_bound_check(&TransferMatrix::identity(2), 2), 5);
        // replacement channel ρ ↦ |0⟩⟨0| has a rank-one transfer matrix
        let replace = MPChannel::new(
            1,
            vec![
                Term::pure(1, states::zero(), states::zero()),
                Term::pure(1, states::one(), states::zero()),
            ],
        )
        .unwrap();
        let s = channel::ptm(&replace).unwrap();
        assert_eq!(s.rank(RANK_TOL), 1);
        assert_eq!(rank_bound_check(&s, 1), 1);
    }

    #[test]
    fn product_of_optimal_cuts() {
        for k in 1..=3 {
            let d = tensor_power(&build_optimal_1q(), k).unwrap();
            assert_eq!(d.gamma(), Rational64::from_integer(3i64.pow(k as u32)));
            assert!(verify_decomposition(&d).unwrap() < PTM_TOL);
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = build_optimal_1q();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        let back = Decomposition::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.gamma(), d.gamma());
        assert_eq!(back.m(), d.m());
        assert!(verify_decomposition(&back).unwrap() < PTM_TOL);
    }

    #[test]
    fn method_parsing_and_closed_forms() {
        assert_eq!("MUB".parse::<Method>().unwrap(), Method::Mub);
        assert!("foo".parse::<Method>().is_err());
        assert_eq!(Method::Teleport.channel_count(2), Some(27));
        assert_eq!(Method::Teleport.channel_count(1), Some(5));
        assert_eq!(Method::Mub.gamma(3), Rational64::from_integer(15));
    }
}
