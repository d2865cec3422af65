//! Clifford circuits over {H, S†, CZ} and the synthesis of diagonalising
//! circuits for commuting families.
//!
//! A circuit `U` diagonalises a family when `U† P U = ±D` with
//! `D ∈ {I,Z}^{⊗n}` for every member `P`; the columns of `U` then form the
//! family's common eigenbasis.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::binmat::{rank_of_words, BinaryMatrix};
use crate::coloring::edge_color_cz;
use crate::error::{Result, WirecutError};
use crate::families::CommutingFamily;
use crate::linalg::{self, CMatrix};
use crate::pauli::{phi, phi_inv, PauliString, MAX_DENSE_QUBITS};

/// Gates with 1-based qubit indices.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H(usize),
    Sdg(usize),
    Cz(usize, usize),
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Sdg(q) => vec![q],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    /// Action of `G† P G` (equivalently `G P G†`, up to phase) on a packed
    /// binary word.
    fn conjugate_word(&self, word: u64, n: usize) -> u64 {
        let z = |q: usize| q - 1;
        let x = |q: usize| n + q - 1;
        let bit = |w: u64, i: usize| (w >> i) & 1;
        match *self {
            Gate::H(q) => {
                let (zi, xi) = (z(q), x(q));
                if bit(word, zi) != bit(word, xi) {
                    word ^ (1 << zi) ^ (1 << xi)
                } else {
                    word
                }
            }
            Gate::Sdg(q) => word ^ (bit(word, x(q)) << z(q)),
            Gate::Cz(a, b) => word ^ (bit(word, x(b)) << z(a)) ^ (bit(word, x(a)) << z(b)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::Sdg(q) => write!(f, "SDG {q}"),
            Gate::Cz(a, b) => write!(f, "CZ {a} {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub struct GateStats {
    pub n_h: usize,
    pub n_s: usize,
    pub n_cz: usize,
    pub depth: usize,
}

impl GateStats {
    pub fn total(&self) -> usize {
        self.n_h + self.n_s + self.n_cz
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SynthOptions {
    /// Pack CZ gates with the edge colouring; otherwise one CZ per layer.
    pub optimize_depth: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            optimize_depth: true,
        }
    }
}

impl CliffordCircuit {
    pub fn new(n: usize, layers: Vec<Vec<Gate>>) -> Result<Self> {
        if n == 0 {
            return Err(WirecutError::invalid("circuit needs at least one qubit"));
        }
        for layer in &layers {
            let mut used = vec![false; n + 1];
            for g in layer {
                if let Gate::Cz(a, b) = g {
                    if a == b {
                        return Err(WirecutError::invalid(format!("CZ on a single qubit {a}")));
                    }
                }
                for q in g.qubits() {
                    if q == 0 || q > n {
                        return Err(WirecutError::invalid(format!("qubit {q} outside 1..={n}")));
                    }
                    if used[q] {
                        return Err(WirecutError::invalid(format!(
                            "qubit {q} used twice in one layer"
                        )));
                    }
                    used[q] = true;
                }
            }
        }
        let layers = layers.into_iter().filter(|l| !l.is_empty()).collect();
        Ok(CliffordCircuit { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    /// Gates in time order.
    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn stats(&self) -> GateStats {
        gate_stats(self)
    }

    /// Dense unitary, built column by column on state vectors.
    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(WirecutError::limit(format!(
                "dense circuits are limited to {MAX_DENSE_QUBITS} qubits"
            )));
        }
        let dim = 1usize << self.n;
        let mut u = linalg::identity(dim);
        for j in 0..dim {
            let mut col: Vec<Complex64> = u.column(j).iter().copied().collect();
            self.apply_to_state(&mut col);
            u.set_column(j, &linalg::CVector::from_vec(col));
        }
        Ok(u)
    }

    /// Applies the circuit to a state vector of matching width.
    pub fn apply_to_state(&self, state: &mut [Complex64]) {
        let h = linalg::hadamard();
        let sdg = linalg::s_dagger();
        for g in self.gates() {
            match *g {
                Gate::H(q) => linalg::apply_gate(state, &h, &[q - 1], self.n),
                Gate::Sdg(q) => linalg::apply_gate(state, &sdg, &[q - 1], self.n),
                Gate::Cz(a, b) => linalg::apply_cz(state, a - 1, b - 1, self.n),
            }
        }
    }

    /// Binary image of `U† P U` (phase dropped).
    pub fn conjugate_pauli(&self, p: &PauliString) -> Result<PauliString> {
        if p.n() != self.n {
            return Err(WirecutError::invalid(
                "Pauli width differs from circuit width",
            ));
        }
        let mut w = p.to_word();
        for g in self.gates().collect::<Vec<_>>().into_iter().rev() {
            w = g.conjugate_word(w, self.n);
        }
        PauliString::from_word(self.n, w)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {}\n", self.n);
        let body: Vec<String> = self
            .layers
            .iter()
            .map(|l| l.iter().map(|g| format!("{g}\n")).collect::<String>())
            .collect();
        out.push_str(&body.join("\n"));
        out
    }
}

impl fmt::Display for CliffordCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for CliffordCircuit {
    type Err = WirecutError;

    fn from_str(s: &str) -> Result<Self> {
        parse_circuit(s)
    }
}

/// Parses the line format `H 1`, `SDG 3`, `CZ 1 2`. A blank line closes the
/// current layer, as does a gate touching a qubit already used in it. The
/// width comes from a `# qubits n` header or the largest index.
pub fn parse_circuit(text: &str) -> Result<CliffordCircuit> {
    let mut declared: Option<usize> = None;
    let mut layers: Vec<Vec<Gate>> = vec![Vec::new()];
    let mut max_q = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            if !layers.last().unwrap().is_empty() {
                layers.push(Vec::new());
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("qubits") {
                let n = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| {
                    WirecutError::Parse(format!("line {}: bad qubit header", lineno + 1))
                })?;
                declared = Some(n);
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |i: usize| -> Result<usize> {
            toks.get(i).and_then(|t| t.parse().ok()).ok_or_else(|| {
                WirecutError::Parse(format!(
                    "line {}: expected qubit index in {line:?}",
                    lineno + 1
                ))
            })
        };
        let gate = match (toks[0].to_ascii_uppercase().as_str(), toks.len()) {
            ("H", 2) => Gate::H(num(1)?),
            ("SDG", 2) => Gate::Sdg(num(1)?),
            ("CZ", 3) => Gate::Cz(num(1)?, num(2)?),
            _ => {
                return Err(WirecutError::Parse(format!(
                    "line {}: unrecognised gate {line:?}",
                    lineno + 1
                )))
            }
        };
        let qs = gate.qubits();
        max_q = max_q.max(*qs.iter().max().unwrap());
        let current = layers.last().unwrap();
        if current
            .iter()
            .any(|g| g.qubits().iter().any(|q| qs.contains(q)))
        {
            layers.push(Vec::new());
        }
        layers.last_mut().unwrap().push(gate);
    }
    let n = declared.unwrap_or(max_q);
    CliffordCircuit::new(n, layers).map_err(|e| match e {
        WirecutError::InvalidInput(m) => WirecutError::Parse(m),
        other => other,
    })
}

pub fn gate_stats(u: &CliffordCircuit) -> GateStats {
    let mut s = GateStats {
        depth: u.layers.len(),
        ..Default::default()
    };
    for g in u.gates() {
        match g {
            Gate::H(_) => s.n_h += 1,
            Gate::Sdg(_) => s.n_s += 1,
            Gate::Cz(..) => s.n_cz += 1,
        }
    }
    s
}

/// Single-gate action on a binary vector `(z_1..z_n, x_1..x_n)`.
pub fn symplectic_conjugate(gate: Gate, b: &[bool]) -> Result<Vec<bool>> {
    let p = phi(b)?;
    let n = p.n();
    if gate.qubits().iter().any(|&q| q == 0 || q > n) {
        return Err(WirecutError::invalid(format!("{gate} outside {n} qubits")));
    }
    if let Gate::Cz(a, c) = gate {
        if a == c {
            return Err(WirecutError::invalid("CZ on a single qubit"));
        }
    }
    let w = gate.conjugate_word(p.to_word(), n);
    Ok(phi_inv(&PauliString::from_word(n, w)?))
}

/// Dense check that `U† P U = ±D`, `D ∈ {I,Z}^{⊗n}`, for every member.
/// Returns false on any mismatch or when the width exceeds the dense limit.
pub fn verify_diagonalizes(u: &CliffordCircuit, family: &CommutingFamily) -> bool {
    let Ok(dense) = u.to_dense() else {
        return false;
    };
    family
        .members
        .iter()
        .all(|p| p.n() == u.n && diagonalizes_member(&dense, p, 1e-10))
}

/// Checks through the columns `u_j` of `U`: each must satisfy
/// `P u_j = λ_j u_j` with `λ_j = s·(−1)^{d·j}` for one sign `s` and one
/// mask `d`. Since `U` is unitary this is `U† P U = s·Z^d`, and the
/// Euclidean residual bounds every entry of `U† P U − s·Z^d`.
fn diagonalizes_member(u: &CMatrix, p: &PauliString, tol: f64) -> bool {
    let dim = u.nrows();
    let n = p.n();
    let mut lambdas = Vec::with_capacity(dim);
    for j in 0..dim {
        let col = u.column(j);
        let mut residual_sq = 0.0;
        let mut lambda = Complex64::new(0.0, 0.0);
        let mut pcol = vec![Complex64::new(0.0, 0.0); dim];
        for (r, slot) in pcol.iter_mut().enumerate() {
            let (c, v) = p.row_entry(r);
            *slot = v * col[c];
        }
        for r in 0..dim {
            lambda += col[r].conj() * pcol[r];
        }
        for r in 0..dim {
            residual_sq += (pcol[r] - lambda * col[r]).norm_sqr();
        }
        if residual_sq.sqrt() > tol {
            return false;
        }
        lambdas.push(lambda);
    }
    let s = lambdas[0];
    if (s.re.abs() - 1.0).abs() > tol || s.im.abs() > tol {
        return false;
    }
    let mut d = 0usize;
    for k in 0..n {
        let idx = 1usize << (n - 1 - k);
        let ratio = lambdas[idx] * s;
        if (ratio.re + 1.0).abs() < tol {
            d |= idx;
        }
    }
    lambdas.iter().enumerate().all(|(j, l)| {
        let sign = if (d & j).count_ones() % 2 == 1 { -s } else { s };
        (l - sign).norm() < tol
    })
}

/// Binary-only check: every member maps into `{I,Z}^{⊗n}`.
pub fn verify_diagonalizes_symplectic(u: &CliffordCircuit, family: &CommutingFamily) -> bool {
    family.members.iter().all(|p| {
        u.conjugate_pauli(p)
            .map(|q| q.is_diagonal())
            .unwrap_or(false)
    })
}

pub fn synthesize(family: &CommutingFamily) -> Result<CliffordCircuit> {
    synthesize_with(family, SynthOptions::default())
}

/// Builds `U = CZ·S†·H^{⊗n}` from the generator matrix
/// `M = (C; X)` by column elimination to `X = I`.
pub fn synthesize_with(family: &CommutingFamily, opts: SynthOptions) -> Result<CliffordCircuit> {
    let n = family.n();
    if n == 0 || family.generators.len() != n {
        return Err(WirecutError::invalid("family needs n generators"));
    }
    let words: Vec<u64> = family.generators.iter().map(|g| g.to_word()).collect();
    if rank_of_words(&words) != n {
        return Err(WirecutError::invalid("generators are linearly dependent"));
    }
    let c = symmetric_block(n, &words)?;

    let mut layers = vec![(1..=n).map(Gate::H).collect::<Vec<_>>()];
    let s_layer: Vec<Gate> = (0..n)
        .filter(|&k| c.get(k, k))
        .map(|k| Gate::Sdg(k + 1))
        .collect();
    layers.push(s_layer);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|l| (l + 1..n).map(move |m| (l, m)))
        .filter(|&(l, m)| c.get(l, m))
        .map(|(l, m)| (l + 1, m + 1))
        .collect();
    if opts.optimize_depth {
        for layer in edge_color_cz(&pairs, n)? {
            layers.push(layer.into_iter().map(|(a, b)| Gate::Cz(a, b)).collect());
        }
    } else {
        layers.extend(pairs.into_iter().map(|(a, b)| vec![Gate::Cz(a, b)]));
    }
    CliffordCircuit::new(n, layers)
}

/// Column elimination of the `2n × n` generator matrix; returns the z-block
/// once the x-block is the identity.
fn symmetric_block(n: usize, words: &[u64]) -> Result<BinaryMatrix> {
    let mut m = BinaryMatrix::from_columns(2 * n, words);
    for j in 0..n {
        let row = n + j;
        let pivot = (j..n).find(|&col| m.get(row, col)).ok_or_else(|| {
            WirecutError::SynthesisFailure(
                "x-block is not full rank; the family overlaps the {I,Z} family".into(),
            )
        })?;
        m.swap_cols(j, pivot);
        for col in 0..n {
            if col != j && m.get(row, col) {
                m.add_col(j, col);
            }
        }
    }
    let c = m.row_block(0, n);
    if !c.is_symmetric() {
        return Err(WirecutError::SynthesisFailure(
            "z-block is not symmetric; generators do not commute".into(),
        ));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::generate_partition;
    use crate::linalg::max_abs_diff;
    use crate::pauli::multiply;
    use proptest::prelude::*;

    fn fam(gens: &[&str]) -> CommutingFamily {
        CommutingFamily::from_generators(gens.iter().map(|g| g.parse().unwrap()).collect()).unwrap()
    }

    #[test]
    fn single_qubit_circuits() {
        let u1 = synthesize(&fam(&["X"])).unwrap();
        assert_eq!(u1.gates().copied().collect::<Vec<_>>(), vec![Gate::H(1)]);
        let u2 = synthesize(&fam(&["Y"])).unwrap();
        assert_eq!(
            u2.gates().copied().collect::<Vec<_>>(),
            vec![Gate::H(1), Gate::Sdg(1)]
        );
        assert!(verify_diagonalizes(&u1, &fam(&["X"])));
        assert!(verify_diagonalizes(&u2, &fam(&["Y"])));
    }

    #[test]
    fn h_does_not_diagonalize_y() {
        let h = CliffordCircuit::new(1, vec![vec![Gate::H(1)]]).unwrap();
        assert!(!verify_diagonalizes(&h, &fam(&["Y"])));
        assert!(!verify_diagonalizes_symplectic(&h, &fam(&["Y"])));
    }

    #[test]
    fn two_qubit_reference_circuit() {
        let u = synthesize(&fam(&["YZ", "ZX"])).unwrap();
        assert_eq!(
            u.layers(),
            &[
                vec![Gate::H(1), Gate::H(2)],
                vec![Gate::Sdg(1)],
                vec![Gate::Cz(1, 2)]
            ]
        );
        assert!(verify_diagonalizes(&u, &fam(&["YZ", "ZX"])));
    }

    #[test]
    fn z_family_fails_synthesis() {
        let err = synthesize(&fam(&["ZI", "IZ"])).unwrap_err();
        assert!(matches!(err, WirecutError::SynthesisFailure(_)));
    }

    #[test]
    fn stats_examples() {
        let h = CliffordCircuit::new(1, vec![vec![Gate::H(1)]]).unwrap();
        assert_eq!(
            gate_stats(&h),
            GateStats {
                n_h: 1,
                n_s: 0,
                n_cz: 0,
                depth: 1
            }
        );
        let hs = CliffordCircuit::new(1, vec![vec![Gate::H(1)], vec![Gate::Sdg(1)]]).unwrap();
        assert_eq!(
            gate_stats(&hs),
            GateStats {
                n_h: 1,
                n_s: 1,
                n_cz: 0,
                depth: 2
            }
        );
    }

    #[test]
    fn gate_actions_on_vectors() {
        assert_eq!(
            symplectic_conjugate(Gate::H(1), &[true, false]).unwrap(),
            vec![false, true]
        );
        assert_eq!(
            symplectic_conjugate(Gate::Sdg(1), &[false, true]).unwrap(),
            vec![true, true]
        );
        let xi = phi_inv(&"XI".parse().unwrap());
        let out = symplectic_conjugate(Gate::Cz(1, 2), &xi).unwrap();
        assert_eq!(phi(&out).unwrap().to_string(), "XZ");
        assert!(symplectic_conjugate(Gate::H(3), &xi).is_err());
        // dense oracle for the CZ case
        let cz = linalg::embed(
            &CMatrix::from_diagonal(&linalg::CVector::from_column_slice(&[
                linalg::ONE,
                linalg::ONE,
                linalg::ONE,
                -linalg::ONE,
            ])),
            &[0, 1],
            2,
        );
        let xi_d = phi(&xi).unwrap().to_dense().unwrap();
        let xz_d = phi(&out).unwrap().to_dense().unwrap();
        assert!(max_abs_diff(&(&cz * xi_d * &cz), &xz_d) < 1e-12);
    }

    #[test]
    fn text_roundtrip() {
        let u = synthesize(&fam(&["YZZ", "ZYI", "ZIX"])).unwrap();
        let back = parse_circuit(&u.to_text()).unwrap();
        assert_eq!(back, u);
        let loose = parse_circuit("H 1\nSDG 1\nCZ 1 2\n").unwrap();
        assert_eq!(loose.n(), 2);
        assert_eq!(loose.layers().len(), 3);
        assert!(parse_circuit("T 1").is_err());
        assert!(parse_circuit("CZ 1 1").is_err());
        assert!(parse_circuit("H x").is_err());
    }

    #[test]
    fn synthesis_bounds_small_n() {
        for n in 1..=5 {
            let part = generate_partition(n).unwrap();
            for f in &part.families[..part.families.len() - 1] {
                let u = synthesize(f).unwrap();
                let s = u.stats();
                assert!(verify_diagonalizes(&u, f));
                assert!(verify_diagonalizes_symplectic(&u, f));
                assert_eq!(s.n_h, n);
                assert!(s.n_s <= n && s.n_cz <= n * (n - 1) / 2 && s.depth <= n + 2);
            }
        }
    }

    #[test]
    fn unoptimised_layout_has_one_cz_per_layer() {
        let f = fam(&["YZZ", "ZYI", "ZIX"]);
        let u = synthesize_with(
            &f,
            SynthOptions {
                optimize_depth: false,
            },
        )
        .unwrap();
        let s = u.stats();
        assert_eq!(s.depth, 2 + s.n_cz);
        assert!(verify_diagonalizes(&u, &f));
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        prop_oneof![
            (1..=n).prop_map(Gate::H),
            (1..=n).prop_map(Gate::Sdg),
            (1..=n, 1..n).prop_map(move |(a, d)| Gate::Cz(a, (a - 1 + d) % n + 1)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn symplectic_matches_dense_conjugation(
            gates in proptest::collection::vec(arb_gate(3), 0..12),
            z in 0u32..8, x in 0u32..8,
        ) {
            let layers: Vec<Vec<Gate>> = gates.into_iter().map(|g| vec![g]).collect();
            let u = CliffordCircuit::new(3, layers).unwrap();
            let p = PauliString::new(3, z, x).unwrap();
            let q = u.conjugate_pauli(&p).unwrap();
            let ud = u.to_dense().unwrap();
            let conj = ud.adjoint() * p.to_dense().unwrap() * &ud;
            let qd = q.to_dense().unwrap();
            let plus = max_abs_diff(&conj, &qd) < 1e-10;
            let minus = max_abs_diff(&conj, &(-qd)) < 1e-10;
            prop_assert!(plus || minus);
            // conjugation is multiplicative, so products map to products
            let sq = multiply(&q, &q).unwrap();
            prop_assert!(sq.pauli.is_identity());
        }
    }
}
