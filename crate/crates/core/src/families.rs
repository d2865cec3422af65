//! Partition of the non-identity Pauli strings into `2^n + 1` maximally
//! commuting families, one per mutually unbiased basis.
//!
//! Family `a ∈ GF(2^n)` is `{(M_a x, x) : x ≠ 0}` where `M_a` is the trace
//! form `Tr(a·t^{i+j})`; the `{I,Z}` family closes the partition.

use serde::{Deserialize, Serialize};

use crate::binmat::{rank_of_words, reduced_basis};
use crate::error::{Result, WirecutError};
use crate::gf2n::{self, Field};
use crate::linalg::{self, CMatrix};
use crate::pauli::{symplectic_product, PauliString};

pub const MAX_PARTITION_QUBITS: usize = gf2n::MAX_DEGREE;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutingFamily {
    pub generators: Vec<PauliString>,
    pub members: Vec<PauliString>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyPartition {
    pub n: usize,
    pub families: Vec<CommutingFamily>,
}

impl CommutingFamily {
    pub fn from_generators(generators: Vec<PauliString>) -> Result<Self> {
        let members = expand_family(&generators)?;
        Ok(CommutingFamily {
            generators,
            members,
        })
    }

    pub fn n(&self) -> usize {
        self.generators.first().map_or(0, |g| g.n())
    }

    pub fn is_z_family(&self) -> bool {
        self.members.iter().all(|p| p.is_diagonal())
    }

    /// Checks size, commutation, closure and generator consistency.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || self.generators.len() != n {
            return Err(WirecutError::invalid("family needs exactly n generators"));
        }
        let expanded = expand_family(&self.generators)?;
        let mut members = self.members.clone();
        sort_members(&mut members);
        if expanded != members {
            return Err(WirecutError::invalid(
                "members differ from the span of the generators",
            ));
        }
        Ok(())
    }
}

impl FamilyPartition {
    /// Checks every partition invariant: family count and sizes, internal
    /// commutation, disjointness, coverage, and the `{I,Z}` family last.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.families.len() != (1 << n) + 1 {
            return Err(WirecutError::invalid(format!(
                "expected {} families, found {}",
                (1 << n) + 1,
                self.families.len()
            )));
        }
        let mut seen = vec![false; 1usize << (2 * n)];
        for fam in &self.families {
            if fam.n() != n {
                return Err(WirecutError::invalid("family width differs from partition"));
            }
            fam.validate()?;
            for p in &fam.members {
                let w = p.to_word() as usize;
                if seen[w] {
                    return Err(WirecutError::invalid(format!(
                        "{p} appears in two families"
                    )));
                }
                seen[w] = true;
            }
        }
        if seen.iter().skip(1).any(|s| !s) {
            return Err(WirecutError::invalid(
                "families do not cover all Pauli strings",
            ));
        }
        let last = self.families.last().expect("nonempty");
        if !last.is_z_family() {
            return Err(WirecutError::invalid(
                "last family must be the {I,Z} family",
            ));
        }
        if self.families[..self.families.len() - 1]
            .iter()
            .any(|f| f.members.iter().any(|p| p.is_diagonal()))
        {
            return Err(WirecutError::invalid(
                "a non-final family contains a diagonal string",
            ));
        }
        Ok(())
    }
}

pub fn generate_partition(n: usize) -> Result<FamilyPartition> {
    if n == 0 || n > MAX_PARTITION_QUBITS {
        return Err(WirecutError::limit(format!(
            "partitions are available for 1 ≤ n ≤ {MAX_PARTITION_QUBITS}, got {n}"
        )));
    }
    let field = Field::new(n)?;
    let mut families = Vec::with_capacity((1 << n) + 1);
    for a in 0..field.order() {
        let cols = field.trace_form_columns(a);
        let members: Vec<PauliString> = (1u32..(1 << n))
            .map(|x| {
                let z = (0..n)
                    .filter(|j| (x >> j) & 1 == 1)
                    .fold(0u32, |acc, j| acc ^ cols[j]);
                PauliString::new(n, z, x).expect("in range")
            })
            .collect();
        families.push(family_from_members(members)?);
    }
    families.sort_by_key(|f| f.members[0].lex_key());
    let z_members = (1u32..(1 << n))
        .map(|z| PauliString::new(n, z, 0).expect("in range"))
        .collect();
    families.push(family_from_members(z_members)?);
    Ok(FamilyPartition { n, families })
}

fn family_from_members(mut members: Vec<PauliString>) -> Result<CommutingFamily> {
    sort_members(&mut members);
    let generators = extract_generators(&members)?;
    Ok(CommutingFamily {
        generators,
        members,
    })
}

fn sort_members(members: &mut [PauliString]) {
    members.sort_by_cached_key(|p| p.lex_key());
}

/// Canonical generator basis: reduced echelon form with pivots taken from
/// the x-bits first (qubit order), then the z-bits.
pub fn extract_generators(members: &[PauliString]) -> Result<Vec<PauliString>> {
    let first = members
        .first()
        .ok_or_else(|| WirecutError::invalid("empty family"))?;
    let n = first.n();
    if members.iter().any(|p| p.n() != n) {
        return Err(WirecutError::invalid("mixed widths in family"));
    }
    if members.len() != (1 << n) - 1 {
        return Err(WirecutError::invalid(format!(
            "a maximal family on {n} qubits has {} members, got {}",
            (1 << n) - 1,
            members.len()
        )));
    }
    if members.iter().any(|p| p.is_identity()) {
        return Err(WirecutError::invalid("family contains the identity"));
    }
    check_pairwise_commuting(members)?;
    let words: Vec<u64> = members.iter().map(|p| p.to_word()).collect();
    let mut set = words.clone();
    set.sort_unstable();
    set.dedup();
    if set.len() != words.len() {
        return Err(WirecutError::invalid("duplicate members"));
    }
    for &a in &words {
        for &b in &words {
            if a != b && set.binary_search(&(a ^ b)).is_err() {
                return Err(WirecutError::invalid("family is not closed under products"));
            }
        }
    }
    let priority: Vec<usize> = (n..2 * n).chain(0..n).collect();
    let basis = reduced_basis(&words, &priority);
    debug_assert_eq!(basis.len(), n);
    basis
        .into_iter()
        .map(|w| PauliString::from_word(n, w))
        .collect()
}

/// All non-identity products of the generators, phases dropped, sorted by
/// binary vector.
pub fn expand_family(generators: &[PauliString]) -> Result<Vec<PauliString>> {
    let first = generators
        .first()
        .ok_or_else(|| WirecutError::invalid("no generators"))?;
    let n = first.n();
    if generators.iter().any(|g| g.n() != n) {
        return Err(WirecutError::invalid("mixed widths in generators"));
    }
    if generators.len() > 20 {
        return Err(WirecutError::limit("too many generators to expand"));
    }
    let words: Vec<u64> = generators.iter().map(|g| g.to_word()).collect();
    if rank_of_words(&words) != words.len() {
        return Err(WirecutError::invalid("generators are linearly dependent"));
    }
    check_pairwise_commuting(generators)?;
    let k = generators.len();
    let mut members: Vec<PauliString> = (1u64..(1 << k))
        .map(|c| {
            let w = (0..k)
                .filter(|j| (c >> j) & 1 == 1)
                .fold(0u64, |acc, j| acc ^ words[j]);
            PauliString::from_word(n, w)
        })
        .collect::<Result<_>>()?;
    sort_members(&mut members);
    Ok(members)
}

fn check_pairwise_commuting(ps: &[PauliString]) -> Result<()> {
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            if symplectic_product(p, q) != 0 {
                return Err(WirecutError::invalid(format!("{p} and {q} anticommute")));
            }
        }
    }
    Ok(())
}

/// Largest deviation of `|⟨φ_i|ψ_j⟩|²` from `2^{-n}` over all pairs of
/// distinct bases (columns of the given unitaries).
pub fn mub_overlap_check(bases: &[CMatrix]) -> Result<f64> {
    let Some(first) = bases.first() else {
        return Ok(0.0);
    };
    let dim = first.nrows();
    for b in bases {
        if b.nrows() != dim || !linalg::is_unitary(b, 1e-10) {
            return Err(WirecutError::invalid("basis matrix is not unitary"));
        }
    }
    let target = 1.0 / dim as f64;
    let mut worst = 0.0f64;
    for (i, a) in bases.iter().enumerate() {
        for b in &bases[i + 1..] {
            let overlaps = a.adjoint() * b;
            for z in overlaps.iter() {
                worst = worst.max((z.norm_sqr() - target).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{commutes, multiply};
    use std::collections::HashSet;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn names(f: &CommutingFamily) -> HashSet<String> {
        f.members.iter().map(|m| m.to_string()).collect()
    }

    fn set(items: &[&str]) -> HashSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_qubit_partition() {
        let part = generate_partition(1).unwrap();
        let got: Vec<String> = part
            .families
            .iter()
            .map(|f| f.members[0].to_string())
            .collect();
        assert_eq!(got, vec!["X", "Y", "Z"]);
        part.validate().unwrap();
    }

    #[test]
    fn two_qubit_partition_matches_reference_sets() {
        let part = generate_partition(2).unwrap();
        part.validate().unwrap();
        let got: Vec<HashSet<String>> = part.families.iter().map(names).collect();
        let expected = [
            set(&["XI", "IX", "XX"]),
            set(&["YZ", "ZX", "XY"]),
            set(&["XZ", "ZY", "YX"]),
            set(&["YI", "IY", "YY"]),
        ];
        for e in &expected {
            assert!(got[..4].contains(e), "missing {e:?}");
        }
        assert_eq!(got[4], set(&["ZI", "IZ", "ZZ"]));
    }

    #[test]
    fn generators_are_canonical() {
        let members = vec![p("XI"), p("IX"), p("XX")];
        let g = extract_generators(&members).unwrap();
        assert_eq!(g, vec![p("XI"), p("IX")]);
        let z = extract_generators(&[p("ZI"), p("IZ"), p("ZZ")]).unwrap();
        assert_eq!(z, vec![p("ZI"), p("IZ")]);
        assert_eq!(extract_generators(&[p("X")]).unwrap(), vec![p("X")]);
        let g = extract_generators(&[p("YZ"), p("ZX"), p("XY")]).unwrap();
        assert_eq!(expand_family(&g).unwrap().len(), 3);
        assert_eq!(
            names(&CommutingFamily::from_generators(g).unwrap()),
            set(&["YZ", "ZX", "XY"])
        );
    }

    #[test]
    fn expand_examples() {
        let e = expand_family(&[p("XI"), p("IX")]).unwrap();
        assert_eq!(
            e.iter().map(|x| x.to_string()).collect::<HashSet<_>>(),
            set(&["XI", "IX", "XX"])
        );
        let e = expand_family(&[p("YZ"), p("ZX")]).unwrap();
        assert_eq!(
            e.iter().map(|x| x.to_string()).collect::<HashSet<_>>(),
            set(&["YZ", "ZX", "XY"])
        );
        // YZ·ZX is XY up to a phase
        let prod = multiply(&p("YZ"), &p("ZX")).unwrap();
        assert_eq!(prod.pauli, p("XY"));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            expand_family(&[p("XI"), p("XI")]),
            Err(WirecutError::InvalidInput(_))
        ));
        assert!(expand_family(&[p("XI"), p("ZI")]).is_err());
        assert!(extract_generators(&[p("XI"), p("IX")]).is_err());
        assert!(extract_generators(&[p("XI"), p("ZI"), p("YI")]).is_err());
        assert!(matches!(
            generate_partition(13),
            Err(WirecutError::ResourceLimit(_))
        ));
    }

    /// Independent oracle: dense-matrix commutation and product closure.
    fn dense_check(part: &FamilyPartition) {
        let n = part.n;
        let mut all = HashSet::new();
        for fam in &part.families {
            assert_eq!(fam.members.len(), (1 << n) - 1);
            let dense: Vec<CMatrix> = fam.members.iter().map(|m| m.to_dense().unwrap()).collect();
            for a in &dense {
                for b in &dense {
                    let comm = a * b - b * a;
                    assert!(comm.iter().all(|z| z.norm() < 1e-12));
                    // product proportional to a member or the identity
                    let prod = a * b;
                    let tr_id = prod.trace().norm();
                    let hit = tr_id > 1e-9
                        || dense
                            .iter()
                            .any(|c| (c * &prod).trace().norm() > (1 << n) as f64 - 1e-9);
                    assert!(hit);
                }
            }
            for m in &fam.members {
                assert!(all.insert(*m), "duplicate {m}");
            }
        }
        assert_eq!(all.len(), (1 << (2 * n)) - 1);
    }

    #[test]
    fn dense_oracle_small_n() {
        for n in 1..=3 {
            dense_check(&generate_partition(n).unwrap());
        }
    }

    #[test]
    fn partitions_validate_up_to_eight_qubits() {
        for n in 1..=8 {
            let part = generate_partition(n).unwrap();
            part.validate().unwrap();
            for fam in &part.families {
                assert_eq!(
                    expand_family(&extract_generators(&fam.members).unwrap()).unwrap(),
                    fam.members
                );
            }
        }
    }

    #[test]
    fn non_final_generators_have_identity_x_block() {
        for n in 1..=6 {
            let part = generate_partition(n).unwrap();
            for fam in &part.families[..part.families.len() - 1] {
                for (k, g) in fam.generators.iter().enumerate() {
                    assert_eq!(g.x_mask(), 1 << k);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_partition(5).unwrap(),
            generate_partition(5).unwrap()
        );
    }

    #[test]
    fn overlap_examples() {
        let h = linalg::hadamard();
        let sh = linalg::s_gate() * &h;
        let id = linalg::identity(2);
        assert!(mub_overlap_check(&[h.clone(), sh, id]).unwrap() < 1e-12);
        let same = mub_overlap_check(&[h.clone(), h]).unwrap();
        assert!((same - 0.5).abs() < 1e-12);
        let bad = CMatrix::from_element(2, 2, linalg::ONE);
        assert!(mub_overlap_check(&[bad]).is_err());
    }

    #[test]
    fn single_qubit_commutation_sanity() {
        assert!(!commutes(&p("X"), &p("Y")).unwrap());
    }
}
