use std::collections::BTreeSet;

use wirecut::clifford::{synthesize, verify_diagonalizes, verify_diagonalizes_symplectic};
use wirecut::families::{expand_family, generate_partition, FamilyPartition};
use wirecut::fixtures::{reference_circuits, reference_families};
use wirecut::CommutingFamily;

fn member_sets(fams: &[CommutingFamily]) -> BTreeSet<Vec<String>> {
    fams.iter()
        .map(|f| {
            let mut m: Vec<String> = f.members.iter().map(|p| p.to_string()).collect();
            m.sort();
            m
        })
        .collect()
}

#[test]
fn reference_families_form_a_partition() {
    for n in 1..=4 {
        let mut families = reference_families(n).unwrap();
        let z = generate_partition(n).unwrap().families.pop().unwrap();
        assert!(z.is_z_family());
        families.push(z);
        FamilyPartition { n, families }.validate().unwrap();
    }
}

#[test]
fn generated_partition_agrees_for_small_n() {
    for n in 1..=2 {
        let ours = generate_partition(n).unwrap();
        assert_eq!(
            member_sets(&ours.families[..1 << n]),
            member_sets(&reference_families(n).unwrap())
        );
    }
}

#[test]
fn reference_circuits_diagonalize_both_ways() {
    for n in 1..=4 {
        for (f, u) in reference_families(n)
            .unwrap()
            .iter()
            .zip(reference_circuits(n).unwrap())
        {
            assert_eq!(expand_family(&f.generators).unwrap(), f.members);
            assert!(verify_diagonalizes(&u, f));
            assert!(verify_diagonalizes_symplectic(&u, f));
            let s = u.stats();
            assert_eq!(s.n_h, n);
            assert!(s.n_s <= n && s.n_cz <= n * (n - 1) / 2);
        }
    }
}

#[test]
fn synthesis_from_reference_generators() {
    let mut identical = Vec::new();
    for n in 1..=4 {
        let refs = reference_families(n).unwrap();
        let circuits = reference_circuits(n).unwrap();
        let mut equal = 0;
        for (f, c) in refs.iter().zip(&circuits) {
            let u = synthesize(f).unwrap();
            assert!(verify_diagonalizes(&u, f));
            assert!(u.stats().depth <= n + 2);
            equal += usize::from(u.gates().eq(c.gates()));
        }
        identical.push(equal);
    }
    // sequences are forced for n ≤ 2; larger n differ only in CZ placement
    assert_eq!(identical[..2], [2, 4]);
}

#[test]
fn reference_cz_count_example() {
    let u3 = &reference_circuits(4).unwrap()[2];
    assert_eq!(u3.stats().n_cz, 5);
    assert_eq!(u3.stats().n_s, 2);
}
