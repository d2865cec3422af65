//! Reference generator tables and diagonalizing circuits for n ≤ 4.

use crate::clifford::{parse_circuit, CliffordCircuit};
use crate::error::{Result, WirecutError};
use crate::families::CommutingFamily;
use crate::pauli::PauliString;
use serde::Deserialize;

pub const MAX_FIXTURE_QUBITS: usize = 4;

const GENERATORS: [&str; 4] = [
    include_str!("../fixtures/generators_n1.json"),
    include_str!("../fixtures/generators_n2.json"),
    include_str!("../fixtures/generators_n3.json"),
    include_str!("../fixtures/generators_n4.json"),
];

const CIRCUITS: [&[&str]; 4] = [
    &[
        include_str!("../fixtures/circuit_n1_u1.txt"),
        include_str!("../fixtures/circuit_n1_u2.txt"),
    ],
    &[
        include_str!("../fixtures/circuit_n2_u1.txt"),
        include_str!("../fixtures/circuit_n2_u2.txt"),
        include_str!("../fixtures/circuit_n2_u3.txt"),
        include_str!("../fixtures/circuit_n2_u4.txt"),
    ],
    &[
        include_str!("../fixtures/circuit_n3_u1.txt"),
        include_str!("../fixtures/circuit_n3_u2.txt"),
        include_str!("../fixtures/circuit_n3_u3.txt"),
        include_str!("../fixtures/circuit_n3_u4.txt"),
        include_str!("../fixtures/circuit_n3_u5.txt"),
        include_str!("../fixtures/circuit_n3_u6.txt"),
        include_str!("../fixtures/circuit_n3_u7.txt"),
        include_str!("../fixtures/circuit_n3_u8.txt"),
    ],
    &[
        include_str!("../fixtures/circuit_n4_u1.txt"),
        include_str!("../fixtures/circuit_n4_u2.txt"),
        include_str!("../fixtures/circuit_n4_u3.txt"),
        include_str!("../fixtures/circuit_n4_u4.txt"),
        include_str!("../fixtures/circuit_n4_u5.txt"),
        include_str!("../fixtures/circuit_n4_u6.txt"),
        include_str!("../fixtures/circuit_n4_u7.txt"),
        include_str!("../fixtures/circuit_n4_u8.txt"),
        include_str!("../fixtures/circuit_n4_u9.txt"),
        include_str!("../fixtures/circuit_n4_u10.txt"),
        include_str!("../fixtures/circuit_n4_u11.txt"),
        include_str!("../fixtures/circuit_n4_u12.txt"),
        include_str!("../fixtures/circuit_n4_u13.txt"),
        include_str!("../fixtures/circuit_n4_u14.txt"),
        include_str!("../fixtures/circuit_n4_u15.txt"),
        include_str!("../fixtures/circuit_n4_u16.txt"),
    ],
];

#[derive(Deserialize)]
struct GeneratorTable {
    n: usize,
    families: Vec<GeneratorEntry>,
}

#[derive(Deserialize)]
struct GeneratorEntry {
    generators: Vec<PauliString>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_FIXTURE_QUBITS {
        return Err(WirecutError::invalid(format!(
            "reference tables cover 1 ≤ n ≤ {MAX_FIXTURE_QUBITS}"
        )));
    }
    Ok(())
}

/// The `2^n` reference families (the all-Z family is not tabulated).
pub fn reference_families(n: usize) -> Result<Vec<CommutingFamily>> {
    check_n(n)?;
    let table: GeneratorTable = serde_json::from_str(GENERATORS[n - 1])?;
    if table.n != n || table.families.len() != 1 << n {
        return Err(WirecutError::Parse(format!(
            "generator table for n = {n} is malformed"
        )));
    }
    table
        .families
        .into_iter()
        .map(|e| CommutingFamily::from_generators(e.generators))
        .collect()
}

/// Reference circuits `U_1 … U_{2^n}`, aligned with [`reference_families`].
pub fn reference_circuits(n: usize) -> Result<Vec<CliffordCircuit>> {
    check_n(n)?;
    CIRCUITS[n - 1].iter().map(|t| parse_circuit(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for n in 1..=4 {
            assert_eq!(reference_families(n).unwrap().len(), 1 << n);
            let cs = reference_circuits(n).unwrap();
            assert_eq!(cs.len(), 1 << n);
            assert!(cs.iter().all(|c| c.n() == n));
        }
        assert!(reference_families(5).is_err());
    }
}
