//! Wire cutting with measure-and-prepare quasiprobability decompositions.

pub mod binmat;
pub mod channel;
pub mod clifford;
pub mod coloring;
pub mod cost;
pub mod decomp;
pub mod error;
pub mod estimator;
pub mod families;
pub mod fixtures;
pub mod gf2n;
pub mod linalg;
pub mod par;
pub mod pauli;

pub use channel::{MPChannel, Term, TransferMatrix};
pub use clifford::{CliffordCircuit, Gate, GateStats};
pub use decomp::{Decomposition, Method};
pub use error::{Result, WirecutError};
pub use estimator::{CutLocation, CutSpec, EstimateReport, LayeredCircuit, PostProcess};
pub use families::{CommutingFamily, FamilyPartition};
pub use par::Execution;
pub use pauli::{PauliString, Phase, PhasedPauli};
