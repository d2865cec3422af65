//! Sampling-overhead tables, the execution-time model and the gate-count
//! benchmark.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::clifford::{synthesize_with, GateStats, SynthOptions};
use crate::decomp::Method;
use crate::error::{Result, WirecutError};
use crate::families::{generate_partition, MAX_PARTITION_QUBITS};
use crate::par::{self, Execution};

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct TimeModelParams {
    pub m: u64,
    pub shots: u64,
    pub t_c: f64,
    pub t_q: f64,
}

/// `m·t_c + N·t_q` when every channel gets at least one shot, otherwise
/// the worst case of one compilation per shot.
pub fn predict_time(p: &TimeModelParams) -> Result<f64> {
    if !(p.t_c >= 0.0 && p.t_q >= 0.0) {
        return Err(WirecutError::invalid("unit times must be nonnegative"));
    }
    let (m, n) = (p.m as f64, p.shots as f64);
    Ok(if p.m <= p.shots {
        m * p.t_c + n * p.t_q
    } else {
        n * p.t_c + n * p.t_q
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodRow {
    pub method: &'static str,
    pub n: usize,
    pub gamma_sq: BigUint,
    pub m: BigUint,
}

/// Methods listed in the overhead table, in row order.
pub const TABLE_METHODS: [Method; 4] = [
    Method::Peng,
    Method::Randomized,
    Method::Mub,
    Method::Teleport,
];

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

/// Closed-form `(γ², m)` for `n` wires. The randomized channel count is the
/// minimum over unitary 2-designs.
pub fn closed_form(method: Method, n: usize) -> (BigUint, BigUint) {
    let big = |x: u64| BigUint::from(x);
    match method {
        Method::Peng => (big(16).pow(n), big(8).pow(n)),
        Method::Optimal1q => (big(9).pow(n), big(3).pow(n)),
        Method::Randomized => {
            let g = pow2(n + 1) + 1u32;
            (&g * &g, big(16).pow(n) + 3u32 - (big(4).pow(n) << 1))
        }
        Method::Mub => {
            let g = pow2(n + 1) - 1u32;
            (&g * &g, pow2(n) + 1u32)
        }
        Method::Teleport => {
            let g = pow2(n + 1) - 1u32;
            let d = 1usize << n;
            (&g * &g, pow2(d) + pow2(2 * n) - pow2(n) - 1u32)
        }
    }
}

pub fn overhead_table(n_max: usize) -> Result<Vec<MethodRow>> {
    if n_max == 0 || n_max > MAX_PARTITION_QUBITS {
        return Err(WirecutError::limit(format!(
            "n_max must lie in 1..={MAX_PARTITION_QUBITS}"
        )));
    }
    Ok((1..=n_max)
        .flat_map(|n| {
            TABLE_METHODS.iter().map(move |&method| {
                let (gamma_sq, m) = closed_form(method, n);
                MethodRow {
                    method: method.label(),
                    n,
                    gamma_sq,
                    m,
                }
            })
        })
        .collect())
}

pub fn overhead_csv(rows: &[MethodRow]) -> String {
    let mut s = String::from("method,n,gamma_sq,m\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.method, r.n, r.gamma_sq, r.m);
    }
    s
}

/// `Π γ²` over `k_cuts` independent locations of `n_per_cut` wires each.
pub fn multi_cut_overhead(method: Method, k_cuts: usize, n_per_cut: usize) -> BigUint {
    closed_form(method, n_per_cut).0.pow(k_cuts)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateCountRow {
    pub n: usize,
    pub ns_max: usize,
    pub ncz_max: usize,
    pub nall_max: usize,
    pub depth_max: usize,
    pub bound_cz: usize,
    pub bound_all: usize,
}

impl GateCountRow {
    pub fn within_bounds(&self) -> bool {
        self.ns_max <= self.n && self.ncz_max <= self.bound_cz && self.nall_max <= self.bound_all
    }
}

/// Maximum gate counts over the `2^n` synthesized circuits for each
/// `n ≤ n_max`. Depth optimization is off unless requested.
pub fn gate_count_bench(
    n_max: usize,
    optimize_depth: bool,
    exec: Execution,
) -> Result<Vec<GateCountRow>> {
    if n_max == 0 || n_max > MAX_PARTITION_QUBITS {
        return Err(WirecutError::limit(format!(
            "n_max must lie in 1..={MAX_PARTITION_QUBITS}"
        )));
    }
    let opts = SynthOptions { optimize_depth };
    (1..=n_max)
        .map(|n| {
            let partition = generate_partition(n)?;
            let bases = &partition.families[..1 << n];
            let stats = par::map_indexed(bases.len(), exec, |i| {
                synthesize_with(&bases[i], opts).map(|c| c.stats())
            })
            .into_iter()
            .collect::<Result<Vec<GateStats>>>()?;
            let max = |f: fn(&GateStats) -> usize| stats.iter().map(f).max().unwrap_or(0);
            let bound_cz = n * (n - 1) / 2;
            Ok(GateCountRow {
                n,
                ns_max: max(|s| s.n_s),
                ncz_max: max(|s| s.n_cz),
                nall_max: max(|s| s.total()),
                depth_max: max(|s| s.depth),
                bound_cz,
                bound_all: 2 * n + bound_cz,
            })
        })
        .collect()
}

pub fn gate_count_csv(rows: &[GateCountRow]) -> String {
    let mut s = String::from("n,NS_max,NCZ_max,Nall_max,bound_CZ,bound_all\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n, r.ns_max, r.ncz_max, r.nall_max, r.bound_cz, r.bound_all
        );
    }
    s
}
