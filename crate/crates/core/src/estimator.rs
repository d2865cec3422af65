//! Simulation of cut circuits and the quasiprobability Monte-Carlo
//! estimator.
//!
//! Cutting a set of wires after a given layer splits each wire into
//! segments. Segments joined by a layer, or measured (respectively prepared)
//! together at one cut, form a fragment; each fragment is simulated with its
//! own state vector, and only the classical outcome of a cut crosses from
//! the measured fragment to the prepared one.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Term;
use crate::decomp::Decomposition;
use crate::error::{Result, WirecutError};
use crate::linalg::{self, CMatrix};
use crate::par::{self, Execution};

pub const MAX_SIM_QUBITS: usize = 12;
const NEG_PROB_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Layer {
    /// 1-based wires, in the kron order of `matrix`.
    pub qubits: Vec<usize>,
    pub matrix: CMatrix,
}

#[derive(Clone, Debug)]
pub struct LayeredCircuit {
    pub width: usize,
    pub layers: Vec<Layer>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PostProcess {
    /// `(−1)^{Σ y_k}`
    Parity,
    /// `y_k` for a 1-based wire `k`.
    Bit(usize),
    /// Values indexed by `y` read as an integer with `y_1` most significant.
    Table(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutLocation {
    pub after_layers: usize,
    pub wires: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSpec {
    pub locations: Vec<CutLocation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub shots: u64,
    pub gamma_total: f64,
    pub std_error: f64,
    pub sample_variance: f64,
    pub seed: u64,
    /// `tallies[location][channel]` shot counts.
    pub tallies: Vec<Vec<u64>>,
}

impl LayeredCircuit {
    pub fn new(width: usize, layers: Vec<Layer>) -> Result<Self> {
        if width == 0 {
            return Err(WirecutError::invalid("circuit width must be positive"));
        }
        for (i, l) in layers.iter().enumerate() {
            let k = l.qubits.len();
            if k == 0 || k > MAX_SIM_QUBITS {
                return Err(WirecutError::invalid(format!(
                    "layer {i} has an empty or oversized support"
                )));
            }
            let mut seen = vec![false; width + 1];
            for &q in &l.qubits {
                if q == 0 || q > width || seen[q] {
                    return Err(WirecutError::invalid(format!(
                        "layer {i} has a bad qubit list {:?}",
                        l.qubits
                    )));
                }
                seen[q] = true;
            }
            if l.matrix.nrows() != 1 << k || !linalg::is_unitary(&l.matrix, 1e-10) {
                return Err(WirecutError::invalid(format!(
                    "layer {i} matrix is not a unitary on {k} qubits"
                )));
            }
        }
        Ok(LayeredCircuit { width, layers })
    }

    /// H on wire 1, CX(1→2), CX(2→3): a GHZ preparation whose middle wire
    /// is cut after the second layer by [`demo_cuts`].
    pub fn demo() -> Self {
        let layers = vec![
            Layer {
                qubits: vec![1],
                matrix: linalg::hadamard(),
            },
            Layer {
                qubits: vec![1, 2],
                matrix: linalg::cnot(),
            },
            Layer {
                qubits: vec![2, 3],
                matrix: linalg::cnot(),
            },
        ];
        LayeredCircuit::new(3, layers).expect("valid demo")
    }
}

pub fn demo_cuts() -> CutSpec {
    CutSpec {
        locations: vec![CutLocation {
            after_layers: 2,
            wires: vec![2],
        }],
    }
}

impl PostProcess {
    pub fn eval(&self, y: usize, width: usize) -> f64 {
        match self {
            PostProcess::Parity => {
                if y.count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
            PostProcess::Bit(k) => ((y >> (width - k)) & 1) as f64,
            PostProcess::Table(v) => v[y],
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            PostProcess::Parity | PostProcess::Bit(_) => 1.0,
            PostProcess::Table(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        match self {
            PostProcess::Parity => Ok(()),
            PostProcess::Bit(k) if (1..=width).contains(k) => Ok(()),
            PostProcess::Bit(k) => Err(WirecutError::invalid(format!(
                "bit index {k} outside 1..={width}"
            ))),
            PostProcess::Table(v) if width <= MAX_SIM_QUBITS && v.len() == 1 << width => Ok(()),
            PostProcess::Table(v) => Err(WirecutError::invalid(format!(
                "table has {} entries, expected 2^{width}",
                v.len()
            ))),
        }
    }
}

impl std::str::FromStr for PostProcess {
    type Err = WirecutError;

    /// `parity` or `bit:k`; tables come from the circuit file.
    fn from_str(s: &str) -> Result<Self> {
        if s == "parity" {
            return Ok(PostProcess::Parity);
        }
        if let Some(k) = s.strip_prefix("bit:") {
            return k
                .parse()
                .map(PostProcess::Bit)
                .map_err(|_| WirecutError::Parse(format!("bad bit index in {s:?}")));
        }
        Err(WirecutError::Parse(format!(
            "unknown post-processing {s:?}"
        )))
    }
}

/// `Σ_y P[y] f(y)` by full state-vector simulation.
pub fn exact_expectation(circuit: &LayeredCircuit, f: &PostProcess) -> Result<f64> {
    let l = circuit.width;
    if l > MAX_SIM_QUBITS {
        return Err(WirecutError::limit(format!(
            "exact simulation is limited to {MAX_SIM_QUBITS} qubits"
        )));
    }
    f.validate(l)?;
    let mut state = vec![linalg::ZERO; 1 << l];
    state[0] = linalg::ONE;
    for layer in &circuit.layers {
        let qs: Vec<usize> = layer.qubits.iter().map(|q| q - 1).collect();
        linalg::apply_gate(&mut state, &layer.matrix, &qs, l);
    }
    let vals: Vec<f64> = state
        .iter()
        .enumerate()
        .map(|(y, a)| a.norm_sqr() * f.eval(y, l))
        .collect();
    Ok(par::pairwise_sum(&vals))
}

#[derive(Clone, Debug)]
enum Event {
    Cut(usize),
    Layer(usize),
}

/// Precomputed fragment layout for one circuit and cut specification.
#[derive(Clone, Debug)]
pub struct CutPlan {
    width: usize,
    layers: Vec<(usize, Vec<usize>, CMatrix)>,
    cuts: Vec<PlannedCut>,
    events: Vec<Event>,
    fragment_sizes: Vec<usize>,
    /// Per wire: (fragment, local qubit) of the final segment.
    terminal: Vec<(usize, usize)>,
    gamma_total: f64,
}

#[derive(Clone, Debug)]
struct PlannedCut {
    up: (usize, Vec<usize>),
    down: (usize, Vec<usize>),
    decomposition: Decomposition,
    probs: Vec<f64>,
    signs: Vec<f64>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl CutPlan {
    /// `decomps` holds one decomposition per location, or a single one used
    /// at every location.
    pub fn new(
        circuit: &LayeredCircuit,
        cuts: &CutSpec,
        decomps: &[Decomposition],
    ) -> Result<Self> {
        let width = circuit.width;
        let nl = circuit.layers.len();
        if !cuts.locations.is_empty() && decomps.len() != 1 && decomps.len() != cuts.locations.len()
        {
            return Err(WirecutError::invalid(
                "give one decomposition, or one per cut location",
            ));
        }
        let mut cuts_on_wire: Vec<Vec<usize>> = vec![Vec::new(); width + 1];
        for (ci, loc) in cuts.locations.iter().enumerate() {
            if loc.after_layers > nl {
                return Err(WirecutError::invalid(format!(
                    "cut {ci} after layer {} beyond {nl} layers",
                    loc.after_layers
                )));
            }
            if loc.wires.is_empty() {
                return Err(WirecutError::invalid(format!("cut {ci} has no wires")));
            }
            for &w in &loc.wires {
                if w == 0 || w > width {
                    return Err(WirecutError::invalid(format!(
                        "cut {ci} wire {w} outside 1..={width}"
                    )));
                }
                if cuts_on_wire[w].contains(&loc.after_layers) {
                    return Err(WirecutError::invalid(format!(
                        "wire {w} is cut twice after layer {}",
                        loc.after_layers
                    )));
                }
                cuts_on_wire[w].push(loc.after_layers);
            }
            let d = &decomps[if decomps.len() == 1 { 0 } else { ci }];
            if d.n != loc.wires.len() {
                return Err(WirecutError::invalid(format!(
                    "cut {ci} severs {} wires but its decomposition acts on {}",
                    loc.wires.len(),
                    d.n
                )));
            }
        }
        // segment s of wire w: index offset[w] + s
        let mut offset = vec![0usize; width + 2];
        for w in 1..=width {
            offset[w + 1] = offset[w] + cuts_on_wire[w].len() + 1;
        }
        let nseg = offset[width + 1];
        let seg = |w: usize, before_or_at: usize, strict: bool| -> usize {
            let s = cuts_on_wire[w]
                .iter()
                .filter(|&&a| {
                    if strict {
                        a < before_or_at
                    } else {
                        a <= before_or_at
                    }
                })
                .count();
            offset[w] + s
        };
        let mut uf = UnionFind((0..nseg).collect());
        for (li, layer) in circuit.layers.iter().enumerate() {
            let segs: Vec<usize> = layer.qubits.iter().map(|&w| seg(w, li, false)).collect();
            for s in &segs[1..] {
                uf.union(segs[0], *s);
            }
        }
        for loc in &cuts.locations {
            let before: Vec<usize> = loc
                .wires
                .iter()
                .map(|&w| seg(w, loc.after_layers, true))
                .collect();
            for s in &before[1..] {
                uf.union(before[0], *s);
            }
            let after: Vec<usize> = before.iter().map(|s| s + 1).collect();
            for s in &after[1..] {
                uf.union(after[0], *s);
            }
        }
        // fragments in order of their smallest segment
        let mut frag_of_root = vec![usize::MAX; nseg];
        let mut local = vec![(0usize, 0usize); nseg];
        let mut sizes: Vec<usize> = Vec::new();
        for (s, slot) in local.iter_mut().enumerate() {
            let r = uf.find(s);
            if frag_of_root[r] == usize::MAX {
                frag_of_root[r] = sizes.len();
                sizes.push(0);
            }
            let f = frag_of_root[r];
            *slot = (f, sizes[f]);
            sizes[f] += 1;
        }
        if let Some(&big) = sizes.iter().max() {
            if big > MAX_SIM_QUBITS {
                return Err(WirecutError::limit(format!(
                    "a fragment needs {big} qubits; the simulator handles {MAX_SIM_QUBITS}"
                )));
            }
        }
        let locate = |segs: &[usize]| -> (usize, Vec<usize>) {
            let f = local[segs[0]].0;
            (f, segs.iter().map(|&s| local[s].1).collect())
        };
        let layers = circuit
            .layers
            .iter()
            .enumerate()
            .map(|(li, l)| {
                let segs: Vec<usize> = l.qubits.iter().map(|&w| seg(w, li, false)).collect();
                let (f, qs) = locate(&segs);
                (f, qs, l.matrix.clone())
            })
            .collect();
        let mut planned = Vec::with_capacity(cuts.locations.len());
        let mut gamma_total = Rational64::one();
        for (ci, loc) in cuts.locations.iter().enumerate() {
            let before: Vec<usize> = loc
                .wires
                .iter()
                .map(|&w| seg(w, loc.after_layers, true))
                .collect();
            let after: Vec<usize> = before.iter().map(|s| s + 1).collect();
            let d = decomps[if decomps.len() == 1 { 0 } else { ci }].clone();
            gamma_total *= d.gamma();
            planned.push(PlannedCut {
                up: locate(&before),
                down: locate(&after),
                probs: d.probabilities(),
                signs: d
                    .channels
                    .iter()
                    .map(|c| if c.weight.is_negative() { -1.0 } else { 1.0 })
                    .collect(),
                decomposition: d,
            });
        }
        let mut events = Vec::new();
        for t in 0..=nl {
            for (ci, loc) in cuts.locations.iter().enumerate() {
                if loc.after_layers == t {
                    events.push(Event::Cut(ci));
                }
            }
            if t < nl {
                events.push(Event::Layer(t));
            }
        }
        let terminal = (1..=width).map(|w| local[offset[w + 1] - 1]).collect();
        Ok(CutPlan {
            width,
            layers,
            cuts: planned,
            events,
            fragment_sizes: sizes,
            terminal,
            gamma_total: gamma_total.to_f64().unwrap_or(f64::NAN),
        })
    }

    pub fn gamma_total(&self) -> f64 {
        self.gamma_total
    }

    pub fn fragment_count(&self) -> usize {
        self.fragment_sizes.len()
    }

    fn fresh_states(&self) -> Vec<Vec<Complex64>> {
        self.fragment_sizes
            .iter()
            .map(|&k| {
                let mut v = vec![linalg::ZERO; 1 << k];
                v[0] = linalg::ONE;
                v
            })
            .collect()
    }

    /// One Monte-Carlo shot: `(value, chosen channel per location)`.
    pub fn sample_shot(&self, f: &PostProcess, seed: u64, shot: u64) -> Result<(f64, Vec<usize>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        let mut chosen = Vec::with_capacity(self.cuts.len());
        let mut mode = Mode::Sample {
            rng: &mut rng,
            chosen: &mut chosen,
        };
        let v = self.run(&mut mode, self.fresh_states(), 0, 1.0, f)?;
        Ok((self.gamma_total * v, chosen))
    }

    /// Exact mean of the estimator: every channel, outcome, preparation and
    /// terminal result is enumerated with its probability.
    pub fn analytic_mean(&self, f: &PostProcess) -> Result<f64> {
        f.validate(self.width)?;
        let v = self.run(&mut Mode::Enumerate, self.fresh_states(), 0, 1.0, f)?;
        Ok(self.gamma_total * v)
    }

    fn run(
        &self,
        mode: &mut Mode,
        mut states: Vec<Vec<Complex64>>,
        ev: usize,
        sign: f64,
        f: &PostProcess,
    ) -> Result<f64> {
        let Some(event) = self.events.get(ev) else {
            return self.terminal_value(mode, &states, sign, f);
        };
        match *event {
            Event::Layer(li) => {
                let (frag, ref qs, ref m) = self.layers[li];
                linalg::apply_gate(&mut states[frag], m, qs, self.fragment_sizes[frag]);
                self.run(mode, states, ev + 1, sign, f)
            }
            Event::Cut(ci) => {
                let cut = &self.cuts[ci];
                choose(mode, &cut.probs, true, |mode, i| {
                    let channel = &cut.decomposition.channels[i].channel;
                    let (uf, ref uq) = cut.up;
                    let k_up = self.fragment_sizes[uf];
                    let outcomes = povm_outcomes(&states[uf], uq, k_up, channel.terms())?;
                    let probs: Vec<f64> = outcomes.iter().map(|o| o.prob).collect();
                    choose(mode, &probs, false, |mode, o| {
                        let out = &outcomes[o];
                        let term = &channel.terms()[out.term];
                        let mut next = states.clone();
                        next[uf] = out.post.clone();
                        let s = sign * cut.signs[i] * term.a() as f64;
                        let mix = term.prep_mixture();
                        let mp: Vec<f64> = mix.iter().map(|(p, _)| *p).collect();
                        choose(mode, &mp, false, |mode, p| {
                            let mut prepared = next.clone();
                            let (df, ref dq) = cut.down;
                            write_prep(
                                &mut prepared[df],
                                dq,
                                self.fragment_sizes[df],
                                mix[p].1.as_slice(),
                            );
                            self.run(mode, prepared, ev + 1, s, f)
                        })
                    })
                })
            }
        }
    }

    fn terminal_value(
        &self,
        mode: &mut Mode,
        states: &[Vec<Complex64>],
        sign: f64,
        f: &PostProcess,
    ) -> Result<f64> {
        // (partial y, probability) over fragments in order
        let mut partial: Vec<(usize, f64)> = vec![(0, 1.0)];
        for (frag, state) in states.iter().enumerate() {
            let k = self.fragment_sizes[frag];
            let wires: Vec<(usize, usize)> = self
                .terminal
                .iter()
                .enumerate()
                .filter(|(_, (fr, _))| *fr == frag)
                .map(|(w, (_, q))| (w, *q))
                .collect();
            if wires.is_empty() {
                continue;
            }
            let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
            let bits_of = |idx: usize| -> usize {
                wires.iter().fold(0usize, |y, &(w, q)| {
                    y | (((idx >> (k - 1 - q)) & 1) << (self.width - 1 - w))
                })
            };
            match mode {
                Mode::Sample { rng, .. } => {
                    let idx = sample_index(rng, &probs)?;
                    let b = bits_of(idx);
                    for p in partial.iter_mut() {
                        p.0 |= b;
                    }
                }
                Mode::Enumerate => {
                    let mut marginal: Vec<(usize, f64)> = Vec::new();
                    let mut acc = std::collections::BTreeMap::new();
                    for (idx, p) in probs.iter().enumerate() {
                        if *p > 0.0 {
                            *acc.entry(bits_of(idx)).or_insert(0.0) += p;
                        }
                    }
                    marginal.extend(acc);
                    partial = partial
                        .iter()
                        .flat_map(|&(y, p)| marginal.iter().map(move |&(b, q)| (y | b, p * q)))
                        .collect();
                }
            }
        }
        let vals: Vec<f64> = partial
            .iter()
            .map(|&(y, p)| p * f.eval(y, self.width))
            .collect();
        Ok(sign * par::pairwise_sum(&vals))
    }
}

enum Mode<'a> {
    Sample {
        rng: &'a mut ChaCha8Rng,
        chosen: &'a mut Vec<usize>,
    },
    Enumerate,
}

/// Either draws one branch or sums all branches weighted by probability.
fn choose<F>(mode: &mut Mode, probs: &[f64], record: bool, mut body: F) -> Result<f64>
where
    F: FnMut(&mut Mode, usize) -> Result<f64>,
{
    match mode {
        Mode::Sample { rng, chosen } => {
            let i = sample_index(rng, probs)?;
            if record {
                chosen.push(i);
            }
            body(mode, i)
        }
        Mode::Enumerate => {
            let mut total = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                if p > 0.0 {
                    total += p * body(mode, i)?;
                }
            }
            Ok(total)
        }
    }
}

/// Clips floating-point negatives at or above `−1e−9` and renormalises.
fn clean_distribution(probs: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = probs.iter().find(|&&p| p < -NEG_PROB_TOL || !p.is_finite()) {
        return Err(WirecutError::NumericFailure(format!(
            "probability {bad:e} is negative or not finite"
        )));
    }
    let clipped: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(WirecutError::NumericFailure(
            "distribution has zero mass".into(),
        ));
    }
    Ok(clipped.into_iter().map(|p| p / total).collect())
}

fn sample_index(rng: &mut ChaCha8Rng, probs: &[f64]) -> Result<usize> {
    let probs = clean_distribution(probs)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(probs.iter().rposition(|&p| p > 0.0).unwrap_or(0))
}

struct Outcome {
    term: usize,
    prob: f64,
    /// Normalised state after projecting and resetting the cut qubits.
    post: Vec<Complex64>,
}

/// Outcomes `(μ, k)` with probability `λ_k ‖(⟨v_k| ⊗ I)ψ‖²`.
fn povm_outcomes(
    state: &[Complex64],
    qs: &[usize],
    k: usize,
    terms: &[Term],
) -> Result<Vec<Outcome>> {
    let offsets: Vec<usize> = (0..1usize << qs.len())
        .map(|s| linalg::scatter_bits(0, s, qs, k))
        .collect();
    let mask = offsets.iter().fold(0, |m, o| m | o);
    let mut out = Vec::new();
    for (ti, t) in terms.iter().enumerate() {
        for (lambda, v) in t.effect_factors() {
            let mut post = vec![linalg::ZERO; state.len()];
            let mut norm = 0.0;
            for base in (0..state.len()).filter(|b| b & mask == 0) {
                let amp: Complex64 = offsets
                    .iter()
                    .zip(v.iter())
                    .map(|(&o, vs)| vs.conj() * state[base | o])
                    .sum();
                norm += amp.norm_sqr();
                post[base] = amp;
            }
            let prob = lambda * norm;
            if prob < -NEG_PROB_TOL {
                return Err(WirecutError::NumericFailure(format!(
                    "POVM probability {prob:e} below tolerance"
                )));
            }
            if norm > 0.0 {
                let s = 1.0 / norm.sqrt();
                post.iter_mut().for_each(|a| *a *= s);
            }
            out.push(Outcome {
                term: ti,
                prob,
                post,
            });
        }
    }
    Ok(out)
}

/// Writes `|u⟩` into qubits `qs`, which must currently be `|0…0⟩`.
fn write_prep(state: &mut [Complex64], qs: &[usize], k: usize, u: &[Complex64]) {
    let offsets: Vec<usize> = (0..u.len())
        .map(|s| linalg::scatter_bits(0, s, qs, k))
        .collect();
    let mask = offsets.iter().fold(0, |m, o| m | o);
    for base in (0..state.len()).filter(|b| b & mask == 0) {
        let a = state[base];
        for (&o, us) in offsets.iter().zip(u) {
            state[base | o] = a * us;
        }
    }
}

/// Draws an index into the term's preparation mixture.
pub fn sample_prep(term: &Term, rng: &mut ChaCha8Rng) -> Result<usize> {
    let probs: Vec<f64> = term.prep_mixture().iter().map(|(p, _)| *p).collect();
    sample_index(rng, &probs)
}

pub fn run_monte_carlo(
    circuit: &LayeredCircuit,
    cuts: &CutSpec,
    decomps: &[Decomposition],
    f: &PostProcess,
    shots: u64,
    seed: u64,
) -> Result<EstimateReport> {
    run_monte_carlo_with(circuit, cuts, decomps, f, shots, seed, Execution::default())
}

pub fn run_monte_carlo_with(
    circuit: &LayeredCircuit,
    cuts: &CutSpec,
    decomps: &[Decomposition],
    f: &PostProcess,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<EstimateReport> {
    if shots == 0 {
        return Err(WirecutError::invalid("shot count must be positive"));
    }
    f.validate(circuit.width)?;
    let plan = CutPlan::new(circuit, cuts, decomps)?;
    let results = par::map_indexed(shots as usize, exec, |i| {
        plan.sample_shot(f, seed, i as u64)
    });
    let mut values = Vec::with_capacity(results.len());
    let mut tallies: Vec<Vec<u64>> = plan.cuts.iter().map(|c| vec![0; c.probs.len()]).collect();
    for r in results {
        let (v, chosen) = r?;
        values.push(v);
        for (loc, &c) in chosen.iter().enumerate() {
            tallies[loc][c] += 1;
        }
    }
    let n = values.len() as f64;
    let mean = par::pairwise_sum(&values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if values.len() > 1 {
        par::pairwise_sum(&dev) / (n - 1.0)
    } else {
        0.0
    };
    Ok(EstimateReport {
        estimate: mean,
        shots,
        gamma_total: plan.gamma_total,
        std_error: (var / n).sqrt(),
        sample_variance: var,
        seed,
        tallies,
    })
}

/// Exact mean of the Monte-Carlo estimator without sampling noise.
pub fn analytic_estimator_mean(
    circuit: &LayeredCircuit,
    cuts: &CutSpec,
    decomps: &[Decomposition],
    f: &PostProcess,
) -> Result<f64> {
    CutPlan::new(circuit, cuts, decomps)?.analytic_mean(f)
}

/// Sample variance of the estimate over `trials` independent seeds.
pub fn variance_probe(
    circuit: &LayeredCircuit,
    cuts: &CutSpec,
    decomps: &[Decomposition],
    f: &PostProcess,
    trials: u64,
    shots: u64,
) -> Result<f64> {
    if trials < 2 {
        return Err(WirecutError::invalid("variance needs at least two trials"));
    }
    let estimates = (0..trials)
        .map(|t| run_monte_carlo(circuit, cuts, decomps, f, shots, t).map(|r| r.estimate))
        .collect::<Result<Vec<_>>>()?;
    let mean = par::pairwise_sum(&estimates) / trials as f64;
    let dev: Vec<f64> = estimates.iter().map(|e| (e - mean).powi(2)).collect();
    Ok(par::pairwise_sum(&dev) / (trials - 1) as f64)
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
pub enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize, Serialize)]
pub struct LayerJson {
    pub qubits: Vec<usize>,
    pub matrix: Vec<Vec<EntryJson>>,
}

#[derive(Deserialize, Serialize)]
pub struct CircuitJson {
    pub width: usize,
    pub layers: Vec<LayerJson>,
    #[serde(default = "default_f")]
    pub f: String,
    #[serde(default)]
    pub table: Option<Vec<f64>>,
}

fn default_f() -> String {
    "parity".into()
}

impl CircuitJson {
    pub fn parse(text: &str) -> Result<(LayeredCircuit, PostProcess)> {
        let doc: CircuitJson = serde_json::from_str(text)?;
        doc.into_circuit()
    }

    pub fn into_circuit(self) -> Result<(LayeredCircuit, PostProcess)> {
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                let dim = l.matrix.len();
                if l.matrix.iter().any(|row| row.len() != dim) {
                    return Err(WirecutError::Parse("layer matrix is not square".into()));
                }
                let m = CMatrix::from_fn(dim, dim, |r, c| match l.matrix[r][c] {
                    EntryJson::Real(x) => Complex64::new(x, 0.0),
                    EntryJson::Complex([re, im]) => Complex64::new(re, im),
                });
                Ok(Layer {
                    qubits: l.qubits,
                    matrix: m,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let circuit = LayeredCircuit::new(self.width, layers)?;
        let f = if self.f == "table" {
            PostProcess::Table(
                self.table
                    .ok_or_else(|| WirecutError::Parse("f = table needs a table field".into()))?,
            )
        } else {
            self.f.parse()?
        };
        f.validate(circuit.width)?;
        Ok((circuit, f))
    }

    pub fn from_circuit(c: &LayeredCircuit, f: &PostProcess) -> Self {
        let (fname, table) = match f {
            PostProcess::Parity => ("parity".to_string(), None),
            PostProcess::Bit(k) => (format!("bit:{k}"), None),
            PostProcess::Table(v) => ("table".to_string(), Some(v.clone())),
        };
        CircuitJson {
            width: c.width,
            layers: c
                .layers
                .iter()
                .map(|l| LayerJson {
                    qubits: l.qubits.clone(),
                    matrix: (0..l.matrix.nrows())
                        .map(|r| {
                            (0..l.matrix.ncols())
                                .map(|col| {
                                    let z = l.matrix[(r, col)];
                                    if z.im == 0.0 {
                                        EntryJson::Real(z.re)
                                    } else {
                                        EntryJson::Complex([z.re, z.im])
                                    }
                                })
                                .collect()
                        })
                        .collect(),
                })
                .collect(),
            f: fname,
            table,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{build, build_optimal_1q, build_peng_1q, complement_mixture, Method};

    fn h_circuit() -> LayeredCircuit {
        LayeredCircuit::new(
            1,
            vec![Layer {
                qubits: vec![1],
                matrix: linalg::hadamard(),
            }],
        )
        .unwrap()
    }

    #[test]
    fn exact_examples() {
        let empty = LayeredCircuit::new(3, vec![]).unwrap();
        assert_eq!(
            exact_expectation(&empty, &PostProcess::Parity).unwrap(),
            1.0
        );
        assert_eq!(
            exact_expectation(&empty, &PostProcess::Bit(2)).unwrap(),
            0.0
        );
        assert!(
            exact_expectation(&h_circuit(), &PostProcess::Parity)
                .unwrap()
                .abs()
                < 1e-15
        );
        // GHZ: outcomes 000 and 111 with parity +1 and -1
        let ghz = LayeredCircuit::demo();
        assert!(exact_expectation(&ghz, &PostProcess::Parity).unwrap().abs() < 1e-15);
        assert!((exact_expectation(&ghz, &PostProcess::Bit(3)).unwrap() - 0.5).abs() < 1e-15);
        let too_wide = LayeredCircuit::new(13, vec![]).unwrap();
        assert!(matches!(
            exact_expectation(&too_wide, &PostProcess::Parity),
            Err(WirecutError::ResourceLimit(_))
        ));
    }

    #[test]
    fn identity_wire_cut_estimates_one() {
        let c = LayeredCircuit::new(1, vec![]).unwrap();
        let cuts = CutSpec {
            locations: vec![CutLocation {
                after_layers: 0,
                wires: vec![1],
            }],
        };
        let n = 20_000u64;
        let rep =
            run_monte_carlo(&c, &cuts, &[build_optimal_1q()], &PostProcess::Parity, n, 0).unwrap();
        assert!(
            (rep.estimate - 1.0).abs() < 5.0 * 3.0 / (n as f64).sqrt(),
            "{rep:?}"
        );
        assert_eq!(rep.tallies[0].iter().sum::<u64>(), n);
        assert!(rep.estimate.abs() <= rep.gamma_total);
    }

    #[test]
    fn analytic_mean_matches_exact_on_demo() {
        let c = LayeredCircuit::demo();
        for f in [
            PostProcess::Parity,
            PostProcess::Bit(3),
            PostProcess::Table((0..8).map(|k| k as f64 / 8.0).collect()),
        ] {
            let exact = exact_expectation(&c, &f).unwrap();
            for d in [build_peng_1q(), build_optimal_1q()] {
                let m = analytic_estimator_mean(&c, &demo_cuts(), &[d], &f).unwrap();
                assert!((m - exact).abs() < 1e-10, "{f:?}: {m} vs {exact}");
            }
        }
    }

    #[test]
    fn two_wire_cuts() {
        let c = LayeredCircuit::demo();
        let cuts = CutSpec {
            locations: vec![
                CutLocation {
                    after_layers: 1,
                    wires: vec![1],
                },
                CutLocation {
                    after_layers: 2,
                    wires: vec![2],
                },
            ],
        };
        let f = PostProcess::Bit(3);
        let exact = exact_expectation(&c, &f).unwrap();
        let plan = CutPlan::new(&c, &cuts, &[build_optimal_1q()]).unwrap();
        assert_eq!(plan.gamma_total(), 9.0);
        assert!((plan.analytic_mean(&f).unwrap() - exact).abs() < 1e-10);
        let rep = run_monte_carlo(&c, &cuts, &[build_optimal_1q()], &f, 20_000, 3).unwrap();
        assert!((rep.estimate - exact).abs() < 5.0 * 9.0 / (20_000f64).sqrt());
    }

    #[test]
    fn multi_wire_mub_cut() {
        let c = LayeredCircuit::demo();
        let cuts = CutSpec {
            locations: vec![CutLocation {
                after_layers: 2,
                wires: vec![1, 2],
            }],
        };
        let d = build(Method::Mub, 2).unwrap();
        for f in [PostProcess::Parity, PostProcess::Bit(1)] {
            let exact = exact_expectation(&c, &f).unwrap();
            let m = analytic_estimator_mean(&c, &cuts, std::slice::from_ref(&d), &f).unwrap();
            assert!((m - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn determinism_and_execution_policy() {
        let c = LayeredCircuit::demo();
        let d = [build_optimal_1q()];
        let a = run_monte_carlo_with(
            &c,
            &demo_cuts(),
            &d,
            &PostProcess::Parity,
            3000,
            7,
            Execution::Parallel,
        )
        .unwrap();
        let b = run_monte_carlo_with(
            &c,
            &demo_cuts(),
            &d,
            &PostProcess::Parity,
            3000,
            7,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(a, b);
        let other = run_monte_carlo(&c, &demo_cuts(), &d, &PostProcess::Parity, 3000, 8).unwrap();
        assert_ne!(a.estimate, other.estimate);
    }

    #[test]
    fn invalid_specs() {
        let c = LayeredCircuit::demo();
        let d = [build_optimal_1q()];
        assert!(run_monte_carlo(&c, &demo_cuts(), &d, &PostProcess::Parity, 0, 0).is_err());
        let wide = CutSpec {
            locations: vec![CutLocation {
                after_layers: 1,
                wires: vec![1, 2],
            }],
        };
        assert!(matches!(
            CutPlan::new(&c, &wide, &d),
            Err(WirecutError::InvalidInput(_))
        ));
        let late = CutSpec {
            locations: vec![CutLocation {
                after_layers: 9,
                wires: vec![1],
            }],
        };
        assert!(CutPlan::new(&c, &late, &d).is_err());
        let twice = CutSpec {
            locations: vec![
                CutLocation {
                    after_layers: 1,
                    wires: vec![1],
                },
                CutLocation {
                    after_layers: 1,
                    wires: vec![1],
                },
            ],
        };
        assert!(CutPlan::new(&c, &twice, &d).is_err());
    }

    #[test]
    fn fragments_separate_at_the_cut() {
        let plan =
            CutPlan::new(&LayeredCircuit::demo(), &demo_cuts(), &[build_optimal_1q()]).unwrap();
        assert_eq!(plan.fragment_count(), 2);
    }

    #[test]
    fn negative_probabilities() {
        assert!(clean_distribution(&[0.5, -1e-12, 0.5]).is_ok());
        assert!(matches!(
            clean_distribution(&[1.0, -1e-6]),
            Err(WirecutError::NumericFailure(_))
        ));
    }

    #[test]
    fn prep_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t1 = Term::from_factors(
            1,
            vec![(1.0, linalg::basis_vector(2, 0))],
            complement_mixture(1, 0),
        );
        for _ in 0..100 {
            let i = sample_prep(&t1, &mut rng).unwrap();
            assert_eq!(t1.prep_mixture()[i].1, linalg::basis_vector(2, 1));
        }
        let t2 = Term::from_factors(
            1,
            vec![(1.0, linalg::basis_vector(4, 1))],
            complement_mixture(2, 1),
        );
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let i = sample_prep(&t2, &mut rng).unwrap();
            let k = t2.prep_mixture()[i]
                .1
                .iter()
                .position(|z| z.norm() > 0.5)
                .unwrap();
            counts[k] += 1;
        }
        assert_eq!(counts[1], 0);
        let sigma = (draws as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for k in [0, 2, 3] {
            assert!(
                (counts[k] as f64 - draws as f64 / 3.0).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn circuit_json_roundtrip() {
        let c = LayeredCircuit::demo();
        let text =
            serde_json::to_string(&CircuitJson::from_circuit(&c, &PostProcess::Bit(2))).unwrap();
        let (back, f) = CircuitJson::parse(&text).unwrap();
        assert_eq!(f, PostProcess::Bit(2));
        assert_eq!(back.layers.len(), 3);
        let complex =
            r#"{"width":1,"layers":[{"qubits":[1],"matrix":[[1,0],[0,[0,1]]]}],"f":"parity"}"#;
        assert!(CircuitJson::parse(complex).is_ok());
        let bad = r#"{"width":1,"layers":[{"qubits":[1],"matrix":[[1,1],[0,1]]}]}"#;
        assert!(CircuitJson::parse(bad).is_err());
    }

    #[test]
    fn variance_halves_with_double_shots() {
        let c = LayeredCircuit::demo();
        let d = [build_optimal_1q()];
        let v1 = variance_probe(&c, &demo_cuts(), &d, &PostProcess::Parity, 200, 200).unwrap();
        let v2 = variance_probe(&c, &demo_cuts(), &d, &PostProcess::Parity, 200, 400).unwrap();
        let ratio = v1 / v2;
        assert!((ratio - 2.0).abs() < 0.5, "ratio {ratio}");
        assert!(v1 <= 9.0 / 200.0 * 1.3);
    }
}
