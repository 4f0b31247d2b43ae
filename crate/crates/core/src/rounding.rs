//! Candidate state to bitstring: Pauli rounding, magic-state rounding and
//! computational-basis readout.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::QracAssignment;
use crate::graph::{
    approximation_ratio, cut_value, max_cut_bruteforce, BitAssignment, Graph, GraphError,
};
use crate::pauli::PauliString;
use crate::seed::rng_from;
use crate::simulator::kernels::Mat2;
use crate::simulator::{rotated_probabilities, sample_basis, QuantumState, ShotTable, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoundingError {
    #[error("state has {state} qubits, expected {expected}")]
    QubitMismatch { state: usize, expected: usize },
    #[error("assignment covers {assignment} nodes, graph has {graph}")]
    NodeMismatch { assignment: usize, graph: usize },
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMethod {
    Pauli,
    Magic,
    Computational,
}

impl fmt::Display for RoundingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundingMethod::Pauli => "pauli",
            RoundingMethod::Magic => "magic",
            RoundingMethod::Computational => "computational",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub method: RoundingMethod,
    pub bits: BitAssignment,
    pub cut: usize,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds_used: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_used: Option<u64>,
}

impl RoundingOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("outcome serializes")
    }
}

/// A graph together with its optimal cut, used to score bitstrings.
#[derive(Debug, Clone)]
pub struct CutScorer<'g> {
    graph: &'g Graph,
    opt_cut: usize,
}

impl<'g> CutScorer<'g> {
    /// Finds the optimum by brute force.
    pub fn new(graph: &'g Graph) -> Result<Self, RoundingError> {
        let (_, opt) = max_cut_bruteforce(graph)?;
        Self::with_optimum(graph, opt)
    }

    pub fn with_optimum(graph: &'g Graph, opt_cut: usize) -> Result<Self, RoundingError> {
        if opt_cut == 0 {
            return Err(GraphError::ZeroOptimum.into());
        }
        Ok(CutScorer { graph, opt_cut })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn opt_cut(&self) -> usize {
        self.opt_cut
    }

    fn outcome(
        &self,
        method: RoundingMethod,
        bits: BitAssignment,
    ) -> Result<RoundingOutcome, RoundingError> {
        let cut = cut_value(self.graph, &bits)?;
        Ok(RoundingOutcome {
            method,
            ratio: approximation_ratio(cut, self.opt_cut)?,
            bits,
            cut,
            rounds_used: None,
            shots_used: None,
        })
    }
}

fn check_sizes(
    state: &QuantumState,
    a: &QracAssignment,
    scorer: &CutScorer,
) -> Result<(), RoundingError> {
    if state.num_qubits() != a.num_qubits() {
        return Err(RoundingError::QubitMismatch {
            state: state.num_qubits(),
            expected: a.num_qubits(),
        });
    }
    if a.num_nodes() != scorer.graph.num_nodes() {
        return Err(RoundingError::NodeMismatch {
            assignment: a.num_nodes(),
            graph: scorer.graph.num_nodes(),
        });
    }
    Ok(())
}

/// How node traces are obtained for Pauli rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliMode {
    Exact,
    Shots(u64),
}

/// Sign readout: positive trace gives bit 0, negative bit 1, exactly zero a
/// fair coin.
fn sign_bit(trace: f64, rng: &mut ChaCha8Rng) -> u8 {
    if trace > 0.0 {
        0
    } else if trace < 0.0 {
        1
    } else {
        rng.gen_range(0..2)
    }
}

/// Measures every node's Pauli `shots` times. Column `j` of the table holds
/// the per-shot eigenvalue bits of node `j`.
pub fn sample_node_table(
    state: &QuantumState,
    a: &QracAssignment,
    shots: u64,
    rng: &mut ChaCha8Rng,
) -> Result<ShotTable, RoundingError> {
    if shots == 0 {
        return Err(RoundingError::ZeroCount("shots"));
    }
    let mut table = ShotTable::new(shots as usize, a.num_nodes());
    for j in 0..a.num_nodes() {
        let p: PauliString = a.pauli_of(j);
        let outcomes = sample_basis(&rotated_probabilities(state, &p), shots, rng)?;
        let mask = p.support_mask();
        let bits: Vec<u8> = outcomes
            .iter()
            .map(|&b| ((b & mask).count_ones() % 2) as u8)
            .collect();
        table.set_column(j, &bits);
    }
    Ok(table)
}

pub fn pauli_rounding(
    state: &QuantumState,
    a: &QracAssignment,
    scorer: &CutScorer,
    mode: PauliMode,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    check_sizes(state, a, scorer)?;
    let mut rng = rng_from(seed);
    let (traces, shots_used): (Vec<f64>, Option<u64>) = match mode {
        PauliMode::Exact => (
            (0..a.num_nodes())
                .map(|j| state.pauli_expectation(&a.pauli_of(j)))
                .collect(),
            None,
        ),
        PauliMode::Shots(s) => {
            let table = sample_node_table(state, a, s, &mut rng)?;
            (
                (0..a.num_nodes()).map(|j| table.estimate(j)).collect(),
                Some(s * a.num_nodes() as u64),
            )
        }
    };
    let bits = traces.iter().map(|&t| sign_bit(t, &mut rng)).collect();
    let mut out = scorer.outcome(RoundingMethod::Pauli, BitAssignment::new(bits)?)?;
    out.shots_used = shots_used;
    Ok(out)
}

/// One of the four magic measurement bases. The `+` outcome has Bloch
/// vector `v/√3` with `v` below and decodes to the listed bit triple; the
/// `−` outcome is the antipode and decodes to the complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MagicBasis {
    index: usize,
}

const MAGIC_VECTORS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

impl MagicBasis {
    pub const ALL: [MagicBasis; 4] = [
        MagicBasis { index: 0 },
        MagicBasis { index: 1 },
        MagicBasis { index: 2 },
        MagicBasis { index: 3 },
    ];

    /// 1-based label μ₁..μ₄.
    pub fn label(&self) -> usize {
        self.index + 1
    }

    pub fn from_label(label: usize) -> Option<Self> {
        (1..=4).contains(&label).then(|| MagicBasis { index: label - 1 })
    }

    /// Unit Bloch vector of the `+` outcome.
    pub fn plus_vector(&self) -> [f64; 3] {
        MAGIC_VECTORS[self.index].map(|x| x / 3f64.sqrt())
    }

    pub fn minus_vector(&self) -> [f64; 3] {
        self.plus_vector().map(|x| -x)
    }

    pub fn bits(&self, plus: bool) -> [u8; 3] {
        MAGIC_VECTORS[self.index].map(|x| u8::from((x < 0.0) == plus))
    }

    /// `½(I ± v·σ)`.
    pub fn projector(&self, plus: bool) -> Mat2 {
        let v = if plus {
            self.plus_vector()
        } else {
            self.minus_vector()
        };
        let i = Complex64::new(0.0, 1.0);
        let half = |x: f64| Complex64::new(0.5 * x, 0.0);
        [
            [half(1.0 + v[2]), half(v[0]) - i * (0.5 * v[1])],
            [half(v[0]) + i * (0.5 * v[1]), half(1.0 - v[2])],
        ]
    }
}

/// Outcome of measuring one qubit in a magic basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MagicOutcome {
    pub basis: MagicBasis,
    pub plus: bool,
}

/// Measures every qubit, in ascending order, along a uniformly drawn magic
/// basis, collapsing the state after each measurement.
pub fn magic_measure(state: &QuantumState, rng: &mut ChaCha8Rng) -> Vec<MagicOutcome> {
    let mut st = state.clone();
    (0..st.num_qubits())
        .map(|q| {
            let basis = MagicBasis::ALL[rng.gen_range(0..4)];
            magic_measure_qubit(&mut st, q, basis, rng)
        })
        .collect()
}

fn magic_measure_qubit(
    st: &mut QuantumState,
    q: usize,
    basis: MagicBasis,
    rng: &mut ChaCha8Rng,
) -> MagicOutcome {
    let r = st.bloch_vector(q);
    let v = basis.plus_vector();
    let p_plus = (0.5 * (1.0 + r[0] * v[0] + r[1] * v[1] + r[2] * v[2])).clamp(0.0, 1.0);
    let plus = rng.gen::<f64>() < p_plus;
    let prob = if plus { p_plus } else { 1.0 - p_plus };
    st.collapse(q, &basis.projector(plus), prob);
    MagicOutcome { basis, plus }
}

fn decode_magic(outcomes: &[MagicOutcome], a: &QracAssignment) -> Vec<u8> {
    a.slots()
        .iter()
        .map(|s| {
            let o = outcomes[s.qubit];
            o.basis.bits(o.plus)[s.axis.index()]
        })
        .collect()
}

pub fn magic_round_once(
    state: &QuantumState,
    a: &QracAssignment,
    scorer: &CutScorer,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    magic_rounding(state, a, 1, scorer, seed)
}

/// Best of `rounds` independent magic-basis measurements; ties keep the
/// earliest round.
pub fn magic_rounding(
    state: &QuantumState,
    a: &QracAssignment,
    rounds: u64,
    scorer: &CutScorer,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    check_sizes(state, a, scorer)?;
    if rounds == 0 {
        return Err(RoundingError::ZeroCount("rounds"));
    }
    let mut rng = rng_from(seed);
    let mut best: Option<(usize, Vec<u8>)> = None;
    for _ in 0..rounds {
        let bits = decode_magic(&magic_measure(state, &mut rng), a);
        let m = BitAssignment::new(bits.clone())?;
        let cut = cut_value(scorer.graph, &m)?;
        if best.as_ref().is_none_or(|(c, _)| cut > *c) {
            best = Some((cut, bits));
        }
    }
    let (_, bits) = best.expect("at least one round");
    let mut out = scorer.outcome(RoundingMethod::Magic, BitAssignment::new(bits)?)?;
    out.rounds_used = Some(rounds);
    Ok(out)
}

/// Best cut among `shots` computational-basis samples; qubit `q` is node
/// `q`'s bit.
pub fn computational_rounding(
    state: &QuantumState,
    scorer: &CutScorer,
    shots: u64,
    seed: u64,
) -> Result<RoundingOutcome, RoundingError> {
    let n = scorer.graph.num_nodes();
    if state.num_qubits() != n {
        return Err(RoundingError::QubitMismatch {
            state: state.num_qubits(),
            expected: n,
        });
    }
    if shots == 0 {
        return Err(RoundingError::ZeroCount("shots"));
    }
    let mut rng = rng_from(seed);
    let samples = sample_basis(&state.probabilities(), shots, &mut rng)?;
    let mut best: Option<(usize, usize)> = None;
    for idx in samples {
        let cut = cut_value(scorer.graph, &BitAssignment::from_mask(idx as u64, n))?;
        if best.is_none_or(|(c, _)| cut > c) {
            best = Some((cut, idx));
        }
    }
    let (_, idx) = best.expect("at least one shot");
    let mut out = scorer.outcome(
        RoundingMethod::Computational,
        BitAssignment::from_mask(idx as u64, n),
    )?;
    out.shots_used = Some(shots);
    Ok(out)
}

/// Expected approximation ratio of a single magic round,
/// `(|E|/2 − (1/6)·Σ_{(i,j)∈E} ⟨P_i P_j⟩) / cut(m*)`.
pub fn expected_magic_ratio_exact(
    state: &QuantumState,
    a: &QracAssignment,
    scorer: &CutScorer,
) -> Result<f64, RoundingError> {
    check_sizes(state, a, scorer)?;
    let n = a.num_qubits();
    let g = scorer.graph;
    let mut correlation = 0.0;
    for &(i, j) in g.edges() {
        let (si, sj) = (a.slot(i), a.slot(j));
        let p = PauliString::new(n, [(si.qubit, si.axis), (sj.qubit, sj.axis)])
            .map_err(|e| SimError::Parameter(e.to_string()))?;
        correlation += state.pauli_expectation(&p);
    }
    let expected_cut = 0.5 * g.num_edges() as f64 - correlation / 6.0;
    Ok(expected_cut / scorer.opt_cut as f64)
}
