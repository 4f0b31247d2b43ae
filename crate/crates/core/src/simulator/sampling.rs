use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::hadamard;
use super::kernels::{Mat2, ONE, ZERO};
use super::{QuantumState, SimError};
use crate::pauli::{PauliAxis, PauliString};

/// Outcome of measuring one Pauli string `shots` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliSample {
    /// `1 − 2h/S`.
    pub estimate: f64,
    /// `h`, the number of parity-1 outcomes.
    pub ones: u64,
    pub shots: u64,
}

/// Per-node measurement record: `outcomes[i][j]` is the parity bit of shot
/// `i` for column `j`, and `counts[j]` the column sum `h₁^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotTable {
    outcomes: Vec<Vec<u8>>,
    counts: Vec<u64>,
}

impl ShotTable {
    pub fn new(shots: usize, columns: usize) -> Self {
        ShotTable {
            outcomes: vec![vec![0; columns]; shots],
            counts: vec![0; columns],
        }
    }

    /// Fills column `j` from a list of parity bits, one per shot.
    pub fn set_column(&mut self, j: usize, bits: &[u8]) {
        assert_eq!(bits.len(), self.outcomes.len(), "one bit per shot");
        let mut h = 0;
        for (row, &b) in self.outcomes.iter_mut().zip(bits) {
            row[j] = b;
            h += b as u64;
        }
        self.counts[j] = h;
    }

    pub fn shots(&self) -> usize {
        self.outcomes.len()
    }

    pub fn columns(&self) -> usize {
        self.counts.len()
    }

    pub fn outcomes(&self) -> &[Vec<u8>] {
        &self.outcomes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Trace estimate `1 − 2h₁^j/S` for column `j`.
    pub fn estimate(&self, j: usize) -> f64 {
        1.0 - 2.0 * self.counts[j] as f64 / self.shots() as f64
    }
}

fn basis_change(axis: PauliAxis) -> Option<Mat2> {
    let i = num_complex::Complex64::new(0.0, 1.0);
    match axis {
        PauliAxis::Z => None,
        PauliAxis::X => Some(hadamard()),
        // H · S†
        PauliAxis::Y => Some(super::kernels::mat_mul(
            &hadamard(),
            &[[ONE, ZERO], [ZERO, -i]],
        )),
    }
}

/// Computational-basis distribution after rotating every qubit in the support
/// of `ps` into its eigenbasis.
pub fn rotated_probabilities(state: &QuantumState, ps: &PauliString) -> Vec<f64> {
    let mut rotated = state.clone();
    for (&q, &axis) in ps.factors() {
        if let Some(u) = basis_change(axis) {
            rotated.apply_1q(q, &u);
        }
    }
    rotated.probabilities()
}

/// Draws `shots` computational-basis outcomes.
pub fn sample_basis<R: Rng + ?Sized>(
    probs: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<Vec<usize>, SimError> {
    let clipped = probs.iter().map(|p| p.max(0.0));
    let dist = WeightedIndex::new(clipped)
        .map_err(|e| SimError::Parameter(format!("bad outcome distribution: {e}")))?;
    Ok((0..shots).map(|_| dist.sample(rng)).collect())
}

/// Estimates `Tr(Pρ)` from `shots` projective measurements.
pub fn sample_pauli<R: Rng + ?Sized>(
    state: &QuantumState,
    ps: &PauliString,
    shots: u64,
    rng: &mut R,
) -> Result<PauliSample, SimError> {
    if shots == 0 {
        return Err(SimError::Parameter("shots must be at least 1".into()));
    }
    if ps.num_qubits() != state.num_qubits() {
        return Err(SimError::Dimension(format!(
            "Pauli string on {} qubits, state on {}",
            ps.num_qubits(),
            state.num_qubits()
        )));
    }
    if ps.is_identity() {
        return Ok(PauliSample {
            estimate: 1.0,
            ones: 0,
            shots,
        });
    }
    let support = ps.support_mask();
    let outcomes = sample_basis(&rotated_probabilities(state, ps), shots, rng)?;
    let ones = outcomes
        .iter()
        .filter(|&&b| (b & support).count_ones() % 2 == 1)
        .count() as u64;
    Ok(PauliSample {
        estimate: 1.0 - 2.0 * ones as f64 / shots as f64,
        ones,
        shots,
    })
}
