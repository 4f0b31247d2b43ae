use num_complex::Complex64;

use super::kernels::{self, Mat2, ONE, ZERO};
use super::SimError;
use crate::pauli::{Hamiltonian, PauliString};

/// Pure state on `n` qubits; basis index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        StateVector { num_qubits, amps }
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        StateVector { num_qubits, amps }
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::Dimension(format!("{len} is not a power of two")));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::Dimension("amplitudes have zero norm".into()));
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        kernels::apply_1q(&mut self.amps, q, m);
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        kernels::apply_cnot(&mut self.amps, control, target);
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn scale(&mut self, f: f64) {
        self.amps.iter_mut().for_each(|a| *a *= f);
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let act = p.action();
        let mut acc = ZERO;
        for (b, &a) in self.amps.iter().enumerate() {
            acc += self.amps[b ^ act.x_mask].conj() * act.phase(b) * a;
        }
        acc.re
    }
}

/// Mixed state on `n` qubits, row-major `2^n × 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero_state(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        DensityMatrix { num_qubits, data }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut data = vec![ZERO; dim * dim];
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            data[i * dim + i] = w;
        }
        DensityMatrix { num_qubits, data }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(a[r] * a[c].conj());
            }
        }
        DensityMatrix {
            num_qubits: psi.num_qubits(),
            data,
        }
    }

    /// Tensor product of one-qubit states, `factors[q]` on qubit `q`.
    pub fn product(factors: &[Mat2]) -> Self {
        let n = factors.len();
        let dim = 1usize << n;
        let mut data = vec![ONE; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut x = ONE;
                for (q, f) in factors.iter().enumerate() {
                    x *= f[(r >> q) & 1][(c >> q) & 1];
                }
                data[r * dim + c] = x;
            }
        }
        DensityMatrix { num_qubits: n, data }
    }

    pub fn from_row_major(num_qubits: usize, data: Vec<Complex64>) -> Result<Self, SimError> {
        let dim = 1usize << num_qubits;
        if data.len() != dim * dim {
            return Err(SimError::Dimension(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(DensityMatrix { num_qubits, data })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::hermitian_eigenvalues(self.dim(), &self.data)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// `ρ ← A ρ A†` on qubit `q`.
    pub fn conjugate_1q(&mut self, q: usize, a: &Mat2) {
        kernels::conjugate_1q(&mut self.data, self.num_qubits, q, a);
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        kernels::conjugate_cnot(&mut self.data, self.num_qubits, control, target);
    }

    /// CNOT followed by two-qubit depolarizing on the pair.
    pub fn noisy_cnot(&mut self, control: usize, target: usize, eps: f64) {
        kernels::cnot_depolarize(&mut self.data, self.num_qubits, control, target, eps);
    }

    pub fn pair_depolarize(&mut self, a: usize, b: usize, eps: f64) {
        kernels::pair_depolarize(&mut self.data, self.num_qubits, a, b, eps);
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).collect()
    }

    /// `Tr(Pρ) = Σ_c phase(c) ρ[c, c ⊕ x]` where `P|c> = phase(c)|c ⊕ x>`.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let act = p.action();
        let dim = self.dim();
        let mut acc = ZERO;
        for c in 0..dim {
            acc += act.phase(c) * self.data[c * dim + (c ^ act.x_mask)];
        }
        acc.re
    }

    /// Reduced state of one qubit.
    pub fn reduced_qubit(&self, q: usize) -> Mat2 {
        let dim = self.dim();
        let mut out = [[ZERO; 2]; 2];
        let m = 1usize << q;
        for rest in (0..dim).filter(|i| i & m == 0) {
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] += self.get(rest | (a << q), rest | (b << q));
                }
            }
        }
        out
    }
}

/// The candidate state handed from optimization to rounding.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn num_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.num_qubits(),
            QuantumState::Mixed(d) => d.num_qubits(),
        }
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        match self {
            QuantumState::Pure(s) => s.pauli_expectation(p),
            QuantumState::Mixed(d) => d.pauli_expectation(p),
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure(s) => s.probabilities(),
            QuantumState::Mixed(d) => d.probabilities(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(s) => DensityMatrix::from_pure(s),
            QuantumState::Mixed(d) => d.clone(),
        }
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of qubit `q`.
    pub fn bloch_vector(&self, q: usize) -> [f64; 3] {
        let n = self.num_qubits();
        crate::pauli::PauliAxis::ALL.map(|axis| {
            let p = PauliString::single(n, q, axis).expect("qubit in range");
            self.pauli_expectation(&p)
        })
    }

    /// Projects qubit `q` with `proj` and renormalizes, given the outcome
    /// probability `prob > 0`.
    pub fn collapse(&mut self, q: usize, proj: &Mat2, prob: f64) {
        match self {
            QuantumState::Pure(s) => {
                s.apply_1q(q, proj);
                s.scale(1.0 / prob.sqrt());
            }
            QuantumState::Mixed(d) => {
                d.conjugate_1q(q, proj);
                d.data.iter_mut().for_each(|x| *x /= prob);
            }
        }
    }

    /// Applies a one-qubit unitary (pure) or conjugation (mixed).
    pub fn apply_1q(&mut self, q: usize, u: &Mat2) {
        match self {
            QuantumState::Pure(s) => s.apply_1q(q, u),
            QuantumState::Mixed(d) => d.conjugate_1q(q, u),
        }
    }
}

impl From<StateVector> for QuantumState {
    fn from(s: StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(d: DensityMatrix) -> Self {
        QuantumState::Mixed(d)
    }
}

/// `⟨H⟩ = Σ coeff · Tr(Pρ)`.
pub fn expectation_exact(state: &QuantumState, h: &Hamiltonian) -> Result<f64, SimError> {
    if state.num_qubits() != h.num_qubits() {
        return Err(SimError::Dimension(format!(
            "state has {} qubits, Hamiltonian {}",
            state.num_qubits(),
            h.num_qubits()
        )));
    }
    Ok(h.terms()
        .iter()
        .map(|t| {
            if t.pauli.is_identity() {
                t.coeff
            } else {
                t.coeff * state.pauli_expectation(&t.pauli)
            }
        })
        .sum())
}
