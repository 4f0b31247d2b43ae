//! Exact noisy coordinate sweeps without re-simulating the circuit per
//! evaluation.
//!
//! The circuit is cut into ops: maximal runs of one-qubit gates on a single
//! qubit, and CNOTs (each followed by its pair depolarizing). For an op at
//! position `k` the energy as a function of its unitary `U` is
//! `Tr(O_k · U ρ_k U†)`, where `ρ_k` is the state before the op and `O_k` the
//! observable propagated backwards through everything after it. One pass over
//! `(O_k, ρ_k)` yields a 16-entry transfer tensor, after which every energy
//! evaluation for that op costs O(1).
//!
//! `ρ` flows forward and `O` backwards. A recursive bisection over the op
//! list keeps only `O(log L)` observables alive and applies `O(L log L)` ops
//! in total per sweep; a wider split trades memory for fewer backward passes.

use num_complex::Complex64;

use super::kernels::{self, mat_mul, Mat2, ONE, ZERO};
use super::{check_density_cap, Circuit, DensityMatrix, Gate, NoiseParams, SimError};
use crate::pauli::Hamiltonian;

const BRANCHING: usize = 4;

#[derive(Debug, Clone)]
enum Op {
    Block { qubit: usize, gates: Vec<Gate> },
    Cnot { control: usize, target: usize },
}

/// Callback for one coordinate: receives the parameter index, its current
/// value and an exact evaluator of the energy as a function of that value,
/// and returns the new value.
pub type StepFn<'a> = dyn FnMut(usize, f64, &mut dyn FnMut(f64) -> f64) -> f64 + 'a;

pub struct AdjointSweep {
    n: usize,
    num_params: usize,
    ops: Vec<Op>,
    noise: NoiseParams,
    observable: Vec<Complex64>,
}

impl AdjointSweep {
    pub fn new(circuit: &Circuit, noise: NoiseParams, h: &Hamiltonian) -> Result<Self, SimError> {
        noise.validate()?;
        let n = circuit.num_qubits();
        check_density_cap(n)?;
        if h.num_qubits() != n {
            return Err(SimError::Dimension(format!(
                "circuit has {n} qubits, Hamiltonian {}",
                h.num_qubits()
            )));
        }
        let mut ops: Vec<Op> = Vec::new();
        for &g in circuit.gates() {
            match g {
                Gate::Cnot { control, target } => ops.push(Op::Cnot { control, target }),
                _ => {
                    let q = g.single_qubit().expect("one-qubit gate");
                    match ops.last_mut() {
                        Some(Op::Block { qubit, gates }) if *qubit == q => gates.push(g),
                        _ => ops.push(Op::Block {
                            qubit: q,
                            gates: vec![g],
                        }),
                    }
                }
            }
        }
        // Heisenberg picture of the final global channel:
        // O ← f·H + (1−f)·Tr(H)/d · I.
        let mut observable = h.to_dense();
        let dim = 1usize << n;
        kernels::depolarize_global(&mut observable, dim, noise.global_survival());
        Ok(AdjointSweep {
            n,
            num_params: circuit.num_params(),
            ops,
            noise,
            observable,
        })
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn energy(&self, params: &[f64]) -> f64 {
        let mut rho = DensityMatrix::zero_state(self.n);
        for op in &self.ops {
            self.forward(op, rho.data_mut(), params);
        }
        hs_inner(&self.observable, rho.data())
    }

    /// One sequential pass over all parameters in circuit order.
    pub fn sweep(&self, params: &mut [f64], step: &mut StepFn<'_>) {
        assert_eq!(params.len(), self.num_params, "parameter count");
        if self.ops.is_empty() {
            return;
        }
        let mut rho = DensityMatrix::zero_state(self.n);
        let mut pool = Vec::new();
        let obs = self.observable.clone();
        self.visit(0, self.ops.len(), obs, rho.data_mut(), &mut pool, params, step);
    }

    /// Processes ops `[a, b)` given the observable after `b`. The range is
    /// split into up to `BRANCHING` children whose boundary observables are
    /// obtained by one backward pass from `b`.
    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        a: usize,
        b: usize,
        obs: Vec<Complex64>,
        rho: &mut [Complex64],
        pool: &mut Vec<Vec<Complex64>>,
        params: &mut [f64],
        step: &mut StepFn<'_>,
    ) {
        if b - a == 1 {
            self.leaf(a, &obs, rho, params, step);
            pool.push(obs);
            return;
        }
        let parts = BRANCHING.min(b - a);
        let cuts: Vec<usize> = (0..=parts).map(|i| a + (b - a) * i / parts).collect();
        // boundary observables, innermost last: bounds[i] sits at cuts[i + 1]
        let mut bounds: Vec<Vec<Complex64>> = Vec::with_capacity(parts);
        bounds.push(obs);
        for i in (1..parts).rev() {
            let prev = bounds.last().expect("non-empty");
            let mut next = match pool.pop() {
                Some(mut buf) => {
                    buf.copy_from_slice(prev);
                    buf
                }
                None => prev.clone(),
            };
            for op in self.ops[cuts[i]..cuts[i + 1]].iter().rev() {
                self.backward(op, &mut next, params);
            }
            bounds.push(next);
        }
        for i in 0..parts {
            let o = bounds.pop().expect("one observable per child");
            self.visit(cuts[i], cuts[i + 1], o, rho, pool, params, step);
        }
    }

    fn leaf(
        &self,
        k: usize,
        obs: &[Complex64],
        rho: &mut [Complex64],
        params: &mut [f64],
        step: &mut StepFn<'_>,
    ) {
        let op = &self.ops[k];
        if let Op::Block { qubit, gates } = op {
            if gates.iter().any(|g| g.param().is_some()) {
                let m = kernels::transfer(obs, rho, self.n, *qubit);
                for g in gates {
                    let Some(k) = g.param() else { continue };
                    let theta0 = params[k];
                    let mut eval = |theta: f64| {
                        let mut p = params.to_vec();
                        p[k] = theta;
                        kernels::contract(&m, &block_unitary(gates, &p))
                    };
                    params[k] = step(k, theta0, &mut eval);
                }
            }
        }
        self.forward(op, rho, params);
    }

    fn forward(&self, op: &Op, rho: &mut [Complex64], params: &[f64]) {
        match op {
            Op::Block { qubit, gates } => {
                kernels::conjugate_1q(rho, self.n, *qubit, &block_unitary(gates, params))
            }
            Op::Cnot { control, target } => {
                kernels::cnot_depolarize(rho, self.n, *control, *target, self.noise.cnot_error)
            }
        }
    }

    fn backward(&self, op: &Op, obs: &mut [Complex64], params: &[f64]) {
        match op {
            Op::Block { qubit, gates } => {
                let u = block_unitary(gates, params);
                kernels::conjugate_1q(obs, self.n, *qubit, &kernels::dagger(&u));
            }
            Op::Cnot { control, target } => {
                kernels::cnot_depolarize(obs, self.n, *control, *target, self.noise.cnot_error)
            }
        }
    }
}

fn block_unitary(gates: &[Gate], params: &[f64]) -> Mat2 {
    gates.iter().fold([[ONE, ZERO], [ZERO, ONE]], |acc, g| {
        mat_mul(&g.matrix(params).expect("one-qubit gate"), &acc)
    })
}

/// `Tr(O ρ)` for Hermitian `O` and `ρ`.
fn hs_inner(o: &[Complex64], rho: &[Complex64]) -> f64 {
    o.iter().zip(rho).map(|(x, y)| (x.conj() * y).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliAxis, PauliString};
    use crate::simulator::{build_hea, expectation_exact, run_density, Entanglement, QuantumState};
    use rand::{Rng, SeedableRng};

    fn random_hamiltonian(n: usize, seed: u64) -> Hamiltonian {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<(f64, PauliString)> = (0..8)
            .map(|_| {
                let f: Vec<(usize, PauliAxis)> = (0..n)
                    .filter_map(|q| match rng.gen_range(0..4) {
                        0 => None,
                        k => Some((q, PauliAxis::ALL[k - 1])),
                    })
                    .collect();
                (rng.gen_range(-1.0..1.0), PauliString::new(n, f).unwrap())
            })
            .collect();
        Hamiltonian::from_terms(n, terms).unwrap()
    }

    #[test]
    fn evaluator_matches_full_simulation() {
        let n = 3;
        let c = build_hea(n, 2, Entanglement::Linear).unwrap();
        let noise = NoiseParams {
            global_p: 0.95,
            global_n: 4,
            cnot_error: 0.05,
        };
        let h = random_hamiltonian(n, 4);
        let engine = AdjointSweep::new(&c, noise, &h).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut params: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(0.0..6.0)).collect();

        let full = |p: &[f64]| {
            let rho = run_density(&c, p, &noise).unwrap();
            expectation_exact(&QuantumState::Mixed(rho), &h).unwrap()
        };
        assert!((engine.energy(&params) - full(&params)).abs() < 1e-12);

        let mut visited = Vec::new();
        let mut shadow = params.clone();
        engine.sweep(&mut params, &mut |k, theta0, eval| {
            assert_eq!(theta0, shadow[k]);
            for probe in [theta0, theta0 + 0.7, theta0 - 2.1] {
                let mut p = shadow.clone();
                p[k] = probe;
                assert!((eval(probe) - full(&p)).abs() < 1e-11);
            }
            // move every coordinate so later checks see updated earlier ones
            let new = theta0 + 0.25 * (k as f64 + 1.0);
            shadow[k] = new;
            visited.push(k);
            new
        });
        assert_eq!(visited, (0..c.num_params()).collect::<Vec<_>>());
        assert_eq!(params, shadow);
    }

    #[test]
    fn rejects_mismatched_hamiltonian() {
        let c = build_hea(2, 1, Entanglement::Linear).unwrap();
        let h = Hamiltonian::zero(3);
        assert!(AdjointSweep::new(&c, NoiseParams::noiseless(), &h).is_err());
    }
}
