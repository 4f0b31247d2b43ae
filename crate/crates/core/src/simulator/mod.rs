//! Gate-level simulation: pure states, density matrices with depolarizing
//! noise, exact Pauli expectations and shot sampling.

mod adjoint;
mod circuit;
pub mod kernels;
mod sampling;
mod state;

pub use adjoint::{AdjointSweep, StepFn};
pub use circuit::{build_hea, hadamard, ry, rz, Circuit, Entanglement, Gate};
pub use sampling::{rotated_probabilities, sample_basis, sample_pauli, PauliSample, ShotTable};
pub use state::{expectation_exact, DensityMatrix, QuantumState, StateVector};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest register for the pure-state backend.
pub const PURE_QUBIT_CAP: usize = 24;
/// Largest register for the density-matrix backend.
pub const DENSITY_QUBIT_CAP: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("circuit takes {expected} parameters, got {got}")]
    ParamMismatch { expected: usize, got: usize },
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("{backend} backend is limited to {cap} qubits, requested {qubits}")]
    CapExceeded {
        backend: &'static str,
        qubits: usize,
        cap: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Depolarizing noise configuration.
///
/// `global_p` is the survival probability of one application of the global
/// channel and `global_n` the number of applications at the end of the
/// circuit; `cnot_error` is the two-qubit depolarizing probability applied to
/// the pair after every CNOT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    pub global_p: f64,
    pub global_n: u32,
    pub cnot_error: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams::noiseless()
    }
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        NoiseParams {
            global_p: 1.0,
            global_n: 0,
            cnot_error: 0.0,
        }
    }

    pub fn cnot_depolarizing(error: f64) -> Self {
        NoiseParams {
            cnot_error: error,
            ..Self::noiseless()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.global_p) || !in_unit(self.cnot_error) {
            return Err(SimError::Parameter(format!(
                "noise probabilities must lie in [0, 1]: {self:?}"
            )));
        }
        Ok(())
    }

    /// Overall factor `p^N` of the global channel.
    pub fn global_survival(&self) -> f64 {
        self.global_p.powi(self.global_n as i32)
    }

    pub fn is_noiseless(&self) -> bool {
        self.cnot_error == 0.0 && self.global_survival() == 1.0
    }
}

pub fn run_pure(c: &Circuit, params: &[f64]) -> Result<StateVector, SimError> {
    c.check_params(params)?;
    if c.num_qubits() > PURE_QUBIT_CAP {
        return Err(SimError::CapExceeded {
            backend: "pure",
            qubits: c.num_qubits(),
            cap: PURE_QUBIT_CAP,
        });
    }
    let mut psi = StateVector::zero_state(c.num_qubits());
    for g in c.gates() {
        match *g {
            Gate::Cnot { control, target } => psi.apply_cnot(control, target),
            other => {
                let q = other.single_qubit().expect("one-qubit gate");
                psi.apply_1q(q, &other.matrix(params).expect("one-qubit gate"));
            }
        }
    }
    Ok(psi)
}

pub fn check_density_cap(n: usize) -> Result<(), SimError> {
    if n > DENSITY_QUBIT_CAP {
        return Err(SimError::CapExceeded {
            backend: "density",
            qubits: n,
            cap: DENSITY_QUBIT_CAP,
        });
    }
    Ok(())
}

/// Evolves `|0…0⟩⟨0…0|` through the circuit; each CNOT is followed by
/// two-qubit depolarizing on its pair and the global channel is applied once
/// at the end.
pub fn run_density(
    c: &Circuit,
    params: &[f64],
    noise: &NoiseParams,
) -> Result<DensityMatrix, SimError> {
    c.check_params(params)?;
    noise.validate()?;
    check_density_cap(c.num_qubits())?;
    let mut rho = DensityMatrix::zero_state(c.num_qubits());
    for g in c.gates() {
        match *g {
            Gate::Cnot { control, target } => {
                rho.noisy_cnot(control, target, noise.cnot_error);
            }
            other => {
                let q = other.single_qubit().expect("one-qubit gate");
                rho.conjugate_1q(q, &other.matrix(params).expect("one-qubit gate"));
            }
        }
    }
    Ok(global_depolarize(rho, noise.global_p, noise.global_n))
}

/// `D_p^N(ρ) = p^N ρ + (1 − p^N) I/2^n`.
pub fn global_depolarize(mut rho: DensityMatrix, p: f64, n: u32) -> DensityMatrix {
    let f = p.powi(n as i32);
    let dim = rho.dim();
    kernels::depolarize_global(rho.data_mut(), dim, f);
    rho
}

/// Prepares the circuit output on the cheapest backend that represents the
/// noise model exactly.
pub fn prepare_state(
    c: &Circuit,
    params: &[f64],
    noise: &NoiseParams,
) -> Result<QuantumState, SimError> {
    if noise.is_noiseless() {
        run_pure(c, params).map(QuantumState::Pure)
    } else {
        run_density(c, params, noise).map(QuantumState::Mixed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliAxis, PauliString};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn z(n: usize, q: usize) -> PauliString {
        PauliString::single(n, q, PauliAxis::Z).unwrap()
    }

    fn random_circuit(n: usize, gates: usize, seed: u64) -> (Circuit, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n);
        for _ in 0..gates {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..6) {
                0 => drop(c.ry(q).unwrap()),
                1 => drop(c.rz(q).unwrap()),
                2 => c.h(q).unwrap(),
                3 => c.s(q).unwrap(),
                4 => c.sdg(q).unwrap(),
                _ if n > 1 => {
                    let t = (q + rng.gen_range(1..n)) % n;
                    c.cnot(q, t).unwrap()
                }
                _ => c.h(q).unwrap(),
            }
        }
        let params = (0..c.num_params()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        (c, params)
    }

    #[test]
    fn pure_basics() {
        let mut c = Circuit::new(1);
        c.h(0).unwrap();
        let psi = run_pure(&c, &[]).unwrap();
        for a in psi.amplitudes() {
            assert!((a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        let mut c = Circuit::new(1);
        c.ry(0).unwrap();
        let psi = run_pure(&c, &[PI]).unwrap();
        assert!((psi.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
        let psi = run_pure(&Circuit::new(3), &[]).unwrap();
        assert_eq!(psi, StateVector::zero_state(3));
        assert!(matches!(
            run_pure(&c, &[]),
            Err(SimError::ParamMismatch { expected: 1, got: 0 })
        ));
    }

    #[test]
    fn full_depolarization_after_cnot() {
        let mut c = Circuit::new(3);
        c.cnot(0, 2).unwrap();
        let rho = run_density(&c, &[], &NoiseParams::cnot_depolarizing(1.0)).unwrap();
        // reduced state on qubits (0,2) is I/4: all one- and two-body Paulis vanish
        for a in PauliAxis::ALL {
            for b in PauliAxis::ALL {
                let p = PauliString::new(3, [(0, a), (2, b)]).unwrap();
                assert!(rho.pauli_expectation(&p).abs() < 1e-15);
            }
            assert!(rho.pauli_expectation(&PauliString::single(3, 0, a).unwrap()).abs() < 1e-15);
        }
        // the untouched qubit stays in |0>
        assert!((rho.pauli_expectation(&z(3, 1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_state_zz_damped_by_cnot_error() {
        let mut c = Circuit::new(2);
        c.h(0).unwrap();
        c.cnot(0, 1).unwrap();
        let rho = run_density(&c, &[], &NoiseParams::cnot_depolarizing(0.01)).unwrap();
        let zz = PauliString::new(2, [(0, PauliAxis::Z), (1, PauliAxis::Z)]).unwrap();
        assert!((rho.pauli_expectation(&zz) - 0.99).abs() < 1e-12);
    }

    #[test]
    fn global_depolarize_examples() {
        let rho = global_depolarize(DensityMatrix::zero_state(1), 0.5, 1);
        assert!((rho.pauli_expectation(&z(1, 0)) - 0.5).abs() < 1e-15);

        let mut c = Circuit::new(2);
        c.h(0).unwrap();
        c.ry(1).unwrap();
        let rho = run_density(&c, &[0.7], &NoiseParams::noiseless()).unwrap();
        assert_eq!(global_depolarize(rho.clone(), 0.3, 0), rho);

        let mut plus = DensityMatrix::zero_state(1);
        plus.conjugate_1q(0, &hadamard());
        let out = global_depolarize(plus, 0.9, 2);
        let x = PauliString::single(1, 0, PauliAxis::X).unwrap();
        assert!((out.pauli_expectation(&x) - 0.81).abs() < 1e-12);
    }

    #[test]
    fn exact_expectations() {
        let zero: QuantumState = StateVector::zero_state(1).into();
        let h_z = crate::pauli::Hamiltonian::from_terms(1, [(1.0, z(1, 0))]).unwrap();
        assert_eq!(expectation_exact(&zero, &h_z).unwrap(), 1.0);
        let h_x = crate::pauli::Hamiltonian::from_terms(
            1,
            [(1.0, PauliString::single(1, 0, PauliAxis::X).unwrap())],
        )
        .unwrap();
        assert_eq!(expectation_exact(&zero, &h_x).unwrap(), 0.0);
        let two: QuantumState = StateVector::zero_state(2).into();
        assert!(expectation_exact(&two, &h_x).is_err());
    }

    #[test]
    fn density_cap_enforced() {
        let c = Circuit::new(15);
        assert!(matches!(
            run_density(&c, &[], &NoiseParams::cnot_depolarizing(0.1)),
            Err(SimError::CapExceeded { .. })
        ));
    }

    #[test]
    fn invalid_noise_rejected() {
        let c = Circuit::new(1);
        let bad = NoiseParams {
            cnot_error: 1.5,
            ..NoiseParams::noiseless()
        };
        assert!(run_density(&c, &[], &bad).is_err());
    }

    #[test]
    fn depolarize_semigroup_and_trace() {
        let (c, params) = random_circuit(3, 20, 11);
        let rho = run_density(&c, &params, &NoiseParams::noiseless()).unwrap();
        let twice = global_depolarize(global_depolarize(rho.clone(), 0.8, 1), 0.8, 1);
        let once = global_depolarize(rho, 0.8, 2);
        for (a, b) in twice.data().iter().zip(once.data()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((once.trace().re - 1.0).abs() < 1e-14);
        assert!(once.max_hermiticity_error() < 1e-14);
    }

    #[test]
    fn noisy_states_stay_physical() {
        let (c, params) = random_circuit(3, 30, 5);
        let noise = NoiseParams {
            global_p: 0.9,
            global_n: 3,
            cnot_error: 0.2,
        };
        let rho = run_density(&c, &params, &noise).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.max_hermiticity_error() < 1e-12);
        assert!(rho.min_eigenvalue() >= -1e-8);
    }

    fn all_paulis(n: usize) -> Vec<PauliString> {
        (0..4usize.pow(n as u32))
            .map(|mut k| {
                let mut f = Vec::new();
                for q in 0..n {
                    match k % 4 {
                        1 => f.push((q, PauliAxis::X)),
                        2 => f.push((q, PauliAxis::Y)),
                        3 => f.push((q, PauliAxis::Z)),
                        _ => {}
                    }
                    k /= 4;
                }
                PauliString::new(n, f).unwrap()
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn noiseless_density_matches_pure(n in 1usize..=6, gates in 0usize..40, seed in any::<u64>()) {
            let (c, params) = random_circuit(n, gates, seed);
            let psi = run_pure(&c, &params).unwrap();
            prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
            let rho = run_density(&c, &params, &NoiseParams::noiseless()).unwrap();
            let outer = DensityMatrix::from_pure(&psi);
            for (a, b) in rho.data().iter().zip(outer.data()) {
                prop_assert!((a - b).norm() < 1e-9);
            }
        }

        #[test]
        fn global_noise_scales_every_pauli(n in 1usize..=3, seed in any::<u64>(),
                                           p in 0.0f64..1.0, times in 0u32..20) {
            let (c, params) = random_circuit(n, 25, seed);
            let rho = run_density(&c, &params, &NoiseParams::noiseless()).unwrap();
            let noisy = global_depolarize(rho.clone(), p, times);
            let f = p.powi(times as i32);
            for pauli in all_paulis(n).iter().filter(|p| !p.is_identity()) {
                let want = f * rho.pauli_expectation(pauli);
                prop_assert!((noisy.pauli_expectation(pauli) - want).abs() < 1e-9);
            }
        }
    }
}
