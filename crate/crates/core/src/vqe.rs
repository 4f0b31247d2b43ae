//! VQE over the hardware-efficient ansatz with the NFT coordinate optimizer.
//!
//! Energies are maximized. Three evaluation backends sit behind one trait:
//! noiseless exact (statevector), noisy exact (density matrix through
//! [`AdjointSweep`]) and shot-based (each Pauli term sampled independently).

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::encoding::{max_eigenvalue, EncodingError};
use crate::pauli::Hamiltonian;
use crate::seed::rng_from;
use crate::simulator::{
    build_hea, expectation_exact, prepare_state, run_pure, sample_pauli, AdjointSweep, Circuit,
    Entanglement, NoiseParams, QuantumState, SimError, PURE_QUBIT_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VqeError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("energy ratio undefined for a Hamiltonian with maximum eigenvalue {0}")]
    ZeroMaximum(f64),
}

/// How energies are evaluated during optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Exact,
    Shots(u64),
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluation::Exact => f.write_str("exact"),
            Evaluation::Shots(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for Evaluation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Evaluation::Exact => s.serialize_str("exact"),
            Evaluation::Shots(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Evaluation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(Evaluation::Shots(n)),
            Raw::Word(w) if w == "exact" => Ok(Evaluation::Exact),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a shot count or \"exact\", got {w:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub layers: usize,
    pub sweeps: usize,
    pub shots_per_term: Evaluation,
    pub seed: u64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            layers: 3,
            sweeps: 2,
            shots_per_term: Evaluation::Shots(1024),
            seed: 0,
        }
    }
}

impl VqeConfig {
    pub fn exact(layers: usize, sweeps: usize, seed: u64) -> Self {
        VqeConfig {
            layers,
            sweeps,
            shots_per_term: Evaluation::Exact,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), VqeError> {
        if self.layers == 0 || self.sweeps == 0 {
            return Err(VqeError::Config(format!(
                "layers and sweeps must be at least 1, got {} and {}",
                self.layers, self.sweeps
            )));
        }
        if self.shots_per_term == Evaluation::Shots(0) {
            return Err(VqeError::Config("shots_per_term must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VqeResult {
    pub final_params: Vec<f64>,
    #[serde(skip)]
    pub candidate_state: QuantumState,
    pub energy: f64,
    /// Energy at the initial parameters followed by one entry per update.
    pub energy_trace: Vec<f64>,
    pub energy_ratio: Option<f64>,
    /// Number of energy evaluations, counting the initial and final ones.
    pub evaluations: u64,
    pub evaluation: Evaluation,
}

impl VqeResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("result serializes")
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,energy\n");
        for (i, e) in self.energy_trace.iter().enumerate() {
            out.push_str(&format!("{i},{e}\n"));
        }
        out
    }
}

/// One NFT step on a single angle, maximizing.
///
/// With `E(θ) = a·cos(θ − b) + c` the values at `θ₀` and `θ₀ ± π/2` fix
/// the sinusoid; the angle moves to its argmax and the fitted maximum is
/// returned. If the fit does not beat `e0` (flat direction or already optimal)
/// the angle is kept.
pub fn nft_update(mut evaluate: impl FnMut(f64) -> f64, theta0: f64, e0: f64) -> (f64, f64) {
    let e_plus = evaluate(theta0 + FRAC_PI_2);
    let e_minus = evaluate(theta0 - FRAC_PI_2);
    let c = 0.5 * (e_plus + e_minus);
    let sin_part = 0.5 * (e_plus - e_minus);
    let cos_part = e0 - c;
    let amplitude = cos_part.hypot(sin_part);
    if c + amplitude <= e0 {
        return (theta0, e0);
    }
    let theta = (theta0 + sin_part.atan2(cos_part)).rem_euclid(TAU);
    (theta, c + amplitude)
}

type Step<'a> = dyn FnMut(usize, f64, &mut dyn FnMut(f64) -> f64) -> f64 + 'a;

trait EnergyBackend {
    fn energy(&mut self, params: &[f64]) -> f64;

    fn sweep(&mut self, params: &mut [f64], step: &mut Step<'_>) {
        for k in 0..params.len() {
            let theta0 = params[k];
            let mut probe = params.to_vec();
            let mut eval = |theta: f64| {
                probe[k] = theta;
                self.energy(&probe)
            };
            params[k] = step(k, theta0, &mut eval);
        }
    }
}

struct PureExact<'a> {
    circuit: &'a Circuit,
    h: &'a Hamiltonian,
    diagonal: Option<Vec<f64>>,
}

impl EnergyBackend for PureExact<'_> {
    fn energy(&mut self, params: &[f64]) -> f64 {
        let psi = run_pure(self.circuit, params).expect("parameters checked");
        match &self.diagonal {
            Some(d) => psi.amplitudes().iter().zip(d).map(|(a, w)| a.norm_sqr() * w).sum(),
            None => expectation_exact(&QuantumState::Pure(psi), self.h).expect("sizes checked"),
        }
    }
}

struct DensityExact(AdjointSweep);

impl EnergyBackend for DensityExact {
    fn energy(&mut self, params: &[f64]) -> f64 {
        self.0.energy(params)
    }

    fn sweep(&mut self, params: &mut [f64], step: &mut Step<'_>) {
        self.0.sweep(params, step)
    }
}

struct Sampled<'a> {
    circuit: &'a Circuit,
    h: &'a Hamiltonian,
    noise: NoiseParams,
    shots: u64,
    rng: ChaCha8Rng,
}

impl EnergyBackend for Sampled<'_> {
    fn energy(&mut self, params: &[f64]) -> f64 {
        let state = prepare_state(self.circuit, params, &self.noise).expect("parameters checked");
        let mut e = 0.0;
        for t in self.h.terms() {
            e += t.coeff
                * sample_pauli(&state, &t.pauli, self.shots, &mut self.rng)
                    .expect("shots checked")
                    .estimate;
        }
        e
    }
}

/// Maximizes `⟨H⟩` over the ansatz and returns the candidate state at the
/// final parameters under the same noise model.
pub fn run_vqe(h: &Hamiltonian, cfg: &VqeConfig, noise: &NoiseParams) -> Result<VqeResult, VqeError> {
    cfg.validate()?;
    noise.validate()?;
    let n = h.num_qubits();
    if n > PURE_QUBIT_CAP {
        return Err(SimError::CapExceeded {
            backend: "pure",
            qubits: n,
            cap: PURE_QUBIT_CAP,
        }
        .into());
    }
    let circuit = build_hea(n, cfg.layers, Entanglement::Linear)?;
    let mut rng = rng_from(cfg.seed);
    let mut params: Vec<f64> = (0..circuit.num_params()).map(|_| rng.gen_range(0.0..TAU)).collect();

    let mut backend: Box<dyn EnergyBackend + '_> = match cfg.shots_per_term {
        Evaluation::Exact if noise.is_noiseless() => Box::new(PureExact {
            circuit: &circuit,
            h,
            diagonal: h.is_diagonal().then(|| h.diagonal()),
        }),
        Evaluation::Exact => Box::new(DensityExact(AdjointSweep::new(&circuit, *noise, h)?)),
        Evaluation::Shots(shots) => {
            if !noise.is_noiseless() {
                crate::simulator::check_density_cap(n)?;
            }
            Box::new(Sampled {
                circuit: &circuit,
                h,
                noise: *noise,
                shots,
                rng,
            })
        }
    };

    // The starting energy is taken from the first coordinate's evaluator, so
    // exact backends get it without a separate pass over the circuit.
    let mut evaluations = 0u64;
    let mut trace: Vec<f64> = Vec::new();
    for _ in 0..cfg.sweeps {
        backend.sweep(&mut params, &mut |_, theta0, eval| {
            let mut counted = |t: f64| {
                evaluations += 1;
                eval(t)
            };
            if trace.is_empty() {
                trace.push(counted(theta0));
            }
            let (theta, e) = nft_update(&mut counted, theta0, *trace.last().unwrap());
            trace.push(e);
            theta
        });
    }
    let sampled_final = match cfg.shots_per_term {
        Evaluation::Exact => None,
        Evaluation::Shots(_) => {
            evaluations += 1;
            Some(backend.energy(&params))
        }
    };
    drop(backend);

    let candidate_state = prepare_state(&circuit, &params, noise)?;
    let energy = match sampled_final {
        Some(e) => e,
        None => {
            evaluations += 1;
            expectation_exact(&candidate_state, h)?
        }
    };
    let energy_ratio = match max_eigenvalue(h) {
        Ok(max) if max > 0.0 => Some(energy / max),
        _ => None,
    };
    Ok(VqeResult {
        final_params: params,
        candidate_state,
        energy,
        energy_trace: trace,
        energy_ratio,
        evaluations,
        evaluation: cfg.shots_per_term,
    })
}

/// Achieved energy over the largest eigenvalue of `h`.
pub fn energy_ratio(result: &VqeResult, h: &Hamiltonian) -> Result<f64, VqeError> {
    let max = max_eigenvalue(h)?;
    if max <= 0.0 {
        return Err(VqeError::ZeroMaximum(max));
    }
    Ok(result.energy / max)
}

/// Re-prepares the candidate state of a finished run from its parameters.
pub fn prepare_candidate(
    num_qubits: usize,
    layers: usize,
    params: &[f64],
    noise: &NoiseParams,
) -> Result<QuantumState, VqeError> {
    let circuit = build_hea(num_qubits, layers, Entanglement::Linear)?;
    Ok(prepare_state(&circuit, params, noise)?)
}
