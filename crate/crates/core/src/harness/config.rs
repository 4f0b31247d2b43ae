use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::simulator::NoiseParams;
use crate::vqe::{Evaluation, VqeConfig};

/// Encoding plus rounding pipeline applied to each graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ising,
    QracPauli,
    QracMagic,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ising, Method::QracPauli, Method::QracMagic];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ising => "ising",
            Method::QracPauli => "qrac-pauli",
            Method::QracMagic => "qrac-magic",
        }
    }

    /// Label of the Hamiltonian the method optimizes. Methods sharing it
    /// share the VQE run.
    pub fn hamiltonian_label(self) -> &'static str {
        match self {
            Method::Ising => "ising",
            Method::QracPauli | Method::QracMagic => "qrac",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown method {s:?}")))
    }
}

/// Everything that determines an experiment's output.
///
/// Defaults are the desk-scale protocol: sizes 8 and 12, ten graphs each,
/// exact-evaluation VQE with three layers and two sweeps, noiseless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub node_sizes: Vec<usize>,
    pub graphs_per_size: usize,
    pub degree: usize,
    pub methods: Vec<Method>,
    /// `vqe.seed` is ignored; every run draws its seed from `master_seed`.
    pub vqe: VqeConfig,
    pub noise: NoiseParams,
    pub magic_rounds: u64,
    /// Trace evaluation for Pauli rounding.
    pub pauli_rounding: Evaluation,
    /// Computational-basis samples for the Ising readout.
    pub readout_shots: u64,
    pub master_seed: u64,
    pub output_path: PathBuf,
    /// Wall-clock time makes the output nondeterministic, so it is opt-in.
    pub record_timing: bool,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            node_sizes: vec![8, 12],
            graphs_per_size: 10,
            degree: 3,
            methods: Method::ALL.to_vec(),
            vqe: VqeConfig::exact(3, 2, 0),
            noise: NoiseParams::noiseless(),
            magic_rounds: 1024,
            pauli_rounding: Evaluation::Exact,
            readout_shots: 1024,
            master_seed: 0,
            output_path: PathBuf::from("results.jsonl"),
            record_timing: false,
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Structural checks only. Backend caps are enforced per record so that
    /// an oversized arm shows up as a failed row instead of aborting the run.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.node_sizes.is_empty() || self.methods.is_empty() {
            return bad("node_sizes and methods must be non-empty".into());
        }
        if self.graphs_per_size == 0 {
            return bad("graphs_per_size must be at least 1".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("method {m} listed twice"));
            }
        }
        for (i, n) in self.node_sizes.iter().enumerate() {
            if self.node_sizes[..i].contains(n) {
                return bad(format!("node size {n} listed twice"));
            }
            if *n <= self.degree || n * self.degree % 2 != 0 {
                return bad(format!(
                    "no {}-regular graph on {n} nodes",
                    self.degree
                ));
            }
        }
        if self.magic_rounds == 0 || self.readout_shots == 0 {
            return bad("magic_rounds and readout_shots must be at least 1".into());
        }
        if self.pauli_rounding == Evaluation::Shots(0) {
            return bad("pauli_rounding shots must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        self.vqe.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.noise.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }
}
