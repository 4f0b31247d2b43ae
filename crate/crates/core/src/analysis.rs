//! Closed-form shot-count and noise analysis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{0}")]
    Domain(String),
    #[error("no crossover below N1 = {limit:e}: the noise floor {floor} is not below 5/9")]
    NoCrossover { limit: f64, floor: f64 },
}

fn domain(msg: impl Into<String>) -> AnalysisError {
    AnalysisError::Domain(msg.into())
}

fn check_unit_open(name: &str, x: f64) -> Result<(), AnalysisError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("{name} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

fn check_survival(p: f64) -> Result<(), AnalysisError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("p must lie in (0, 1], got {p}")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<(), AnalysisError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn check_cut(edges: usize, opt_cut: usize) -> Result<(), AnalysisError> {
    if opt_cut == 0 {
        return Err(domain("opt_cut must be positive"));
    }
    if opt_cut > edges {
        return Err(domain(format!("opt_cut {opt_cut} exceeds |E| = {edges}")));
    }
    Ok(())
}

/// Ceiling that forgives floating-point noise just above an integer.
fn ceil_tolerant(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Smallest `S` with `S ≥ ln(1/δ)/(2ε²)`.
pub fn min_shots(delta: f64, epsilon: f64) -> Result<u64, AnalysisError> {
    check_unit_open("delta", delta)?;
    check_positive("epsilon", epsilon)?;
    Ok(ceil_tolerant((1.0 / delta).ln() / (2.0 * epsilon * epsilon)) as u64)
}

/// Bias `ε = −p^N·Tr(P_jρ)/2` of a negative trace after `N` depolarizing
/// applications.
pub fn epsilon_under_noise(p: f64, n: u32, trace: f64) -> Result<f64, AnalysisError> {
    check_survival(p)?;
    if !(trace < 0.0 && trace >= -1.0) {
        return Err(domain(format!("trace must lie in [-1, 0), got {trace}")));
    }
    Ok(-p.powi(n as i32) * trace / 2.0)
}

/// `|V|·ln|V|/ε²`, the order of the total shot budget.
pub fn shots_order(num_nodes: usize, epsilon: f64) -> Result<f64, AnalysisError> {
    if num_nodes < 2 {
        return Err(domain(format!("|V| must be at least 2, got {num_nodes}")));
    }
    check_positive("epsilon", epsilon)?;
    let v = num_nodes as f64;
    Ok(v * v.ln() / (epsilon * epsilon))
}

/// `p^{(3/4)·l·|V|}`.
pub fn shot_ratio_qrac_vs_ising(p: f64, layers: usize, num_nodes: usize) -> Result<f64, AnalysisError> {
    check_survival(p)?;
    Ok(p.powf(0.75 * layers as f64 * num_nodes as f64))
}

/// `p^{N₁} + (1 − p^{N₁})·|E|/(2·cut*)`.
pub fn expected_ratio_ising(p: f64, n1: f64, edges: usize, opt_cut: usize) -> Result<f64, AnalysisError> {
    noisy_ratio(1.0, p, n1, edges, opt_cut)
}

/// `(5/9)·p^{N₃} + (1 − p^{N₃})·|E|/(2·cut*)`.
pub fn expected_ratio_qrac_lower(
    p: f64,
    n3: f64,
    edges: usize,
    opt_cut: usize,
) -> Result<f64, AnalysisError> {
    noisy_ratio(5.0 / 9.0, p, n3, edges, opt_cut)
}

fn noisy_ratio(top: f64, p: f64, n: f64, edges: usize, opt_cut: usize) -> Result<f64, AnalysisError> {
    check_survival(p)?;
    check_cut(edges, opt_cut)?;
    if !(n >= 0.0) {
        return Err(domain(format!("noise count must be non-negative, got {n}")));
    }
    let f = p.powf(n);
    Ok(top * f + (1.0 - f) * noise_floor(edges, opt_cut))
}

fn noise_floor(edges: usize, opt_cut: usize) -> f64 {
    edges as f64 / (2.0 * opt_cut as f64)
}

/// Smallest `N₁` at which the QRAC lower bound with `N₃ = ratio·N₁` reaches
/// the Ising expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// Root of the continuous relaxation.
    pub n1_continuous: f64,
    /// `⌈n1_continuous⌉`.
    pub n1: u64,
    /// `ratio·n1` rounded to the nearest integer.
    pub n3: u64,
}

const CROSSOVER_LIMIT: f64 = 1e15;

pub fn find_crossover_n1(
    p: f64,
    qubit_ratio: f64,
    edges: usize,
    opt_cut: usize,
) -> Result<Crossover, AnalysisError> {
    check_unit_open("p", p)?;
    check_unit_open("qubit_ratio", qubit_ratio)?;
    check_cut(edges, opt_cut)?;
    let floor = noise_floor(edges, opt_cut);
    if floor >= 5.0 / 9.0 {
        return Err(AnalysisError::NoCrossover {
            limit: f64::INFINITY,
            floor,
        });
    }
    let gap = |n1: f64| -> f64 {
        let q = expected_ratio_qrac_lower(p, qubit_ratio * n1, edges, opt_cut).expect("checked");
        let i = expected_ratio_ising(p, n1, edges, opt_cut).expect("checked");
        q - i
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while gap(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > CROSSOVER_LIMIT {
            return Err(AnalysisError::NoCrossover {
                limit: CROSSOVER_LIMIT,
                floor,
            });
        }
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n1 = ceil_tolerant(hi) as u64;
    Ok(Crossover {
        n1_continuous: hi,
        n1,
        n3: (qubit_ratio * n1 as f64).round() as u64,
    })
}

/// Whether `cut*/|E| > 9/10`, the regime in which the crossover argument
/// applies.
pub fn validity_condition(edges: usize, opt_cut: usize) -> bool {
    edges > 0 && 10 * opt_cut > 9 * edges
}

/// Per-node sign-error probability, bias and the shots they require.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub delta: f64,
    pub epsilon: f64,
    pub min_shots: u64,
    /// Target probability that every node's sign is read correctly.
    pub alpha: Option<f64>,
}

impl ShotPlan {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self, AnalysisError> {
        Ok(ShotPlan {
            delta,
            epsilon,
            min_shots: min_shots(delta, epsilon)?,
            alpha: None,
        })
    }

    /// Takes the largest per-node `δ = ln(1/α)/|V|` compatible with
    /// `α ≤ (1 − δ)^{|V|} ≤ exp(−δ|V|)`.
    pub fn for_success(alpha: f64, num_nodes: usize, epsilon: f64) -> Result<Self, AnalysisError> {
        check_unit_open("alpha", alpha)?;
        if num_nodes == 0 {
            return Err(domain("|V| must be positive"));
        }
        let delta = (1.0 / alpha).ln() / num_nodes as f64;
        let mut plan = Self::new(delta, epsilon)?;
        plan.alpha = Some(alpha);
        Ok(plan)
    }
}

/// The inputs of the noisy expected-ratio formulas in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyRatioModel {
    pub p: f64,
    pub n1: f64,
    pub n3: f64,
    pub edges: usize,
    pub opt_cut: usize,
    pub layers: usize,
    pub num_nodes: usize,
}

impl NoisyRatioModel {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        check_survival(self.p)?;
        check_cut(self.edges, self.opt_cut)?;
        if !(self.n1 >= 0.0 && self.n3 >= 0.0) {
            return Err(domain("noise counts must be non-negative"));
        }
        Ok(())
    }

    pub fn ising(&self) -> Result<f64, AnalysisError> {
        expected_ratio_ising(self.p, self.n1, self.edges, self.opt_cut)
    }

    pub fn qrac_lower(&self) -> Result<f64, AnalysisError> {
        expected_ratio_qrac_lower(self.p, self.n3, self.edges, self.opt_cut)
    }

    pub fn shot_ratio(&self) -> Result<f64, AnalysisError> {
        shot_ratio_qrac_vs_ising(self.p, self.layers, self.num_nodes)
    }
}

/// CSV rows `n1,ising,qrac_lower` for `N₁ = 0, step, …, n_max` with
/// `N₃ = ratio·N₁`.
pub fn crossover_sweep_csv(
    p: f64,
    qubit_ratio: f64,
    edges: usize,
    opt_cut: usize,
    n_max: u64,
    step: u64,
) -> Result<String, AnalysisError> {
    if step == 0 {
        return Err(domain("step must be positive"));
    }
    let mut out = String::from("n1,ising,qrac_lower\n");
    for n1 in (0..=n_max).step_by(step as usize) {
        let n = n1 as f64;
        let i = expected_ratio_ising(p, n, edges, opt_cut)?;
        let q = expected_ratio_qrac_lower(p, qubit_ratio * n, edges, opt_cut)?;
        out.push_str(&format!("{n1},{i},{q}\n"));
    }
    Ok(out)
}
