use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernels::{Mat2, ONE, ZERO};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    Ry { qubit: usize, param: usize },
    Rz { qubit: usize, param: usize },
    H { qubit: usize },
    S { qubit: usize },
    Sdg { qubit: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn param(&self) -> Option<usize> {
        match *self {
            Gate::Ry { param, .. } | Gate::Rz { param, .. } => Some(param),
            _ => None,
        }
    }

    /// The acted-on qubit of a one-qubit gate.
    pub fn single_qubit(&self) -> Option<usize> {
        match *self {
            Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::S { qubit }
            | Gate::Sdg { qubit } => Some(qubit),
            Gate::Cnot { .. } => None,
        }
    }

    /// Matrix of a one-qubit gate with its parameter bound from `params`.
    pub fn matrix(&self, params: &[f64]) -> Option<Mat2> {
        let i = Complex64::new(0.0, 1.0);
        Some(match *self {
            Gate::Ry { param, .. } => ry(params[param]),
            Gate::Rz { param, .. } => rz(params[param]),
            Gate::H { .. } => hadamard(),
            Gate::S { .. } => [[ONE, ZERO], [ZERO, i]],
            Gate::Sdg { .. } => [[ONE, ZERO], [ZERO, -i]],
            Gate::Cnot { .. } => return None,
        })
    }
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rz(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, -s), ZERO],
        [ZERO, Complex64::new(c, s)],
    ]
}

pub fn hadamard() -> Mat2 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    Linear,
}

/// Ordered gate list with indexed parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    num_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            num_params: 0,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    fn check(&self, q: usize) -> Result<(), SimError> {
        if q >= self.num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Appends `RY(θ_k)` and returns the new parameter index `k`.
    pub fn ry(&mut self, qubit: usize) -> Result<usize, SimError> {
        self.check(qubit)?;
        let param = self.num_params;
        self.gates.push(Gate::Ry { qubit, param });
        self.num_params += 1;
        Ok(param)
    }

    pub fn rz(&mut self, qubit: usize) -> Result<usize, SimError> {
        self.check(qubit)?;
        let param = self.num_params;
        self.gates.push(Gate::Rz { qubit, param });
        self.num_params += 1;
        Ok(param)
    }

    pub fn h(&mut self, qubit: usize) -> Result<(), SimError> {
        self.check(qubit)?;
        self.gates.push(Gate::H { qubit });
        Ok(())
    }

    pub fn s(&mut self, qubit: usize) -> Result<(), SimError> {
        self.check(qubit)?;
        self.gates.push(Gate::S { qubit });
        Ok(())
    }

    pub fn sdg(&mut self, qubit: usize) -> Result<(), SimError> {
        self.check(qubit)?;
        self.gates.push(Gate::Sdg { qubit });
        Ok(())
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(SimError::Parameter(format!(
                "CNOT control and target are both {control}"
            )));
        }
        self.gates.push(Gate::Cnot { control, target });
        Ok(())
    }

    pub fn check_params(&self, params: &[f64]) -> Result<(), SimError> {
        if params.len() != self.num_params {
            return Err(SimError::ParamMismatch {
                expected: self.num_params,
                got: params.len(),
            });
        }
        Ok(())
    }

    /// JSON gate list for debugging.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("circuit serializes")
    }
}

/// Hardware-efficient ansatz: each layer is RY then RZ on every qubit followed
/// by the CNOT chain `0→1, 1→2, …`; a closing RY+RZ layer follows the last
/// entangler. `2n(l+1)` parameters and `l(n−1)` CNOTs.
pub fn build_hea(num_qubits: usize, layers: usize, _: Entanglement) -> Result<Circuit, SimError> {
    if num_qubits == 0 || layers == 0 {
        return Err(SimError::Parameter(format!(
            "ansatz needs n >= 1 and l >= 1, got n={num_qubits}, l={layers}"
        )));
    }
    let mut c = Circuit::new(num_qubits);
    let rotations = |c: &mut Circuit| -> Result<(), SimError> {
        for q in 0..num_qubits {
            c.ry(q)?;
            c.rz(q)?;
        }
        Ok(())
    };
    for _ in 0..layers {
        rotations(&mut c)?;
        for q in 1..num_qubits {
            c.cnot(q - 1, q)?;
        }
    }
    rotations(&mut c)?;
    Ok(c)
}
