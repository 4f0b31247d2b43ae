//! Pauli strings and real-weighted sums of them.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn index(self) -> usize {
        match self {
            PauliAxis::X => 0,
            PauliAxis::Y => 1,
            PauliAxis::Z => 2,
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliAxis::X => [[o, one], [one, o]],
            PauliAxis::Y => [[o, -i], [i, o]],
            PauliAxis::Z => [[one, o], [o, -one]],
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            PauliAxis::X => "X",
            PauliAxis::Y => "Y",
            PauliAxis::Z => "Z",
        };
        f.write_str(c)
    }
}

/// Tensor product of single-qubit Paulis; qubits absent from `factors` carry
/// the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    factors: BTreeMap<usize, PauliAxis>,
    num_qubits: usize,
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        PauliString {
            factors: BTreeMap::new(),
            num_qubits,
        }
    }

    pub fn new(
        num_qubits: usize,
        factors: impl IntoIterator<Item = (usize, PauliAxis)>,
    ) -> Result<Self, EncodingError> {
        let mut map = BTreeMap::new();
        for (q, a) in factors {
            if q >= num_qubits {
                return Err(EncodingError::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
            if map.insert(q, a).is_some() {
                return Err(EncodingError::RepeatedQubit(q));
            }
        }
        Ok(PauliString {
            factors: map,
            num_qubits,
        })
    }

    pub fn single(num_qubits: usize, qubit: usize, axis: PauliAxis) -> Result<Self, EncodingError> {
        Self::new(num_qubits, [(qubit, axis)])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn factors(&self) -> &BTreeMap<usize, PauliAxis> {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Qubits where the string flips the computational basis (X or Y).
    pub fn x_mask(&self) -> usize {
        self.mask_where(|a| a != PauliAxis::Z)
    }

    /// Qubits contributing a `(-1)^bit` sign (Y or Z).
    pub fn z_mask(&self) -> usize {
        self.mask_where(|a| a != PauliAxis::X)
    }

    pub fn support_mask(&self) -> usize {
        self.mask_where(|_| true)
    }

    fn mask_where(&self, pred: impl Fn(PauliAxis) -> bool) -> usize {
        self.factors
            .iter()
            .filter(|(_, &a)| pred(a))
            .fold(0, |m, (&q, _)| m | (1 << q))
    }

    pub fn y_count(&self) -> usize {
        self.factors.values().filter(|&&a| a == PauliAxis::Y).count()
    }

    /// Returns the closure data for `P|b> = phase(b) |b ^ x_mask>`.
    pub fn action(&self) -> PauliAction {
        let base = match self.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        PauliAction {
            x_mask: self.x_mask(),
            z_mask: self.z_mask(),
            base,
        }
    }

    fn sort_key(&self) -> (Vec<usize>, Vec<PauliAxis>) {
        (
            self.factors.keys().copied().collect(),
            self.factors.values().copied().collect(),
        )
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = self.factors.iter().map(|(q, a)| format!("{a}{q}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub base: Complex64,
}

impl PauliAction {
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// Real linear combination of Pauli strings, kept in canonical order: terms
/// sorted by (qubit indices, axes) with equal strings merged, so the identity
/// offset always comes first when present.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    num_qubits: usize,
    terms: Vec<Term>,
}

impl Hamiltonian {
    pub fn zero(num_qubits: usize) -> Self {
        Hamiltonian {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (f64, PauliString)>,
    ) -> Result<Self, EncodingError> {
        let mut merged: BTreeMap<(Vec<usize>, Vec<PauliAxis>), Term> = BTreeMap::new();
        for (coeff, pauli) in terms {
            if !coeff.is_finite() {
                return Err(EncodingError::NonFiniteCoefficient(coeff));
            }
            if pauli.num_qubits() != num_qubits {
                return Err(EncodingError::QubitCountMismatch {
                    expected: num_qubits,
                    got: pauli.num_qubits(),
                });
            }
            merged
                .entry(pauli.sort_key())
                .and_modify(|t| t.coeff += coeff)
                .or_insert(Term { coeff, pauli });
        }
        let terms = merged.into_values().filter(|t| t.coeff != 0.0).collect();
        Ok(Hamiltonian { num_qubits, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_offset(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.pauli.is_identity())
            .map_or(0.0, |t| t.coeff)
    }

    /// Non-identity terms.
    pub fn pauli_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| !t.pauli.is_identity())
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.pauli.x_mask() == 0)
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    /// Diagonal entries in the computational basis.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim()];
        for t in &self.terms {
            if t.pauli.x_mask() != 0 {
                continue;
            }
            let act = t.pauli.action();
            for (b, d) in diag.iter_mut().enumerate() {
                *d += t.coeff * act.phase(b).re;
            }
        }
        diag
    }

    /// Dense row-major matrix, `dim × dim`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = self.dim();
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for t in &self.terms {
            let act = t.pauli.action();
            for b in 0..dim {
                m[(b ^ act.x_mask) * dim + b] += act.phase(b) * t.coeff;
            }
        }
        m
    }

    /// Matrix-free product `H v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for t in &self.terms {
            let act = t.pauli.action();
            for (b, &vb) in v.iter().enumerate() {
                out[b ^ act.x_mask] += act.phase(b) * vb * t.coeff;
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(HamiltonianJson::from(self)).expect("hamiltonian serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, EncodingError> {
        let raw: HamiltonianJson = serde_json::from_value(value.clone())
            .map_err(|e| EncodingError::Format(e.to_string()))?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: f64,
    paulis: BTreeMap<usize, PauliAxis>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianJson {
    num_qubits: usize,
    terms: Vec<TermJson>,
}

impl From<&Hamiltonian> for HamiltonianJson {
    fn from(h: &Hamiltonian) -> Self {
        HamiltonianJson {
            num_qubits: h.num_qubits,
            terms: h
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: t.coeff,
                    paulis: t.pauli.factors.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<HamiltonianJson> for Hamiltonian {
    type Error = EncodingError;
    fn try_from(raw: HamiltonianJson) -> Result<Self, Self::Error> {
        let n = raw.num_qubits;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| Ok((t.coeff, PauliString::new(n, t.paulis)?)))
            .collect::<Result<Vec<_>, EncodingError>>()?;
        Hamiltonian::from_terms(n, terms)
    }
}

impl Serialize for Hamiltonian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HamiltonianJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hamiltonian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        HamiltonianJson::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}
