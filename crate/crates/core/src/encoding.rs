//! MaxCut encodings: the diagonal Ising Hamiltonian on one qubit per node and
//! the (3,1)-QRAC Hamiltonian packing up to three nodes per qubit.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BitAssignment, Graph};
use crate::linalg;
use crate::pauli::{Hamiltonian, PauliAxis, PauliString};
use crate::simulator::DensityMatrix;

/// Largest qubit count accepted by [`max_eigenvalue`].
pub const DENSE_EIGEN_CAP: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} appears twice in a Pauli string")]
    RepeatedQubit(usize),
    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),
    #[error("expected {expected} qubits, got {got}")]
    QubitCountMismatch { expected: usize, got: usize },
    #[error("assignment does not fit the graph: {0}")]
    AssignmentMismatch(String),
    #[error("bit assignment has {got} bits, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{qubits} qubits exceeds the eigensolver cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("malformed input: {0}")]
    Format(String),
}

/// `H = Σ_{(i,j)∈E} ½(I − Z_i Z_j)` on one qubit per node.
pub fn build_ising_hamiltonian(g: &Graph) -> Hamiltonian {
    let n = g.num_nodes();
    let mut terms = Vec::with_capacity(g.num_edges() + 1);
    if g.num_edges() > 0 {
        terms.push((0.5 * g.num_edges() as f64, PauliString::identity(n)));
    }
    for &(i, j) in g.edges() {
        let zz = PauliString::new(n, [(i, PauliAxis::Z), (j, PauliAxis::Z)])
            .expect("edge endpoints are valid qubits");
        terms.push((-0.5, zz));
    }
    Hamiltonian::from_terms(n, terms).expect("ising terms are well formed")
}

/// Where each node lives: a qubit and the Pauli axis that decodes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub qubit: usize,
    pub axis: PauliAxis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QracAssignment {
    slots: Vec<Slot>,
    num_qubits: usize,
}

impl QracAssignment {
    /// Validates the packing rules against `g`: every node placed, at most one
    /// node per (qubit, axis) slot, and no edge inside a qubit.
    pub fn new(g: &Graph, slots: Vec<Slot>, num_qubits: usize) -> Result<Self, EncodingError> {
        if slots.len() != g.num_nodes() {
            return Err(EncodingError::AssignmentMismatch(format!(
                "{} slots for {} nodes",
                slots.len(),
                g.num_nodes()
            )));
        }
        let mut used = std::collections::BTreeSet::new();
        for (v, s) in slots.iter().enumerate() {
            if s.qubit >= num_qubits {
                return Err(EncodingError::QubitOutOfRange {
                    qubit: s.qubit,
                    num_qubits,
                });
            }
            if !used.insert((s.qubit, s.axis)) {
                return Err(EncodingError::AssignmentMismatch(format!(
                    "node {v} reuses slot {}{}",
                    s.axis, s.qubit
                )));
            }
        }
        for &(i, j) in g.edges() {
            if slots[i].qubit == slots[j].qubit {
                return Err(EncodingError::AssignmentMismatch(format!(
                    "adjacent nodes {i} and {j} share qubit {}",
                    slots[i].qubit
                )));
            }
        }
        Ok(QracAssignment { slots, num_qubits })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_nodes(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, node: usize) -> Slot {
        self.slots[node]
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Nodes placed on `qubit`, indexed by axis.
    pub fn nodes_on(&self, qubit: usize) -> [Option<usize>; 3] {
        let mut out = [None; 3];
        for (v, s) in self.slots.iter().enumerate() {
            if s.qubit == qubit {
                out[s.axis.index()] = Some(v);
            }
        }
        out
    }

    pub fn pauli_of(&self, node: usize) -> PauliString {
        let s = self.slots[node];
        PauliString::single(self.num_qubits, s.qubit, s.axis).expect("slot qubit in range")
    }

    /// JSON object mapping node index to `[qubit, axis]`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<usize, (usize, PauliAxis)> = self
            .slots
            .iter()
            .enumerate()
            .map(|(v, s)| (v, (s.qubit, s.axis)))
            .collect();
        serde_json::to_value(map).expect("assignment serializes")
    }

    pub fn from_json(g: &Graph, value: &serde_json::Value) -> Result<Self, EncodingError> {
        let map: BTreeMap<usize, (usize, PauliAxis)> = serde_json::from_value(value.clone())
            .map_err(|e| EncodingError::Format(e.to_string()))?;
        if map.keys().copied().ne(0..map.len()) {
            return Err(EncodingError::Format("node keys must be 0..n".into()));
        }
        let slots: Vec<Slot> = map
            .into_values()
            .map(|(qubit, axis)| Slot { qubit, axis })
            .collect();
        let num_qubits = slots.iter().map(|s| s.qubit + 1).max().unwrap_or(0);
        QracAssignment::new(g, slots, num_qubits)
    }
}

/// Greedy packing: nodes in descending degree order (ties by index) go to the
/// lowest qubit that has a free axis and holds no neighbor; axes fill in
/// X, Y, Z order.
pub fn assign_qrac(g: &Graph) -> QracAssignment {
    let n = g.num_nodes();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));

    let mut qubits: Vec<Vec<usize>> = Vec::new();
    let mut slots = vec![
        Slot {
            qubit: 0,
            axis: PauliAxis::X
        };
        n
    ];
    for v in order {
        let target = qubits
            .iter()
            .position(|members| members.len() < 3 && members.iter().all(|&w| !g.has_edge(v, w)));
        let q = match target {
            Some(q) => q,
            None => {
                qubits.push(Vec::new());
                qubits.len() - 1
            }
        };
        slots[v] = Slot {
            qubit: q,
            axis: PauliAxis::ALL[qubits[q].len()],
        };
        qubits[q].push(v);
    }
    QracAssignment::new(g, slots, qubits.len()).expect("greedy packing respects the rules")
}

/// `H = Σ_{(i,j)∈E} ½(I − 3 P_i P_j)` with `P_v` the node's slot Pauli.
pub fn build_qrac_hamiltonian(
    g: &Graph,
    a: &QracAssignment,
) -> Result<Hamiltonian, EncodingError> {
    let checked = QracAssignment::new(g, a.slots.clone(), a.num_qubits)?;
    let n = checked.num_qubits;
    let mut terms = Vec::with_capacity(g.num_edges() + 1);
    if g.num_edges() > 0 {
        terms.push((0.5 * g.num_edges() as f64, PauliString::identity(n)));
    }
    for &(i, j) in g.edges() {
        let (si, sj) = (checked.slot(i), checked.slot(j));
        let pp = PauliString::new(n, [(si.qubit, si.axis), (sj.qubit, sj.axis)])?;
        terms.push((-1.5, pp));
    }
    Hamiltonian::from_terms(n, terms)
}

/// Product of single-qubit cube-vertex states `F(m)`.
#[derive(Debug, Clone)]
pub struct QracProductState {
    state: DensityMatrix,
    bloch: Vec<[f64; 3]>,
}

impl QracProductState {
    pub fn density(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn into_density(self) -> DensityMatrix {
        self.state
    }

    /// Per-qubit Bloch vectors `((−1)^{x1}, (−1)^{x2}, (−1)^{x3})/√3`.
    pub fn bloch_vectors(&self) -> &[[f64; 3]] {
        &self.bloch
    }
}

/// Single-qubit density `½(I + r·σ)`.
pub fn bloch_density(r: [f64; 3]) -> [[Complex64; 2]; 2] {
    let h = 0.5;
    [
        [
            Complex64::new(h * (1.0 + r[2]), 0.0),
            Complex64::new(h * r[0], -h * r[1]),
        ],
        [
            Complex64::new(h * r[0], h * r[1]),
            Complex64::new(h * (1.0 - r[2]), 0.0),
        ],
    ]
}

/// Encodes `m` into `F(m)`. Axis slots with no node take bit 0.
pub fn qrac_product_state(
    m: &BitAssignment,
    a: &QracAssignment,
) -> Result<QracProductState, EncodingError> {
    if m.len() != a.num_nodes() {
        return Err(EncodingError::LengthMismatch {
            expected: a.num_nodes(),
            got: m.len(),
        });
    }
    let s = 1.0 / 3f64.sqrt();
    let mut bloch = vec![[s, s, s]; a.num_qubits()];
    for (v, slot) in a.slots().iter().enumerate() {
        if m.bits()[v] == 1 {
            bloch[slot.qubit][slot.axis.index()] = -s;
        }
    }
    let factors: Vec<_> = bloch.iter().map(|&r| bloch_density(r)).collect();
    Ok(QracProductState {
        state: DensityMatrix::product(&factors),
        bloch,
    })
}

/// Largest eigenvalue of `h`. Diagonal Hamiltonians are read off directly;
/// others go through a dense Hermitian eigensolve or, past 10 qubits,
/// fully reorthogonalized Lanczos.
pub fn max_eigenvalue(h: &Hamiltonian) -> Result<f64, EncodingError> {
    let n = h.num_qubits();
    if n > DENSE_EIGEN_CAP {
        return Err(EncodingError::CapExceeded {
            qubits: n,
            cap: DENSE_EIGEN_CAP,
        });
    }
    if h.is_zero() {
        return Ok(0.0);
    }
    if h.is_diagonal() {
        return Ok(h.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max));
    }
    if n <= 10 {
        Ok(linalg::hermitian_eigenvalues(h.dim(), &h.to_dense())
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    } else {
        Ok(linalg::lanczos_max(h.dim(), |v, out| h.apply(v, out)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cut_value, generate_random_regular, max_cut_bruteforce};
    use proptest::prelude::*;

    fn trace_with(rho: &DensityMatrix, h: &Hamiltonian) -> f64 {
        // Independent route: dense Tr(ρH) by explicit matrix product.
        let dim = h.dim();
        let hd = h.to_dense();
        let mut tr = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                tr += rho.get(r, c) * hd[c * dim + r];
            }
        }
        assert!(tr.im.abs() < 1e-10);
        tr.re
    }

    #[test]
    fn ising_triangle() {
        let g = Graph::complete(3).unwrap();
        let h = build_ising_hamiltonian(&g);
        assert_eq!(h.identity_offset(), 1.5);
        assert_eq!(h.pauli_terms().count(), 3);
        assert!(h.pauli_terms().all(|t| t.coeff == -0.5));
        assert_eq!(max_eigenvalue(&h).unwrap(), 2.0);
    }

    #[test]
    fn ising_single_edge_eigenvector() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let h = build_ising_hamiltonian(&g);
        // |01> : qubit 0 = 0, qubit 1 = 1 → basis index 0b10
        assert_eq!(h.diagonal()[0b10], 1.0);
        assert_eq!(max_eigenvalue(&h).unwrap(), 1.0);
    }

    #[test]
    fn empty_graph_gives_zero_hamiltonians() {
        let g = Graph::new(3, []).unwrap();
        assert!(build_ising_hamiltonian(&g).is_zero());
        let a = assign_qrac(&g);
        let h = build_qrac_hamiltonian(&g, &a).unwrap();
        assert!(h.is_zero());
        assert_eq!(max_eigenvalue(&h).unwrap(), 0.0);
    }

    #[test]
    fn path_packs_into_two_qubits() {
        let g = Graph::path(4).unwrap();
        let a = assign_qrac(&g);
        assert_eq!(a.num_qubits(), 2);
        let h = build_qrac_hamiltonian(&g, &a).unwrap();
        assert_eq!(h.identity_offset(), 1.5);
        let pp: Vec<_> = h.pauli_terms().collect();
        assert_eq!(pp.len(), 3);
        assert!(pp.iter().all(|t| t.coeff == -1.5 && t.pauli.weight() == 2));
    }

    #[test]
    fn triangle_needs_three_qubits() {
        let a = assign_qrac(&Graph::complete(3).unwrap());
        assert_eq!(a.num_qubits(), 3);
    }

    #[test]
    fn k33_packs_each_side_on_one_qubit() {
        let g = Graph::complete_bipartite(3, 3).unwrap();
        let a = assign_qrac(&g);
        assert_eq!(a.num_qubits(), 2);
        let left: Vec<_> = (0..3).map(|v| a.slot(v).qubit).collect();
        let right: Vec<_> = (3..6).map(|v| a.slot(v).qubit).collect();
        assert!(left.iter().all(|&q| q == left[0]));
        assert!(right.iter().all(|&q| q == right[0]));
        assert_ne!(left[0], right[0]);
        // direct invariant check, independent of the constructor
        for &(i, j) in g.edges() {
            assert_ne!(a.slot(i).qubit, a.slot(j).qubit);
        }
    }

    #[test]
    fn single_edge_qrac_hamiltonian() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let a = QracAssignment::new(
            &g,
            vec![
                Slot { qubit: 0, axis: PauliAxis::X },
                Slot { qubit: 1, axis: PauliAxis::X },
            ],
            2,
        )
        .unwrap();
        let h = build_qrac_hamiltonian(&g, &a).unwrap();
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[0].coeff, 0.5);
        assert_eq!(h.terms()[1].coeff, -1.5);
        assert_eq!(h.terms()[1].pauli.to_string(), "X0 X1");
        // spectrum of 0.5 − 1.5 XX is {−1, 2}
        assert!((max_eigenvalue(&h).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn mismatched_assignment_rejected() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let bad = QracAssignment {
            slots: vec![
                Slot { qubit: 0, axis: PauliAxis::X },
                Slot { qubit: 0, axis: PauliAxis::Y },
            ],
            num_qubits: 1,
        };
        assert!(matches!(
            build_qrac_hamiltonian(&g, &bad),
            Err(EncodingError::AssignmentMismatch(_))
        ));
    }

    #[test]
    fn product_state_bloch_vectors() {
        let g = Graph::new(3, []).unwrap();
        let a = assign_qrac(&g);
        assert_eq!(a.num_qubits(), 1);
        let s = 1.0 / 3f64.sqrt();
        let f = qrac_product_state(&BitAssignment::zeros(3), &a).unwrap();
        assert_eq!(f.bloch_vectors()[0], [s, s, s]);
        let x = PauliString::single(1, 0, PauliAxis::X).unwrap();
        assert!((f.density().pauli_expectation(&x) - s).abs() < 1e-12);
        let f = qrac_product_state(&BitAssignment::new(vec![1, 1, 1]).unwrap(), &a).unwrap();
        assert_eq!(f.bloch_vectors()[0], [-s, -s, -s]);
        assert!((f.density().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relaxation_identity_on_path() {
        let g = Graph::path(4).unwrap();
        let a = assign_qrac(&g);
        let h = build_qrac_hamiltonian(&g, &a).unwrap();
        let m = BitAssignment::new(vec![0, 1, 0, 1]).unwrap();
        let f = qrac_product_state(&m, &a).unwrap();
        assert!((trace_with(f.density(), &h) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn assignment_json_round_trip() {
        let g = generate_random_regular(8, 3, 2).unwrap();
        let a = assign_qrac(&g);
        let js = a.to_json();
        assert_eq!(js["0"].as_array().unwrap().len(), 2);
        assert_eq!(QracAssignment::from_json(&g, &js).unwrap(), a);
    }

    #[test]
    fn eigen_cap() {
        let h = Hamiltonian::zero(15);
        assert!(matches!(
            max_eigenvalue(&h),
            Err(EncodingError::CapExceeded { .. })
        ));
    }

    #[test]
    fn lanczos_agrees_with_dense_on_qrac() {
        let g = generate_random_regular(12, 3, 5).unwrap();
        let a = assign_qrac(&g);
        let h = build_qrac_hamiltonian(&g, &a).unwrap();
        let dense = linalg::hermitian_eigenvalues(h.dim(), &h.to_dense())
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let lz = linalg::lanczos_max(h.dim(), |v, out| h.apply(v, out));
        assert!((dense - lz).abs() < 1e-9, "{dense} vs {lz}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn greedy_assignment_invariants(half in 3usize..9, d in 2usize..5, seed in any::<u64>()) {
            let n = 2 * half;
            prop_assume!(n > d);
            let g = generate_random_regular(n, d, seed).unwrap();
            let a = assign_qrac(&g);
            prop_assert!(a.num_qubits() >= n.div_ceil(3));
            let mut per_qubit = vec![0usize; a.num_qubits()];
            for v in 0..n {
                per_qubit[a.slot(v).qubit] += 1;
            }
            prop_assert!(per_qubit.iter().all(|&c| c <= 3 && c >= 1));
            for &(i, j) in g.edges() {
                prop_assert_ne!(a.slot(i).qubit, a.slot(j).qubit);
            }
            prop_assert_eq!(assign_qrac(&g), a);
        }

        #[test]
        fn relaxation_identity_random(half in 2usize..6, seed in any::<u64>(), mask in any::<u64>()) {
            let n = 2 * half;
            let g = generate_random_regular(n, 3, seed).unwrap();
            let a = assign_qrac(&g);
            let h = build_qrac_hamiltonian(&g, &a).unwrap();
            let m = BitAssignment::from_mask(mask, n);
            let f = qrac_product_state(&m, &a).unwrap();
            let cut = cut_value(&g, &m).unwrap() as f64;
            prop_assert!((trace_with(f.density(), &h) - cut).abs() < 1e-9);
        }

        #[test]
        fn ising_and_qrac_spectra_bound_max_cut(half in 2usize..6, seed in any::<u64>()) {
            let g = generate_random_regular(2 * half, 3, seed).unwrap();
            let best = max_cut_bruteforce(&g).unwrap().1 as f64;
            prop_assert_eq!(max_eigenvalue(&build_ising_hamiltonian(&g)).unwrap(), best);
            let a = assign_qrac(&g);
            let hq = build_qrac_hamiltonian(&g, &a).unwrap();
            prop_assert!(max_eigenvalue(&hq).unwrap() >= best - 1e-9);
        }
    }
}
