//! MaxCut through quantum relaxations, simulated.
//!
//! Graphs are encoded either one node per qubit (Ising) or up to three nodes
//! per qubit with the (3,1) quantum random access code. A variational circuit
//! maximizes the encoded Hamiltonian on a statevector or density-matrix
//! simulator, and a rounding step reads a cut back out. The [`harness`]
//! module runs the pipeline over batches of random regular graphs, with and
//! without depolarizing noise, and [`analysis`] holds the closed-form shot
//! and noise bounds.

pub mod analysis;
pub mod encoding;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod pauli;
pub mod rounding;
pub mod seed;
pub mod simulator;
pub mod vqe;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/vqe.md")]
    mod vqe {}
    #[doc = include_str!("../../../book/src/rounding.md")]
    mod rounding {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
