//! System identification for passive linear quantum systems.
//!
//! A passive system is a pair `(Ω, C)`: an n×n Hermitian Hamiltonian matrix
//! and an m×n coupling to the probe fields. From these the crate provides
//!
//! * the transfer function `Ξ(s)` and mean-field time evolution ([`model`]),
//! * controllability / observability / minimality ([`analysis`]),
//! * Markov-parameter identifiability tests and recovery of the unitary
//!   relating two indistinguishable systems ([`identifiability`]),
//! * reconstruction of `(Ω, C)` from `Ξ(s)` ([`realization`]),
//! * the infection criterion for graph-structured Hamiltonians ([`network`]),
//! * a simulated probe → fit → reconstruct experiment ([`probe`]).

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod identifiability;
pub mod json;
pub mod linalg;
pub mod model;
pub mod network;
pub mod par;
pub mod poly;
pub mod probe;
pub mod random;
pub mod realization;

pub use error::{Error, Result};
pub use model::PassiveSystem;
pub use network::NetworkModel;
pub use par::Execution;
pub use poly::Poly;
pub use realization::RationalTF;
