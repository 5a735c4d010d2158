//! Qudit LOCC simulation: the canonical maximally entangled basis, exact
//! teleportation and discrimination protocols, and entanglement diagnostics
//! for the flagged mixtures built from that basis.

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod protocols;
pub mod report;
pub mod states;
pub mod suite;
pub mod tensor;

pub use error::{Error, Result};
