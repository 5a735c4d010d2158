//! Dense complex tensor algebra over multi-qudit systems.
//!
//! Composite indices follow the first-subsystem-most-significant convention
//! throughout; see [`SubsystemLayout`].

pub mod json;
pub mod layout;
pub mod linalg;
pub mod matrix;
pub mod state;

pub use layout::{Party, Subsystem, SubsystemLayout};
pub use linalg::{hermitian_eigenvalues, trace_norm};
pub use matrix::Matrix;
pub use state::{
    fidelity_pure, partial_trace, partial_transpose, permute_subsystems, tensor_product, Composite, DensityMatrix,
    FidelityTarget, Operator, StateVector,
};
