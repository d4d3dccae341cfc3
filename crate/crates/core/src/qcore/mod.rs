//! Dense complex linear algebra over small composite Hilbert spaces.
//!
//! Basis kets are occupation vectors, one entry per mode, ordered
//! lexicographically with the first mode most significant. When an
//! excitation cap is set only kets whose occupations sum to at most the cap
//! are kept, in the same relative order.

mod linalg;
mod operator;
mod space;
pub(crate) mod state;
mod superop;

#[cfg(test)]
pub(crate) use linalg::max_abs;
pub(crate) use linalg::rebuild as rebuild_from_eigen;
pub use linalg::{dagger, hermitian_eigen, kron, project_psd, CMatrix, C64};
pub use operator::{embed, lowering, number, qubit_sigma_z, raising, Operator};
pub use space::HilbertSpace;
pub use state::{partial_trace, QuantumState};
pub use superop::{commutator_map, dissipator, SuperOperator};
