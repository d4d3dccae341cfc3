//! State and process tomography on one or two qubits: simulated measurement
//! with readout errors, linear-inversion reconstruction and figures of merit.
//!
//! Conventions: |g⟩ is basis index 0, qubit 1 is the most significant factor,
//! and Z = diag(1, −1) so that ⟨Z⟩ = P(g) − P(e).

mod metrics;
mod pauli;
mod process;
mod readout;
mod state;

pub use metrics::{concurrence, fidelity, hs_distance, pauli_expectations};
pub use pauli::{pauli, pauli_basis, pauli_labels};
pub use process::{chi_from_unitary, input_states, process_from_states, swap_unitary, ProcessMatrix};
pub use readout::{readout_correct, sample_counts, simulate_measurement, QubitReadout, ReadoutModel, Shots};
pub use state::{correct_data, rotation, settings, simulate_tomography, state_tomo, TomoData};
