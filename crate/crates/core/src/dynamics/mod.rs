//! Time-dependent Lindblad integration and averaging over classical phase noise.

mod integrator;
mod model;
mod montecarlo;

pub use integrator::{evolve, evolve_with, EvolveOptions, Trajectory};
pub use model::{dephasing_rate, Coeff, CollapseTerm, LindbladModel, Term};
pub use montecarlo::{mc_average, mc_mean, realization_phase, realization_phases, NoiseSpec};
