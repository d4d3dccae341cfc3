//! Amplitude-level input–output model of shaped phonon release and capture
//! through a delayed, lossy channel.

mod interference;
mod io;
mod pulses;
mod schedule;

pub use interference::{interference_experiment, InterferenceResult, InterferenceSetup};
pub use io::{simulate_io, ChannelParams, IOTrace};
pub use pulses::{kappa_release_full, kappa_release_partial, sech_envelope, sech_power_fwhm, KappaPulse};
pub use schedule::{ControlSchedule, DetunePulse, PulseTiming, Segment};
