use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::io::{simulate_io, ChannelParams, MAX_STEP_NS};
use super::schedule::{ControlSchedule, PulseTiming};
use crate::dynamics::{mc_mean, NoiseSpec};
use crate::error::Result;

/// Fixed parts of the single-qubit interference sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceSetup {
    pub timing: PulseTiming,
    pub channel: ChannelParams,
    /// Frequency of the phase-imprinting detuning pulse, MHz.
    pub detune_mhz: f64,
    pub dt_ns: f64,
}

impl Default for InterferenceSetup {
    fn default() -> Self {
        Self { timing: PulseTiming::default(), channel: ChannelParams::default(), detune_mhz: 20.0, dt_ns: MAX_STEP_NS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceResult {
    pub delta_phi: f64,
    /// Final excited population of the qubit, averaged over phase noise.
    pub p_e: f64,
}

/// Half release, one transit, half capture with relative phase `delta_phi`
/// written by a detuning pulse; averaged over channel phase noise.
pub fn interference_experiment(
    delta_phi: f64,
    setup: &InterferenceSetup,
    noise: &NoiseSpec,
) -> Result<InterferenceResult> {
    let ch = setup.channel;
    ch.validate()?;
    let sched = ControlSchedule::interference(&setup.timing, ch.tau_ns, setup.detune_mhz, delta_phi)?;
    let s0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let p = mc_mean(noise, |phi| {
        let c = ChannelParams { phase: ch.phase + phi, ..ch };
        Ok(vec![simulate_io(&sched, &c, s0, setup.dt_ns)?.final_population(0)])
    })?;
    Ok(InterferenceResult { delta_phi, p_e: p[0] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lossless_in_phase_reexcites_fully() {
        let setup = InterferenceSetup {
            channel: ChannelParams { eta: 1.0, ..Default::default() },
            timing: PulseTiming { lead_ns: 90.0, ..Default::default() },
            ..Default::default()
        };
        let r = interference_experiment(0.0, &setup, &NoiseSpec::none()).unwrap();
        assert!(r.p_e > 0.995, "{}", r.p_e);
        let r = interference_experiment(PI, &setup, &NoiseSpec::none()).unwrap();
        assert!(r.p_e < 0.005, "{}", r.p_e);
    }

    #[test]
    fn fringe_extremes_follow_phase() {
        let setup = InterferenceSetup::default();
        let p: Vec<f64> = (0..8)
            .map(|k| interference_experiment(k as f64 * PI / 4.0, &setup, &NoiseSpec::none()).unwrap().p_e)
            .collect();
        let imax = (0..8).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        let imin = (0..8).min_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        assert_eq!((imax, imin), (0, 4), "{p:?}");
    }
}
