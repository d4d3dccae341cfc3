//! Device constants: qubit coherence, readout, coupling, channel and SAW geometry.

use serde::{Deserialize, Serialize};

use crate::dynamics::dephasing_rate;
use crate::error::{Error, Result};
use crate::sawphys::SawGeometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    pub t1_int_us: f64,
    pub t2r_us: f64,
    /// Probability of reading e when prepared in e.
    pub readout_fe: f64,
    /// Probability of reading g when prepared in g.
    pub readout_fg: f64,
    /// Coupling to a single resonator mode at maximum coupler setting, g/2π in MHz.
    pub g_mhz: f64,
}

impl QubitParams {
    /// Γ_φ in 1/ns.
    pub fn dephasing_per_ns(&self) -> Result<f64> {
        Ok(dephasing_rate(self.t2r_us, self.t1_int_us)? * 1e-3)
    }

    /// 1/T1 in 1/ns.
    pub fn relaxation_per_ns(&self) -> f64 {
        1e-3 / self.t1_int_us
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    pub q1: QubitParams,
    pub q2: QubitParams,
    /// Power transmission per transit.
    pub eta: f64,
    /// Transit time, ns.
    pub tau_ns: f64,
    /// Resonator energy lifetime, µs.
    pub t1_saw_us: f64,
    /// Qubit operating frequency, GHz.
    pub operating_ghz: f64,
    pub saw: SawGeometry,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            q1: QubitParams { t1_int_us: 21.7, t2r_us: 2.10, readout_fe: 0.933, readout_fg: 0.969, g_mhz: 2.57 },
            q2: QubitParams { t1_int_us: 26.1, t2r_us: 0.60, readout_fe: 0.952, readout_fg: 0.977, g_mhz: 2.16 },
            eta: 0.67,
            tau_ns: 508.0,
            t1_saw_us: 1.2,
            operating_ghz: 3.95,
            saw: SawGeometry::default(),
        }
    }
}

impl DeviceParams {
    pub fn qubit(&self, i: usize) -> &QubitParams {
        match i {
            0 => &self.q1,
            _ => &self.q2,
        }
    }

    /// ν_FSR = 1/τ, MHz.
    pub fn fsr_mhz(&self) -> f64 {
        1e3 / self.tau_ns
    }

    pub fn validate(&self) -> Result<()> {
        for (name, q) in [("q1", &self.q1), ("q2", &self.q2)] {
            dephasing_rate(q.t2r_us, q.t1_int_us).map_err(|e| Error::InvalidParameters(format!("{name}: {e}")))?;
            for f in [q.readout_fe, q.readout_fg] {
                if !(f > 0.5 && f <= 1.0) {
                    return Err(Error::InvalidParameters(format!("{name}: readout fidelity {f} not in (0.5, 1]")));
                }
            }
            if !(q.g_mhz >= 0.0) {
                return Err(Error::InvalidParameters(format!("{name}: g must be non-negative")));
            }
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameters(format!("eta = {} not in [0, 1]", self.eta)));
        }
        if !(self.tau_ns > 0.0) || !(self.t1_saw_us > 0.0) {
            return Err(Error::InvalidParameters("tau and T1SAW must be positive".into()));
        }
        self.saw.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let d = DeviceParams::default();
        d.validate().unwrap();
        assert!((d.q1.dephasing_per_ns().unwrap() - 0.4531e-3).abs() < 1e-7);
        assert!((d.fsr_mhz() - 1.9685).abs() < 1e-3);
    }

    #[test]
    fn rejects_inconsistent_coherence() {
        let mut d = DeviceParams::default();
        d.q2.t2r_us = 60.0;
        assert!(d.validate().is_err());
        let mut d = DeviceParams::default();
        d.eta = 1.1;
        assert!(d.validate().is_err());
    }
}
