//! Experiment configuration: TOML merged over built-in defaults, with
//! unknown keys rejected.

use serde::{Deserialize, Serialize};

use phonon_core::device::DeviceParams;
use phonon_core::ioshape::{PulseTiming, Segment};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PingPong,
    MultiTransit,
    Interference,
    Swap,
    DoubleSwap,
    Bell,
    Spectroscopy,
    VacuumRabi,
    SawResponse,
    TomoRoundtrip,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::PingPong => "ping_pong",
            ExperimentKind::MultiTransit => "multi_transit",
            ExperimentKind::Interference => "interference",
            ExperimentKind::Swap => "swap",
            ExperimentKind::DoubleSwap => "double_swap",
            ExperimentKind::Bell => "bell",
            ExperimentKind::Spectroscopy => "spectroscopy",
            ExperimentKind::VacuumRabi => "vacuum_rabi",
            ExperimentKind::SawResponse => "saw_response",
            ExperimentKind::TomoRoundtrip => "tomo_roundtrip",
        }
    }
}

/// Schedule given as explicit segments, replacing the built-in one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub window_end_ns: f64,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceOptions {
    /// Relative phase of the single evaluated point, rad.
    pub delta_phi: f64,
    pub detune_mhz: f64,
    /// Points of the fringe over [0, 2π).
    pub fringe_points: usize,
    pub realizations: usize,
    /// Average over channel phase noise derived from qubit 1's Ramsey time.
    pub phase_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeLadderOptions {
    /// Qubit (1 or 2) whose coupling is used.
    pub qubit: usize,
    pub n_a: usize,
    /// Sweep range of qubit minus central-mode frequency, MHz (spectroscopy).
    pub x_min_mhz: f64,
    pub x_max_mhz: f64,
    pub points: usize,
    /// Duration of the time-domain run, ns (vacuum Rabi).
    pub t_max_ns: f64,
    pub time_points: usize,
    /// Qubit detuning from the central mode, MHz (vacuum Rabi).
    pub delta0_mhz: f64,
    /// Include qubit T1 and dephasing (vacuum Rabi).
    pub qubit_decoherence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SawOptions {
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub points: usize,
    /// Frequency of the single evaluated point, GHz.
    pub f_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoOptions {
    /// Shots per setting; 0 means exact probabilities.
    pub shots: u64,
    pub readout_errors: bool,
    pub readout_correction: bool,
    /// Random states in the round-trip test.
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Master seed for every random draw.
    pub seed: u64,
    pub device: DeviceParams,
    pub timing: PulseTiming,
    /// Amplitude-model step, ns.
    pub dt_ns: f64,
    /// Master-equation tolerance.
    pub tol: f64,
    /// Largest transit count of multi_transit.
    pub max_transits: usize,
    /// Run cascade process tomography in ping_pong and swap.
    pub process_tomography: bool,
    pub interference: InterferenceOptions,
    pub modes: ModeLadderOptions,
    pub saw: SawOptions,
    pub tomo: TomoOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let device = DeviceParams::default();
        Self {
            experiment: ExperimentKind::PingPong,
            seed: 1,
            timing: PulseTiming::default(),
            dt_ns: 0.25,
            tol: 1e-9,
            max_transits: 4,
            process_tomography: true,
            interference: InterferenceOptions {
                delta_phi: std::f64::consts::PI,
                detune_mhz: 20.0,
                fringe_points: 16,
                realizations: 1024,
                phase_noise: true,
            },
            modes: ModeLadderOptions {
                qubit: 1,
                n_a: 8,
                x_min_mhz: -3.0,
                x_max_mhz: 3.0,
                points: 121,
                t_max_ns: 2.0 * device.tau_ns,
                time_points: 1017,
                delta0_mhz: 0.0,
                qubit_decoherence: false,
            },
            saw: SawOptions { f_min_ghz: 3.8, f_max_ghz: 4.2, points: 401, f_ghz: device.operating_ghz },
            tomo: TomoOptions { shots: 0, readout_errors: true, readout_correction: true, states: 20 },
            schedule: None,
            device,
        }
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl ExperimentConfig {
    /// Parses a user config; omitted keys take their defaults. The
    /// `experiment` key is mandatory.
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let user: toml::Table = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        if !user.contains_key("experiment") {
            return Err(CliError::Validation("missing key `experiment`".into()));
        }
        Self::from_table(user)
    }

    fn from_table(user: toml::Table) -> CliResult<Self> {
        let mut merged = toml::Value::try_from(Self::default()).map_err(|e| CliError::Validation(e.to_string()))?;
        merge(&mut merged, toml::Value::Table(user));
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| CliError::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Validation(e.to_string()))
    }

    /// Copy with the scalar at dotted `path` replaced by `value`.
    pub fn with_param(&self, path: &str, value: f64) -> CliResult<Self> {
        let mut tree = toml::Value::try_from(self).map_err(|e| CliError::Validation(e.to_string()))?;
        let mut slot = &mut tree;
        for key in path.split('.') {
            slot = slot.get_mut(key).ok_or_else(|| CliError::Validation(format!("unknown parameter path `{path}`")))?;
        }
        *slot = match slot {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
            toml::Value::Integer(_) => {
                return Err(CliError::Validation(format!("`{path}` is an integer, got {value}")));
            }
            _ => return Err(CliError::Validation(format!("`{path}` is not a scalar number"))),
        };
        match tree {
            toml::Value::Table(t) => Self::from_table(t),
            _ => unreachable!("config serializes to a table"),
        }
    }

    /// Checks every parameter before any integration starts.
    pub fn validate(&self) -> CliResult<()> {
        self.device.validate()?;
        self.timing.validate()?;
        let bad = |m: &str| Err(CliError::Validation(m.to_string()));
        if !(self.dt_ns > 0.0) {
            return bad("dt_ns must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return bad("tol must be in (0, 0.01)");
        }
        if self.max_transits == 0 {
            return bad("max_transits must be at least 1");
        }
        let i = &self.interference;
        if i.fringe_points == 0 || i.realizations == 0 || !(i.detune_mhz != 0.0) || !i.delta_phi.is_finite() {
            return bad("interference options out of range");
        }
        let m = &self.modes;
        if !(1..=2).contains(&m.qubit)
            || m.n_a == 0
            || m.points == 0
            || m.time_points < 2
            || !(m.x_max_mhz >= m.x_min_mhz)
            || !(m.t_max_ns > 0.0)
        {
            return bad("mode-ladder options out of range");
        }
        let s = &self.saw;
        if s.points == 0 || !(s.f_max_ghz >= s.f_min_ghz) || !(s.f_min_ghz > 0.0) || !(s.f_ghz > 0.0) {
            return bad("saw options out of range");
        }
        if self.tomo.states == 0 {
            return bad("tomo.states must be at least 1");
        }
        if let Some(sc) = &self.schedule {
            phonon_core::ioshape::ControlSchedule::from_segments(&sc.segments, &self.timing, (0.0, sc.window_end_ns))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig { experiment: ExperimentKind::Bell, ..Default::default() };
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_override_and_unknown_keys() {
        let cfg = ExperimentConfig::from_toml("experiment = \"swap\"\n[device]\neta = 0.5\n").unwrap();
        assert_eq!(cfg.device.eta, 0.5);
        assert_eq!(cfg.device.tau_ns, 508.0);
        assert!(ExperimentConfig::from_toml("experiment = \"swap\"\netaa = 0.5\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"swap\"\n[device]\netaa = 0.5\n").is_err());
        assert!(ExperimentConfig::from_toml("seed = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"swap\"\n[device]\neta = 1.5\n").is_err());
    }

    #[test]
    fn segments_parse() {
        let text = r#"
experiment = "ping_pong"
[schedule]
window_end_ns = 628.0
[[schedule.segments]]
kind = "full_release"
qubit = 1
start = 0.0
[[schedule.segments]]
kind = "capture"
qubit = 1
start = 478.0
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.schedule.unwrap().segments.len(), 2);
    }

    #[test]
    fn param_paths() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.with_param("device.eta", 0.4).unwrap().device.eta, 0.4);
        assert_eq!(cfg.with_param("max_transits", 3.0).unwrap().max_transits, 3);
        assert!(cfg.with_param("device.nope", 1.0).is_err());
        assert!(cfg.with_param("device", 1.0).is_err());
        assert!(cfg.with_param("max_transits", 2.5).is_err());
    }
}
