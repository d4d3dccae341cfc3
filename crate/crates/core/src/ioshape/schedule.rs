use serde::{Deserialize, Serialize};

use super::pulses::KappaPulse;
use crate::error::{Error, Result};
use crate::multimode::MHZ;

/// Shape parameters shared by every release and capture pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseTiming {
    /// Packet bandwidth κ_c, 1/ns.
    pub kappa_c: f64,
    /// Active time before the packet center, ns (release frame).
    pub lead_ns: f64,
    /// Active time after the packet center, ns (release frame).
    pub tail_ns: f64,
}

impl Default for PulseTiming {
    fn default() -> Self {
        Self { kappa_c: 0.1, lead_ns: 60.0, tail_ns: 90.0 }
    }
}

impl PulseTiming {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_c > 0.0) || !(self.lead_ns > 0.0) || !(self.tail_ns > 0.0) {
            return Err(Error::InvalidParameters("pulse kappa_c, lead and tail must be positive".into()));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.lead_ns + self.tail_ns
    }
}

/// Square detuning pulse δ = 2π·f on `[start, start + duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetunePulse {
    pub start: f64,
    pub duration: f64,
    /// Detuning in rad/ns.
    pub delta: f64,
}

impl DetunePulse {
    pub fn at(&self, t: f64) -> f64 {
        if t >= self.start && t < self.start + self.duration {
            self.delta
        } else {
            0.0
        }
    }
}

/// Declarative schedule element; `qubit` is 1 or 2 and `start` is the
/// beginning of the element's active window, ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Segment {
    FullRelease { qubit: usize, start: f64 },
    PartialRelease { qubit: usize, start: f64, alpha: f64 },
    Capture { qubit: usize, start: f64 },
    PartialCapture { qubit: usize, start: f64, alpha: f64 },
    Idle { qubit: usize, start: f64, duration: f64 },
    Detune { qubit: usize, start: f64, f_mhz: f64, duration: f64 },
}

impl Segment {
    fn qubit(&self) -> usize {
        match *self {
            Segment::FullRelease { qubit, .. }
            | Segment::PartialRelease { qubit, .. }
            | Segment::Capture { qubit, .. }
            | Segment::PartialCapture { qubit, .. }
            | Segment::Idle { qubit, .. }
            | Segment::Detune { qubit, .. } => qubit,
        }
    }
}

/// Coupling and detuning controls of both qubits over one experiment.
/// Qubits are indexed 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub pulses: Vec<(usize, KappaPulse)>,
    pub detunes: Vec<(usize, DetunePulse)>,
    pub window: (f64, f64),
}

impl ControlSchedule {
    pub fn new(window: (f64, f64)) -> Self {
        Self { pulses: Vec::new(), detunes: Vec::new(), window }
    }

    pub fn with_pulse(mut self, qubit: usize, p: KappaPulse) -> Self {
        self.pulses.push((qubit, p));
        self
    }

    pub fn with_detune(mut self, qubit: usize, d: DetunePulse) -> Self {
        self.detunes.push((qubit, d));
        self
    }

    pub fn kappa(&self, qubit: usize, t: f64) -> f64 {
        self.pulses.iter().filter(|(q, _)| *q == qubit).map(|(_, p)| p.at(t)).sum()
    }

    pub fn delta(&self, qubit: usize, t: f64) -> f64 {
        self.detunes.iter().filter(|(q, _)| *q == qubit).map(|(_, d)| d.at(t)).sum()
    }

    /// Largest coupling rate anywhere in the schedule.
    pub fn kappa_max(&self) -> f64 {
        const N: usize = 2000;
        self.pulses
            .iter()
            .flat_map(|(_, p)| (0..=N).map(move |k| p.at(p.start + (p.end - p.start) * k as f64 / N as f64)))
            .fold(0.0, f64::max)
    }

    /// Times where any control is discontinuous, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .pulses
            .iter()
            .flat_map(|(_, p)| [p.start, p.end])
            .chain(self.detunes.iter().flat_map(|(_, d)| [d.start, d.start + d.duration]))
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Whether qubit `q` has any coupling or detuning active inside `[a, b]`.
    pub fn active_in(&self, qubit: usize, a: f64, b: f64) -> bool {
        self.pulses.iter().any(|(q, p)| *q == qubit && p.end > a && p.start < b)
            || self.detunes.iter().any(|(q, d)| *q == qubit && d.start + d.duration > a && d.start < b)
    }

    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            pulses: self.pulses.iter().map(|(q, p)| (*q, p.shifted(dt))).collect(),
            detunes: self.detunes.iter().map(|(q, d)| (*q, DetunePulse { start: d.start + dt, ..*d })).collect(),
            window: (self.window.0 + dt, self.window.1 + dt),
        }
    }

    /// Checks qubit indices, pulse parameters, and that the two couplers
    /// are never on at the same time.
    pub fn validate(&self) -> Result<()> {
        if !(self.window.1 > self.window.0) {
            return Err(Error::InvalidParameters("schedule window is empty".into()));
        }
        for (q, p) in &self.pulses {
            if *q > 1 {
                return Err(Error::InvalidParameters(format!("qubit index {q} out of range")));
            }
            if !(p.kappa_c > 0.0) || !(p.alpha > 0.0 && p.alpha <= 1.0) || !(p.end > p.start) {
                return Err(Error::InvalidParameters(format!("bad pulse {p:?}")));
            }
        }
        if self.detunes.iter().any(|(q, d)| *q > 1 || !(d.duration >= 0.0)) {
            return Err(Error::InvalidParameters("bad detuning pulse".into()));
        }
        for (qa, a) in &self.pulses {
            for (qb, b) in &self.pulses {
                if qa != qb && a.start < b.end && b.start < a.end {
                    return Err(Error::InvalidParameters(format!(
                        "couplers of both qubits active together on [{}, {}]",
                        a.start.max(b.start),
                        a.end.min(b.end)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds a schedule from declarative segments.
    pub fn from_segments(segments: &[Segment], timing: &PulseTiming, window: (f64, f64)) -> Result<Self> {
        timing.validate()?;
        let (kc, lead, tail) = (timing.kappa_c, timing.lead_ns, timing.tail_ns);
        let mut s = Self::new(window);
        for seg in segments {
            let q = seg.qubit();
            if !(1..=2).contains(&q) {
                return Err(Error::InvalidParameters(format!("segment qubit {q} must be 1 or 2")));
            }
            let q = q - 1;
            s = match *seg {
                Segment::FullRelease { start, .. } => {
                    s.with_pulse(q, KappaPulse::release(start + lead, kc, 1.0, lead, tail))
                }
                Segment::PartialRelease { start, alpha, .. } => {
                    s.with_pulse(q, KappaPulse::release(start + lead, kc, alpha, lead, tail))
                }
                Segment::Capture { start, .. } => {
                    s.with_pulse(q, KappaPulse::capture(start + tail, kc, 1.0, lead, tail))
                }
                Segment::PartialCapture { start, alpha, .. } => {
                    s.with_pulse(q, KappaPulse::capture(start + tail, kc, alpha, lead, tail))
                }
                Segment::Idle { duration, .. } => {
                    if !(duration >= 0.0) {
                        return Err(Error::InvalidParameters("idle duration must be non-negative".into()));
                    }
                    s
                }
                Segment::Detune { start, f_mhz, duration, .. } => {
                    s.with_detune(q, DetunePulse { start, duration, delta: MHZ * f_mhz })
                }
            };
        }
        s.validate()?;
        Ok(s)
    }

    /// Release by `qubit` centered at `lead`, recapture by the same qubit
    /// after `transits` round trips.
    pub fn ping_pong(qubit: usize, timing: &PulseTiming, tau: f64, transits: usize) -> Self {
        let c = timing.lead_ns;
        let back = c + transits as f64 * tau;
        Self::new((0.0, back + timing.lead_ns))
            .with_pulse(qubit, release(timing, c, 1.0))
            .with_pulse(qubit, capture(timing, back, 1.0))
    }

    /// Release by `from`, capture by `to` one transit later.
    pub fn transfer(from: usize, to: usize, timing: &PulseTiming, tau: f64) -> Self {
        let c = timing.lead_ns;
        Self::new((0.0, c + tau + timing.lead_ns))
            .with_pulse(from, release(timing, c, 1.0))
            .with_pulse(to, capture(timing, c + tau, 1.0))
    }

    /// Half release by qubit 0, full capture by qubit 1.
    pub fn bell(timing: &PulseTiming, tau: f64) -> Self {
        let c = timing.lead_ns;
        Self::new((0.0, c + tau + timing.lead_ns))
            .with_pulse(0, release(timing, c, 0.5))
            .with_pulse(1, capture(timing, c + tau, 1.0))
    }

    /// Qubit 1 releases first, then qubit 0; each captures the other's packet.
    pub fn double_swap(timing: &PulseTiming, tau: f64) -> Self {
        let c2 = timing.lead_ns;
        let c1 = 2.0 * timing.lead_ns + timing.tail_ns;
        Self::new((0.0, c1 + tau + timing.lead_ns))
            .with_pulse(1, release(timing, c2, 1.0))
            .with_pulse(0, release(timing, c1, 1.0))
            .with_pulse(0, capture(timing, c2 + tau, 1.0))
            .with_pulse(1, capture(timing, c1 + tau, 1.0))
    }

    /// Half release by qubit 0, a detuning pulse of `detune_mhz` lasting
    /// long enough to imprint `delta_phi`, then a half capture.
    pub fn interference(timing: &PulseTiming, tau: f64, detune_mhz: f64, delta_phi: f64) -> Result<Self> {
        if !(detune_mhz != 0.0) {
            return Err(Error::InvalidParameters("detuning must be nonzero".into()));
        }
        let c = timing.lead_ns;
        let delta = MHZ * detune_mhz;
        let duration = delta_phi.rem_euclid(2.0 * std::f64::consts::PI) / delta.abs();
        let start = c + timing.tail_ns;
        if start + duration > c + tau - timing.tail_ns {
            return Err(Error::InvalidParameters("detuning pulse does not fit inside the transit".into()));
        }
        Ok(Self::new((0.0, c + tau + timing.lead_ns))
            .with_pulse(0, release(timing, c, 0.5))
            .with_detune(0, DetunePulse { start, duration, delta: delta.abs() })
            .with_pulse(0, capture(timing, c + tau, 0.5)))
    }
}

fn release(t: &PulseTiming, center: f64, alpha: f64) -> KappaPulse {
    KappaPulse::release(center, t.kappa_c, alpha, t.lead_ns, t.tail_ns)
}

fn capture(t: &PulseTiming, center: f64, alpha: f64) -> KappaPulse {
    KappaPulse::capture(center, t.kappa_c, alpha, t.lead_ns, t.tail_ns)
}
