use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::schedule::ControlSchedule;
use crate::error::{Error, Result};

/// Largest integration step used inside pulse windows, ns.
pub const MAX_STEP_NS: f64 = 0.25;

/// Offset used to pick the one-sided value of a control at a discontinuity.
const EDGE: f64 = 1e-9;

/// Transmission of one transit through the phonon channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Power transmission per transit.
    pub eta: f64,
    /// Transit delay, ns.
    pub tau_ns: f64,
    /// Phase acquired per transit, rad.
    pub phase: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self { eta: 0.67, tau_ns: 508.0, phase: 0.0 }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameters(format!("eta = {} outside [0, 1]", self.eta)));
        }
        if !(self.tau_ns > 0.0) || !self.phase.is_finite() {
            return Err(Error::InvalidParameters("tau must be positive and phase finite".into()));
        }
        Ok(())
    }

    fn transmission(&self) -> C64 {
        C64::from_polar(self.eta.sqrt(), self.phase)
    }
}

/// Sampled amplitudes of an input–output run.
#[derive(Debug, Clone, Default)]
pub struct IOTrace {
    pub times: Vec<f64>,
    pub s1: Vec<C64>,
    pub s2: Vec<C64>,
    pub a_out: Vec<C64>,
    pub a_in: Vec<C64>,
}

impl IOTrace {
    pub fn population(&self, qubit: usize) -> Vec<f64> {
        let s = if qubit == 0 { &self.s1 } else { &self.s2 };
        s.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn final_population(&self, qubit: usize) -> f64 {
        let s = if qubit == 0 { &self.s1 } else { &self.s2 };
        s.last().map_or(0.0, |z| z.norm_sqr())
    }

    /// ∫|a_out|² dt over the trace (trapezoid).
    pub fn emitted_energy(&self) -> f64 {
        trapz(&self.times, |i| self.a_out[i].norm_sqr())
    }

    /// ∫|a_in|² dt over the trace (trapezoid).
    pub fn absorbed_input(&self) -> f64 {
        trapz(&self.times, |i| self.a_in[i].norm_sqr())
    }
}

fn trapz(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f(i) + f(i - 1))).sum()
}

/// Output field on one uniformly spaced segment between breakpoints.
struct HistorySeg {
    t0: f64,
    t1: f64,
    h: f64,
    vals: Vec<C64>,
}

impl HistorySeg {
    /// Cubic Lagrange interpolation on the four nodes nearest `x`.
    fn interp(&self, x: f64) -> C64 {
        let n = self.vals.len();
        if n == 1 {
            return self.vals[0];
        }
        let m = n.min(4);
        let k = ((x - self.t0) / self.h).floor() as isize - (m as isize / 2 - 1);
        let first = k.clamp(0, (n - m) as isize) as usize;
        let nodes: Vec<f64> = (first..first + m).map(|j| self.t0 + j as f64 * self.h).collect();
        let mut acc = C64::new(0.0, 0.0);
        for (a, &ta) in nodes.iter().enumerate() {
            let w: f64 =
                nodes.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, &tb)| (x - tb) / (ta - tb)).product();
            acc += self.vals[first + a] * w;
        }
        acc
    }
}

struct History {
    segs: Vec<HistorySeg>,
}

impl History {
    /// Segment whose closed interval contains `mid`.
    fn find(&self, mid: f64) -> Option<&HistorySeg> {
        let i = self.segs.partition_point(|s| s.t1 < mid);
        self.segs.get(i).filter(|s| s.t0 <= mid)
    }
}

/// Integrates the delayed input–output equations for two qubits sharing
/// one channel, with fixed-step RK4 between control breakpoints.
pub fn simulate_io(sched: &ControlSchedule, ch: &ChannelParams, s0: [C64; 2], dt: f64) -> Result<IOTrace> {
    sched.validate()?;
    ch.validate()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameters("dt must be positive".into()));
    }
    let kmax = sched.kappa_max();
    let dt = dt.min(MAX_STEP_NS);
    if kmax > 0.0 && dt > 1.0 / (10.0 * kmax) {
        return Err(Error::Resolution { dt, required: 1.0 / (10.0 * kmax) });
    }

    let (w0, w1) = sched.window;
    let tau = ch.tau_ns;
    let mut base: Vec<f64> = vec![w0, w1];
    base.extend(sched.breakpoints().into_iter().filter(|&b| b > w0 && b < w1));
    let mut bps = base.clone();
    for &b in &base {
        let mut t = b + tau;
        while t < w1 {
            bps.push(t);
            t += tau;
        }
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let tr = ch.transmission();
    let mut hist = History { segs: Vec::new() };
    let mut out = IOTrace::default();
    let mut s = s0;

    for win in bps.windows(2) {
        let (b0, b1) = (win[0], win[1]);
        let n = ((b1 - b0) / dt - 1e-9).ceil().max(1.0) as usize;
        let h = (b1 - b0) / n as f64;
        let ctl = |t: f64| {
            let te = t.clamp(b0 + EDGE, b1 - EDGE);
            let k = [sched.kappa(0, te), sched.kappa(1, te)];
            let d = [sched.delta(0, te), sched.delta(1, te)];
            (k, d)
        };
        // delayed output is smooth over the whole step by construction of the breakpoints
        let a_in_at = |hist: &History, t: f64, mid: f64| -> C64 {
            match hist.find(mid - tau) {
                Some(seg) => tr * seg.interp(t - tau),
                None => C64::new(0.0, 0.0),
            }
        };
        // detuning is constant between breakpoints and is integrated exactly in a
        // rotating frame anchored at the start of each step
        let (_, dseg) = ctl(0.5 * (b0 + b1));
        let rhs = |t: f64, t_ref: f64, u: &[C64; 2], ain: C64| -> [C64; 2] {
            let (k, _) = ctl(t);
            let f = |i: usize| {
                let rot = C64::from_polar(1.0, -dseg[i] * (t - t_ref));
                -(k[i] / 2.0) * u[i] + k[i].sqrt() * ain * rot.conj()
            };
            [f(0), f(1)]
        };
        let a_out_at = |t: f64, s: &[C64; 2], ain: C64| -> C64 {
            let (k, _) = ctl(t);
            k[0].sqrt() * s[0] + k[1].sqrt() * s[1] - ain
        };

        let mut seg = HistorySeg { t0: b0, t1: b1, h, vals: Vec::with_capacity(n + 1) };
        let ain0 = a_in_at(&hist, b0, b0 + 0.5 * h);
        let aout0 = a_out_at(b0, &s, ain0);
        seg.vals.push(aout0);
        // controls may jump here, so both one-sided values are recorded
        push(&mut out, b0, &s, aout0, ain0);
        for j in 0..n {
            let t = b0 + j as f64 * h;
            let mid = t + 0.5 * h;
            let a0 = a_in_at(&hist, t, mid);
            let am = a_in_at(&hist, mid, mid);
            let a1 = a_in_at(&hist, t + h, mid);
            let add = |s: &[C64; 2], k: &[C64; 2], c: f64| [s[0] + k[0] * c, s[1] + k[1] * c];
            let k1 = rhs(t, t, &s, a0);
            let k2 = rhs(mid, t, &add(&s, &k1, 0.5 * h), am);
            let k3 = rhs(mid, t, &add(&s, &k2, 0.5 * h), am);
            let k4 = rhs(t + h, t, &add(&s, &k3, h), a1);
            for i in 0..2 {
                let u = s[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
                s[i] = u * C64::from_polar(1.0, -dseg[i] * h);
            }
            let tn = if j + 1 == n { b1 } else { t + h };
            let ao = a_out_at(tn, &s, a1);
            seg.vals.push(ao);
            push(&mut out, tn, &s, ao, a1);
        }
        if !(s[0].is_finite() && s[1].is_finite()) {
            return Err(Error::IntegrationFailure { t: b1, reason: "non-finite amplitude".into() });
        }
        hist.segs.push(seg);
    }
    Ok(out)
}

fn push(out: &mut IOTrace, t: f64, s: &[C64; 2], aout: C64, ain: C64) {
    out.times.push(t);
    out.s1.push(s[0]);
    out.s2.push(s[1]);
    out.a_out.push(aout);
    out.a_in.push(ain);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ioshape::{sech_envelope, DetunePulse, KappaPulse, PulseTiming};

    fn one() -> [C64; 2] {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    }

    #[test]
    fn release_emits_sech() {
        // long lead so the truncated pulse starts from an essentially full qubit
        let c = 250.0;
        let sched = ControlSchedule::new((0.0, 500.0)).with_pulse(0, KappaPulse::release(c, 0.1, 1.0, 250.0, 250.0));
        let ch = ChannelParams { eta: 0.0, tau_ns: 2000.0, phase: 0.0 };
        let tr = simulate_io(&sched, &ch, one(), 0.1).unwrap();
        let err = tr
            .times
            .iter()
            .zip(&tr.a_out)
            .map(|(&t, a)| (a.norm_sqr() - sech_envelope(t - c, 0.1).powi(2)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(tr.population(0)[tr.times.partition_point(|&t| t < c + 50.0)] < 0.01);
    }

    #[test]
    fn half_release_splits_energy() {
        let sched =
            ControlSchedule::new((0.0, 400.0)).with_pulse(0, KappaPulse::release(150.0, 0.1, 0.5, 150.0, 250.0));
        let ch = ChannelParams { eta: 0.0, tau_ns: 2000.0, phase: 0.0 };
        let tr = simulate_io(&sched, &ch, one(), 0.1).unwrap();
        assert!((tr.emitted_energy() - 0.5).abs() < 1e-4);
        assert!((tr.final_population(0) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn transfer_lossless_and_lossy() {
        let t = PulseTiming { lead_ns: 90.0, ..Default::default() };
        let sched = ControlSchedule::transfer(0, 1, &t, 508.0);
        let lossless = simulate_io(&sched, &ChannelParams { eta: 1.0, ..Default::default() }, one(), 0.25).unwrap();
        assert!(lossless.final_population(1) >= 0.999, "{}", lossless.final_population(1));
        let lossy = simulate_io(&sched, &ChannelParams::default(), one(), 0.25).unwrap();
        assert!((lossy.final_population(1) - 0.67).abs() < 0.01);
    }

    #[test]
    fn energy_conserved_with_unit_transmission() {
        let t = PulseTiming::default();
        let sched = ControlSchedule::ping_pong(0, &t, 200.0, 2);
        let tr = simulate_io(&sched, &ChannelParams { eta: 1.0, tau_ns: 200.0, phase: 0.3 }, one(), 0.1).unwrap();
        // in-flight energy: output emitted during the last τ has not come back yet;
        // breakpoints are multiples of dt, so t − τ is always a grid node
        let tend = *tr.times.last().unwrap();
        for (idx, &t) in tr.times.iter().enumerate().step_by(97) {
            let lo = tr.times.partition_point(|&x| x < t - 200.0 - 1e-6);
            let flight = trapz(&tr.times[lo..=idx], |i| tr.a_out[lo + i].norm_sqr());
            let total = tr.s1[idx].norm_sqr() + tr.s2[idx].norm_sqr() + flight;
            assert!((total - 1.0).abs() < 1e-6, "t={t} total={total} end={tend}");
        }
    }

    #[test]
    fn idle_only_rotates() {
        let sched =
            ControlSchedule::new((0.0, 100.0)).with_detune(1, DetunePulse { start: 10.0, duration: 50.0, delta: 0.2 });
        let s0 = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let tr = simulate_io(&sched, &ChannelParams::default(), s0, 0.25).unwrap();
        for (a, b) in tr.s1.iter().zip(&tr.s2) {
            assert!((a.norm() - 0.6).abs() < 1e-12 && (b.norm() - 0.8).abs() < 1e-12);
        }
        let rot = tr.s2.last().unwrap() / s0[1];
        assert!((rot - C64::from_polar(1.0, -10.0)).norm() < 1e-9);
    }

    #[test]
    fn resonant_output_stays_real_and_phase_covariant() {
        let sched = ControlSchedule::transfer(0, 1, &PulseTiming::default(), 508.0);
        let ch = ChannelParams { eta: 0.8, ..Default::default() };
        let tr = simulate_io(&sched, &ch, one(), 0.25).unwrap();
        assert!(tr.a_out.iter().all(|a| a.im.abs() < 1e-10));
        let g = C64::from_polar(1.0, 0.7);
        let tg = simulate_io(&sched, &ch, [g, C64::new(0.0, 0.0)], 0.25).unwrap();
        for (a, b) in tr.s2.iter().zip(&tg.s2) {
            assert!((a * g - b).norm() < 1e-10);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let t = PulseTiming { kappa_c: 2.0, ..Default::default() };
        let sched = ControlSchedule::transfer(0, 1, &t, 508.0);
        assert!(matches!(simulate_io(&sched, &ChannelParams::default(), one(), 0.25), Err(Error::Resolution { .. })));
    }

    #[test]
    fn step_convergence() {
        let sched = ControlSchedule::double_swap(&PulseTiming::default(), 508.0);
        let s0 = [C64::new(0.6, 0.0), C64::new(0.8, 0.0)];
        let a = simulate_io(&sched, &ChannelParams::default(), s0, 0.25).unwrap();
        let b = simulate_io(&sched, &ChannelParams::default(), s0, 0.125).unwrap();
        assert!((a.final_population(0) - b.final_population(0)).abs() < 1e-6);
        assert!((a.final_population(1) - b.final_population(1)).abs() < 1e-6);
    }
}
