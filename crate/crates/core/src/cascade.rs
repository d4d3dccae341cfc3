//! Two-stage cascaded master equation for delayed, lossy transfer between
//! two qubits sharing one acoustic channel.
//!
//! On `[0, τ]` the two qubits evolve alone and their emission is lost to the
//! channel. On `[τ, 2τ]` a second copy of both qubits replays the first stage
//! as an emitter whose output drives the receiving copy.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, QubitParams};
use crate::dynamics::{evolve_with, Coeff, CollapseTerm, EvolveOptions, LindbladModel, Term, Trajectory};
use crate::error::{Error, Result};
use crate::ioshape::{ChannelParams, ControlSchedule};
use crate::qcore::{embed, kron, lowering, number, partial_trace, CMatrix, HilbertSpace, Operator, QuantumState, C64};
use crate::tomo::{input_states, process_from_states, ProcessMatrix};

pub const RECEIVERS: [&str; 2] = ["q1", "q2"];
pub const EMITTERS: [&str; 2] = ["q1e", "q2e"];

/// Intrinsic relaxation and pure dephasing of one qubit, 1/ns.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Imperfections {
    pub relax_per_ns: f64,
    pub dephase_per_ns: f64,
}

impl Imperfections {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_qubit(q: &QubitParams) -> Result<Self> {
        Ok(Self { relax_per_ns: q.relaxation_per_ns(), dephase_per_ns: q.dephasing_per_ns()? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub schedule: ControlSchedule,
    pub channel: ChannelParams,
    pub qubits: [Imperfections; 2],
    pub tol: f64,
}

impl CascadeConfig {
    pub fn ideal(schedule: ControlSchedule, channel: ChannelParams) -> Self {
        Self { schedule, channel, qubits: [Imperfections::none(); 2], tol: 1e-9 }
    }

    /// Channel and qubit imperfections taken from the device description.
    pub fn from_device(schedule: ControlSchedule, dev: &DeviceParams) -> Result<Self> {
        Ok(Self {
            schedule,
            channel: ChannelParams { eta: dev.eta, tau_ns: dev.tau_ns, phase: 0.0 },
            qubits: [Imperfections::from_qubit(&dev.q1)?, Imperfections::from_qubit(&dev.q2)?],
            tol: 1e-9,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_roles(&self.schedule)?;
        self.schedule.validate()?;
        self.channel.validate()?;
        if self.qubits.iter().any(|q| !(q.relax_per_ns >= 0.0) || !(q.dephase_per_ns >= 0.0)) {
            return Err(Error::InvalidParameters("qubit decay rates must be non-negative".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameters("tolerance must be positive".into()));
        }
        Ok(())
    }

    fn options(&self) -> EvolveOptions {
        EvolveOptions::with_tol(self.tol)
    }
}

/// The emitter role at any time must belong to a single qubit.
fn check_roles(s: &ControlSchedule) -> Result<()> {
    for (qa, a) in &s.pulses {
        for (qb, b) in &s.pulses {
            if qa < qb && a.start < b.end && b.start < a.end {
                return Err(Error::RoleAmbiguity(a.start.max(b.start)));
            }
        }
    }
    Ok(())
}

pub fn two_qubit_space() -> Arc<HilbertSpace> {
    Arc::new(HilbertSpace::qubits(&RECEIVERS).expect("valid labels"))
}

/// Space of the doubled system, ordered (q1, q2, q1e, q2e).
pub fn doubled_space() -> Arc<HilbertSpace> {
    let labels = [RECEIVERS[0], RECEIVERS[1], EMITTERS[0], EMITTERS[1]];
    Arc::new(HilbertSpace::qubits(&labels).expect("valid labels"))
}

fn kappa_fn(s: &Arc<ControlSchedule>, i: usize, shift: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let s = Arc::clone(s);
    move |t| s.kappa(i, t - shift)
}

/// Detuning and intrinsic decay of qubit `i` represented by mode `label`,
/// with controls delayed by `shift`.
fn add_local(
    mut m: LindbladModel,
    cfg: &CascadeConfig,
    sched: &Arc<ControlSchedule>,
    i: usize,
    label: &str,
    shift: f64,
) -> Result<LindbladModel> {
    let n = embed(&number(2), label, &m.space)?;
    let s = embed(&lowering(2), label, &m.space)?;
    if sched.detunes.iter().any(|(q, _)| *q == i) {
        let sc = Arc::clone(sched);
        m = m.with_term(Coeff::func(move |t| sc.delta(i, t - shift)), n.clone());
    }
    let imp = cfg.qubits[i];
    if imp.relax_per_ns > 0.0 {
        m = m.with_collapse(CollapseTerm::single(imp.relax_per_ns.sqrt(), s));
    }
    if imp.dephase_per_ns > 0.0 {
        m = m.with_collapse(CollapseTerm::single(imp.dephase_per_ns.sqrt(), n));
    }
    Ok(m)
}

fn add_emission(m: LindbladModel, sched: &Arc<ControlSchedule>, i: usize, label: &str) -> Result<LindbladModel> {
    let s = embed(&lowering(2), label, &m.space)?;
    let k = kappa_fn(sched, i, 0.0);
    Ok(m.with_collapse(CollapseTerm::single(Coeff::func(move |t| k(t).sqrt()), s)))
}

/// Liouvillian model on `[0, τ]`: free emission of both qubits.
pub fn stage1_model(cfg: &CascadeConfig) -> Result<LindbladModel> {
    let sched = Arc::new(cfg.schedule.clone());
    let mut m = LindbladModel::new(two_qubit_space());
    for (i, label) in RECEIVERS.iter().enumerate() {
        m = add_local(m, cfg, &sched, i, label, 0.0)?;
        m = add_emission(m, &sched, i, label)?;
    }
    m.breakpoints = cfg.schedule.breakpoints();
    Ok(m)
}

/// Liouvillian model on `[τ, 2τ]` for the doubled system.
///
/// With emitter field A = e^{iφ}Σ√κᵢ(t−τ) s_iE and receiver coupling
/// B = Σ√κᵢ(t) s_iR, the dissipator is
/// √η D[B − A] + (1 − √η)(D[A] + D[B]) and the exchange Hamiltonian is
/// −(i/2)√η(A†B − B†A).
pub fn stage2_model(cfg: &CascadeConfig) -> Result<LindbladModel> {
    let tau = cfg.channel.tau_ns;
    let sched = Arc::new(cfg.schedule.clone());
    let space = doubled_space();
    let mut m = LindbladModel::new(Arc::clone(&space));
    for i in 0..2 {
        m = add_local(m, cfg, &sched, i, RECEIVERS[i], 0.0)?;
        m = add_local(m, cfg, &sched, i, EMITTERS[i], tau)?;
    }
    let phase = C64::from_polar(1.0, cfg.channel.phase);
    let rt = cfg.channel.eta.sqrt();
    let mut s_r = Vec::new();
    let mut s_e = Vec::new();
    for i in 0..2 {
        s_r.push(embed(&lowering(2), RECEIVERS[i], &space)?);
        s_e.push(embed(&lowering(2), EMITTERS[i], &space)?.scale(phase));
    }
    // (weight on A, weight on B) of each collective jump
    let jumps = [(-rt.sqrt(), rt.sqrt()), (-(1.0 - rt).sqrt(), 0.0), (0.0, (1.0 - rt).sqrt())];
    for (wa, wb) in jumps {
        let mut parts = Vec::new();
        for i in 0..2 {
            let ke = kappa_fn(&sched, i, tau);
            let kr = kappa_fn(&sched, i, 0.0);
            if wa != 0.0 {
                parts.push(Term::new(Coeff::func(move |t| ke(t).sqrt()), s_e[i].scale(wa)));
            }
            if wb != 0.0 {
                parts.push(Term::new(Coeff::func(move |t| kr(t).sqrt()), s_r[i].scale(wb)));
            }
        }
        if !parts.is_empty() {
            m = m.with_collapse(CollapseTerm::sum(parts));
        }
    }
    if rt > 0.0 {
        for i in 0..2 {
            for j in 0..2 {
                let ke = kappa_fn(&sched, i, tau);
                let kr = kappa_fn(&sched, j, 0.0);
                let ab = &s_e[i].dagger() * &s_r[j];
                let op = (&ab - &ab.dagger()).scale(C64::new(0.0, -0.5 * rt));
                m = m.with_term(Coeff::func(move |t| (ke(t) * kr(t)).sqrt()), op);
            }
        }
    }
    let mut bps = cfg.schedule.breakpoints();
    bps.extend(cfg.schedule.breakpoints().iter().map(|b| b + tau));
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    m.breakpoints = bps;
    Ok(m)
}

/// Result of a cascade run on the two physical qubits.
#[derive(Debug, Clone)]
pub struct CascadeRun {
    /// Receiver-copy reduced states at the grid times.
    pub trajectory: Trajectory,
    /// Two-qubit state at the last grid time, read from whichever copy
    /// carries each qubit's correlations.
    pub final_state: QuantumState,
    /// Which copy each qubit was read from at the end (`true` = emitter).
    pub read_from_emitter: [bool; 2],
}

/// Integrates both stages over `grid`, which must start at 0 and end no later
/// than 2τ.
pub fn run_cascade(cfg: &CascadeConfig, rho0: &QuantumState, grid: &[f64]) -> Result<CascadeRun> {
    cfg.validate()?;
    let tau = cfg.channel.tau_ns;
    let space2 = two_qubit_space();
    if **rho0.space() != *space2 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho0.dim() });
    }
    let (&t0, &tf) = match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParameters("empty time grid".into())),
    };
    if t0 != 0.0 {
        return Err(Error::InvalidParameters("cascade grid must start at t = 0".into()));
    }
    if tf > 2.0 * tau + 1e-9 {
        return Err(Error::OutsideWindow { t: tf, limit: 2.0 * tau });
    }
    let opts = cfg.options();

    let mut g1: Vec<f64> = grid.iter().copied().filter(|&t| t <= tau).collect();
    if tf > tau && *g1.last().unwrap() < tau {
        g1.push(tau);
    }
    let tr1 = evolve_with(&stage1_model(cfg)?, rho0, &g1, &opts)?;
    let mut trajectory = Trajectory { times: Vec::new(), states: Vec::new(), observables: Default::default() };
    for (t, s) in tr1.times.iter().zip(&tr1.states) {
        if grid.contains(t) {
            trajectory.times.push(*t);
            trajectory.states.push(s.clone());
        }
    }
    if tf <= tau {
        let final_state = trajectory.last().clone();
        observe_populations(&mut trajectory)?;
        return Ok(CascadeRun { trajectory, final_state, read_from_emitter: [false; 2] });
    }

    let rho_r = tr1.last().rho();
    let spliced = kron(rho_r, rho0.rho());
    if ((spliced.trace().re) - 1.0).abs() > 1e-8 {
        return Err(Error::Internal(format!("splice trace {}", spliced.trace().re)));
    }
    let space4 = doubled_space();
    let doubled = QuantumState::new(Arc::clone(&space4), spliced)?;
    let mut g2 = vec![tau];
    g2.extend(grid.iter().copied().filter(|&t| t > tau));
    let tr2 = evolve_with(&stage2_model(cfg)?, &doubled, &g2, &opts)?;
    for (t, s) in tr2.times.iter().zip(&tr2.states).skip(1) {
        trajectory.times.push(*t);
        trajectory.states.push(relabel(&partial_trace(s, &RECEIVERS)?, &space2)?);
    }
    observe_populations(&mut trajectory)?;

    // a qubit whose receiver copy stays idle after τ received nothing; its
    // correlations with the other qubit live in the emitter copy, which lags
    // by τ and is brought forward with the qubit's own dynamics
    let from_e = [0, 1].map(|i| !cfg.schedule.active_in(i, tau, tf));
    let keep = [0, 1].map(|i| if from_e[i] { EMITTERS[i] } else { RECEIVERS[i] });
    let mut final_state = relabel(&partial_trace(tr2.last(), &keep)?, &space2)?;
    if from_e.iter().any(|&e| e) {
        let sched = Arc::new(cfg.schedule.clone());
        let mut m = LindbladModel::new(Arc::clone(&space2));
        for i in (0..2).filter(|&i| from_e[i]) {
            m = add_local(m, cfg, &sched, i, RECEIVERS[i], 0.0)?;
            m = add_emission(m, &sched, i, RECEIVERS[i])?;
        }
        m.breakpoints = cfg.schedule.breakpoints();
        final_state = evolve_with(&m, &final_state, &[tf - tau, tf], &opts)?.last().clone();
    }
    Ok(CascadeRun { trajectory, final_state, read_from_emitter: from_e })
}

fn relabel(s: &QuantumState, space: &Arc<HilbertSpace>) -> Result<QuantumState> {
    QuantumState::new(Arc::clone(space), s.rho().clone())
}

fn observe_populations(tr: &mut Trajectory) -> Result<()> {
    let space = two_qubit_space();
    for (i, label) in RECEIVERS.iter().enumerate() {
        let n: Operator = embed(&number(2), label, &space)?;
        tr.observe(&format!("P_e(Q{})", i + 1), &n);
    }
    Ok(())
}

/// Which qubits carry the process under tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMap {
    /// Inputs prepared on `from` (the other qubit in |g⟩), output read on `to`.
    Single { from: usize, to: usize },
    /// Product inputs on both qubits, two-qubit output.
    Both,
}

/// Runs the cascade once per tomography input state up to `t_final` and
/// reconstructs the process matrix from the final states.
pub fn process_tomography_run(cfg: &CascadeConfig, map: TransferMap, t_final: f64) -> Result<ProcessMatrix> {
    let n = match map {
        TransferMap::Single { from, to } if from < 2 && to < 2 => 1,
        TransferMap::Single { .. } => return Err(Error::InvalidParameters("qubit index out of range".into())),
        TransferMap::Both => 2,
    };
    let inputs = input_states(n);
    let ground = {
        let mut g = CMatrix::zeros(2, 2);
        g[(0, 0)] = C64::new(1.0, 0.0);
        g
    };
    let space = two_qubit_space();
    let outputs = inputs
        .par_iter()
        .map(|rin| {
            let rho = match map {
                TransferMap::Single { from: 0, .. } => kron(rin, &ground),
                TransferMap::Single { .. } => kron(&ground, rin),
                TransferMap::Both => rin.clone(),
            };
            let r = run_cascade(cfg, &QuantumState::new(Arc::clone(&space), rho)?, &[0.0, t_final])?;
            match map {
                TransferMap::Single { to, .. } => Ok(partial_trace(&r.final_state, &[RECEIVERS[to]])?.into_rho()),
                TransferMap::Both => Ok(r.final_state.into_rho()),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    process_from_states(&inputs, &outputs)
}

/// Product state with qubit 1 in `a` and qubit 2 in `b` (two-level kets,
/// |g⟩ first).
pub fn product_state(a: [C64; 2], b: [C64; 2]) -> Result<QuantumState> {
    let ket = nalgebra::DVector::from_vec(vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]);
    QuantumState::from_ket(two_qubit_space(), &ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ioshape::{simulate_io, KappaPulse, PulseTiming};
    use crate::qcore::hermitian_eigen;
    use crate::qcore::state::tests::random_rho;
    use rand::SeedableRng;

    const G: [C64; 2] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    const E: [C64; 2] = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    }

    fn pop(s: &QuantumState, label: &str) -> f64 {
        s.mode_population(label, 1).unwrap()
    }

    #[test]
    fn stage2_is_trace_preserving_and_hermitian() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let sched = ControlSchedule::transfer(0, 1, &PulseTiming::default(), 508.0);
        for eta in [0.0, 0.3, 0.67, 1.0] {
            let mut cfg = CascadeConfig::ideal(sched.clone(), ChannelParams { eta, phase: 0.4, ..Default::default() });
            cfg.qubits = [Imperfections { relax_per_ns: 1e-4, dephase_per_ns: 4e-4 }; 2];
            let m = stage2_model(&cfg).unwrap();
            let rho = random_rho(16, &mut rng);
            for t in [520.0, 568.0, 600.0] {
                let l = m.liouvillian(t);
                let d = l.apply(&rho).unwrap();
                assert!(d.trace().norm() < 1e-12);
                assert!((&d - d.adjoint()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_transmission_has_single_collective_jump() {
        let sched = ControlSchedule::transfer(0, 1, &PulseTiming::default(), 508.0);
        let m = stage2_model(&CascadeConfig::ideal(sched, ChannelParams { eta: 1.0, ..Default::default() })).unwrap();
        assert_eq!(m.collapse.len(), 1);
    }

    #[test]
    fn constant_coupling_decay_rate() {
        let sched = ControlSchedule::new((0.0, 100.0)).with_pulse(0, KappaPulse::release(-1000.0, 0.02, 1.0, 1.0, 1e6));
        let mut cfg = CascadeConfig::ideal(sched, ChannelParams::default());
        cfg.qubits[0].relax_per_ns = 0.005;
        let k = cfg.schedule.kappa(0, 50.0);
        let r = run_cascade(&cfg, &product_state(E, G).unwrap(), &grid(0.0, 100.0, 10)).unwrap();
        let p = r.trajectory.observables["P_e(Q1)"].clone();
        for (t, p) in r.trajectory.times.iter().zip(p) {
            assert!((p - (-(k + 0.005) * t).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn idle_schedule_is_free_decay() {
        let sched = ControlSchedule::new((0.0, 1000.0));
        let mut cfg = CascadeConfig::ideal(sched, ChannelParams::default());
        cfg.qubits = [
            Imperfections { relax_per_ns: 1e-3, dephase_per_ns: 2e-3 },
            Imperfections { relax_per_ns: 5e-4, dephase_per_ns: 0.0 },
        ];
        let plus = [C64::new(0.5f64.sqrt(), 0.0), C64::new(0.5f64.sqrt(), 0.0)];
        let r = run_cascade(&cfg, &product_state(plus, E).unwrap(), &grid(0.0, 1000.0, 4)).unwrap();
        assert_eq!(r.read_from_emitter, [true, true]);
        let rho = r.final_state.rho();
        let t: f64 = 1000.0;
        assert!((pop(&r.final_state, "q1") - 0.5 * (-1e-3 * t).exp()).abs() < 1e-7);
        assert!((pop(&r.final_state, "q2") - (-5e-4 * t).exp()).abs() < 1e-7);
        // ⟨g,e|ρ|e,e⟩ = ½·coherence decay e^{−(γ1/2 + γφ/2)t}·P(q2 = e)
        let c = 0.5 * (-(0.5e-3 + 1e-3) * t).exp() * (-5e-4 * t).exp();
        assert!((rho[(1, 3)].norm() - c).abs() < 1e-7, "{} {c}", rho[(1, 3)].norm());
        // the receiver trajectory agrees with the role-aware final state
        assert!((r.trajectory.last().rho() - rho).norm() < 1e-7);
    }

    #[test]
    fn matches_amplitude_model_without_loss() {
        let t = PulseTiming { lead_ns: 100.0, tail_ns: 220.0, ..Default::default() };
        let sched = ControlSchedule::transfer(0, 1, &t, 508.0);
        let ch = ChannelParams { eta: 1.0, ..Default::default() };
        let io = simulate_io(&sched, &ch, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 0.05).unwrap();
        let tf = sched.window.1;
        let g = grid(0.0, tf, 200);
        let r = run_cascade(&CascadeConfig::ideal(sched, ch), &product_state(E, G).unwrap(), &g).unwrap();
        let p2 = &r.trajectory.observables["P_e(Q2)"];
        let mut err: f64 = 0.0;
        for (t, p) in g.iter().zip(p2) {
            let k = io.times.partition_point(|&x| x <= *t).clamp(1, io.times.len() - 1);
            let (ta, tb) = (io.times[k - 1], io.times[k]);
            let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
            let pio = (1.0 - w) * io.s2[k - 1].norm_sqr() + w * io.s2[k].norm_sqr();
            err = err.max((pio - p).abs());
        }
        assert!(err < 1e-4, "{err}");
        assert!(pop(&r.final_state, "q2") >= 0.999);
    }

    #[test]
    fn transfer_monotone_in_eta() {
        let sched = ControlSchedule::transfer(0, 1, &PulseTiming::default(), 508.0);
        let mut last = -1.0;
        for eta in [0.3, 0.5, 0.67, 0.9, 1.0] {
            let cfg = CascadeConfig::ideal(sched.clone(), ChannelParams { eta, ..Default::default() });
            let r = run_cascade(&cfg, &product_state(E, G).unwrap(), &[0.0, sched.window.1]).unwrap();
            let p = pop(&r.final_state, "q2");
            assert!(p >= last);
            last = p;
        }
        let cfg = CascadeConfig::ideal(sched.clone(), ChannelParams::default());
        let r = run_cascade(&cfg, &product_state(E, G).unwrap(), &[0.0, sched.window.1]).unwrap();
        assert!((pop(&r.final_state, "q2") - 0.67).abs() < 0.01);
    }

    #[test]
    fn bell_sequence_builds_coherence() {
        let sched = ControlSchedule::bell(&PulseTiming::default(), 508.0);
        let cfg = CascadeConfig::from_device(sched.clone(), &DeviceParams::default()).unwrap();
        let r = run_cascade(&cfg, &product_state(E, G).unwrap(), &[0.0, sched.window.1]).unwrap();
        assert_eq!(r.read_from_emitter, [true, false]);
        // |eg⟩ and |ge⟩ are basis indices 2 and 1
        assert!(r.final_state.rho()[(2, 1)].norm() > 0.30);
        let (vals, _) = hermitian_eigen(r.final_state.rho());
        assert!(vals[0] > -1e-9);
    }

    #[test]
    fn idle_identity_process() {
        let cfg = CascadeConfig::ideal(ControlSchedule::new((0.0, 1.0)), ChannelParams::default());
        let chi = process_tomography_run(&cfg, TransferMap::Single { from: 0, to: 0 }, 1e-3).unwrap();
        assert!((chi.chi[(0, 0)].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_beyond_two_transits_and_ambiguous_roles() {
        let sched = ControlSchedule::transfer(0, 1, &PulseTiming::default(), 508.0);
        let cfg = CascadeConfig::ideal(sched, ChannelParams::default());
        let rho = product_state(E, G).unwrap();
        assert!(matches!(run_cascade(&cfg, &rho, &[0.0, 1100.0]), Err(Error::OutsideWindow { .. })));
        let t = PulseTiming::default();
        let bad = ControlSchedule::new((0.0, 300.0))
            .with_pulse(0, KappaPulse::release(60.0, 0.1, 1.0, t.lead_ns, t.tail_ns))
            .with_pulse(1, KappaPulse::release(100.0, 0.1, 1.0, t.lead_ns, t.tail_ns));
        let cfg = CascadeConfig::ideal(bad, ChannelParams::default());
        assert!(matches!(run_cascade(&cfg, &rho, &[0.0, 300.0]), Err(Error::RoleAmbiguity(_))));
    }
}
