//! One runner per experiment id.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use phonon_core::cascade::{process_tomography_run, product_state, run_cascade, CascadeConfig, TransferMap};
use phonon_core::dynamics::{EvolveOptions, NoiseSpec, Trajectory};
use phonon_core::ioshape::{
    interference_experiment, simulate_io, ChannelParams, ControlSchedule, IOTrace, InterferenceSetup,
};
use phonon_core::multimode::{evolve_multimode, golden_rule_kappa, laguerre_amplitude, spectrum, MultimodeParams};
use phonon_core::qcore::{CMatrix, C64};
use phonon_core::sawphys::{
    free_spectral_range_mhz, idt_rate_spectrum, loss_budget, mirror_stopband, stopband_width_ghz, transit_time,
};
use phonon_core::tomo::{
    chi_from_unitary, concurrence, correct_data, fidelity, hs_distance, input_states, pauli_expectations, pauli_labels,
    process_from_states, simulate_tomography, state_tomo, swap_unitary, ProcessMatrix, ReadoutModel, Shots,
};

use crate::bundle::{ExperimentOutput, MatrixOut, Series};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliResult;

const G: [C64; 2] = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
const E: [C64; 2] = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
const TWO_QUBIT_BASIS: [&str; 4] = ["gg", "ge", "eg", "ee"];

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::PingPong => ping_pong(cfg),
        ExperimentKind::MultiTransit => multi_transit(cfg),
        ExperimentKind::Interference => interference(cfg),
        ExperimentKind::Swap => swap(cfg),
        ExperimentKind::DoubleSwap => double_swap(cfg),
        ExperimentKind::Bell => bell(cfg),
        ExperimentKind::Spectroscopy => spectroscopy(cfg),
        ExperimentKind::VacuumRabi => vacuum_rabi(cfg),
        ExperimentKind::SawResponse => saw_response(cfg),
        ExperimentKind::TomoRoundtrip => tomo_roundtrip(cfg),
    }
}

fn channel(cfg: &ExperimentConfig) -> ChannelParams {
    ChannelParams { eta: cfg.device.eta, tau_ns: cfg.device.tau_ns, phase: 0.0 }
}

fn schedule_or(cfg: &ExperimentConfig, built_in: ControlSchedule) -> CliResult<ControlSchedule> {
    match &cfg.schedule {
        Some(sc) => Ok(ControlSchedule::from_segments(&sc.segments, &cfg.timing, (0.0, sc.window_end_ns))?),
        None => Ok(built_in),
    }
}

fn cascade_config(cfg: &ExperimentConfig, sched: ControlSchedule) -> CliResult<CascadeConfig> {
    let mut c = CascadeConfig::from_device(sched, &cfg.device)?;
    c.tol = cfg.tol;
    Ok(c)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn io_series(tr: &IOTrace) -> Series {
    let mut s = Series::new("populations", &["t_ns", "p1", "p2", "a_out_re", "a_out_im", "a_out_power", "a_in_power"]);
    for i in 0..tr.times.len() {
        let a = tr.a_out[i];
        s.push(vec![
            tr.times[i],
            tr.s1[i].norm_sqr(),
            tr.s2[i].norm_sqr(),
            a.re,
            a.im,
            a.norm_sqr(),
            tr.a_in[i].norm_sqr(),
        ]);
    }
    s
}

fn cascade_series(tr: &Trajectory) -> Series {
    let mut s = Series::new("cascade_populations", &["t_ns", "p1", "p2"]);
    let p1 = &tr.observables["P_e(Q1)"];
    let p2 = &tr.observables["P_e(Q2)"];
    for (i, t) in tr.times.iter().enumerate() {
        s.push(vec![*t, p1[i], p2[i]]);
    }
    s
}

fn chi_out(name: &str, chi: &ProcessMatrix) -> MatrixOut {
    MatrixOut { name: name.into(), basis: chi.labels(), matrix: chi.chi.clone() }
}

fn process_metrics(out: &mut ExperimentOutput, chi: &ProcessMatrix, ideal: &ProcessMatrix, reference: f64) {
    out.metric("process_fidelity", chi.fidelity(ideal));
    out.metric("process_hs_distance_to_ideal", hs_distance(&chi.chi, &ideal.chi));
    out.metric("reference_process_fidelity", reference);
    out.matrices.push(chi_out("chi", chi));
    out.matrices.push(chi_out("chi_ideal", ideal));
}

fn ping_pong(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let tau = cfg.device.tau_ns;
    let sched = schedule_or(cfg, ControlSchedule::ping_pong(0, &cfg.timing, tau, 1))?;
    let tr = simulate_io(&sched, &channel(cfg), [E[1], G[1]], cfg.dt_ns)?;
    let mut out = ExperimentOutput::default();
    out.metric("capture_efficiency", tr.final_population(0));
    out.metric("final_population_q1", tr.final_population(0));
    out.metric("final_population_q2", tr.final_population(1));
    out.metric("eta", cfg.device.eta);
    out.metric("reference_capture_efficiency", 0.67);
    out.series.push(io_series(&tr));
    if cfg.process_tomography {
        let cc = cascade_config(cfg, sched.clone())?;
        let chi = process_tomography_run(&cc, TransferMap::Single { from: 0, to: 0 }, sched.window.1)?;
        process_metrics(&mut out, &chi, &ProcessMatrix::identity(1), 0.83);
    }
    Ok(out)
}

fn multi_transit(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let tau = cfg.device.tau_ns;
    let eta = cfg.device.eta;
    let mut s = Series::new("transits", &["n", "efficiency", "eta_pow_n"]);
    let mut eff = Vec::new();
    for n in 1..=cfg.max_transits {
        let sched = ControlSchedule::ping_pong(0, &cfg.timing, tau, n);
        let e = simulate_io(&sched, &channel(cfg), [E[1], G[1]], cfg.dt_ns)?.final_population(0);
        s.push(vec![n as f64, e, eta.powi(n as i32)]);
        eff.push(e);
    }
    let ns: Vec<f64> = (1..=eff.len()).map(|n| n as f64).collect();
    let pred: Vec<f64> = ns.iter().map(|&n| eta.powf(n)).collect();
    let mean = eff.iter().sum::<f64>() / eff.len() as f64;
    let ss_res: f64 = eff.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = eff.iter().map(|a| (a - mean).powi(2)).sum();
    // least-squares ln e = n ln η through the origin
    let log_slope =
        ns.iter().zip(&eff).map(|(n, e)| n * e.max(1e-300).ln()).sum::<f64>() / ns.iter().map(|n| n * n).sum::<f64>();
    let mut out = ExperimentOutput::default();
    out.metric("efficiencies", &eff);
    out.metric("max_deviation_from_eta_pow_n", eff.iter().zip(&pred).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    out.metric("r_squared", if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN });
    out.metric("eta_fit", log_slope.exp());
    out.metric("eta", eta);
    out.series.push(s);
    Ok(out)
}

fn interference(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let o = &cfg.interference;
    let setup =
        InterferenceSetup { timing: cfg.timing, channel: channel(cfg), detune_mhz: o.detune_mhz, dt_ns: cfg.dt_ns };
    let noise = if o.phase_noise {
        NoiseSpec::new(NoiseSpec::sigma_from_ramsey(cfg.device.tau_ns, cfg.device.q1.t2r_us), o.realizations, cfg.seed)?
    } else {
        NoiseSpec::none()
    };
    let n = o.fringe_points;
    let phis: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let mut s = Series::new("fringe", &["delta_phi", "p_e"]);
    let mut p = Vec::new();
    for &phi in &phis {
        let r = interference_experiment(phi, &setup, &noise)?;
        s.push(vec![phi, r.p_e]);
        p.push(r.p_e);
    }
    let at = |x: f64| -> CliResult<f64> {
        match phis.iter().position(|&y| (y - x).abs() < 1e-12) {
            Some(i) => Ok(p[i]),
            None => Ok(interference_experiment(x, &setup, &noise)?.p_e),
        }
    };
    // p ≈ a + b cos φ + c sin φ
    let (a, b, c) = {
        let m = nalgebra::DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => phis[i].cos(),
            _ => phis[i].sin(),
        });
        let y = DVector::from_column_slice(&p);
        let x = (m.transpose() * &m)
            .lu()
            .solve(&(m.transpose() * y))
            .unwrap_or_else(|| DVector::from_column_slice(&[p.iter().sum::<f64>() / n as f64, 0.0, 0.0]));
        (x[0], x[1], x[2])
    };
    let resid = phis.iter().zip(&p).map(|(f, y)| (y - (a + b * f.cos() + c * f.sin())).abs()).fold(0.0, f64::max);
    let pmax = p.iter().copied().fold(f64::MIN, f64::max);
    let pmin = p.iter().copied().fold(f64::MAX, f64::min);
    let mut out = ExperimentOutput::default();
    out.metric("delta_phi", o.delta_phi);
    out.metric("p_e", at(o.delta_phi)?);
    out.metric("p_e_at_0", at(0.0)?);
    out.metric("p_e_at_pi", at(PI)?);
    out.metric("p_e_max", pmax);
    out.metric("p_e_min", pmin);
    out.metric("visibility", (pmax - pmin) / (pmax + pmin));
    out.metric("sinusoid_offset", a);
    out.metric("sinusoid_amplitude", b.hypot(c));
    out.metric("sinusoid_phase", c.atan2(b));
    out.metric("sinusoid_max_residual", resid);
    out.metric("sigma_phi", noise.sigma_phi);
    out.metric("reference_p_e_at_0", 0.77);
    out.metric("reference_p_e_at_pi", 0.08);
    out.series.push(s);
    Ok(out)
}

fn swap(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let sched = schedule_or(cfg, ControlSchedule::transfer(0, 1, &cfg.timing, cfg.device.tau_ns))?;
    let tr = simulate_io(&sched, &channel(cfg), [E[1], G[1]], cfg.dt_ns)?;
    let mut out = ExperimentOutput::default();
    out.metric("transfer_efficiency", tr.final_population(1));
    out.metric("final_population_q1", tr.final_population(0));
    out.metric("final_population_q2", tr.final_population(1));
    out.series.push(io_series(&tr));
    if cfg.process_tomography {
        let cc = cascade_config(cfg, sched.clone())?;
        let chi = process_tomography_run(&cc, TransferMap::Single { from: 0, to: 1 }, sched.window.1)?;
        process_metrics(&mut out, &chi, &ProcessMatrix::identity(1), 0.83);
    }
    Ok(out)
}

fn double_swap(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let tau = cfg.device.tau_ns;
    let sched = schedule_or(cfg, ControlSchedule::double_swap(&cfg.timing, tau))?;
    let cc = cascade_config(cfg, sched.clone())?;
    let chi = process_tomography_run(&cc, TransferMap::Both, sched.window.1)?;
    let mut out = ExperimentOutput::default();
    process_metrics(&mut out, &chi, &chi_from_unitary(&swap_unitary()), 0.63);
    let pp = ControlSchedule::ping_pong(0, &cfg.timing, tau, 1);
    let f1 =
        process_tomography_run(&cascade_config(cfg, pp.clone())?, TransferMap::Single { from: 0, to: 0 }, pp.window.1)?
            .fidelity(&ProcessMatrix::identity(1));
    let f2 = chi.fidelity(&chi_from_unitary(&swap_unitary()));
    out.metric("single_qubit_process_fidelity", f1);
    out.metric("f1_squared", f1 * f1);
    out.metric("f2_minus_f1_squared", f2 - f1 * f1);
    let grid = linspace(0.0, sched.window.1, 400);
    let run = run_cascade(&cc, &product_state(E, E)?, &grid)?;
    out.series.push(cascade_series(&run.trajectory));
    Ok(out)
}

fn psi_plus() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(0.0, 0.0)]);
    &v * v.adjoint()
}

fn readout(cfg: &ExperimentConfig, n: usize) -> ReadoutModel {
    if cfg.tomo.readout_errors {
        ReadoutModel::from_device(&cfg.device).take(n)
    } else {
        ReadoutModel::perfect(n)
    }
}

fn shots(cfg: &ExperimentConfig) -> Shots {
    match cfg.tomo.shots {
        0 => Shots::Exact,
        n => Shots::Count(n),
    }
}

/// Simulated state tomography of `rho` as configured.
fn measured_state(cfg: &ExperimentConfig, rho: &CMatrix, seed: u64) -> CliResult<CMatrix> {
    let n = if rho.nrows() == 2 { 1 } else { 2 };
    let ro = readout(cfg, n);
    let mut data = simulate_tomography(rho, &ro, shots(cfg), seed)?;
    if cfg.tomo.readout_correction {
        data = correct_data(&data, &ro)?;
    }
    Ok(state_tomo(&data)?.into_rho())
}

fn bell(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let sched = schedule_or(cfg, ControlSchedule::bell(&cfg.timing, cfg.device.tau_ns))?;
    let cc = cascade_config(cfg, sched.clone())?;
    let grid = linspace(0.0, sched.window.1, 400);
    let run = run_cascade(&cc, &product_state(E, G)?, &grid)?;
    let rho = run.final_state.rho().clone();
    let target = psi_plus();
    let mut out = ExperimentOutput::default();
    out.metric("bell_fidelity", fidelity(&rho, &target));
    out.metric("concurrence", concurrence(&rho)?);
    out.metric("coherence_eg_ge", rho[(2, 1)].norm());
    out.metric("reference_bell_fidelity", 0.84);
    out.metric("reference_concurrence", 0.61);
    let measured = measured_state(cfg, &rho, cfg.seed)?;
    out.metric("tomography_bell_fidelity", fidelity(&measured, &target));
    out.metric("tomography_concurrence", concurrence(&measured)?);
    let basis: Vec<String> = TWO_QUBIT_BASIS.iter().map(|s| s.to_string()).collect();
    out.matrices.push(MatrixOut { name: "rho".into(), basis: basis.clone(), matrix: rho.clone() });
    out.matrices.push(MatrixOut { name: "rho_tomography".into(), basis, matrix: measured.clone() });
    let mut bars = Series::new("pauli_expectations", &["model", "tomography", "ideal"]);
    let (em, et, ei) = (pauli_expectations(&rho), pauli_expectations(&measured), pauli_expectations(&target));
    bars.labels = Some(em.iter().map(|(l, _)| l.clone()).collect());
    for i in 0..em.len() {
        bars.push(vec![em[i].1, et[i].1, ei[i].1]);
    }
    out.series.push(bars);
    out.series.push(cascade_series(&run.trajectory));
    Ok(out)
}

fn ladder_params(cfg: &ExperimentConfig) -> MultimodeParams {
    let q = cfg.device.qubit(cfg.modes.qubit - 1);
    let decoh = cfg.modes.qubit_decoherence;
    MultimodeParams {
        g_mhz: q.g_mhz,
        n_a: cfg.modes.n_a,
        fsr_mhz: cfg.device.fsr_mhz(),
        delta0_mhz: cfg.modes.delta0_mhz,
        kappa_a_per_us: 1.0 / cfg.device.t1_saw_us,
        t1_int_us: decoh.then_some(q.t1_int_us),
        t2r_us: decoh.then_some(q.t2r_us),
    }
}

fn spectroscopy(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let p = ladder_params(cfg);
    let xs = linspace(cfg.modes.x_min_mhz, cfg.modes.x_max_mhz, cfg.modes.points);
    let pts = spectrum(&p, &xs)?;
    let nl = pts[0].levels_mhz.len();
    let mut cols = vec!["x_mhz".to_string()];
    cols.extend((0..nl).map(|k| format!("level_{k}_mhz")));
    cols.extend((0..nl).map(|k| format!("weight_{k}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut s = Series::new("spectrum", &col_refs);
    let mut min_gap = f64::INFINITY;
    let mut max_w: f64 = 0.0;
    for pt in &pts {
        let mut row = vec![pt.x_mhz];
        row.extend(&pt.levels_mhz);
        row.extend(&pt.qubit_weight);
        s.push(row);
        min_gap = pt.levels_mhz.windows(2).map(|w| w[1] - w[0]).fold(min_gap, f64::min);
        max_w = pt.qubit_weight.iter().copied().fold(max_w, f64::max);
    }
    let mut out = ExperimentOutput::default();
    out.metric("levels", nl);
    out.metric("min_level_gap_mhz", min_gap);
    out.metric("max_qubit_weight", max_w);
    out.metric("g_mhz", p.g_mhz);
    out.metric("fsr_mhz", p.fsr_mhz);
    out.series.push(s);
    Ok(out)
}

fn vacuum_rabi(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let p = ladder_params(cfg);
    let grid = linspace(0.0, cfg.modes.t_max_ns, cfg.modes.time_points);
    let tr = evolve_multimode(&p, &grid, &EvolveOptions::with_tol(cfg.tol.max(1e-10)))?;
    let pe = &tr.observables["P_e"];
    let mut s = Series::new("excited_population", &["t_ns", "p_e_master_equation", "p_e_closed_form"]);
    let mut dev: f64 = 0.0;
    for (i, &t) in grid.iter().enumerate() {
        let a = laguerre_amplitude(t, &p)?.norm_sqr();
        dev = dev.max((a - pe[i]).abs());
        s.push(vec![t, pe[i], a]);
    }
    let tau = p.tau_ns();
    // revival: first rise by 1e-3 above the minimum reached after τ/2
    let after: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= tau / 2.0).collect();
    let floor = after.iter().map(|&i| pe[i]).fold(f64::INFINITY, f64::min);
    let onset = after.iter().skip_while(|&&i| pe[i] > floor).find(|&&i| pe[i] > floor + 1e-3).map(|&i| grid[i]);
    let gr = golden_rule_kappa(p.g_mhz, p.fsr_mhz)?;
    let mut out = ExperimentOutput::default();
    out.metric("max_abs_deviation", dev);
    out.metric("revival_onset_ns", onset);
    out.metric("tau_ns", tau);
    out.metric("golden_rule_lifetime_ns", gr.lifetime_ns);
    out.series.push(s);
    Ok(out)
}

fn saw_response(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let g = &cfg.device.saw;
    let kmax = golden_rule_kappa(cfg.device.q1.g_mhz, cfg.device.fsr_mhz())?.kappa_per_ns;
    let fs = linspace(cfg.saw.f_min_ghz, cfg.saw.f_max_ghz, cfg.saw.points);
    let mut s = Series::new("response", &["f_ghz", "kappa_idt_per_ns", "mirror_reflectance"]);
    let mut half: Option<(f64, f64)> = None;
    let mut plateau: Option<(f64, f64)> = None;
    for &f in &fs {
        let r = mirror_stopband(f, g);
        s.push(vec![f, idt_rate_spectrum(f, g, kmax), r]);
        for (edge, level) in [(&mut half, 0.5), (&mut plateau, 0.99)] {
            if r >= level {
                *edge = Some(edge.map_or((f, f), |(lo, _)| (lo, f)));
            }
        }
    }
    let f0 = g.idt_center_ghz();
    let lb = loss_budget(g, cfg.saw.f_ghz);
    let mut out = ExperimentOutput::default();
    out.metric("idt_center_ghz", f0);
    out.metric("idt_first_null_ghz", f0 * (1.0 + 1.0 / g.idt.cells as f64));
    out.metric("stopband_width_mhz", 1e3 * stopband_width_ghz(g));
    out.metric("stopband_half_low_ghz", half.map(|b| b.0));
    out.metric("stopband_half_high_ghz", half.map(|b| b.1));
    out.metric("stopband_plateau_low_ghz", plateau.map(|b| b.0));
    out.metric("stopband_plateau_high_ghz", plateau.map(|b| b.1));
    out.metric("transit_time_ns", transit_time(g));
    out.metric("fsr_mhz", free_spectral_range_mhz(g));
    out.metric("t1_saw_us", lb.t1_saw_us);
    out.metric("quality_factor", lb.quality_factor);
    out.metric("eta_bound", lb.eta_bound);
    out.metric("f_ghz", cfg.saw.f_ghz);
    out.metric("kappa_at_f_per_ns", idt_rate_spectrum(cfg.saw.f_ghz, g, kmax));
    out.metric("reflectance_at_f", mirror_stopband(cfg.saw.f_ghz, g));
    out.series.push(s);
    Ok(out)
}

fn random_state(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn tomo_roundtrip(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Series::new("state_errors", &["index", "hs_distance"]);
    let mut worst: f64 = 0.0;
    for i in 0..cfg.tomo.states {
        let rho = random_state(4, &mut rng);
        let est = measured_state(cfg, &rho, cfg.seed.wrapping_add(i as u64 + 1))?;
        let d = hs_distance(&est, &rho);
        worst = worst.max(d);
        s.push(vec![i as f64, d]);
    }
    let u = swap_unitary();
    let ins = input_states(2);
    let outs = ins
        .iter()
        .enumerate()
        .map(|(k, r)| measured_state(cfg, &(&u * r * u.adjoint()), cfg.seed.wrapping_add(1000 + k as u64)))
        .collect::<CliResult<Vec<_>>>()?;
    let chi = process_from_states(&ins, &outs)?;
    let ideal = chi_from_unitary(&u);
    let werner = psi_plus() * C64::new(0.8, 0.0) + CMatrix::identity(4, 4) * C64::new(0.05, 0.0);
    let mut out = ExperimentOutput::default();
    out.metric("max_state_hs_distance", worst);
    out.metric("swap_process_fidelity", chi.fidelity(&ideal));
    out.metric("swap_process_hs_distance", hs_distance(&chi.chi, &ideal.chi));
    out.metric("werner_concurrence_error", (concurrence(&werner)? - 0.7).abs());
    out.metric("shots", cfg.tomo.shots);
    out.series.push(s);
    out.matrices.push(MatrixOut { name: "chi_swap".into(), basis: pauli_labels(2), matrix: chi.chi });
    Ok(out)
}

/// Numeric metrics only, for summary tables.
pub fn scalar_metrics(out: &ExperimentOutput) -> Vec<(String, f64)> {
    out.metrics.iter().filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScheduleConfig;
    use phonon_core::ioshape::Segment;

    fn cfg(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig { experiment: kind, ..Default::default() }
    }

    #[test]
    fn custom_schedule_matches_built_in() {
        let mut c = cfg(ExperimentKind::PingPong);
        c.process_tomography = false;
        let built_in = run_experiment(&c).unwrap().scalar("capture_efficiency").unwrap();
        let tau = c.device.tau_ns;
        let (lead, tail) = (c.timing.lead_ns, c.timing.tail_ns);
        c.schedule = Some(ScheduleConfig {
            window_end_ns: lead + tau + lead,
            segments: vec![
                Segment::FullRelease { qubit: 1, start: 0.0 },
                Segment::Capture { qubit: 1, start: lead + tau - tail },
            ],
        });
        let custom = run_experiment(&c).unwrap().scalar("capture_efficiency").unwrap();
        assert!((custom - built_in).abs() < 1e-12, "{custom} vs {built_in}");
    }

    #[test]
    fn spectroscopy_levels() {
        let mut c = cfg(ExperimentKind::Spectroscopy);
        c.modes.points = 11;
        let o = run_experiment(&c).unwrap();
        assert_eq!(o.scalar("levels"), Some(9.0));
        assert!(o.scalar("max_qubit_weight").unwrap() < 0.5);
        let s = &o.series[0];
        assert_eq!(s.rows.len(), 11);
        assert_eq!(s.columns.len(), 1 + 2 * 9);
    }

    #[test]
    fn vacuum_rabi_decays_then_revives() {
        let mut c = cfg(ExperimentKind::VacuumRabi);
        c.modes.n_a = 41;
        c.modes.t_max_ns = 600.0;
        c.modes.time_points = 301;
        let o = run_experiment(&c).unwrap();
        let pe = o.series[0].column("p_e_master_equation").unwrap();
        assert_eq!(pe[0], 1.0);
        assert!(pe[50] < 1e-3, "{}", pe[50]);
        let onset = o.scalar("revival_onset_ns").unwrap();
        assert!((onset - c.device.tau_ns).abs() < 30.0, "{onset}");
    }

    #[test]
    fn readout_errors_are_corrected() {
        let mut c = cfg(ExperimentKind::TomoRoundtrip);
        c.tomo.states = 3;
        c.tomo.readout_correction = false;
        let raw = run_experiment(&c).unwrap().scalar("max_state_hs_distance").unwrap();
        c.tomo.readout_correction = true;
        let fixed = run_experiment(&c).unwrap().scalar("max_state_hs_distance").unwrap();
        assert!(raw > 1e-3 && fixed < 1e-10, "{raw} {fixed}");
    }
}
