//! Qubit coupled to a ladder of equally spaced resonator modes: Hamiltonian,
//! spectrum, collapse/revival dynamics and the closed-form Laguerre series.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{dephasing_rate, evolve_with, CollapseTerm, EvolveOptions, LindbladModel, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{
    embed, hermitian_eigen, lowering, qubit_sigma_z, raising, CMatrix, HilbertSpace, Operator, QuantumState, C64,
};

/// MHz (linear) to rad/ns.
pub const MHZ: f64 = 2.0 * PI * 1e-3;

pub const QUBIT: &str = "q";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultimodeParams {
    /// Qubit–mode coupling g/2π, MHz.
    pub g_mhz: f64,
    pub n_a: usize,
    /// Free spectral range, MHz. The transit time is derived from it.
    pub fsr_mhz: f64,
    /// Detuning of the central mode from the qubit, MHz.
    pub delta0_mhz: f64,
    /// Mode energy decay rate 1/T1SAW, 1/µs.
    pub kappa_a_per_us: f64,
    /// Intrinsic qubit lifetime, µs; `None` disables qubit relaxation.
    pub t1_int_us: Option<f64>,
    /// Ramsey time, µs; `None` disables qubit dephasing.
    pub t2r_us: Option<f64>,
}

impl Default for MultimodeParams {
    fn default() -> Self {
        Self {
            g_mhz: 2.57,
            n_a: 8,
            fsr_mhz: 1.97,
            delta0_mhz: 0.0,
            kappa_a_per_us: 1.0 / 1.2,
            t1_int_us: None,
            t2r_us: None,
        }
    }
}

impl MultimodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 {
            return Err(Error::InvalidParameters("n_a must be at least 1".into()));
        }
        if !(self.fsr_mhz > 0.0) {
            return Err(Error::InvalidParameters("fsr must be positive".into()));
        }
        if !(self.g_mhz >= 0.0) || !(self.kappa_a_per_us >= 0.0) || !self.delta0_mhz.is_finite() {
            return Err(Error::InvalidParameters("g, kappa_a must be non-negative and delta0 finite".into()));
        }
        if let (Some(t2), Some(t1)) = (self.t2r_us, self.t1_int_us) {
            dephasing_rate(t2, t1)?;
        }
        Ok(())
    }

    /// Transit time 1/ν_FSR, ns.
    pub fn tau_ns(&self) -> f64 {
        1e3 / self.fsr_mhz
    }

    /// Index of the central mode.
    pub fn center_index(&self) -> usize {
        self.n_a / 2
    }

    /// Mode detunings from the qubit, rad/ns.
    pub fn mode_detunings(&self) -> Vec<f64> {
        let j0 = self.center_index() as f64;
        (0..self.n_a).map(|j| MHZ * (self.delta0_mhz + (j as f64 - j0) * self.fsr_mhz)).collect()
    }

    pub fn mode_labels(&self) -> Vec<String> {
        (0..self.n_a).map(|j| format!("a{j}")).collect()
    }
}

/// Qubit plus `n_a` two-level modes, capped at one excitation.
pub fn multimode_space(p: &MultimodeParams) -> Result<Arc<HilbertSpace>> {
    let mut labels = vec![QUBIT.to_string()];
    labels.extend(p.mode_labels());
    Ok(Arc::new(HilbertSpace::with_cap(&vec![2; p.n_a + 1], &labels, 1)?))
}

/// H = Σⱼ Δⱼ aⱼ†aⱼ + g(σ₊aⱼ + σ₋aⱼ†) in the qubit frame, rad/ns.
pub fn jc_hamiltonian(p: &MultimodeParams) -> Result<Operator> {
    p.validate()?;
    let space = multimode_space(p)?;
    jc_on(p, &space)
}

fn jc_on(p: &MultimodeParams, space: &Arc<HilbertSpace>) -> Result<Operator> {
    let sp = embed(&raising(2), QUBIT, space)?;
    let g = MHZ * p.g_mhz;
    let mut h = Operator::zeros(space);
    for (label, d) in p.mode_labels().iter().zip(p.mode_detunings()) {
        let a = embed(&lowering(2), label, space)?;
        let x = &sp * &a;
        h = &h + &(&a.dagger() * &a).scale(d);
        h = &h + &(&x + &x.dagger()).scale(g);
    }
    Ok(h)
}

/// Lindblad model: mode loss √κ_a aⱼ, plus qubit relaxation σ₋/√T1 and
/// dephasing σ_z√Γ_φ when the qubit lifetimes are set.
pub fn multimode_model(p: &MultimodeParams) -> Result<LindbladModel> {
    p.validate()?;
    let space = multimode_space(p)?;
    let mut m = LindbladModel::new(space.clone()).with_term(1.0, jc_on(p, &space)?);
    let ka = p.kappa_a_per_us * 1e-3;
    if ka > 0.0 {
        for label in p.mode_labels() {
            m = m.with_collapse(CollapseTerm::single(ka.sqrt(), embed(&lowering(2), &label, &space)?));
        }
    }
    if let Some(t1) = p.t1_int_us {
        m = m.with_collapse(CollapseTerm::single((1e-3 / t1).sqrt(), embed(&lowering(2), QUBIT, &space)?));
        if let Some(t2) = p.t2r_us {
            let gphi = dephasing_rate(t2, t1)? * 1e-3;
            if gphi > 0.0 {
                m = m.with_collapse(CollapseTerm::single(gphi.sqrt(), embed(&qubit_sigma_z(), QUBIT, &space)?));
            }
        }
    }
    Ok(m)
}

/// Qubit excited-state population over `grid`, starting from |e, vac⟩.
/// The series is stored under the observable name `P_e`.
pub fn evolve_multimode(p: &MultimodeParams, grid: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    let model = multimode_model(p)?;
    let space = model.space.clone();
    let mut occ = vec![0; p.n_a + 1];
    occ[0] = 1;
    let rho0 = QuantumState::basis(space.clone(), &occ)?;
    let mut tr = evolve_with(&model, &rho0, grid, opts)?;
    let sp = embed(&raising(2), QUBIT, &space)?;
    tr.observe("P_e", &(&sp * &sp.dagger()));
    Ok(tr)
}

/// Dressed single-excitation levels at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    /// Qubit frequency relative to the central mode, MHz.
    pub x_mhz: f64,
    /// Sorted eigenfrequencies relative to the central mode, MHz.
    pub levels_mhz: Vec<f64>,
    /// Qubit weight |⟨e, vac|ψ⟩|² of each level.
    pub qubit_weight: Vec<f64>,
}

/// Single-excitation eigenvalues of H as the qubit is swept across the
/// ladder; `qubit_offsets_mhz` are qubit minus central-mode frequencies.
pub fn spectrum(p: &MultimodeParams, qubit_offsets_mhz: &[f64]) -> Result<Vec<SpectrumPoint>> {
    p.validate()?;
    let half = p.n_a as f64 * p.fsr_mhz / 2.0;
    if let Some(x) = qubit_offsets_mhz.iter().find(|x| x.abs() > half + 1e-9) {
        return Err(Error::InvalidParameters(format!("sweep point {x} MHz outside ±{half} MHz")));
    }
    let space = multimode_space(p)?;
    // drop the vacuum; the single-excitation block is everything else
    let sector: Vec<usize> = (0..space.dim()).filter(|&i| space.ket(i).iter().sum::<usize>() == 1).collect();
    let qubit_row = sector.iter().position(|&i| space.ket(i)[0] == 1).expect("qubit ket present");
    qubit_offsets_mhz
        .iter()
        .map(|&x| {
            let q = MultimodeParams { delta0_mhz: -x, ..p.clone() };
            let h = jc_on(&q, &space)?;
            let block = CMatrix::from_fn(sector.len(), sector.len(), |r, c| h.matrix()[(sector[r], sector[c])]);
            let (ev, vecs) = hermitian_eigen(&block);
            Ok(SpectrumPoint {
                x_mhz: x,
                levels_mhz: ev.iter().map(|e| x + e / MHZ).collect(),
                qubit_weight: (0..ev.len()).map(|k| vecs[(qubit_row, k)].norm_sqr()).collect(),
            })
        })
        .collect()
}

/// Laguerre polynomials L_0..=L_n at `x` by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> Vec<f64> {
    let mut l = Vec::with_capacity(n + 1);
    l.push(1.0);
    if n >= 1 {
        l.push(1.0 - x);
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * l[k] - k as f64 * l[k - 1];
        l.push(next / (k + 1) as f64);
    }
    l
}

/// Closed-form qubit amplitude for an infinite ladder with equal couplings:
/// A_e(t) = Σₙ qⁿ e^{−k(t−nτ)} [Lₙ − Lₙ₋₁](2k(t−nτ)) Θ(t−nτ), with k half the
/// golden-rule energy rate and q = e^{−(iΔ₀ + κ_a/2)τ}.
pub fn laguerre_amplitude(t: f64, p: &MultimodeParams) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameters(format!("t = {t} must be non-negative")));
    }
    p.validate()?;
    let tau = p.tau_ns();
    let k = 0.5 * golden_rule_kappa(p.g_mhz, p.fsr_mhz)?.kappa_per_ns;
    let q = (-C64::new(p.kappa_a_per_us * 1e-3 / 2.0, MHZ * p.delta0_mhz) * tau).exp();
    let n_max = (t / tau).floor() as usize;
    let mut a = C64::new(0.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    for n in 0..=n_max {
        let s = t - n as f64 * tau;
        if s < 0.0 {
            break;
        }
        let l = laguerre(n, 2.0 * k * s);
        let bracket = l[n] - if n > 0 { l[n - 1] } else { 0.0 };
        a += qn * (-k * s).exp() * bracket;
        qn *= q;
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoldenRule {
    /// Energy decay rate, 1/ns.
    pub kappa_per_ns: f64,
    /// 1/κ, ns.
    pub lifetime_ns: f64,
}

/// κ = (2πg)²/ν_FSR with g and ν_FSR linear frequencies in MHz.
pub fn golden_rule_kappa(g_mhz: f64, fsr_mhz: f64) -> Result<GoldenRule> {
    if !(fsr_mhz > 0.0) {
        return Err(Error::InvalidParameters("fsr must be positive".into()));
    }
    let kappa_per_us = (2.0 * PI * g_mhz).powi(2) / fsr_mhz;
    let kappa_per_ns = kappa_per_us * 1e-3;
    Ok(GoldenRule { kappa_per_ns, lifetime_ns: 1.0 / kappa_per_ns })
}

/// Best single-transit efficiency e^{−τ/T1SAW}; `tau_ns` in ns, `t1_saw_us` in µs.
pub fn efficiency_bound(tau_ns: f64, t1_saw_us: f64) -> f64 {
    (-tau_ns / (t1_saw_us * 1e3)).exp()
}
