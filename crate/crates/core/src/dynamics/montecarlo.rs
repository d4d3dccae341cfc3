use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::integrator::{evolve_with, EvolveOptions, Trajectory};
use super::model::LindbladModel;
use crate::error::{Error, Result};
use crate::qcore::{CMatrix, Operator, QuantumState, C64};

/// Gaussian classical phase noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation of the phase, rad.
    pub sigma_phi: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_phi: f64, n_realizations: usize, master_seed: u64) -> Result<Self> {
        let n = Self { sigma_phi, n_realizations, master_seed };
        n.validate()?;
        Ok(n)
    }

    pub fn none() -> Self {
        Self { sigma_phi: 0.0, n_realizations: 1, master_seed: 0 }
    }

    /// σ_φ such that e^{−σ²/2} = e^{−τ/T2R}.
    pub fn sigma_from_ramsey(tau_ns: f64, t2r_us: f64) -> f64 {
        (2.0 * tau_ns / (t2r_us * 1e3)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_phi >= 0.0 && self.sigma_phi.is_finite()) {
            return Err(Error::InvalidParameters(format!("sigma_phi = {}", self.sigma_phi)));
        }
        if self.n_realizations == 0 {
            return Err(Error::InvalidParameters("n_realizations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Phase of realization `i`: realization `i` draws from its own ChaCha stream
/// of the master seed, so any subset can be regenerated independently.
pub fn realization_phase(noise: &NoiseSpec, i: usize) -> f64 {
    if noise.sigma_phi == 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.master_seed);
    rng.set_stream(i as u64);
    Normal::new(0.0, noise.sigma_phi).expect("validated sigma").sample(&mut rng)
}

pub fn realization_phases(noise: &NoiseSpec) -> Vec<f64> {
    (0..noise.n_realizations).map(|i| realization_phase(noise, i)).collect()
}

const CHUNK: usize = 64;

/// Runs `f` per realization in parallel and folds in realization order.
fn ordered_fold<T, F, G>(noise: &NoiseSpec, f: F, mut fold: G) -> Result<()>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
    G: FnMut(T),
{
    noise.validate()?;
    let n = noise.n_realizations;
    for start in (0..n).step_by(CHUNK) {
        let batch: Vec<Result<T>> = (start..(start + CHUNK).min(n))
            .into_par_iter()
            .map(|i| f(realization_phase(noise, i)).map_err(|e| Error::Realization { index: i, source: Box::new(e) }))
            .collect();
        for r in batch {
            fold(r?);
        }
    }
    Ok(())
}

/// Mean of a real series over the phase realizations. With zero noise every
/// realization is identical, so `f` is evaluated once.
pub fn mc_mean<F>(noise: &NoiseSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    noise.validate()?;
    if noise.sigma_phi == 0.0 {
        return f(0.0);
    }
    let mut acc: Option<Vec<f64>> = None;
    let mut len_err = None;
    ordered_fold(noise, &f, |v: Vec<f64>| match &mut acc {
        None => acc = Some(v),
        Some(a) if a.len() == v.len() => a.iter_mut().zip(&v).for_each(|(x, y)| *x += y),
        Some(a) => len_err = Some((a.len(), v.len())),
    })?;
    if let Some((expected, got)) = len_err {
        return Err(Error::DimensionMismatch { expected, got });
    }
    let n = noise.n_realizations as f64;
    Ok(acc.expect("at least one realization").into_iter().map(|x| x / n).collect())
}

/// Average trajectory over models built for each sampled phase; states and
/// the requested observables are arithmetic means.
pub fn mc_average<B>(
    builder: B,
    rho0: &QuantumState,
    observables: &[(&str, Operator)],
    noise: &NoiseSpec,
    grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory>
where
    B: Fn(f64) -> Result<LindbladModel> + Sync,
{
    noise.validate()?;
    let run = |phi: f64| -> Result<Trajectory> {
        let mut tr = evolve_with(&builder(phi)?, rho0, grid, opts)?;
        for (name, op) in observables {
            tr.observe(name, op);
        }
        Ok(tr)
    };
    if noise.sigma_phi == 0.0 {
        return run(0.0);
    }
    let mut acc: Option<Trajectory> = None;
    let mut sums: Vec<CMatrix> = Vec::new();
    ordered_fold(noise, run, |tr| match &mut acc {
        None => {
            sums = tr.states.iter().map(|s| s.rho().clone()).collect();
            acc = Some(tr);
        }
        Some(a) => {
            for (s, st) in sums.iter_mut().zip(&tr.states) {
                *s += st.rho();
            }
            for (k, v) in a.observables.iter_mut() {
                v.iter_mut().zip(&tr.observables[k]).for_each(|(x, y)| *x += y);
            }
        }
    })?;
    let mut out = acc.expect("at least one realization");
    let n = noise.n_realizations as f64;
    for v in out.observables.values_mut() {
        v.iter_mut().for_each(|x| *x /= n);
    }
    let space = rho0.space().clone();
    out.states =
        sums.into_iter().map(|s| QuantumState::from_parts(space.clone(), s * C64::new(1.0 / n, 0.0))).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::model::{Coeff, CollapseTerm};
    use crate::qcore::{embed, lowering, qubit_sigma_z, HilbertSpace};
    use std::sync::Arc;

    #[test]
    fn sigma_from_ramsey_identity() {
        let s = NoiseSpec::sigma_from_ramsey(508.0, 2.1);
        assert!((s - 0.6956).abs() < 1e-4);
    }

    #[test]
    fn gaussian_characteristic_function() {
        let noise = NoiseSpec::new(0.6956, 1024, 2024).unwrap();
        let m = mc_mean(&noise, |phi| Ok(vec![phi.cos()])).unwrap()[0];
        assert!((m - (-0.6956f64.powi(2) / 2.0).exp()).abs() < 0.02, "{m}");
    }

    #[test]
    fn reproducible_and_order_independent_of_threads() {
        let noise = NoiseSpec::new(0.5, 300, 11).unwrap();
        let a = mc_mean(&noise, |phi| Ok(vec![phi, phi.sin()])).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_mean(&noise, |phi| Ok(vec![phi, phi.sin()])).unwrap());
        assert_eq!(a, b);
        assert_eq!(realization_phases(&noise), realization_phases(&noise));
    }

    #[test]
    fn realization_error_reports_index() {
        let noise = NoiseSpec::new(1.0, 10, 1).unwrap();
        let phases = realization_phases(&noise);
        let bad = phases[7];
        let err = mc_mean(&noise, |phi| if phi == bad { Err(Error::Internal("boom".into())) } else { Ok(vec![phi]) })
            .unwrap_err();
        assert!(matches!(err, Error::Realization { index: 7, .. }));
    }

    fn ramsey_model(space: &Arc<HilbertSpace>, phi: f64) -> LindbladModel {
        let sz = embed(&qubit_sigma_z(), "q", space).unwrap();
        let sm = embed(&lowering(2), "q", space).unwrap();
        // phase φ accumulated uniformly over 10 ns
        LindbladModel::new(space.clone())
            .with_term(Coeff::Const(phi / 20.0), sz)
            .with_collapse(CollapseTerm::single(0.01, sm))
    }

    #[test]
    fn zero_noise_equals_single_evolve() {
        let space = Arc::new(HilbertSpace::qubits(&["q"]).unwrap());
        let h = 1.0 / 2f64.sqrt();
        let rho0 =
            QuantumState::from_ket(space.clone(), &nalgebra::dvector![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let grid = [0.0, 5.0, 10.0];
        let opts = EvolveOptions::default();
        let noise = NoiseSpec::new(0.0, 16, 3).unwrap();
        let avg = mc_average(|phi| Ok(ramsey_model(&space, phi)), &rho0, &[], &noise, &grid, &opts).unwrap();
        let single = evolve_with(&ramsey_model(&space, 0.0), &rho0, &grid, &opts).unwrap();
        for (a, b) in avg.states.iter().zip(&single.states) {
            assert_eq!(a.rho(), b.rho());
        }
    }

    #[test]
    fn dephased_coherence_matches_gaussian_average() {
        let space = Arc::new(HilbertSpace::qubits(&["q"]).unwrap());
        let h = 1.0 / 2f64.sqrt();
        let rho0 =
            QuantumState::from_ket(space.clone(), &nalgebra::dvector![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let noise = NoiseSpec::new(0.8, 128, 5).unwrap();
        let opts = EvolveOptions::default();
        let avg = mc_average(|phi| Ok(ramsey_model(&space, phi)), &rho0, &[], &noise, &[0.0, 10.0], &opts).unwrap();
        let phases = realization_phases(&noise);
        let want: C64 = phases.iter().map(|p| C64::from_polar(0.5, *p)).sum::<C64>() / 128.0;
        let got = avg.last().rho()[(0, 1)] / (-0.5 * 1e-4 * 10.0f64).exp();
        assert!((got - want).norm() < 1e-6, "{got} vs {want}");
    }
}
