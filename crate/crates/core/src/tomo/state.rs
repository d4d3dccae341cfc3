use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pauli::pauli_basis;
use super::readout::{measure_with, readout_correct, ReadoutModel, Shots};
use crate::error::{Error, Result};
use crate::qcore::{kron, project_psd, CMatrix, HilbertSpace, QuantumState, C64};

/// Pre-rotation for setting index 0 = I, 1 = Rx(π/2), 2 = Ry(π/2).
pub fn rotation(k: usize) -> CMatrix {
    let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        0 => CMatrix::identity(2, 2),
        1 => CMatrix::from_row_slice(2, 2, &[c, -i * s, -i * s, c]),
        2 => CMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        _ => panic!("tomography setting {k} out of range"),
    }
}

/// All 3^n settings, qubit 1 most significant.
pub fn settings(n: usize) -> Vec<Vec<usize>> {
    (0..3usize.pow(n as u32)).map(|m| (0..n).map(|q| (m / 3usize.pow((n - 1 - q) as u32)) % 3).collect()).collect()
}

fn setting_unitary(s: &[usize]) -> CMatrix {
    s.iter().fold(CMatrix::identity(1, 1), |acc, &k| kron(&acc, &rotation(k)))
}

/// Outcome distributions keyed by tomography setting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TomoData {
    pub n_qubits: usize,
    pub probs: BTreeMap<Vec<usize>, Vec<f64>>,
}

/// Measures `rho` in every setting. Each setting draws from its own stream
/// of the seeded generator.
pub fn simulate_tomography(rho: &CMatrix, readout: &ReadoutModel, shots: Shots, seed: u64) -> Result<TomoData> {
    let n = qubit_count(rho.nrows())?;
    let mut data = TomoData { n_qubits: n, probs: BTreeMap::new() };
    for (i, s) in settings(n).into_iter().enumerate() {
        let u = setting_unitary(&s);
        let rotated = &u * rho * u.adjoint();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        data.probs.insert(s, measure_with(&rotated, readout, shots, &mut rng)?);
    }
    Ok(data)
}

/// Applies readout correction to every setting.
pub fn correct_data(data: &TomoData, readout: &ReadoutModel) -> Result<TomoData> {
    let probs = data.probs.iter().map(|(k, p)| Ok((k.clone(), readout_correct(p, readout)?))).collect::<Result<_>>()?;
    Ok(TomoData { n_qubits: data.n_qubits, probs })
}

fn qubit_count(d: usize) -> Result<usize> {
    match d {
        2 => Ok(1),
        4 => Ok(2),
        _ => Err(Error::DimensionMismatch { expected: 4, got: d }),
    }
}

/// Linear inversion of the measured distributions onto Pauli coefficients,
/// followed by projection onto the nearest physical state.
pub fn state_tomo(data: &TomoData) -> Result<QuantumState> {
    let n = data.n_qubits;
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameters(format!("{n}-qubit tomography unsupported")));
    }
    let d = 1usize << n;
    let paulis = pauli_basis(n);
    let sets = settings(n);
    let mut a = DMatrix::<f64>::zeros(sets.len() * d, paulis.len());
    let mut b = DVector::<f64>::zeros(sets.len() * d);
    for (si, s) in sets.iter().enumerate() {
        let p = data.probs.get(s).ok_or_else(|| Error::MissingSetting(format!("{s:?}")))?;
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        let u = setting_unitary(s);
        for k in 0..d {
            // projector measured by outcome k after rotation u
            let row = u.row(k).into_owned();
            let proj = row.adjoint() * &row;
            for (m, pm) in paulis.iter().enumerate() {
                a[(si * d + k, m)] = (&proj * pm).trace().re / d as f64;
            }
            b[si * d + k] = p[k];
        }
    }
    let coeffs = a.svd(true, true).solve(&b, 1e-12).map_err(|e| Error::Internal(e.to_string()))?;
    let mut rho = CMatrix::zeros(d, d);
    for (c, pm) in coeffs.iter().zip(&paulis) {
        rho += pm * C64::new(*c / d as f64, 0.0);
    }
    let labels: Vec<String> = (1..=n).map(|q| format!("q{q}")).collect();
    let space = Arc::new(HilbertSpace::qubits(&labels)?);
    QuantumState::new(space, project_psd(&rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::tests::random_rho;
    use crate::tomo::{hs_distance, pauli_expectations, QubitReadout};

    #[test]
    fn ground_state_exact() {
        let mut g = CMatrix::zeros(2, 2);
        g[(0, 0)] = 1.0.into();
        let data = simulate_tomography(&g, &ReadoutModel::perfect(1), Shots::Exact, 0).unwrap();
        assert!((state_tomo(&data).unwrap().rho() - &g).norm() < 1e-10);
    }

    #[test]
    fn random_two_qubit_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let rho = random_rho(4, &mut rng);
            let data = simulate_tomography(&rho, &ReadoutModel::perfect(2), Shots::Exact, 0).unwrap();
            assert!(hs_distance(state_tomo(&data).unwrap().rho(), &rho) < 1e-8);
        }
    }

    #[test]
    fn readout_correction_recovers_exact_inversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ro =
            ReadoutModel { qubits: vec![QubitReadout { fe: 0.933, fg: 0.969 }, QubitReadout { fe: 0.952, fg: 0.977 }] };
        let rho = random_rho(4, &mut rng);
        let raw = simulate_tomography(&rho, &ro, Shots::Exact, 0).unwrap();
        let fixed = state_tomo(&correct_data(&raw, &ro).unwrap()).unwrap();
        assert!(hs_distance(fixed.rho(), &rho) < 1e-10);
    }

    #[test]
    fn missing_setting_rejected() {
        let mut data =
            simulate_tomography(&CMatrix::identity(2, 2).scale(0.5), &ReadoutModel::perfect(1), Shots::Exact, 0)
                .unwrap();
        data.probs.remove(&vec![2]);
        assert!(matches!(state_tomo(&data), Err(Error::MissingSetting(_))));
    }

    #[test]
    fn shot_noise_scales_as_inverse_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_rho(4, &mut rng);
        let exact = pauli_expectations(&rho);
        let err = |shots: u64| -> f64 {
            let reps = 20;
            let mut acc = 0.0;
            for seed in 0..reps {
                let data = simulate_tomography(&rho, &ReadoutModel::perfect(2), Shots::Count(shots), seed).unwrap();
                // the raw inversion, before projection, carries the pure shot noise
                let est = pauli_expectations(&unprojected(&data));
                acc += est.iter().zip(&exact).map(|(a, b)| (a.1 - b.1).powi(2)).sum::<f64>();
            }
            (acc / reps as f64).sqrt()
        };
        let e = [err(1_000), err(10_000), err(100_000)];
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            let ideal = 10f64.sqrt();
            assert!(ratio > ideal / 2.0 && ratio < ideal * 2.0, "{e:?}");
        }
    }

    fn unprojected(data: &TomoData) -> CMatrix {
        // expectation values straight from the frequencies of the settings
        // that diagonalize each Pauli product
        let n = data.n_qubits;
        let d = 1usize << n;
        let mut rho = CMatrix::zeros(d, d);
        for (m, pm) in pauli_basis(n).iter().enumerate() {
            let ops: Vec<usize> = (0..n).map(|q| (m / 4usize.pow((n - 1 - q) as u32)) % 4).collect();
            // X is read after Ry(π/2), Y after Rx(π/2), Z and I without rotation
            let set: Vec<usize> = ops
                .iter()
                .map(|&o| match o {
                    1 => 2,
                    2 => 1,
                    _ => 0,
                })
                .collect();
            let p = &data.probs[&set];
            let u = setting_unitary(&set);
            let rotated = &u * pm * u.adjoint();
            let ev: f64 = (0..d).map(|k| rotated[(k, k)].re * p[k]).sum();
            rho += pm * C64::new(ev / d as f64, 0.0);
        }
        rho
    }
}
