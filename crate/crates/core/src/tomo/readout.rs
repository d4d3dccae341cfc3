use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::qcore::CMatrix;

/// Assignment fidelities of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitReadout {
    pub fe: f64,
    pub fg: f64,
}

impl QubitReadout {
    pub const PERFECT: Self = Self { fe: 1.0, fg: 1.0 };

    /// Columns: prepared g, e. Rows: reported g, e.
    fn confusion(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.fg, 1.0 - self.fe, 1.0 - self.fg, self.fe])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub qubits: Vec<QubitReadout>,
}

impl ReadoutModel {
    pub fn perfect(n: usize) -> Self {
        Self { qubits: vec![QubitReadout::PERFECT; n] }
    }

    pub fn from_device(dev: &DeviceParams) -> Self {
        Self {
            qubits: vec![
                QubitReadout { fe: dev.q1.readout_fe, fg: dev.q1.readout_fg },
                QubitReadout { fe: dev.q2.readout_fe, fg: dev.q2.readout_fg },
            ],
        }
    }

    /// First `n` qubits of the model.
    pub fn take(&self, n: usize) -> Self {
        Self { qubits: self.qubits[..n].to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        for q in &self.qubits {
            if !(q.fe > 0.5 && q.fe <= 1.0 && q.fg > 0.5 && q.fg <= 1.0) {
                return Err(Error::InvalidParameters(format!("readout fidelities {q:?} outside (0.5, 1]")));
            }
        }
        Ok(())
    }

    /// Joint confusion matrix, qubit 1 most significant.
    pub fn confusion(&self) -> DMatrix<f64> {
        self.qubits.iter().fold(DMatrix::identity(1, 1), |acc, q| acc.kronecker(&q.confusion()))
    }

    pub fn apply(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let m = self.confusion();
        if m.ncols() != probs.len() {
            return Err(Error::DimensionMismatch { expected: m.ncols(), got: probs.len() });
        }
        Ok((m * nalgebra::DVector::from_column_slice(probs)).iter().copied().collect())
    }
}

/// How many repetitions a measurement setting gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shots {
    Exact,
    Count(u64),
}

/// Reported-outcome probabilities of a computational-basis measurement of
/// `rho`, or their empirical frequencies when a finite shot count is given.
pub fn simulate_measurement(rho: &CMatrix, readout: &ReadoutModel, shots: Shots, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    measure_with(rho, readout, shots, &mut rng)
}

pub(crate) fn measure_with(
    rho: &CMatrix,
    readout: &ReadoutModel,
    shots: Shots,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let ideal: Vec<f64> = (0..rho.nrows()).map(|i| rho[(i, i)].re.max(0.0)).collect();
    let p = readout.apply(&ideal)?;
    Ok(match shots {
        Shots::Exact => p,
        Shots::Count(n) => sample_counts(&p, n, rng).into_iter().map(|c| c as f64 / n as f64).collect(),
    })
}

/// Multinomial sample as a chain of conditional binomials.
pub fn sample_counts(p: &[f64], n: u64, rng: &mut impl Rng) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(p.len());
    for (i, &pi) in p.iter().enumerate() {
        let c = if i + 1 == p.len() || left == 0 {
            left
        } else {
            let q = (pi / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("probability in range").sample(rng)
        };
        out.push(c);
        left -= c;
        mass -= pi;
    }
    out
}

/// Inverts the joint confusion matrix; negative results are clipped and the
/// distribution renormalized.
pub fn readout_correct(probs: &[f64], readout: &ReadoutModel) -> Result<Vec<f64>> {
    for q in &readout.qubits {
        if (q.fe + q.fg - 1.0).abs() < 1e-12 {
            return Err(Error::Singular(format!("confusion matrix of {q:?}")));
        }
    }
    // the inverse of a Kronecker product is the product of the inverses
    let inv = readout.qubits.iter().fold(DMatrix::identity(1, 1), |acc, q| {
        acc.kronecker(&q.confusion().try_inverse().expect("nonzero determinant"))
    });
    if inv.ncols() != probs.len() {
        return Err(Error::DimensionMismatch { expected: inv.ncols(), got: probs.len() });
    }
    let raw = inv * nalgebra::DVector::from_column_slice(probs);
    let clipped: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Singular("corrected distribution vanishes".into()));
    }
    Ok(clipped.into_iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::tests::random_rho;

    fn device_readout() -> ReadoutModel {
        ReadoutModel { qubits: vec![QubitReadout { fe: 0.933, fg: 0.969 }, QubitReadout { fe: 0.952, fg: 0.977 }] }
    }

    #[test]
    fn excited_qubit_reads_fe() {
        let mut rho = CMatrix::zeros(2, 2);
        rho[(1, 1)] = 1.0.into();
        let p = simulate_measurement(&rho, &device_readout().take(1), Shots::Exact, 0).unwrap();
        assert!((p[1] - 0.933).abs() < 1e-15);
        let mut gg = CMatrix::zeros(4, 4);
        gg[(0, 0)] = 1.0.into();
        assert_eq!(simulate_measurement(&gg, &ReadoutModel::perfect(2), Shots::Exact, 0).unwrap()[0], 1.0);
    }

    #[test]
    fn correction_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let rho = random_rho(4, &mut rng);
            let exact: Vec<f64> = (0..4).map(|i| rho[(i, i)].re).collect();
            let p = simulate_measurement(&rho, &device_readout(), Shots::Exact, 0).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let c = readout_correct(&p, &device_readout()).unwrap();
            for (a, b) in c.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert_eq!(readout_correct(&[0.3, 0.7], &ReadoutModel::perfect(1)).unwrap(), vec![0.3, 0.7]);
    }

    #[test]
    fn singular_confusion_rejected() {
        let m = ReadoutModel { qubits: vec![QubitReadout { fe: 0.4, fg: 0.6 }] };
        assert!(matches!(readout_correct(&[0.5, 0.5], &m), Err(Error::Singular(_))));
        assert!(m.validate().is_err());
    }

    #[test]
    fn shots_are_seeded_and_sum() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let a = sample_counts(&p, 1000, &mut ChaCha8Rng::seed_from_u64(1));
        let b = sample_counts(&p, 1000, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 1000);
    }
}
