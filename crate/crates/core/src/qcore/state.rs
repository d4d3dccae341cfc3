use std::sync::Arc;

use nalgebra::DVector;

use super::linalg::{hermitian_eigen, max_abs, trace, CMatrix, C64};
use super::space::HilbertSpace;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;

/// Validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: Arc<HilbertSpace>,
    rho: CMatrix,
}

impl QuantumState {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(space: Arc<HilbertSpace>, rho: CMatrix) -> Result<Self> {
        let d = space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: rho.nrows().max(rho.ncols()) });
        }
        let herm = max_abs(&(&rho - rho.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParameters(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = trace(&rho);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidParameters(format!("density matrix trace {tr}")));
        }
        let (ev, _) = hermitian_eigen(&rho);
        if ev[0] < -EIGEN_TOL {
            return Err(Error::InvalidParameters(format!("negative eigenvalue {:e}", ev[0])));
        }
        Ok(Self { space, rho })
    }

    /// Skips validation; for internal results whose invariants are checked elsewhere.
    pub(crate) fn from_parts(space: Arc<HilbertSpace>, rho: CMatrix) -> Self {
        Self { space, rho }
    }

    /// Pure state from an (unnormalized) ket.
    pub fn from_ket(space: Arc<HilbertSpace>, ket: &DVector<C64>) -> Result<Self> {
        if ket.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: ket.len() });
        }
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameters("zero ket".into()));
        }
        let k = ket / C64::new(n, 0.0);
        let mut rho = &k * k.adjoint();
        rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { space, rho })
    }

    /// Basis state with the given occupation vector.
    pub fn basis(space: Arc<HilbertSpace>, occupation: &[usize]) -> Result<Self> {
        let i = space
            .index_of(occupation)
            .ok_or_else(|| Error::InvalidParameters(format!("occupation {occupation:?} not in basis")))?;
        let mut ket = DVector::zeros(space.dim());
        ket[i] = C64::new(1.0, 0.0);
        Self::from_ket(space, &ket)
    }

    pub fn maximally_mixed(space: Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        let rho = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Self { space, rho }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> CMatrix {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Population of each basis ket.
    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }

    /// Probability that mode `label` holds exactly `n` quanta.
    pub fn mode_population(&self, label: &str, n: usize) -> Result<f64> {
        let k = self.space.mode_index(label)?;
        Ok(self.space.basis().iter().enumerate().filter(|(_, b)| b[k] == n).map(|(i, _)| self.rho[(i, i)].re).sum())
    }

    /// ρ_self ⊗ ρ_other on the concatenated, uncapped space.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.space.excitation_cap().is_some() || other.space.excitation_cap().is_some() {
            return Err(Error::InvalidParameters("tensor product of capped spaces".into()));
        }
        let dims: Vec<usize> = self.space.mode_dims().iter().chain(other.space.mode_dims()).copied().collect();
        let labels: Vec<&String> = self.space.labels().iter().chain(other.space.labels()).collect();
        let space = Arc::new(HilbertSpace::new(&dims, &labels)?);
        Ok(Self { space, rho: self.rho.kronecker(&other.rho) })
    }
}

/// Reduced state on `keep`, in the order given. A cap on the parent space
/// carries over to the reduced space.
pub fn partial_trace<S: AsRef<str>>(state: &QuantumState, keep: &[S]) -> Result<QuantumState> {
    let space = state.space();
    let kept: Vec<usize> = keep.iter().map(|l| space.mode_index(l.as_ref())).collect::<Result<_>>()?;
    let traced: Vec<usize> = (0..space.n_modes()).filter(|k| !kept.contains(k)).collect();
    let dims: Vec<usize> = kept.iter().map(|&k| space.mode_dims()[k]).collect();
    let labels: Vec<&str> = keep.iter().map(|l| l.as_ref()).collect();
    let reduced = Arc::new(match space.excitation_cap() {
        Some(c) => HilbertSpace::with_cap(&dims, &labels, c)?,
        None => HilbertSpace::new(&dims, &labels)?,
    });

    let project = |ket: &[usize], modes: &[usize]| -> Vec<usize> { modes.iter().map(|&k| ket[k]).collect() };
    let d = reduced.dim();
    let mut out = CMatrix::zeros(d, d);
    let basis = space.basis();
    let keys: Vec<(usize, Vec<usize>)> = basis
        .iter()
        .map(|b| {
            let r = reduced.index_of(&project(b, &kept)).expect("kept part of a capped ket is within the cap");
            (r, project(b, &traced))
        })
        .collect();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if keys[i].1 == keys[j].1 {
                out[(keys[i].0, keys[j].0)] += state.rho()[(i, j)];
            }
        }
    }
    Ok(QuantumState::from_parts(reduced, out))
}
