use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::linalg::{CMatrix, C64};
use super::space::HilbertSpace;
use super::state::QuantumState;
use crate::error::{Error, Result};

/// Dense operator on a [`HilbertSpace`].
///
/// Arithmetic between operators panics if the spaces differ; that is a
/// programming error rather than a data error.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: Arc<HilbertSpace>, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(d, d) }
    }

    pub fn identity(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::identity(d, d) }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c.into() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        super::linalg::max_abs(&(&self.matrix - self.matrix.adjoint())) <= tol
    }

    /// Tr(ρ O).
    pub fn expect(&self, state: &QuantumState) -> C64 {
        (state.rho() * &self.matrix).trace()
    }

    /// Total excitation number operator of the space.
    pub fn excitation_number(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        let mut m = CMatrix::zeros(d, d);
        for (i, ket) in space.basis().iter().enumerate() {
            m[(i, i)] = C64::new(ket.iter().sum::<usize>() as f64, 0.0);
        }
        Self { space: space.clone(), matrix: m }
    }

    fn check_same(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space) || self.space == other.space,
            "operators live on different spaces"
        );
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// Place a single-mode operator on `target` and tensor with identities,
/// restricted to the (possibly capped) basis of `space`.
pub fn embed(op: &CMatrix, target: &str, space: &Arc<HilbertSpace>) -> Result<Operator> {
    let k = space.mode_index(target)?;
    let dk = space.mode_dims()[k];
    if op.nrows() != dk || op.ncols() != dk {
        return Err(Error::DimensionMismatch { expected: dk, got: op.nrows().max(op.ncols()) });
    }
    let d = space.dim();
    let mut m = CMatrix::zeros(d, d);
    for (col, ket) in space.basis().iter().enumerate() {
        let mut out = ket.clone();
        for n in 0..dk {
            let a = op[(n, ket[k])];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            out[k] = n;
            if let Some(row) = space.index_of(&out) {
                m[(row, col)] += a;
            }
        }
    }
    Operator::new(space.clone(), m)
}

/// Truncated annihilation operator on a `d`-level mode.
pub fn lowering(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

pub fn raising(d: usize) -> CMatrix {
    lowering(d).adjoint()
}

pub fn number(d: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| C64::new(n as f64, 0.0)))
}

/// σ_z = |e⟩⟨e| − |g⟩⟨g| in the (g, e) ordering.
pub fn qubit_sigma_z() -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]))
}
