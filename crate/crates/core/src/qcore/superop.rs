use std::ops::Add;
use std::sync::Arc;

use super::linalg::{unvec, vec_of, CMatrix, C64};
use super::operator::Operator;
use super::space::HilbertSpace;
use crate::error::{Error, Result};

/// Linear map on column-stacked density matrices: vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    space: Arc<HilbertSpace>,
    matrix: CMatrix,
}

impl SuperOperator {
    pub fn zeros(space: &Arc<HilbertSpace>) -> Self {
        let n = space.dim() * space.dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(n, n) }
    }

    pub fn from_matrix(space: Arc<HilbertSpace>, matrix: CMatrix) -> Result<Self> {
        let n = space.dim() * space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c.into() }
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
        }
        Ok(unvec(&(&self.matrix * vec_of(rho)), d))
    }

    /// Left multiplication ρ ↦ Aρ.
    pub fn left(a: &Operator) -> Self {
        let d = a.dim();
        Self { space: a.space().clone(), matrix: CMatrix::identity(d, d).kronecker(a.matrix()) }
    }

    /// Right multiplication ρ ↦ ρB.
    pub fn right(b: &Operator) -> Self {
        let d = b.dim();
        Self { space: b.space().clone(), matrix: b.matrix().transpose().kronecker(&CMatrix::identity(d, d)) }
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        assert!(self.space == rhs.space, "superoperators live on different spaces");
        SuperOperator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

/// 𝓓[X]ρ = XρX† − ½{X†X, ρ}.
pub fn dissipator(x: &Operator) -> SuperOperator {
    let xdx = &x.dagger() * x;
    let jump = SuperOperator { space: x.space().clone(), matrix: x.matrix().conjugate().kronecker(x.matrix()) };
    let anti = &SuperOperator::left(&xdx) + &SuperOperator::right(&xdx);
    &jump + &anti.scale(-0.5)
}

/// ρ ↦ −i[H, ρ].
pub fn commutator_map(h: &Operator) -> SuperOperator {
    let l = SuperOperator::left(h);
    let r = SuperOperator::right(h);
    SuperOperator { space: h.space().clone(), matrix: (l.matrix - r.matrix) * C64::new(0.0, -1.0) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{max_abs, trace};
    use crate::qcore::operator::{embed, lowering};
    use crate::qcore::state::tests::random_rho;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(space: &Arc<HilbertSpace>, rng: &mut impl Rng) -> Operator {
        let d = space.dim();
        let m = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        Operator::new(space.clone(), m).unwrap()
    }

    #[test]
    fn zero_dissipator_is_zero_map() {
        let s = Arc::new(HilbertSpace::qubits(&["a", "b"]).unwrap());
        let d = dissipator(&Operator::zeros(&s));
        assert!(max_abs(d.matrix()) == 0.0);
    }

    #[test]
    fn dissipator_is_trace_free_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Arc::new(HilbertSpace::new(&[2, 3], &["a", "b"]).unwrap());
        for _ in 0..20 {
            let x = random_op(&s, &mut rng);
            let rho = random_rho(6, &mut rng);
            let out = dissipator(&x).apply(&rho).unwrap();
            assert!(trace(&out).norm() < 1e-12);
            assert!(max_abs(&(&out - out.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn decay_of_excited_state() {
        let s = Arc::new(HilbertSpace::qubits(&["q"]).unwrap());
        let sm = embed(&lowering(2), "q", &s).unwrap();
        let mut e = CMatrix::zeros(2, 2);
        e[(1, 1)] = C64::new(1.0, 0.0);
        let out = dissipator(&sm).apply(&e).unwrap();
        let mut want = CMatrix::zeros(2, 2);
        want[(0, 0)] = C64::new(1.0, 0.0);
        want[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(max_abs(&(out - want)) < 1e-15);
    }

    #[test]
    fn commutator_is_trace_free_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = Arc::new(HilbertSpace::qubits(&["a", "b"]).unwrap());
        for _ in 0..20 {
            let a = random_op(&s, &mut rng);
            let h = &a + &a.dagger();
            let rho = random_rho(4, &mut rng);
            let out = commutator_map(&h).apply(&rho).unwrap();
            assert!(trace(&out).norm() < 1e-12);
            assert!(max_abs(&(&out - out.adjoint())) < 1e-12);
            let direct = (h.matrix() * &rho - &rho * h.matrix()) * C64::new(0.0, -1.0);
            assert!(max_abs(&(out - direct)) < 1e-12);
        }
    }
}
