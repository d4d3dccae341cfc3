use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qcore::{commutator_map, dissipator, HilbertSpace, Operator, SuperOperator};

/// Real scalar coefficient of an operator term.
#[derive(Clone)]
pub enum Coeff {
    Const(f64),
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coeff {
    pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coeff::Func(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Coeff::Const(c) => *c,
            Coeff::Func(f) => f(t),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Coeff::Const(_))
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Const(c) => write!(f, "Const({c})"),
            Coeff::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl From<f64> for Coeff {
    fn from(c: f64) -> Self {
        Coeff::Const(c)
    }
}

/// `coeff(t) · op`; `op` must be Hermitian for Hamiltonian terms.
#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: Coeff,
    pub op: Operator,
}

impl Term {
    pub fn new(coeff: impl Into<Coeff>, op: Operator) -> Self {
        Self { coeff: coeff.into(), op }
    }
}

/// Collapse operator X(t) = Σ_k c_k(t) O_k.
#[derive(Debug, Clone)]
pub struct CollapseTerm {
    pub parts: Vec<Term>,
}

impl CollapseTerm {
    pub fn single(coeff: impl Into<Coeff>, op: Operator) -> Self {
        Self { parts: vec![Term::new(coeff, op)] }
    }

    pub fn sum(parts: Vec<Term>) -> Self {
        Self { parts }
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut it = self.parts.iter();
        let first = it.next().expect("collapse term has at least one part");
        it.fold(first.op.scale(first.coeff.at(t)), |acc, p| &acc + &p.op.scale(p.coeff.at(t)))
    }
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub space: Arc<HilbertSpace>,
    pub hamiltonian: Vec<Term>,
    pub collapse: Vec<CollapseTerm>,
    /// Times where coefficients may be non-smooth; the integrator never steps across them.
    pub breakpoints: Vec<f64>,
}

impl LindbladModel {
    pub fn new(space: Arc<HilbertSpace>) -> Self {
        Self { space, hamiltonian: Vec::new(), collapse: Vec::new(), breakpoints: Vec::new() }
    }

    pub fn with_term(mut self, coeff: impl Into<Coeff>, op: Operator) -> Self {
        self.hamiltonian.push(Term::new(coeff, op));
        self
    }

    pub fn with_collapse(mut self, c: CollapseTerm) -> Self {
        self.collapse.push(c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let terms = self.hamiltonian.iter().chain(self.collapse.iter().flat_map(|c| c.parts.iter()));
        for term in terms {
            if **term.op.space() != *self.space {
                return Err(Error::InvalidParameters("model operator on a foreign space".into()));
            }
        }
        for h in &self.hamiltonian {
            if !h.op.is_hermitian(1e-12) {
                return Err(Error::InvalidParameters("Hamiltonian term is not Hermitian".into()));
            }
        }
        if self.collapse.iter().any(|c| c.parts.is_empty()) {
            return Err(Error::InvalidParameters("empty collapse term".into()));
        }
        Ok(())
    }

    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        self.hamiltonian.iter().fold(Operator::zeros(&self.space), |acc, h| &acc + &h.op.scale(h.coeff.at(t)))
    }

    /// Full Liouvillian at time `t` as an explicit superoperator.
    pub fn liouvillian(&self, t: f64) -> SuperOperator {
        let mut l = commutator_map(&self.hamiltonian_at(t));
        for c in &self.collapse {
            l = &l + &dissipator(&c.at(t));
        }
        l
    }
}

/// Pure dephasing rate Γ_φ = 1/T2R − 1/(2 T1), inputs in µs, result in 1/µs.
pub fn dephasing_rate(t2r_us: f64, t1_us: f64) -> Result<f64> {
    if !(t2r_us > 0.0 && t1_us > 0.0) {
        return Err(Error::InvalidParameters("coherence times must be positive".into()));
    }
    let g = 1.0 / t2r_us - 1.0 / (2.0 * t1_us);
    // allow for rounding in the lifetime-limited case
    if g < -1e-12 * (1.0 / t2r_us) {
        return Err(Error::InvalidParameters(format!("T2R = {t2r_us} µs exceeds 2·T1 = {} µs", 2.0 * t1_us)));
    }
    Ok(g.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dephasing_examples() {
        assert_eq!(dephasing_rate(2.0, 1.0).unwrap(), 0.0);
        assert!((dephasing_rate(2.10, 21.7).unwrap() - 0.4531).abs() < 5e-5);
        assert!((dephasing_rate(0.60, 26.1).unwrap() - 1.6475).abs() < 5e-5);
        assert!(dephasing_rate(3.0, 1.0).is_err());
        assert!(dephasing_rate(0.0, 1.0).is_err());
    }
}
