use super::pauli::{pauli, pauli_basis, pauli_labels};
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigen, kron, rebuild_from_eigen, CMatrix};

/// Overlap Tr(A·B); equals the state fidelity when one argument is pure.
pub fn fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b).trace().re
}

/// √Tr[(A − B)²] for Hermitian A, B.
pub fn hs_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    (&d * &d).trace().re.max(0.0).sqrt()
}

/// Two-qubit concurrence from the spin-flipped state (Y⊗Y)ρ*(Y⊗Y).
pub fn concurrence(rho: &CMatrix) -> Result<f64> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.nrows() });
    }
    let yy = kron(&pauli(2), &pauli(2));
    let flipped = &yy * rho.conjugate() * &yy;
    let (vals, vecs) = hermitian_eigen(rho);
    let sqrt = rebuild_from_eigen(&vecs, &vals.iter().map(|v| v.max(0.0).sqrt()).collect::<Vec<_>>());
    let (mut l, _) = hermitian_eigen(&(&sqrt * flipped * &sqrt));
    l.iter_mut().for_each(|x| *x = x.max(0.0).sqrt());
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// ⟨P⟩ for every Pauli product, with labels.
pub fn pauli_expectations(rho: &CMatrix) -> Vec<(String, f64)> {
    let n = rho.nrows().trailing_zeros() as usize;
    pauli_labels(n).into_iter().zip(pauli_basis(n)).map(|(l, p)| (l, (rho * p).trace().re)).collect()
}
