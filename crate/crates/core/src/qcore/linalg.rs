use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<DVector<C64>>>(),
    );
    (values, vectors)
}

/// Nearest positive semidefinite, unit-trace matrix: Hermitian part,
/// negative eigenvalues clipped to zero, trace renormalized to one.
pub fn project_psd(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let n = m.nrows();
    if total <= 0.0 {
        return CMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
    }
    rebuild(&vectors, &clipped) * C64::new(1.0 / total, 0.0)
}

pub(crate) fn rebuild(vectors: &CMatrix, values: &[f64]) -> CMatrix {
    let n = vectors.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let col = vectors.column(k);
        out += &col * col.adjoint() * C64::new(v, 0.0);
    }
    out
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Column-stacking vectorization.
pub(crate) fn vec_of(m: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub(crate) fn unvec(v: &DVector<C64>, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}
