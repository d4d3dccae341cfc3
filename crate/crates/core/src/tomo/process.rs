use super::pauli::{pauli_basis, pauli_labels};
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigen, kron, project_psd, CMatrix, C64};
use nalgebra::DVector;

/// Process matrix in the Pauli basis {I, X, Y, Z}^⊗n:
/// ρ_out = Σ χ_mn P_m ρ P_n†.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    pub n_qubits: usize,
    pub chi: CMatrix,
}

impl ProcessMatrix {
    pub fn labels(&self) -> Vec<String> {
        pauli_labels(self.n_qubits)
    }

    /// Tr(χ·χ_ref).
    pub fn fidelity(&self, reference: &ProcessMatrix) -> f64 {
        (&self.chi * &reference.chi).trace().re
    }

    /// Applies the process to a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let p = pauli_basis(self.n_qubits);
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (m, pm) in p.iter().enumerate() {
            for (n, pn) in p.iter().enumerate() {
                if self.chi[(m, n)] != C64::new(0.0, 0.0) {
                    out += pm * rho * pn.adjoint() * self.chi[(m, n)];
                }
            }
        }
        out
    }

    pub fn identity(n: usize) -> Self {
        chi_from_unitary(&CMatrix::identity(1 << n, 1 << n))
    }
}

/// χ of the unitary channel ρ ↦ UρU†.
pub fn chi_from_unitary(u: &CMatrix) -> ProcessMatrix {
    let d = u.nrows();
    let n = d.trailing_zeros() as usize;
    let coeffs: Vec<C64> = pauli_basis(n).iter().map(|p| (p.adjoint() * u).trace() / d as f64).collect();
    let v = DVector::from_vec(coeffs);
    ProcessMatrix { n_qubits: n, chi: &v * v.adjoint() }
}

pub fn swap_unitary() -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        u[(a, b)] = C64::new(1.0, 0.0);
    }
    u
}

/// Input states {g, (g+e)/√2, (g+ie)/√2, e}^⊗n, qubit 1 most significant.
pub fn input_states(n: usize) -> Vec<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(0.0, h)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ];
    let single: Vec<CMatrix> = kets
        .iter()
        .map(|k| {
            let v = DVector::from_row_slice(k);
            &v * v.adjoint()
        })
        .collect();
    (0..4usize.pow(n as u32))
        .map(|m| {
            (0..n).fold(CMatrix::identity(1, 1), |acc, q| kron(&acc, &single[(m / 4usize.pow((n - 1 - q) as u32)) % 4]))
        })
        .collect()
}

/// Least-squares χ from input/output pairs, then Hermitian PSD projection.
pub fn process_from_states(inputs: &[CMatrix], outputs: &[CMatrix]) -> Result<ProcessMatrix> {
    if inputs.len() != outputs.len() || inputs.is_empty() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), got: outputs.len() });
    }
    let d = inputs[0].nrows();
    let n = match d {
        2 => 1,
        4 => 2,
        _ => return Err(Error::DimensionMismatch { expected: 4, got: d }),
    };
    if inputs.iter().chain(outputs).any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: 0 });
    }
    let p = pauli_basis(n);
    let nb = p.len();
    let rows = inputs.len() * d * d;
    let mut a = CMatrix::zeros(rows, nb * nb);
    let mut b = DVector::<C64>::zeros(rows);
    for (k, (rin, rout)) in inputs.iter().zip(outputs).enumerate() {
        for (m, pm) in p.iter().enumerate() {
            let left = pm * rin;
            for (nn, pn) in p.iter().enumerate() {
                let term = &left * pn.adjoint();
                for (e, v) in term.iter().enumerate() {
                    a[(k * d * d + e, m * nb + nn)] = *v;
                }
            }
        }
        for (e, v) in rout.iter().enumerate() {
            b[k * d * d + e] = *v;
        }
    }
    if rows < nb * nb {
        return Err(Error::RankDeficient(0.0));
    }
    // normal equations; the input sets used here are well conditioned
    let ah = a.adjoint();
    let gram = &ah * &a;
    let (ev, _) = hermitian_eigen(&gram);
    let (emin, emax) = (ev[0], ev[ev.len() - 1]);
    if !(emin > 1e-12 * emax) {
        return Err(Error::RankDeficient((emin.max(0.0) / emax).sqrt()));
    }
    let x = gram.lu().solve(&(ah * b)).ok_or_else(|| Error::Singular("process normal equations".into()))?;
    let chi = CMatrix::from_fn(nb, nb, |m, nn| x[m * nb + nn]);
    Ok(ProcessMatrix { n_qubits: n, chi: project_psd(&chi) })
}
