use crate::qcore::{kron, CMatrix, C64};

/// I, X, Y, Z for k = 0..4.
pub fn pauli(k: usize) -> CMatrix {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let e = match k {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -i, i, o],
        3 => [l, o, o, -l],
        _ => panic!("Pauli index {k} out of range"),
    };
    CMatrix::from_row_slice(2, 2, &e)
}

/// Labels of the n-qubit Pauli products in basis order, e.g. "IX".
pub fn pauli_labels(n: usize) -> Vec<String> {
    const L: [char; 4] = ['I', 'X', 'Y', 'Z'];
    (0..4usize.pow(n as u32)).map(|m| (0..n).map(|q| L[(m / 4usize.pow((n - 1 - q) as u32)) % 4]).collect()).collect()
}

/// n-qubit Pauli products, qubit 1 most significant.
pub fn pauli_basis(n: usize) -> Vec<CMatrix> {
    (0..4usize.pow(n as u32))
        .map(|m| {
            (0..n).fold(CMatrix::identity(1, 1), |acc, q| kron(&acc, &pauli((m / 4usize.pow((n - 1 - q) as u32)) % 4)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_are_orthogonal() {
        let b = pauli_basis(2);
        for (i, p) in b.iter().enumerate() {
            for (j, q) in b.iter().enumerate() {
                let tr = (p.adjoint() * q).trace();
                assert!((tr - C64::new(if i == j { 4.0 } else { 0.0 }, 0.0)).norm() < 1e-14);
            }
        }
        assert_eq!(pauli_labels(2)[6], "XY");
        assert_eq!(b[6], kron(&pauli(1), &pauli(2)));
    }
}
