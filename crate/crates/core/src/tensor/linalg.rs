//! Spectral routines backed by nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::matrix::Matrix;

/// Inputs whose `|M − M†|` exceeds this are rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

fn to_nalgebra(m: &Matrix) -> DMatrix<C64> {
    let n = m.dim();
    DMatrix::from_row_slice(n, n, m.as_slice())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The input is replaced by `(M + M†)/2` before solving; ties keep whatever
/// order the solver produced.
pub fn hermitian_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let dev = m.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    let h = to_nalgebra(&m.hermitian_part());
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig)
}

/// `Σ |λ_k|` of a Hermitian matrix.
pub fn trace_norm(m: &Matrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// Singular values of a general `rows × cols` row-major matrix, descending.
pub fn singular_values(rows: usize, cols: usize, data: &[C64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(rows, cols, data);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_identity() {
        let m = Matrix::identity(2).scale_real(0.5);
        assert_eq!(hermitian_eigenvalues(&m).unwrap().len(), 2);
        for l in hermitian_eigenvalues(&m).unwrap() {
            assert!((l - 0.5).abs() < 1e-15);
        }
        assert!((trace_norm(&m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_sorted() {
        let eig = hermitian_eigenvalues(&Matrix::from_diagonal(&[1.0, 0.0])).unwrap();
        assert_eq!(eig, vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Matrix::zeros(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let mut m = Matrix::identity(2);
        m[(0, 1)] = C64::new(1e-12, 0.0);
        assert!(hermitian_eigenvalues(&m).is_ok());
    }
}
