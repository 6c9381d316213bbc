//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative singular-value floor below which a matrix is treated as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

/// Inverse of a square matrix, or `None` when its smallest singular value is
/// below `SINGULAR_RATIO` times the largest (or the matrix is not finite).
pub fn checked_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min < SINGULAR_RATIO * max {
        return None;
    }
    a.clone().try_inverse()
}

/// Symmetric inverse square root through the eigendecomposition; `None` when
/// an eigenvalue falls below `SINGULAR_RATIO` times the largest.
pub fn inverse_sqrt_sym(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || eig.eigenvalues.iter().any(|&l| l < SINGULAR_RATIO * max) {
        return None;
    }
    let inv_root = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()),
    );
    let q = &eig.eigenvectors;
    Some(q * DMatrix::from_diagonal(&inv_root) * q.transpose())
}

/// `a * b * a'` for symmetric `b`, symmetrised to wash out rounding.
pub fn sandwich(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let s = a * b * a.transpose();
    (&s + s.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_sqrt_squares_back_to_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let r = inverse_sqrt_sym(&a).unwrap();
        let inv = checked_inverse(&a).unwrap();
        assert_relative_eq!(&r * &r, inv, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(checked_inverse(&a).is_none());
        assert!(inverse_sqrt_sym(&a).is_none());
        assert!(checked_inverse(&DMatrix::zeros(2, 2)).is_none());
    }
}
