//! Small dense helpers on complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reciprocal-condition threshold below which a Gram matrix is rejected.
pub(crate) const RCOND_MIN: f64 = 1e-12;

/// Induced 1-norm (max column sum of moduli).
fn norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky, together
/// with its 1-norm reciprocal condition number `1 / (||A||_1 ||A^-1||_1)`.
///
/// Fails with [`Error::IllConditionedChannel`] when the factorisation breaks
/// down or the reciprocal condition falls below [`RCOND_MIN`].
pub(crate) fn hpd_inverse(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, f64)> {
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or(Error::IllConditionedChannel { rcond: 0.0 })?;
    let inv = chol.inverse();
    let rcond = 1.0 / (norm1(a) * norm1(&inv));
    if !rcond.is_finite() || rcond < RCOND_MIN {
        return Err(Error::IllConditionedChannel { rcond: if rcond.is_finite() { rcond } else { 0.0 } });
    }
    Ok((inv, rcond))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(4.0, 0.0),
        ]));
        let (inv, rcond) = hpd_inverse(&a).unwrap();
        assert!((inv[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((inv[(1, 1)].re - 0.25).abs() < 1e-15);
        assert!((rcond - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_rank_deficient() {
        let v = [Complex64::new(1.0, 1.0), Complex64::new(0.5, -2.0)];
        let a = DMatrix::from_fn(2, 2, |i, j| v[i].conj() * v[j]);
        assert!(matches!(hpd_inverse(&a), Err(Error::IllConditionedChannel { .. })));
    }
}
