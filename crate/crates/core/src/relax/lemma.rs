use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const TOL: f64 = 1e-10;

/// Unitary `U` with `M = I/2 + (U + U+)/4`, for `0 <= M <= I`.
///
/// Each eigenvalue `l` of `M` becomes the phase `exp(i acos(2l - 1))`.
pub fn unitary_from_effect(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!("effect is {}x{}", m.nrows(), m.ncols())));
    }
    let asym = (m - m.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if asym > TOL {
        return Err(Error::OutOfRange(format!("effect is not Hermitian (deviation {asym:.2e})")));
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut phases = Vec::with_capacity(m.nrows());
    for &l in eig.eigenvalues.iter() {
        if !(-TOL..=1.0 + TOL).contains(&l) {
            return Err(Error::OutOfRange(format!("effect eigenvalue {l} outside [0, 1]")));
        }
        let a = (2.0 * l.clamp(0.0, 1.0) - 1.0).acos();
        phases.push(Complex64::from_polar(1.0, a));
    }
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases));
    Ok(v * d * v.adjoint())
}

/// `I/2 + (U + U+)/4`.
pub fn effect_from_unitary(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = u.nrows();
    DMatrix::identity(n, n).scale(0.5) + (u + u.adjoint()).scale(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    #[test]
    fn half_identity_gives_quarter_turn() {
        let m = DMatrix::<Complex64>::identity(2, 2).scale(0.5);
        let u = unitary_from_effect(&m).unwrap();
        assert!(max_abs(&(u - DMatrix::identity(2, 2).scale(1.0) * Complex64::i())) < 1e-12);
    }

    #[test]
    fn identity_gives_identity() {
        let m = DMatrix::<Complex64>::identity(3, 3);
        let u = unitary_from_effect(&m).unwrap();
        assert!(max_abs(&(u - DMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        let m = DMatrix::<Complex64>::identity(2, 2).scale(1.5);
        assert!(unitary_from_effect(&m).is_err());
    }
}
