use num_complex::Complex64;

use super::realization::{behaviour_of, max_abs, spectral_map, CMat, QuantumRealization};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

const DILATION_TOL: f64 = 1e-9;

/// Dilate every POVM to a projective measurement on `C^d (x) C^K`.
///
/// States are embedded as `rho (x) |0><0|`; for each measurement the
/// isometry `V = sum_k sqrt(M_k) (x) |k>` is completed to a unitary `U`
/// with `U (psi (x) |0>) = V psi`, and `P_k = U+ (I (x) |k><k|) U`. The
/// dilated behaviour is compared against the original.
pub fn naimark_check(r: &QuantumRealization, s: &Scenario) -> Result<QuantumRealization> {
    if !s.meas_equivalences.is_empty() {
        return Err(Error::Unsupported(format!(
            "dilation would break {} measurement equivalence class(es)",
            s.meas_equivalences.len()
        )));
    }
    r.check_for(s)?;
    let (d, k) = (r.dim, r.num_outcomes());
    let n = d * k;

    let states = r
        .states
        .iter()
        .map(|rho| CMat::from_fn(n, n, |a, b| if a % k == 0 && b % k == 0 { rho[(a / k, b / k)] } else { Complex64::default() }))
        .collect();

    let mut measurements = Vec::with_capacity(r.measurements.len());
    for povm in &r.measurements {
        let roots: Vec<CMat> = povm.iter().map(|m| spectral_map(m, |x| x.max(0.0).sqrt())).collect();
        let v = CMat::from_fn(n, d, |row, i| roots[row % k][(row / k, i)]);
        let complement = spectral_map(&(CMat::identity(n, n) - &v * v.adjoint()), |x| x);
        let eig = complement.symmetric_eigen();
        let mut extra = (0..n).filter(|&j| eig.eigenvalues[j] > 0.5).map(|j| eig.eigenvectors.column(j).into_owned());
        let mut u = CMat::zeros(n, n);
        for col in 0..n {
            if col % k == 0 {
                u.set_column(col, &v.column(col / k));
            } else {
                let e = extra.next().ok_or_else(|| Error::Numerical("isometry has no orthogonal complement".into()))?;
                u.set_column(col, &e);
            }
        }
        let unitarity = max_abs(&(u.adjoint() * &u - CMat::identity(n, n)));
        if unitarity > DILATION_TOL {
            return Err(Error::Numerical(format!("completed unitary off by {unitarity:.1e}")));
        }
        let projectors = (0..k)
            .map(|kk| {
                let sel = CMat::from_fn(n, n, |a, b| if a == b && a % k == kk { Complex64::new(1.0, 0.0) } else { Complex64::default() });
                u.adjoint() * sel * &u
            })
            .collect();
        measurements.push(projectors);
    }

    let dilated = QuantumRealization { dim: n, states, measurements };
    for (y, povm) in dilated.measurements.iter().enumerate() {
        for (kk, p) in povm.iter().enumerate() {
            let err = max_abs(&(p * p - p));
            if err > DILATION_TOL {
                return Err(Error::Numerical(format!("dilated effect ({y},{kk}) not idempotent: {err:.1e}")));
            }
        }
    }
    let (before, after) = (behaviour_of(r)?, behaviour_of(&dilated)?);
    let gap = before.p.iter().zip(&after.p).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if gap > DILATION_TOL {
        return Err(Error::Numerical(format!("dilated behaviour differs by {gap:.1e}")));
    }
    Ok(dilated)
}
