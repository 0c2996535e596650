//! Vertices of the measurement-noncontextual response polytope
//! `{xi >= 0 : sum_k xi(k|y) = 1, beta_j . xi equal across j}`.

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ratio_to_f64, Scenario};

/// Largest `Y * K` accepted by the enumerator.
pub const MAX_RESPONSE_DIM: usize = 24;

/// One response scheme `xi(k|y)`, flattened as `y * K + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseScheme {
    pub xi: Vec<f64>,
}

impl ResponseScheme {
    pub fn get(&self, k_count: usize, y: usize, k: usize) -> f64 {
        self.xi[y * k_count + k]
    }
}

/// Equality system `A xi = b` of the response polytope, row-reduced to
/// independent rows with integer coefficients.
pub(crate) fn equality_system(s: &Scenario) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let d = s.y * s.k;
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs = Vec::new();
    for y in 0..s.y {
        let mut r = vec![BigRational::zero(); d];
        for k in 0..s.k {
            r[y * s.k + k] = BigRational::one();
        }
        rows.push(r);
        rhs.push(BigRational::one());
    }
    for class in &s.meas_equivalences {
        for j in 1..class.len() {
            rows.push((0..d).map(|i| &class[j][i] - &class[0][i]).collect());
            rhs.push(BigRational::zero());
        }
    }
    rref(rows, rhs)
}

/// Reduced row echelon form over the rationals; drops dependent rows and
/// scales each surviving row to integers.
fn rref(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        b.swap(rank, p);
        let inv = a[rank][c].recip();
        for v in a[rank].iter_mut() {
            *v *= &inv;
        }
        b[rank] *= &inv;
        for i in 0..a.len() {
            if i != rank && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for cc in 0..cols {
                    let t = &a[rank][cc] * &f;
                    a[i][cc] -= t;
                }
                let t = &b[rank] * &f;
                b[i] -= t;
            }
        }
        rank += 1;
    }
    for i in rank..b.len() {
        assert!(b[i].is_zero(), "inconsistent equality system");
    }
    a.truncate(rank);
    b.truncate(rank);
    for (row, r) in a.iter_mut().zip(b.iter_mut()) {
        let l = row
            .iter()
            .chain(std::iter::once(&*r))
            .fold(num_bigint::BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
        let f = BigRational::from_integer(l);
        for v in row.iter_mut() {
            *v *= &f;
        }
        *r *= &f;
    }
    (a, b)
}

/// Solve `A_B z = b` exactly; `None` when singular.
fn solve_exact(a: &[Vec<BigRational>], b: &[BigRational], basis: &[usize]) -> Option<Vec<BigRational>> {
    let n = basis.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, r)| basis.iter().map(|&c| row[c].clone()).chain(std::iter::once(r.clone())).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for v in m[c].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for cc in c..=n {
                    let t = &m[c][cc] * &f;
                    m[i][cc] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

fn deterministic_schemes(s: &Scenario) -> Vec<ResponseScheme> {
    (0..s.y)
        .map(|_| 0..s.k)
        .multi_cartesian_product()
        .map(|ks| {
            let mut xi = vec![0.0; s.y * s.k];
            for (y, &k) in ks.iter().enumerate() {
                xi[y * s.k + k] = 1.0;
            }
            ResponseScheme { xi }
        })
        .collect()
}

/// All vertices of the response polytope, in a deterministic order.
///
/// Without measurement equivalences these are the `K^Y` deterministic
/// schemes. Otherwise basic feasible solutions are enumerated in floating
/// point and each distinct candidate is confirmed with exact arithmetic.
pub fn response_vertices(s: &Scenario) -> Result<Vec<ResponseScheme>> {
    let d = s.y * s.k;
    if d > MAX_RESPONSE_DIM {
        return Err(Error::TooLarge(format!(
            "response polytope has dimension Y*K = {d} > {MAX_RESPONSE_DIM}; vertex enumeration refused"
        )));
    }
    if s.meas_equivalences.is_empty() {
        return Ok(deterministic_schemes(s));
    }
    let (a, b) = equality_system(s);
    let r = a.len();
    let af = DMatrix::from_fn(r, d, |i, j| ratio_to_f64(&a[i][j]));
    let bf = DVector::from_iterator(r, b.iter().map(ratio_to_f64));

    // Candidates keyed by their coordinates rounded to 1e-9.
    let mut found: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for basis in (0..d).combinations(r) {
        let sub = af.select_columns(&basis);
        let lu = sub.full_piv_lu();
        // Rows are integral, so a nonsingular basis has |det| >= 1.
        if lu.determinant().abs() < 0.5 {
            continue;
        }
        let Some(z) = lu.solve(&bf) else { continue };
        if z.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut xi = vec![0.0; d];
        for (&c, &v) in basis.iter().zip(z.iter()) {
            xi[c] = v;
        }
        let key: Vec<i64> = xi.iter().map(|v| (v * 1e9).round() as i64).collect();
        found.entry(key).or_insert(basis);
    }

    let mut exact: BTreeMap<Vec<BigRational>, ()> = BTreeMap::new();
    for basis in found.values() {
        let Some(z) = solve_exact(&a, &b, basis) else { continue };
        if z.iter().any(|v| v.is_negative()) {
            continue;
        }
        let mut xi = vec![BigRational::zero(); d];
        for (&c, v) in basis.iter().zip(z) {
            xi[c] = v;
        }
        exact.insert(xi, ());
    }
    Ok(exact
        .into_keys()
        .map(|xi| ResponseScheme { xi: xi.iter().map(ratio_to_f64).collect() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_632, build_mporac, build_porac, Scenario};

    #[test]
    fn deterministic_when_no_measurement_classes() {
        let v = response_vertices(&build_porac(2).unwrap()).unwrap();
        assert_eq!(v.len(), 4);
        let v = response_vertices(&Scenario::new(2, 3, 3)).unwrap();
        assert_eq!(v.len(), 27);
    }

    #[test]
    fn mporac2_has_two_vertices() {
        let v = response_vertices(&build_mporac(2).unwrap()).unwrap();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn vertices_of_632_satisfy_the_class_exactly() {
        let s = build_632();
        let v = response_vertices(&s).unwrap();
        assert!(!v.is_empty());
        for r in &v {
            let a: f64 = (0..3).map(|y| r.get(2, y, 0)).sum();
            let b: f64 = (0..3).map(|y| r.get(2, y, 1)).sum();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn size_guard() {
        let s = Scenario::new(2, 13, 2).with_meas_class(vec![
            {
                let mut d = vec![crate::scenario::ratio(0, 1); 26];
                d[0] = crate::scenario::ratio(1, 1);
                d
            },
            {
                let mut d = vec![crate::scenario::ratio(0, 1); 26];
                d[2] = crate::scenario::ratio(1, 1);
                d
            },
        ]);
        assert!(matches!(response_vertices(&s), Err(Error::TooLarge(_))));
    }
}
