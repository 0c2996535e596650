//! Real embedding of complex Hermitian matrices.
//!
//! `H = A + iB` maps to `R = [[A, -B], [B, A]]`. `H` is PSD iff `R` is PSD,
//! and `Re tr(C H) = 1/2 tr(embed(C) R)` for Hermitian `C`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::program::Part;

/// Where an entry of the `2n x 2n` embedded matrix reads its value from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedEntry {
    pub sign: f64,
    pub part: Part,
    pub row: usize,
    pub col: usize,
}

/// Index map for a Hermitian block of size `n` embedded into a real
/// symmetric block of size `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianEmbedding {
    pub n: usize,
}

/// Two entries of the real block that must satisfy `a = sign * b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub sign: f64,
}

pub fn embed_hermitian(n: usize) -> HermitianEmbedding {
    HermitianEmbedding { n }
}

impl HermitianEmbedding {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Source of entry `(r, c)` of the embedded matrix in terms of the
    /// canonical Hermitian variables. `None` means the entry is identically 0
    /// (the diagonal of `B`).
    pub fn entry(&self, r: usize, c: usize) -> Option<EmbeddedEntry> {
        let n = self.n;
        assert!(r < 2 * n && c < 2 * n);
        let (i, ri) = (r % n, r >= n);
        let (j, cj) = (c % n, c >= n);
        if ri == cj {
            // A block, symmetric.
            let (row, col) = if i <= j { (i, j) } else { (j, i) };
            return Some(EmbeddedEntry { sign: 1.0, part: Part::Re, row, col });
        }
        // Lower-left is B, upper-right is -B.
        let sign = if ri { 1.0 } else { -1.0 };
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => None,
            Less => Some(EmbeddedEntry { sign, part: Part::Im, row: i, col: j }),
            Greater => Some(EmbeddedEntry { sign: -sign, part: Part::Im, row: j, col: i }),
        }
    }

    /// Equalities that a free real symmetric `2n` block must satisfy to have
    /// the `[[A, -B], [B, A]]` structure: both `A` copies equal, `B`
    /// antisymmetric (so its diagonal vanishes). Upper-triangle coordinates.
    pub fn coupling_constraints(&self) -> Vec<Coupling> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                out.push(Coupling { a: (i, j), b: (n + i, n + j), sign: 1.0 });
            }
        }
        // Upper-right block entry (i, n + j) holds -B[i][j] = B[j][i].
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    out.push(Coupling { a: (i, n + i), b: (i, n + i), sign: -1.0 });
                } else if i < j {
                    out.push(Coupling { a: (i, n + j), b: (j, n + i), sign: -1.0 });
                }
            }
        }
        out
    }
}

pub fn embed_matrix(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            r[(i, j)] = z.re;
            r[(n + i, n + j)] = z.re;
            r[(n + i, j)] = z.im;
            r[(i, n + j)] = -z.im;
        }
    }
    r
}

/// Inverse of [`embed_matrix`], reading the `A` and `B` blocks from the
/// left column of blocks.
pub fn unembed_matrix(r: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = r.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| Complex64::new(r[(i, j)], r[(n + i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ginibre(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        })
    }

    fn min_eig(m: &DMatrix<f64>) -> f64 {
        m.clone().symmetric_eigen().eigenvalues.min()
    }

    #[test]
    fn size_one_has_no_imaginary_part() {
        let e = embed_hermitian(1);
        assert_eq!(e.entry(1, 0), None);
        assert_eq!(e.entry(0, 1), None);
        assert_eq!(e.entry(0, 0).unwrap().part, Part::Re);
        assert_eq!(e.entry(1, 1).unwrap().part, Part::Re);
    }

    #[test]
    fn entry_map_agrees_with_matrix_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ginibre(3, &mut rng);
        let h = &g + g.adjoint();
        let r = embed_matrix(&h);
        let e = embed_hermitian(3);
        for a in 0..6 {
            for b in 0..6 {
                let v = match e.entry(a, b) {
                    None => 0.0,
                    Some(en) => {
                        let z = h[(en.row, en.col)];
                        en.sign * if en.part == Part::Re { z.re } else { z.im }
                    }
                };
                assert!((v - r[(a, b)]).abs() < 1e-14, "entry ({a},{b})");
            }
        }
        for c in e.coupling_constraints() {
            assert!((r[c.a] - c.sign * r[c.b]).abs() < 1e-14);
        }
    }

    #[test]
    fn psd_is_preserved_and_reflected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = ginibre(3, &mut rng);
            let psd = &g * g.adjoint();
            assert!(min_eig(&embed_matrix(&psd)) > -1e-10);

            // Shift so exactly one eigenvalue goes negative.
            let eig = psd.clone().symmetric_eigen().eigenvalues;
            let lo = eig.min();
            let shift = lo + 0.5 * (eig.iter().cloned().filter(|&x| x > lo).fold(f64::INFINITY, f64::min) - lo);
            let indefinite = psd - DMatrix::<Complex64>::identity(3, 3) * Complex64::new(shift, 0.0);
            assert!(min_eig(&embed_matrix(&indefinite)) < 0.0);
        }
    }

    #[test]
    fn real_trace_functional_is_halved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = ginibre(3, &mut rng);
        let b = ginibre(3, &mut rng);
        let c = &a + a.adjoint();
        let h = &b * b.adjoint();
        let lhs = (&c * &h).trace().re;
        let rhs = 0.5 * (embed_matrix(&c) * embed_matrix(&h)).trace();
        assert!((lhs - rhs).abs() < 1e-10);
        assert!(((unembed_matrix(&embed_matrix(&h)) - &h).norm()) < 1e-14);
    }
}
