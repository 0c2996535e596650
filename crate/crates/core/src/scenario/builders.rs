//! Named scenario families and their success metrics.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::exact::{ratio, ratio_from_f64};
use super::{Class, Distribution, Scenario, SuccessMetric, Term};
use crate::error::{Error, Result};

/// Largest `n` accepted by the parity-oblivious builders.
pub const MAX_PORAC_N: usize = 8;

fn point(len: usize, i: usize) -> Distribution {
    let mut d = vec![BigRational::zero(); len];
    d[i] = BigRational::one();
    d
}

fn uniform_over(len: usize, support: &[usize]) -> Distribution {
    let mut d = vec![BigRational::zero(); len];
    let w = ratio(1, support.len() as i64);
    for &i in support {
        d[i] = w.clone();
    }
    d
}

/// Six preparations paired into three equal mixtures, three binary
/// measurements whose averaged outcome-0 and outcome-1 effects coincide.
pub fn build_632() -> Scenario {
    let prep: Class = (0..3).map(|i| uniform_over(6, &[2 * i, 2 * i + 1])).collect();
    let meas: Class = (0..2)
        .map(|k| uniform_over(6, &(0..3).map(|y| y * 2 + k).collect::<Vec<_>>()))
        .collect();
    Scenario::new(6, 3, 2).with_prep_class(prep).with_meas_class(meas)
}

/// Facet metrics of the 632 scenario, written with `p_{yx} = p(0|x,y)`.
/// Index 7 is the alternative form of metric 3.
pub fn table1_metric(i: usize) -> Result<SuccessMetric> {
    // (y, x, coefficient)
    let t: &[(usize, usize, f64)] = match i {
        1 => &[(0, 0, 1.0), (1, 2, 1.0), (2, 4, 1.0)],
        2 => &[(0, 0, 1.0), (1, 1, 1.0), (2, 4, 1.0)],
        3 => &[(0, 0, 1.0), (0, 2, -1.0), (0, 4, -2.0), (1, 1, -2.0), (1, 2, 2.0), (2, 4, 2.0)],
        4 => &[(0, 0, 2.0), (1, 1, -1.0), (1, 2, 2.0)],
        5 => &[(0, 0, 1.0), (0, 4, -1.0), (1, 1, 1.0), (1, 2, 1.0), (2, 4, 2.0)],
        6 => &[(0, 0, 1.0), (0, 4, -1.0), (1, 1, 2.0), (2, 4, 2.0)],
        7 => &[(0, 0, 1.0), (0, 3, -1.0), (0, 4, -2.0), (1, 1, -2.0), (1, 2, 2.0), (2, 4, 2.0)],
        _ => return Err(Error::OutOfRange(format!("table metric {i} (expected 1..=7)"))),
    };
    SuccessMetric::new(t.iter().map(|&(y, x, c)| Term { x, y, k: 0, c }).collect())
}

/// Bit `i` (0 = most significant) of the `n`-bit big-endian string `x`.
pub fn bit(x: usize, n: usize, i: usize) -> usize {
    (x >> (n - 1 - i)) & 1
}

fn check_porac_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("n = {n}; need n >= 2")));
    }
    if n > MAX_PORAC_N {
        return Err(Error::TooLarge(format!("n = {n} exceeds the limit {MAX_PORAC_N}")));
    }
    Ok(())
}

/// Parity-oblivious random access code on `n` bits. Preparation `x` is the
/// big-endian integer of `x_0 ... x_{n-1}`. For every parity string `s` of
/// Hamming weight at least two (ascending) the mixtures over `s.x = 0` and
/// `s.x = 1` coincide.
pub fn build_porac(n: usize) -> Result<Scenario> {
    check_porac_n(n)?;
    let xs = 1usize << n;
    let mut s = Scenario::new(xs, n, 2);
    for par in 0..xs {
        if par.count_ones() < 2 {
            continue;
        }
        let class = (0..2)
            .map(|b| {
                let support: Vec<usize> =
                    (0..xs).filter(|x| ((x & par).count_ones() as usize) % 2 == b).collect();
                uniform_over(xs, &support)
            })
            .collect();
        s.prep_equivalences.push(class);
    }
    Ok(s)
}

/// Average success probability of recovering bit `y`:
/// `1/(n 2^n) sum_{x,y} p(x_y|x,y)`.
pub fn porac_metric(n: usize) -> SuccessMetric {
    let xs = 1usize << n;
    let c = 1.0 / (n * xs) as f64;
    let terms = (0..xs)
        .flat_map(|x| (0..n).map(move |y| Term { x, y, k: bit(x, n, y), c }))
        .collect();
    SuccessMetric { terms }
}

/// Two-bit family with `1/2 P00 + 1/2 P11 ~ alpha P01 + (1-alpha) P10`.
pub fn build_simplest_family(alpha: f64) -> Result<Scenario> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha = {alpha}")));
    }
    Ok(build_simplest_family_exact(ratio_from_f64(alpha)))
}

pub fn build_simplest_family_exact(alpha: BigRational) -> Scenario {
    let half = ratio(1, 2);
    let z = BigRational::zero();
    let a = vec![half.clone(), z.clone(), z.clone(), half];
    let b = vec![z.clone(), alpha.clone(), BigRational::one() - alpha, z];
    Scenario::new(4, 2, 2).with_prep_class(vec![a, b])
}

/// porac(n) plus `1/n sum_i [0|M_i] ~ 1/n sum_i [1|M_i]`.
pub fn build_mporac(n: usize) -> Result<Scenario> {
    let s = build_porac(n)?;
    let meas = (0..2)
        .map(|k| uniform_over(2 * n, &(0..n).map(|y| y * 2 + k).collect::<Vec<_>>()))
        .collect();
    Ok(s.with_meas_class(meas))
}

/// Two trits `x = 3 a0 + a1`, two ternary measurements. The three
/// mixtures with fixed `a0 + a1 mod 3` coincide, and so do the three
/// effects `1/2 ([k|M0] + [k|M1])`.
pub fn build_mporac23() -> Scenario {
    let prep = (0..3)
        .map(|t| {
            let support: Vec<usize> = (0..9).filter(|x| (x / 3 + x % 3) % 3 == t).collect();
            uniform_over(9, &support)
        })
        .collect();
    let meas = (0..3).map(|k| uniform_over(6, &[k, 3 + k])).collect();
    Scenario::new(9, 2, 3).with_prep_class(prep).with_meas_class(meas)
}

/// `1/18 sum_{x,y} p(a_y|x,y)`.
pub fn mporac23_metric() -> SuccessMetric {
    let c = 1.0 / 18.0;
    let terms = (0..9)
        .flat_map(|x| {
            let a = [x / 3, x % 3];
            (0..2).map(move |y| Term { x, y, k: a[y], c })
        })
        .collect();
    SuccessMetric { terms }
}

/// Two-bit scenario in which `P11 ~ 1/2 P01 + 1/2 P10`, so that pure
/// preparations would have to coincide.
pub fn build_prop7() -> Scenario {
    let a = point(4, 3);
    let b = uniform_over(4, &[1, 2]);
    Scenario::new(4, 2, 2).with_prep_class(vec![a, b])
}

const NCYCLE_5: &str = include_str!("../../data/ncycle_5.json");
const NCYCLE_7: &str = include_str!("../../data/ncycle_7.json");
const NCYCLE_5_METRIC: &str = include_str!("../../data/ncycle_5_metric.json");
const NCYCLE_7_METRIC: &str = include_str!("../../data/ncycle_7_metric.json");

/// Bundled n-cycle scenario (n = 5 or 7).
pub fn ncycle_scenario(n: usize) -> Result<Scenario> {
    let text = match n {
        5 => NCYCLE_5,
        7 => NCYCLE_7,
        _ => return Err(Error::Unsupported(format!("no bundled {n}-cycle scenario"))),
    };
    super::io::scenario_from_json(text)
}

pub fn ncycle_metric(n: usize) -> Result<SuccessMetric> {
    let text = match n {
        5 => NCYCLE_5_METRIC,
        7 => NCYCLE_7_METRIC,
        _ => return Err(Error::Unsupported(format!("no bundled {n}-cycle metric"))),
    };
    serde_json::from_str(text).map_err(|e| Error::parse("metric", e))
}

/// `3 + n cos(pi/n) / (1 + cos(pi/n))`.
pub fn ncycle_quantum_value(n: usize) -> f64 {
    let c = (std::f64::consts::PI / n as f64).cos();
    3.0 + n as f64 * c / (1.0 + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_weight2(n: usize) -> usize {
        (0..1usize << n).filter(|s| s.count_ones() >= 2).count()
    }

    #[test]
    fn builders_validate() {
        assert!(build_632().validate().is_pass());
        for n in 2..=5 {
            assert!(build_porac(n).unwrap().validate().is_pass());
            assert!(build_mporac(n).unwrap().validate().is_pass());
        }
        assert!(build_mporac23().validate().is_pass());
        assert!(build_prop7().validate().is_pass());
        for a in [0.0, 0.3, 0.5, 1.0] {
            assert!(build_simplest_family(a).unwrap().validate().is_pass());
        }
        for n in [5, 7] {
            assert!(ncycle_scenario(n).unwrap().validate().is_pass());
        }
    }

    #[test]
    fn shape_of_632() {
        let s = build_632();
        assert_eq!((s.x, s.y, s.k), (6, 3, 2));
        assert_eq!(s.prep_equivalences.len(), 1);
        assert_eq!(s.prep_equivalences[0].len(), 3);
        assert_eq!(s.meas_equivalences[0].len(), 2);
        let h = ratio(1, 2);
        let z = ratio(0, 1);
        assert_eq!(s.prep_equivalences[0][0], vec![h.clone(), h, z.clone(), z.clone(), z.clone(), z]);
        let third = ratio(1, 3);
        for y in 0..3 {
            assert_eq!(s.meas_equivalences[0][0][s.effect_index(y, 0)], third);
            assert_eq!(s.meas_equivalences[0][0][s.effect_index(y, 1)], ratio(0, 1));
        }
    }

    #[test]
    fn porac_class_counts() {
        for n in 2..=5 {
            let s = build_porac(n).unwrap();
            assert_eq!(s.prep_equivalences.len(), brute_force_weight2(n));
            assert_eq!(s.prep_equivalences.len(), (1 << n) - n - 1);
            assert!(s.prep_equivalences.iter().all(|c| c.len() == 2));
        }
        assert!(build_porac(1).is_err());
        assert!(matches!(build_porac(9), Err(Error::TooLarge(_))));
    }

    #[test]
    fn porac2_class_is_parity() {
        let s = build_porac(2).unwrap();
        let h = ratio(1, 2);
        let z = ratio(0, 1);
        assert_eq!(s.prep_equivalences[0][0], vec![h.clone(), z.clone(), z.clone(), h.clone()]);
        assert_eq!(s.prep_equivalences[0][1], vec![z.clone(), h.clone(), h, z]);
        assert_eq!(build_simplest_family(0.5).unwrap(), s);
    }

    #[test]
    fn simplest_family_boundaries() {
        let s = build_simplest_family(0.0).unwrap();
        assert_eq!(s.prep_equivalences[0][1], point(4, 2));
        let s = build_simplest_family(0.3).unwrap();
        assert_eq!(s.prep_equivalences[0][1][1], ratio(3, 10));
        assert_eq!(s.prep_equivalences[0][1][2], ratio(7, 10));
        assert!(build_simplest_family(1.5).is_err());
    }

    #[test]
    fn mporac_adds_one_measurement_class() {
        let s = build_mporac(2).unwrap();
        assert_eq!(s.meas_equivalences.len(), 1);
        let h = ratio(1, 2);
        let z = ratio(0, 1);
        assert_eq!(s.meas_equivalences[0][0], vec![h.clone(), z.clone(), h.clone(), z.clone()]);
        assert_eq!(s.meas_equivalences[0][1], vec![z.clone(), h.clone(), z, h]);
    }

    #[test]
    fn mporac23_shape() {
        let s = build_mporac23();
        assert_eq!(s.behaviour_len(), 54);
        assert_eq!(s.meas_equivalences[0].len(), 3);
        assert_eq!(mporac23_metric().terms.len(), 18);
    }

    #[test]
    fn porac_metric_weights() {
        let m = porac_metric(2);
        assert_eq!(m.terms.len(), 8);
        assert!(m.terms.iter().all(|t| (t.c - 0.125).abs() < 1e-15));
        // x = 01 (x0 = 0, x1 = 1): y = 1 asks for outcome 1.
        assert!(m.terms.contains(&Term { x: 1, y: 1, k: 1, c: 0.125 }));
    }

    #[test]
    fn ncycle_closed_form() {
        assert!((ncycle_quantum_value(5) - 5.2360680).abs() < 1e-7);
        assert!((ncycle_quantum_value(7) - 6.3176672).abs() < 1e-7);
    }
}
