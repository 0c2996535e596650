use approx::assert_abs_diff_eq;
use ctxwb::multiparty::*;
use ctxwb::scenario::Scenario;
use nalgebra::DMatrix;
use num_complex::Complex64;

type C = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(axis: usize) -> C {
    match axis {
        0 => C::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        1 => C::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        _ => C::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

fn bits(x: usize) -> [usize; 3] {
    [(x >> 2) & 1, (x >> 1) & 1, x & 1]
}

/// Qubit with Bloch vector `((-1)^x0, (-1)^x1, (-1)^x2) / sqrt 3`.
fn qubit(x: usize) -> C {
    let mut m = C::identity(2, 2);
    for (a, b) in bits(x).iter().enumerate() {
        let s = if *b == 0 { 1.0 } else { -1.0 };
        m += pauli(a).scale(s / 3f64.sqrt());
    }
    m.unscale(2.0)
}

/// Half the time Bob holds the encoded qubit, otherwise Charlie does.
fn shared(x: usize, lambda: f64) -> C {
    let half = C::identity(2, 2).unscale(2.0);
    qubit(x).kronecker(&half).scale(lambda) + half.kronecker(&qubit(x)).scale(1.0 - lambda)
}

fn success(lambda: f64, bob: bool) -> f64 {
    let id = C::identity(2, 2);
    let mut s = 0.0;
    for x in 0..8 {
        for y in 0..3 {
            let proj = (&id + pauli(y).scale(if bits(x)[y] == 0 { 1.0 } else { -1.0 })).unscale(2.0);
            let op = if bob { proj.kronecker(&id) } else { id.kronecker(&proj) };
            s += (shared(x, lambda) * op).trace().re;
        }
    }
    s / 24.0
}

fn equivalence_gap(s: &Scenario, lambda: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for class in s.prep_f64() {
        let mix: Vec<C> = class
            .iter()
            .map(|a| (0..8).fold(C::zeros(4, 4), |m, x| m + shared(x, lambda).scale(a[x])))
            .collect();
        for m in &mix[1..] {
            worst = worst.max((m - &mix[0]).iter().fold(0.0, |a: f64, z| a.max(z.norm())));
        }
    }
    worst
}

#[test]
fn no_signalling_sum() {
    let ms = build_tripartite_porac();
    assert_abs_diff_eq!(ns_monogamy_bound(&ms).unwrap(), 1.5, epsilon = 1e-7);
    assert!(contextual_sum_bound(&ms, false).unwrap() >= 1.5 - 1e-7);
}

#[test]
fn free_preparations_allow_two_perfect_decoders() {
    let mut ms = build_tripartite_porac();
    ms.party.prep_equivalences.clear();
    assert_abs_diff_eq!(ns_monogamy_bound(&ms).unwrap(), 2.0, epsilon = 1e-7);
}

#[test]
fn quantum_sum_bound() {
    let p = BipartiteMomentProblem::build(&build_tripartite_porac()).unwrap();
    let v = p.max_sum().unwrap();
    assert!((v - 1.392).abs() <= 5e-3, "{v}");
}

#[test]
fn literal_prefactor_scales_every_bound() {
    let ms = build_tripartite_porac_with(Normalisation::Literal);
    assert_abs_diff_eq!(ns_monogamy_bound(&ms).unwrap(), 2.25, epsilon = 1e-7);
    let p = BipartiteMomentProblem::build(&ms).unwrap();
    let averaged = BipartiteMomentProblem::build(&build_tripartite_porac()).unwrap();
    assert_abs_diff_eq!(p.max_sum().unwrap(), 1.5 * averaged.max_sum().unwrap(), epsilon = 1e-6);
}

#[test]
fn single_party_optimum_is_porac3() {
    let p = BipartiteMomentProblem::build(&build_tripartite_porac()).unwrap();
    let top = p.single_party_max(Party::Bob).unwrap();
    assert_abs_diff_eq!(top, 0.5 * (1.0 + 1.0 / 3f64.sqrt()), epsilon = 1e-6);
    let idle = p.monogamy_point(0.5).unwrap().value.unwrap();
    assert_abs_diff_eq!(idle, top, epsilon = 1e-6);
    let over = p.monogamy_point(top + 1e-3).unwrap();
    assert!(over.value.is_none());
}

#[test]
fn marginals_ignore_the_other_setting() {
    let p = BipartiteMomentProblem::build(&build_tripartite_porac()).unwrap();
    for x in 0..8 {
        for yb in 0..3 {
            let m = p.marginal(Party::Bob, x, yb, 0);
            for yc in 0..3 {
                let mut sum = p.joint(x, yb, yc, 0, 0);
                sum.add_expr(&p.joint(x, yb, yc, 0, 1), 1.0);
                assert_eq!(sum.normalized(), m.clone().normalized());
            }
        }
    }
}

#[test]
fn shared_qubit_realizations_stay_below_the_curve() {
    let ms = build_tripartite_porac();
    let p = BipartiteMomentProblem::build(&ms).unwrap();
    for lambda in [0.0, 0.25, 0.5, 0.8, 1.0] {
        assert!(equivalence_gap(&ms.party, lambda) < 1e-12);
        let (sb, sc) = (success(lambda, true), success(lambda, false));
        let bound = p.monogamy_point(sb - 1e-9).unwrap().value.unwrap();
        assert!(sc <= bound + 1e-5, "lambda {lambda}: {sc} > {bound}");
    }
}

#[test]
fn monogamy_curve_is_monotone() {
    let p = BipartiteMomentProblem::build(&build_tripartite_porac()).unwrap();
    let curve = monogamy_curve(&p, 50).unwrap();
    assert_eq!(curve.points.len(), 50);
    assert!(curve.points.iter().all(|pt| pt.value.is_some()));
    assert!(curve.worst_increase() <= 1e-6, "{}", curve.worst_increase());
    assert!(curve.to_csv().starts_with("s_B,value,status\n"));
}

#[test]
fn entropy_oracle() {
    let h = binary_entropy(0.853553).unwrap();
    let p: f64 = 0.853553;
    let direct = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / std::f64::consts::LN_2;
    assert_abs_diff_eq!(h, direct, epsilon = 1e-12);
    assert_abs_diff_eq!(h, 0.6008770, epsilon = 1e-6);
}

#[test]
fn key_rate_region() {
    let p = BipartiteMomentProblem::build(&build_tripartite_porac()).unwrap();
    let top = p.single_party_max(Party::Bob).unwrap();
    let pts = key_rate_curve(&p, &[0.5, 0.7, 0.78, top - 1e-7]).unwrap();
    assert!(pts[0].rate.unwrap() <= 0.0);
    assert!(pts[3].rate.unwrap() > 0.0);
    assert!(pts[2].rate.unwrap() > 0.0);
    assert!(pts[1].rate.unwrap() < pts[2].rate.unwrap());
    assert!(key_rate_csv(&pts).lines().count() == 5);
}
