use approx::assert_abs_diff_eq;
use ctxwb::polytope::{max_contextual, max_noncontextual};
use ctxwb::relax::*;
use ctxwb::scenario::*;
use ctxwb_solver::Status;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const APPENDIX: [f64; 7] = [3.000000002, 2.866025404, 3.920951869, 3.366025406, 4.688901060, 4.645751312, 3.464101524];

fn q1(s: &Scenario, m: &SuccessMetric) -> f64 {
    let r = upper_bound(&build_unitary_relaxation(s).unwrap(), m).unwrap();
    assert_eq!(r.status, Status::Optimal);
    r.value
}

#[test]
fn reference_values_632() {
    let s = build_632();
    let p = build_unitary_relaxation(&s).unwrap();
    for (i, want) in APPENDIX.iter().enumerate() {
        let v = upper_bound(&p, &table1_metric(i + 1).unwrap()).unwrap().value;
        assert_abs_diff_eq!(v, *want, epsilon = 1e-6);
    }
}

#[test]
fn complex_and_real_blocks_agree() {
    let s = build_632();
    let c = RelaxOptions { complex: true, ..Default::default() };
    let pr = build_unitary_relaxation(&s).unwrap();
    let pc = build_unitary_relaxation_with(&s, &c).unwrap();
    for i in [2, 3, 7] {
        let m = table1_metric(i).unwrap();
        let (a, b) = (upper_bound(&pr, &m).unwrap().value, upper_bound(&pc, &m).unwrap().value);
        assert_abs_diff_eq!(a, b, epsilon = 1e-5);
    }
}

#[test]
fn porac_unitary_matches_projective() {
    for n in 2..=4 {
        let s = build_porac(n).unwrap();
        let m = porac_metric(n);
        let u = q1(&s, &m);
        let p = upper_bound(&build_projective_relaxation(&s, 1).unwrap(), &m).unwrap().value;
        assert_abs_diff_eq!(u, p, epsilon = 1e-5);
        assert_abs_diff_eq!(u, 0.5 * (1.0 + 1.0 / (n as f64).sqrt()), epsilon = 1e-6);
    }
}

#[test]
fn mporac_table() {
    for (n, want) in [(2, 0.75), (3, 0.75), (4, 0.7165063)] {
        let v = q1(&build_mporac(n).unwrap(), &porac_metric(n));
        assert_abs_diff_eq!(v, want, epsilon = 1e-6);
    }
}

#[test]
fn ncycle_five() {
    let v = q1(&ncycle_scenario(5).unwrap(), &ncycle_metric(5).unwrap());
    assert_abs_diff_eq!(v, ncycle_quantum_value(5), epsilon = 1e-4);
}

#[test]
fn pure_states_lose_on_prop7() {
    let s = build_prop7();
    let m = porac_metric(2);
    assert_abs_diff_eq!(max_noncontextual(&s, &m).unwrap().value, 0.875, epsilon = 1e-6);
    assert_abs_diff_eq!(q1(&s, &m), 0.875, epsilon = 1e-6);
    let pure = upper_bound(&build_pure_state_relaxation(&s).unwrap(), &m).unwrap().value;
    assert!(pure <= 0.75 + 1e-5, "{pure}");
}

#[test]
fn pure_bound_below_unitary_bound() {
    let s = build_632();
    let u = build_unitary_relaxation(&s).unwrap();
    let p = build_pure_state_relaxation(&s).unwrap();
    for i in 1..=7 {
        let m = table1_metric(i).unwrap();
        assert!(upper_bound(&p, &m).unwrap().value <= upper_bound(&u, &m).unwrap().value + 1e-6);
    }
}

fn random_metric(s: &Scenario, rng: &mut ChaCha8Rng) -> SuccessMetric {
    let mut terms = Vec::new();
    for x in 0..s.x {
        for y in 0..s.y {
            terms.push(Term { x, y, k: 0, c: rng.gen_range(-1.0..1.0) });
        }
    }
    SuccessMetric::new(terms).unwrap()
}

#[test]
fn projective_levels_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let s = build_simplest_family(rng.gen_range(0.05..0.95)).unwrap();
        let m = random_metric(&s, &mut rng);
        let l1 = upper_bound(&build_projective_relaxation(&s, 1).unwrap(), &m).unwrap().value;
        let l2 = upper_bound(&build_projective_relaxation(&s, 2).unwrap(), &m).unwrap().value;
        assert!(l2 <= l1 + 1e-6, "{l2} > {l1}");
    }
}

#[test]
fn sound_relaxation_sits_between_polytopes() {
    let s = build_632();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = build_unitary_relaxation_with(&s, &RelaxOptions::sound()).unwrap();
    for _ in 0..5 {
        let m = random_metric(&s, &mut rng);
        let q = upper_bound(&u, &m).unwrap().value;
        assert!(max_noncontextual(&s, &m).unwrap().value <= q + 1e-6);
        assert!(q <= max_contextual(&s, &m).unwrap().value + 1e-6);
    }
}

// The reference adjoint rule makes every unitary a reflection, which is the
// projective relaxation in disguise; with seed 11 it even cuts below NC.
#[test]
fn reference_rule_equals_projective_level_one() {
    let s = build_632();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = build_unitary_relaxation(&s).unwrap();
    let p = build_projective_relaxation(&s, 1).unwrap();
    let mut below_nc = false;
    for _ in 0..5 {
        let m = random_metric(&s, &mut rng);
        let (a, b) = (upper_bound(&u, &m).unwrap().value, upper_bound(&p, &m).unwrap().value);
        assert_abs_diff_eq!(a, b, epsilon = 1e-5);
        below_nc |= a < max_noncontextual(&s, &m).unwrap().value - 1e-4;
    }
    assert!(below_nc);
}

#[test]
fn mporac23_bounds() {
    let s = build_mporac23();
    let m = mporac23_metric();
    for l in [1, 2] {
        let r = upper_bound(&build_projective_relaxation(&s, l).unwrap(), &m).unwrap();
        assert!(r.status == Status::Infeasible || r.value <= 1.0 / 3.0 + 1e-6, "{r:?}");
    }
    let sound = upper_bound(&build_unitary_relaxation_with(&s, &RelaxOptions::sound()).unwrap(), &m).unwrap();
    assert!(sound.value >= 0.5257, "{}", sound.value);
}

#[test]
fn contextual_point_is_outside_q1() {
    let s = build_632();
    let m = table1_metric(2).unwrap();
    let b = max_contextual(&s, &m).unwrap().behaviour.unwrap();
    match membership_q(&b, &s, Variant::Unitary1).unwrap() {
        QMembership::Infeasible { distance, separation } => {
            assert!(distance > 1e-4);
            let (_, value, bound) = separation.expect("separating metric");
            assert!(value > bound);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn optimizer_of_relaxation_is_a_member() {
    let s = build_porac(2).unwrap();
    let r = upper_bound(&build_unitary_relaxation(&s).unwrap(), &porac_metric(2)).unwrap();
    let mut b = r.behaviour.unwrap();
    for v in b.p.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    assert!(membership_q(&b, &s, Variant::Unitary1).unwrap().is_feasible());
}

fn random_effect(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = a.adjoint() * a;
    let top = m.clone().symmetric_eigenvalues().max();
    m.unscale(top)
}

#[test]
fn unitary_parametrisation_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let m = random_effect(4, &mut rng);
        let u = unitary_from_effect(&m).unwrap();
        let back = effect_from_unitary(&u);
        let err = (back - &m).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        assert!(err < 1e-10, "{err}");
        let id = &u * u.adjoint() - DMatrix::<Complex64>::identity(4, 4);
        assert!(id.iter().all(|z| z.norm() < 1e-10));
    }
}

#[test]
fn export_is_self_describing() {
    let p = build_unitary_relaxation(&build_632()).unwrap();
    let text = p.to_json();
    assert!(text.contains("\"words\""));
    let back = MomentProblem::from_json(&text).unwrap();
    let m = table1_metric(1).unwrap();
    assert_abs_diff_eq!(upper_bound(&back, &m).unwrap().value, 3.0, epsilon = 1e-6);
}
