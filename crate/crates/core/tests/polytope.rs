use ctxwb::polytope::{max_contextual, max_noncontextual};
use ctxwb::scenario::*;

#[test]
fn table1_values() {
    let s = build_632();
    let c = [3.0, 3.0, 4.5, 3.5, 5.0, 5.0];
    let nc = [2.5, 2.5, 3.0, 3.0, 4.0, 4.0];
    for i in 1..=6 {
        let m = table1_metric(i).unwrap();
        let vc = max_contextual(&s, &m).unwrap().value;
        let vn = max_noncontextual(&s, &m).unwrap().value;
        println!("metric {i}: C={vc:.6} NC={vn:.6}");
        assert!((vc - c[i - 1]).abs() < 1e-6, "C metric {i}: {vc}");
        assert!((vn - nc[i - 1]).abs() < 1e-6, "NC metric {i}: {vn}");
    }
}

#[test]
fn porac_noncontextual_closed_form() {
    for n in 2..=4 {
        let v = max_noncontextual(&build_porac(n).unwrap(), &porac_metric(n)).unwrap().value;
        assert!((v - 0.5 * (1.0 + 1.0 / n as f64)).abs() < 1e-7, "n={n}: {v}");
    }
}

#[test]
fn ncycle_noncontextual() {
    for (n, want) in [(5, 5.0), (7, 6.0)] {
        let v = max_noncontextual(&ncycle_scenario(n).unwrap(), &ncycle_metric(n).unwrap()).unwrap().value;
        println!("ncycle {n}: NC={v}");
        assert!((v - want).abs() < 1e-6, "n={n}: {v}");
    }
}

#[test]
fn mporac23_and_prop7_noncontextual() {
    let v = max_noncontextual(&build_mporac23(), &mporac23_metric()).unwrap().value;
    assert!((v - 0.5).abs() < 1e-6, "{v}");
}

fn lp_gap(s: &Scenario, m: &SuccessMetric) -> f64 {
    (max_contextual(s, m).unwrap().value - max_noncontextual(s, m).unwrap().value).abs()
}

#[test]
fn no_preparation_equivalences_means_no_contextuality() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (x, y, k) = (rng.gen_range(2..=4), rng.gen_range(1..=3), rng.gen_range(2..=3));
        let s = random_scenario(x, y, k, 0, rng.gen_range(0..=2), &mut rng);
        let m = random_metric(&s, &mut rng);
        assert!(lp_gap(&s, &m) < 1e-7);
    }
}

#[test]
fn three_preparations_are_never_contextual() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (x, y, k) = (rng.gen_range(2..=3), rng.gen_range(1..=3), rng.gen_range(2..=3));
        let s = random_scenario(x, y, k, 1, rng.gen_range(0..=2), &mut rng);
        let m = random_metric(&s, &mut rng);
        assert!(lp_gap(&s, &m) < 1e-7);
    }
}
