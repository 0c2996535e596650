use rand::Rng;

use super::exact::ratio;
use super::{Distribution, Scenario, SuccessMetric, Term};

/// Distribution over `len` items with integer weights in `0..=4`.
fn random_distribution(len: usize, rng: &mut impl Rng) -> Distribution {
    loop {
        let w: Vec<i64> = (0..len).map(|_| rng.gen_range(0..=4)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|v| ratio(v, total)).collect();
        }
    }
}

/// Random scenario with `n_prep` preparation and `n_meas` measurement
/// classes of two distributions each. The uniform behaviour satisfies any
/// such class, so the contextual polytope is never empty.
pub fn random_scenario(x: usize, y: usize, k: usize, n_prep: usize, n_meas: usize, rng: &mut impl Rng) -> Scenario {
    let mut s = Scenario::new(x, y, k);
    let mut class = |len: usize| loop {
        let (a, b) = (random_distribution(len, rng), random_distribution(len, rng));
        if a != b {
            return vec![a, b];
        }
    };
    for _ in 0..n_prep {
        s.prep_equivalences.push(class(x));
    }
    for _ in 0..n_meas {
        s.meas_equivalences.push(class(y * k));
    }
    s
}

/// Uniform coefficients in `[-1, 1]` on every probability.
pub fn random_metric(s: &Scenario, rng: &mut impl Rng) -> SuccessMetric {
    let mut terms = Vec::with_capacity(s.behaviour_len());
    for x in 0..s.x {
        for y in 0..s.y {
            for k in 0..s.k {
                terms.push(Term { x, y, k, c: rng.gen_range(-1.0..=1.0) });
            }
        }
    }
    SuccessMetric { terms }
}
