//! Two measuring parties sharing each preparation: no-signalling and
//! quantum monogamy trade-offs, and key-rate lower bounds when the second
//! party is an eavesdropper.

mod moments;

use ctxwb_solver::{solve, ConicProgram, LinExpr, Relation, Sense, SolverOptions, Status, Var};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ratio, Class, Distribution, Scenario, SuccessMetric, Term};

pub use moments::{BcWord, BipartiteMomentProblem, MonogamyPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Bob,
    Charlie,
}

/// How the per-party success sum over `(x, y)` is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalisation {
    /// Average over all 24 input pairs, so a perfect decoder scores 1.
    #[default]
    Averaged,
    /// The 1/16 prefactor applied to the same 24 terms.
    Literal,
}

impl Normalisation {
    pub fn factor(self) -> f64 {
        match self {
            Normalisation::Averaged => 1.0 / 24.0,
            Normalisation::Literal => 1.0 / 16.0,
        }
    }
}

/// Preparations shared by two parties who measure the same settings. The
/// single-party view carries both the preparation classes and the success
/// metric each party is scored with.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartyScenario {
    pub party: Scenario,
    pub metric: SuccessMetric,
    pub normalisation: Normalisation,
}

fn uniform(support: impl IntoIterator<Item = usize>) -> Distribution {
    let support: Vec<usize> = support.into_iter().collect();
    let mut d = vec![ratio(0, 1); 8];
    for &x in &support {
        d[x] = ratio(1, support.len() as i64);
    }
    d
}

/// `x = x0 x1 x2` big-endian.
fn bits(x: usize) -> [usize; 3] {
    [(x >> 2) & 1, (x >> 1) & 1, x & 1]
}

pub fn build_tripartite_porac() -> MultipartyScenario {
    build_tripartite_porac_with(Normalisation::default())
}

/// Three bits; each pair of bits has hidden parity for either value of the
/// spectator bit, and so does the parity of all three. Each party decodes
/// bit `y` of `x`.
pub fn build_tripartite_porac_with(normalisation: Normalisation) -> MultipartyScenario {
    let mut classes: Vec<Class> = Vec::new();
    for (i, j, s) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        for v in 0..2 {
            let side = |same: bool| {
                uniform((0..8).filter(move |&x| {
                    let b = bits(x);
                    b[s] == v && (b[i] == b[j]) == same
                }))
            };
            classes.push(vec![side(true), side(false)]);
        }
    }
    let parity = |p: usize| uniform((0..8).filter(move |&x| bits(x).iter().sum::<usize>() % 2 == p));
    classes.push(vec![parity(0), parity(1)]);
    let mut party = Scenario::new(8, 3, 2);
    party.prep_equivalences = classes;
    let c = normalisation.factor();
    let terms = (0..8).flat_map(|x| (0..3).map(move |y| Term { x, y, k: bits(x)[y], c })).collect();
    MultipartyScenario { party, metric: SuccessMetric { terms }, normalisation }
}

/// LP over joint behaviours `p(kb, kc | x, yb, yc)` consistent with the
/// preparation equivalences, maximising `S_B + S_C`.
pub fn contextual_sum_bound(ms: &MultipartyScenario, no_signalling: bool) -> Result<f64> {
    let s = &ms.party;
    let (nx, ny, nk) = (s.x, s.y, s.k);
    let mut p = ConicProgram::new(Sense::Max);
    let blk = p.add_nonneg(nx * ny * ny * nk * nk, None);
    let var = |x: usize, yb: usize, yc: usize, kb: usize, kc: usize| {
        Var::scalar(blk, (((x * ny + yb) * ny + yc) * nk + kb) * nk + kc)
    };
    let marginal = |party: Party, x: usize, y: usize, k: usize, other: usize| {
        let mut e = LinExpr::new();
        for o in 0..nk {
            match party {
                Party::Bob => e.add_term(var(x, y, other, k, o), 1.0),
                Party::Charlie => e.add_term(var(x, other, y, o, k), 1.0),
            };
        }
        e
    };
    for x in 0..nx {
        for yb in 0..ny {
            for yc in 0..ny {
                let mut e = LinExpr::new();
                for kb in 0..nk {
                    for kc in 0..nk {
                        e.add_term(var(x, yb, yc, kb, kc), 1.0);
                    }
                }
                p.add_constraint(e, Relation::Eq, 1.0);
            }
        }
    }
    if no_signalling {
        for party in [Party::Bob, Party::Charlie] {
            for x in 0..nx {
                for y in 0..ny {
                    for k in 0..nk {
                        for other in 1..ny {
                            let mut e = marginal(party, x, y, k, other);
                            e.add_expr(&marginal(party, x, y, k, 0), -1.0);
                            p.add_constraint(e, Relation::Eq, 0.0);
                        }
                    }
                }
            }
        }
    }
    for class in s.prep_f64() {
        for dist in &class[1..] {
            for yb in 0..ny {
                for yc in 0..ny {
                    for kb in 0..nk {
                        for kc in 0..nk {
                            let mut e = LinExpr::new();
                            for (x, (a, b)) in dist.iter().zip(&class[0]).enumerate() {
                                if a != b {
                                    e.add_term(var(x, yb, yc, kb, kc), a - b);
                                }
                            }
                            p.add_constraint(e, Relation::Eq, 0.0);
                        }
                    }
                }
            }
        }
    }
    // Without no-signalling each party's score is read off at the other's
    // setting 0.
    for t in &ms.metric.terms {
        p.objective.add_expr(&marginal(Party::Bob, t.x, t.y, t.k, 0), t.c);
        p.objective.add_expr(&marginal(Party::Charlie, t.x, t.y, t.k, 0), t.c);
    }
    p.objective.normalize();
    p.remove_dependent_equalities(1e-9);
    let sol = solve(&p, &SolverOptions::default())?;
    if sol.status != Status::Optimal {
        return Err(Error::Numerical(format!("joint LP returned {:?}", sol.status)));
    }
    Ok(sol.objective)
}

/// Largest `S_B + S_C` over no-signalling behaviours.
pub fn ns_monogamy_bound(ms: &MultipartyScenario) -> Result<f64> {
    contextual_sum_bound(ms, true)
}

/// Upper bound on `S_C` as a function of `S_B` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamyCurve {
    pub variant: String,
    pub s_b_max: f64,
    pub points: Vec<MonogamyPoint>,
}

impl MonogamyCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s_B,value,status\n");
        for p in &self.points {
            let v = p.value.map_or_else(String::new, |v| format!("{v:.10}"));
            out.push_str(&format!("{:.10},{v},{}\n", p.s_b, status_name(p.status)));
        }
        out
    }

    /// Largest increase of the bound between consecutive feasible points.
    pub fn worst_increase(&self) -> f64 {
        let vals: Vec<f64> = self.points.iter().filter_map(|p| p.value).collect();
        vals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
        Status::NumericalTrouble => "numerical-trouble",
    }
}

/// `n` evenly spaced points on `(1/2, top]`.
pub fn grid(top: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| 0.5 + (top - 0.5) * i as f64 / n as f64).collect()
}

pub fn monogamy_curve(problem: &BipartiteMomentProblem, points: usize) -> Result<MonogamyCurve> {
    let top = problem.single_party_max(Party::Bob)?;
    // a hair below the optimum so the last point stays strictly feasible
    let grid = grid(top - 1e-7, points);
    let points = grid.par_iter().map(|&s| problem.monogamy_point(s)).collect::<Result<Vec<_>>>()?;
    Ok(MonogamyCurve { variant: "Q1+BC".into(), s_b_max: top, points })
}

/// `-p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("probability {p}")));
    }
    let term = |q: f64| if q == 0.0 { 0.0 } else { -q * q.log2() };
    Ok(term(p) + term(1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    pub s_b: f64,
    /// Upper bound on Eve's guessing probability.
    pub s_e: Option<f64>,
    /// `-log2 S_E - h(S_B)`.
    pub rate: Option<f64>,
    pub status: Status,
}

/// Key-rate lower bounds with the second party as eavesdropper guessing the
/// same bit as Bob.
pub fn key_rate_curve(problem: &BipartiteMomentProblem, grid: &[f64]) -> Result<Vec<KeyRatePoint>> {
    grid.par_iter()
        .map(|&s_b| {
            let h = binary_entropy(s_b)?;
            let pt = match problem.monogamy_point(s_b) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("key rate at s_B = {s_b}: {e}");
                    return Ok(KeyRatePoint { s_b, s_e: None, rate: None, status: Status::NumericalTrouble });
                }
            };
            let rate = pt.value.map(|se| -se.log2() - h);
            Ok(KeyRatePoint { s_b, s_e: pt.value, rate, status: pt.status })
        })
        .collect()
}

pub fn key_rate_csv(points: &[KeyRatePoint]) -> String {
    let mut out = String::from("s_B,value,status\n");
    for p in points {
        let v = p.rate.map_or_else(String::new, |v| format!("{v:.10}"));
        out.push_str(&format!("{:.10},{v},{}\n", p.s_b, status_name(p.status)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_classes_of_eight_preparations() {
        let ms = build_tripartite_porac();
        assert_eq!(ms.party.x, 8);
        assert_eq!(ms.party.prep_equivalences.len(), 7);
        ms.party.validate().into_result().unwrap();
        assert_eq!(ms.metric.terms.len(), 24);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(binary_entropy(1.2).is_err());
    }
}
