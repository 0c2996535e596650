//! Contextuality scenarios, behaviours and success metrics.
//!
//! A scenario fixes `X` preparations, `Y` measurements with `K` outcomes
//! each, and two lists of equivalence classes. A preparation class is a list
//! of distributions over `[X]` whose mixtures must coincide; a measurement
//! class is a list of distributions over outcome/setting pairs, flattened as
//! `y * K + k`, whose mixed effects must coincide.

mod builders;
mod exact;
mod io;
mod random;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builders::*;
pub use random::{random_metric, random_scenario};
pub use exact::{parse_ratio, ratio, ratio_from_f64, ratio_to_f64, ratio_to_string};
pub use io::{
    behaviour_from_csv, behaviour_to_csv, load_behaviour, load_metric, load_scenario,
    save_behaviour, save_metric, save_scenario, scenario_from_json, scenario_to_json,
};

/// One probability distribution, stored exactly.
pub type Distribution = Vec<BigRational>;
/// Distributions whose mixtures are declared equivalent.
pub type Class = Vec<Distribution>;

const DIST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub x: usize,
    pub y: usize,
    pub k: usize,
    pub prep_equivalences: Vec<Class>,
    pub meas_equivalences: Vec<Class>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Prep,
    Meas,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Prep => "preparation",
            Side::Meas => "measurement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub side: Option<Side>,
    pub class: Option<usize>,
    pub distribution: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(side) = self.side {
            write!(f, "{side} class {}", self.class.unwrap_or(0))?;
            if let Some(j) = self.distribution {
                write!(f, ", distribution {j}")?;
            }
            write!(f, ": ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_pass() {
            Ok(())
        } else {
            let msg: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
            Err(Error::InvalidScenario(msg.join("; ")))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return f.write_str("pass");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl Scenario {
    /// Scenario without any equivalences.
    pub fn new(x: usize, y: usize, k: usize) -> Self {
        Scenario { x, y, k, prep_equivalences: Vec::new(), meas_equivalences: Vec::new() }
    }

    pub fn with_prep_class(mut self, class: Class) -> Self {
        self.prep_equivalences.push(class);
        self
    }

    pub fn with_meas_class(mut self, class: Class) -> Self {
        self.meas_equivalences.push(class);
        self
    }

    /// Flattened measurement-effect index of outcome `k` of setting `y`.
    pub fn effect_index(&self, y: usize, k: usize) -> usize {
        y * self.k + k
    }

    /// Length of the behaviour vector `p(k|x,y)`.
    pub fn behaviour_len(&self) -> usize {
        self.x * self.y * self.k
    }

    pub fn prep_f64(&self) -> Vec<Vec<Vec<f64>>> {
        to_f64(&self.prep_equivalences)
    }

    pub fn meas_f64(&self) -> Vec<Vec<Vec<f64>>> {
        to_f64(&self.meas_equivalences)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

fn to_f64(classes: &[Class]) -> Vec<Vec<Vec<f64>>> {
    classes
        .iter()
        .map(|c| c.iter().map(|d| d.iter().map(ratio_to_f64).collect()).collect())
        .collect()
}

/// Check the well-formedness invariants of a scenario.
pub fn validate(s: &Scenario) -> ValidationReport {
    let mut issues = Vec::new();
    let global = |m: String| Issue { side: None, class: None, distribution: None, message: m };
    if s.x < 1 {
        issues.push(global("X must be at least 1".into()));
    }
    if s.y < 1 {
        issues.push(global("Y must be at least 1".into()));
    }
    if s.k < 2 {
        issues.push(global("K must be at least 2".into()));
    }
    let tol = ratio_from_f64(DIST_TOL);
    let one = BigRational::one();
    for (side, classes, len) in [
        (Side::Prep, &s.prep_equivalences, s.x),
        (Side::Meas, &s.meas_equivalences, s.y * s.k),
    ] {
        for (v, class) in classes.iter().enumerate() {
            let at = |j: Option<usize>, m: String| Issue {
                side: Some(side),
                class: Some(v),
                distribution: j,
                message: m,
            };
            if class.len() < 2 {
                issues.push(at(None, "class needs ≥ 2 distributions".into()));
            }
            for (j, d) in class.iter().enumerate() {
                if d.len() != len {
                    issues.push(at(Some(j), format!("has {} entries, expected {len}", d.len())));
                    continue;
                }
                if let Some(i) = d.iter().position(|p| p.is_negative()) {
                    issues.push(at(Some(j), format!("entry {i} is negative")));
                }
                let sum: BigRational = d.iter().sum();
                if (sum.clone() - &one).abs() > tol {
                    issues.push(at(
                        Some(j),
                        format!("sums to {} instead of 1", ratio_to_f64(&sum)),
                    ));
                }
            }
            for a in 0..class.len() {
                for b in a + 1..class.len() {
                    let (da, db) = (&class[a], &class[b]);
                    if da.len() != db.len() {
                        continue;
                    }
                    let dist = da
                        .iter()
                        .zip(db)
                        .map(|(p, q)| exact::abs_diff(p, q))
                        .max()
                        .unwrap_or_else(BigRational::zero);
                    if dist <= tol {
                        issues.push(at(Some(b), format!("duplicates distribution {a}")));
                    }
                }
            }
        }
    }
    ValidationReport { issues }
}

/// Probability table `p(k|x,y)`, stored as `p[(x * Y + y) * K + k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Behaviour {
    pub x: usize,
    pub y: usize,
    pub k: usize,
    pub p: Vec<f64>,
}

impl Behaviour {
    pub fn zeros(x: usize, y: usize, k: usize) -> Self {
        Behaviour { x, y, k, p: vec![0.0; x * y * k] }
    }

    /// `p(k|x,y) = 1/K` everywhere.
    pub fn uniform(s: &Scenario) -> Self {
        Behaviour { x: s.x, y: s.y, k: s.k, p: vec![1.0 / s.k as f64; s.behaviour_len()] }
    }

    pub fn index(&self, x: usize, y: usize, k: usize) -> usize {
        (x * self.y + y) * self.k + k
    }

    pub fn get(&self, x: usize, y: usize, k: usize) -> f64 {
        self.p[self.index(x, y, k)]
    }

    pub fn set(&mut self, x: usize, y: usize, k: usize, v: f64) {
        let i = self.index(x, y, k);
        self.p[i] = v;
    }

    pub fn matches(&self, s: &Scenario) -> bool {
        (self.x, self.y, self.k) == (s.x, s.y, s.k)
    }

    /// Entries in `[0,1]` and normalised per `(x,y)` within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.p.len() != self.x * self.y * self.k {
            return Err(Error::Shape(format!(
                "behaviour has {} entries, expected {}",
                self.p.len(),
                self.x * self.y * self.k
            )));
        }
        for x in 0..self.x {
            for y in 0..self.y {
                let mut sum = 0.0;
                for k in 0..self.k {
                    let v = self.get(x, y, k);
                    if !(-tol..=1.0 + tol).contains(&v) {
                        return Err(Error::OutOfRange(format!("p({k}|{x},{y}) = {v}")));
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > tol {
                    return Err(Error::OutOfRange(format!("sum_k p(k|{x},{y}) = {sum}")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of the operational-equivalence equalities of `s`.
    pub fn equivalence_violation(&self, s: &Scenario) -> f64 {
        let mut worst: f64 = 0.0;
        for class in s.prep_f64() {
            for y in 0..self.y {
                for k in 0..self.k {
                    let vals: Vec<f64> = class
                        .iter()
                        .map(|a| (0..self.x).map(|x| a[x] * self.get(x, y, k)).sum())
                        .collect();
                    worst = worst.max(spread(&vals));
                }
            }
        }
        for class in s.meas_f64() {
            for x in 0..self.x {
                let vals: Vec<f64> = class
                    .iter()
                    .map(|b| {
                        (0..self.y)
                            .flat_map(|y| (0..self.k).map(move |k| (y, k)))
                            .map(|(y, k)| b[y * self.k + k] * self.get(x, y, k))
                            .sum()
                    })
                    .collect();
                worst = worst.max(spread(&vals));
            }
        }
        worst
    }
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if v.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub x: usize,
    pub y: usize,
    pub k: usize,
    pub c: f64,
}

/// Linear functional `S(p) = sum c_{x,y,k} p(k|x,y)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuccessMetric {
    pub terms: Vec<Term>,
}

impl SuccessMetric {
    /// Build from terms, rejecting repeated `(x,y,k)` triples.
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for t in &terms {
            if !seen.insert((t.x, t.y, t.k)) {
                return Err(Error::Shape(format!("duplicate term ({}, {}, {})", t.x, t.y, t.k)));
            }
        }
        Ok(SuccessMetric { terms })
    }

    pub fn zero() -> Self {
        SuccessMetric::default()
    }

    /// Build from `(x, y, k, c)` tuples.
    pub fn from_tuples(t: &[(usize, usize, usize, f64)]) -> Result<Self> {
        Self::new(t.iter().map(|&(x, y, k, c)| Term { x, y, k, c }).collect())
    }

    pub fn check_shape(&self, x: usize, y: usize, k: usize) -> Result<()> {
        for t in &self.terms {
            if t.x >= x || t.y >= y || t.k >= k {
                return Err(Error::Shape(format!(
                    "term ({}, {}, {}) outside {x}x{y}x{k}",
                    t.x, t.y, t.k
                )));
            }
        }
        Ok(())
    }

    pub fn check_scenario(&self, s: &Scenario) -> Result<()> {
        self.check_shape(s.x, s.y, s.k)
    }

    pub fn scaled(&self, f: f64) -> Self {
        SuccessMetric { terms: self.terms.iter().map(|t| Term { c: t.c * f, ..*t }).collect() }
    }

    /// Sum of two metrics; coinciding triples are merged.
    pub fn plus(&self, other: &SuccessMetric) -> Self {
        let mut acc: std::collections::BTreeMap<(usize, usize, usize), f64> = Default::default();
        for t in self.terms.iter().chain(&other.terms) {
            *acc.entry((t.x, t.y, t.k)).or_insert(0.0) += t.c;
        }
        SuccessMetric {
            terms: acc.into_iter().map(|((x, y, k), c)| Term { x, y, k, c }).collect(),
        }
    }
}

impl<'de> Deserialize<'de> for SuccessMetric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct RawTerm {
            x: usize,
            y: usize,
            k: usize,
            c: exact::Exact,
        }
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<RawTerm>,
        }
        let raw = Raw::deserialize(d)?;
        SuccessMetric::new(
            raw.terms
                .into_iter()
                .map(|t| Term { x: t.x, y: t.y, k: t.k, c: ratio_to_f64(&t.c.0) })
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// `S(p) = c . p`.
pub fn evaluate_metric(metric: &SuccessMetric, behaviour: &Behaviour) -> Result<f64> {
    metric.check_shape(behaviour.x, behaviour.y, behaviour.k)?;
    if behaviour.p.len() != behaviour.x * behaviour.y * behaviour.k {
        return Err(Error::Shape("behaviour length does not match its shape".into()));
    }
    Ok(metric.terms.iter().map(|t| t.c * behaviour.get(t.x, t.y, t.k)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_names_class_and_distribution() {
        let mut s = build_632();
        s.prep_equivalences[0][0][0] = ratio(2, 5);
        let r = s.validate();
        assert!(!r.is_pass());
        let i = &r.issues[0];
        assert_eq!((i.side, i.class, i.distribution), (Some(Side::Prep), Some(0), Some(0)));
        assert!(i.message.contains("sums to 0.9"));
    }

    #[test]
    fn degenerate_class_is_rejected() {
        let mut s = build_632();
        s.prep_equivalences[0].truncate(1);
        let r = s.validate();
        assert!(r.issues.iter().any(|i| i.message.contains("≥ 2 distributions")));
    }

    #[test]
    fn duplicate_distributions_are_rejected() {
        let mut s = build_632();
        let d = s.meas_equivalences[0][0].clone();
        s.meas_equivalences[0][1] = d;
        assert!(!s.validate().is_pass());
    }

    #[test]
    fn metric_rejects_duplicates() {
        assert!(SuccessMetric::from_tuples(&[(0, 0, 0, 1.0), (0, 0, 0, 2.0)]).is_err());
    }

    #[test]
    fn zero_metric_and_uniform_behaviour() {
        let s = build_porac(2).unwrap();
        let b = Behaviour::uniform(&s);
        assert_eq!(evaluate_metric(&SuccessMetric::zero(), &b).unwrap(), 0.0);
        let v = evaluate_metric(&porac_metric(2), &b).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(b.equivalence_violation(&s) < 1e-15);
    }

    #[test]
    fn metric_out_of_range_is_an_error() {
        let m = SuccessMetric::from_tuples(&[(9, 0, 0, 1.0)]).unwrap();
        let s = build_632();
        assert!(evaluate_metric(&m, &Behaviour::uniform(&s)).is_err());
    }
}
