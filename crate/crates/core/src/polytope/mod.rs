//! Linear programs over the contextual polytope `C` and the noncontextual
//! polytope `NC`.

mod vertices;

use ctxwb_solver::{solve, ConicProgram, LinExpr, Relation, Sense, SolverOptions, Status, Var};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{evaluate_metric, Behaviour, Scenario, SuccessMetric, Term};

pub use vertices::{response_vertices, ResponseScheme, MAX_RESPONSE_DIM};

/// Outcome of an LP bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behaviour: Option<Behaviour>,
    /// Dual multipliers, one per LP constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<NoncontextualModel>,
}

impl BoundResult {
    fn failed(status: Status) -> Self {
        BoundResult { value: f64::NAN, status, behaviour: None, certificate: None, model: None }
    }
}

/// Finite ontological model: response-scheme vertices and epistemic states
/// `mu[x][lambda]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoncontextualModel {
    pub ontic_states: Vec<ResponseScheme>,
    pub epistemic: Vec<Vec<f64>>,
}

impl NoncontextualModel {
    /// `p(k|x,y) = sum_lambda mu(lambda|x) xi_lambda(k|y)`.
    pub fn behaviour(&self, s: &Scenario) -> Behaviour {
        let mut b = Behaviour::zeros(s.x, s.y, s.k);
        for x in 0..s.x {
            for (l, xi) in self.ontic_states.iter().enumerate() {
                let m = self.epistemic[x][l];
                if m == 0.0 {
                    continue;
                }
                for y in 0..s.y {
                    for k in 0..s.k {
                        let i = b.index(x, y, k);
                        b.p[i] += m * xi.get(s.k, y, k);
                    }
                }
            }
        }
        b
    }
}

fn lp_options() -> SolverOptions {
    SolverOptions::default()
}

/// LP over `C`: behaviour variables `p(k|x,y) >= 0` plus the hypothetical
/// values `q_{v,y,k}` and `e_{w,x}` tied to every decomposition.
pub struct ContextualLp {
    pub program: ConicProgram,
    p_block: usize,
    shape: (usize, usize, usize),
}

impl ContextualLp {
    pub fn new(s: &Scenario) -> Self {
        let mut prog = ConicProgram::new(Sense::Max);
        let p_block = prog.add_nonneg(s.behaviour_len(), Some("p"));
        let pv = |x: usize, y: usize, k: usize| Var::scalar(p_block, (x * s.y + y) * s.k + k);
        for x in 0..s.x {
            for y in 0..s.y {
                let mut e = LinExpr::new();
                for k in 0..s.k {
                    e.add_term(pv(x, y, k), 1.0);
                }
                prog.add_labeled(e, Relation::Eq, 1.0, format!("norm x={x} y={y}"));
            }
        }
        let prep = s.prep_f64();
        for (v, class) in prep.iter().enumerate() {
            let q = prog.add_nonneg(s.y * s.k, Some(&format!("q{v}")));
            for y in 0..s.y {
                for k in 0..s.k {
                    for alpha in class {
                        let mut e = LinExpr::new();
                        for (x, &a) in alpha.iter().enumerate() {
                            e.add_term(pv(x, y, k), a);
                        }
                        e.add_term(Var::scalar(q, y * s.k + k), -1.0);
                        prog.add_constraint(e, Relation::Eq, 0.0);
                    }
                }
            }
        }
        let meas = s.meas_f64();
        for (w, class) in meas.iter().enumerate() {
            let ev = prog.add_nonneg(s.x, Some(&format!("e{w}")));
            for x in 0..s.x {
                for beta in class {
                    let mut e = LinExpr::new();
                    for y in 0..s.y {
                        for k in 0..s.k {
                            e.add_term(pv(x, y, k), beta[y * s.k + k]);
                        }
                    }
                    e.add_term(Var::scalar(ev, x), -1.0);
                    prog.add_constraint(e, Relation::Eq, 0.0);
                }
            }
        }
        ContextualLp { program: prog, p_block, shape: (s.x, s.y, s.k) }
    }

    pub fn p_var(&self, x: usize, y: usize, k: usize) -> Var {
        let (_, ys, ks) = self.shape;
        Var::scalar(self.p_block, (x * ys + y) * ks + k)
    }

    pub fn objective(&self, metric: &SuccessMetric) -> LinExpr {
        let mut e = LinExpr::new();
        for t in &metric.terms {
            e.add_term(self.p_var(t.x, t.y, t.k), t.c);
        }
        e
    }
}

/// `S_C = max_{p in C} c . p`.
pub fn max_contextual(s: &Scenario, metric: &SuccessMetric) -> Result<BoundResult> {
    s.validate().into_result()?;
    metric.check_scenario(s)?;
    let mut lp = ContextualLp::new(s);
    lp.program.objective = lp.objective(metric);
    let sol = solve(&lp.program, &lp_options())?;
    if !sol.is_optimal() {
        return Ok(BoundResult::failed(sol.status));
    }
    let mut b = Behaviour::zeros(s.x, s.y, s.k);
    b.p = sol.scalars(lp.p_block).iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(BoundResult {
        value: sol.objective,
        status: sol.status,
        behaviour: Some(b),
        certificate: Some(sol.duals.clone()),
        model: None,
    })
}

/// LP over epistemic states `mu(lambda|x)` with preparation equivalences
/// imposed for every ontic state.
struct NoncontextualLp {
    program: ConicProgram,
    mu: usize,
    lambdas: Vec<ResponseScheme>,
    x: usize,
}

impl NoncontextualLp {
    fn new(s: &Scenario, with_normalisation: bool) -> Result<Self> {
        let lambdas = response_vertices(s)?;
        let l = lambdas.len();
        let mut prog = ConicProgram::new(Sense::Max);
        let mu = prog.add_nonneg(s.x * l, Some("mu"));
        if with_normalisation {
            for x in 0..s.x {
                let mut e = LinExpr::new();
                for j in 0..l {
                    e.add_term(Var::scalar(mu, x * l + j), 1.0);
                }
                prog.add_labeled(e, Relation::Eq, 1.0, format!("norm x={x}"));
            }
        }
        for class in s.prep_f64() {
            for j in 1..class.len() {
                for lam in 0..l {
                    let mut e = LinExpr::new();
                    for x in 0..s.x {
                        e.add_term(Var::scalar(mu, x * l + lam), class[j][x] - class[0][x]);
                    }
                    let e = e.normalized();
                    if !e.terms.is_empty() {
                        prog.add_constraint(e, Relation::Eq, 0.0);
                    }
                }
            }
        }
        Ok(NoncontextualLp { program: prog, mu, lambdas, x: s.x })
    }

    /// `p(k|x,y)` as a linear expression in `mu`.
    fn p_expr(&self, s: &Scenario, x: usize, y: usize, k: usize) -> LinExpr {
        let l = self.lambdas.len();
        let mut e = LinExpr::new();
        for (j, xi) in self.lambdas.iter().enumerate() {
            e.add_term(Var::scalar(self.mu, x * l + j), xi.get(s.k, y, k));
        }
        e
    }

    fn model(&self, sol: &ctxwb_solver::Solution) -> NoncontextualModel {
        let l = self.lambdas.len();
        let raw = sol.scalars(self.mu);
        let epistemic = (0..self.x)
            .map(|x| {
                let row: Vec<f64> = raw[x * l..(x + 1) * l].iter().map(|v| v.max(0.0)).collect();
                let sum: f64 = row.iter().sum();
                row.iter().map(|v| v / sum).collect()
            })
            .collect();
        NoncontextualModel { ontic_states: self.lambdas.clone(), epistemic }
    }
}

/// `S_NC = max_{p in NC} c . p`.
pub fn max_noncontextual(s: &Scenario, metric: &SuccessMetric) -> Result<BoundResult> {
    s.validate().into_result()?;
    metric.check_scenario(s)?;
    let mut lp = NoncontextualLp::new(s, true)?;
    let mut obj = LinExpr::new();
    for t in &metric.terms {
        obj.add_expr(&lp.p_expr(s, t.x, t.y, t.k), t.c);
    }
    lp.program.objective = obj.normalized();
    let sol = solve(&lp.program, &lp_options())?;
    if !sol.is_optimal() {
        return Ok(BoundResult::failed(sol.status));
    }
    let model = lp.model(&sol);
    let b = model.behaviour(s);
    Ok(BoundResult {
        value: sol.objective,
        status: sol.status,
        behaviour: Some(b),
        certificate: Some(sol.duals.clone()),
        model: Some(model),
    })
}

/// Result of testing `p in NC`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Membership {
    /// Explicit model reproducing the behaviour.
    Feasible { model: NoncontextualModel, residual: f64 },
    /// Separating metric: `value = S(p)` exceeds `bound = S_NC` of the same metric.
    Infeasible { metric: SuccessMetric, value: f64, bound: f64 },
    NumericalTrouble { detail: String },
}

impl Membership {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Membership::Feasible { .. })
    }
}

/// Decide whether `b` admits a noncontextual model for `s`.
pub fn membership_nc(b: &Behaviour, s: &Scenario) -> Result<Membership> {
    s.validate().into_result()?;
    if !b.matches(s) {
        return Err(Error::Shape("behaviour does not match the scenario".into()));
    }
    b.check(1e-9)?;
    let mut lp = NoncontextualLp::new(s, false)?;
    let mut rows = Vec::new();
    for x in 0..s.x {
        for y in 0..s.y {
            for k in 0..s.k {
                rows.push(lp.program.constraints.len());
                let e = lp.p_expr(s, x, y, k);
                lp.program.add_constraint(e, Relation::Eq, b.get(x, y, k));
            }
        }
    }
    let sol = solve(&lp.program, &lp_options())?;
    match sol.status {
        Status::Optimal => {
            let model = lp.model(&sol);
            let back = model.behaviour(s);
            let residual = back.p.iter().zip(&b.p).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
            Ok(Membership::Feasible { model, residual })
        }
        Status::Infeasible => {
            let cert = sol.certificate.as_ref().expect("infeasible solves carry a ray");
            // The ray restricted to the behaviour rows is a separating
            // direction up to sign; confirm it against an explicit S_NC.
            let raw: Vec<f64> = rows.iter().map(|&r| cert.multipliers[r]).collect();
            let scale = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                return Ok(Membership::NumericalTrouble { detail: "empty certificate".into() });
            }
            for sign in [-1.0, 1.0] {
                let terms: Vec<Term> = (0..s.x)
                    .flat_map(|x| (0..s.y).flat_map(move |y| (0..s.k).map(move |k| (x, y, k))))
                    .zip(&raw)
                    .filter(|(_, &c)| c.abs() > 1e-12 * scale)
                    .map(|((x, y, k), &c)| Term { x, y, k, c: sign * c / scale })
                    .collect();
                let metric = SuccessMetric { terms };
                let value = evaluate_metric(&metric, b)?;
                let nc = max_noncontextual(s, &metric)?;
                if nc.status == Status::Optimal && value > nc.value + 1e-7 {
                    return Ok(Membership::Infeasible { metric, value, bound: nc.value });
                }
            }
            Ok(Membership::NumericalTrouble {
                detail: "infeasibility ray did not yield a separating metric".into(),
            })
        }
        other => Ok(Membership::NumericalTrouble { detail: format!("LP status {other:?}") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_632, build_porac, porac_metric, table1_metric};

    #[test]
    fn contextual_bounds_632() {
        let s = build_632();
        let v = max_contextual(&s, &table1_metric(1).unwrap()).unwrap();
        assert!((v.value - 3.0).abs() < 1e-7, "{}", v.value);
        let b = v.behaviour.unwrap();
        assert!(b.equivalence_violation(&s) < 1e-7);
        let v = max_contextual(&s, &table1_metric(3).unwrap()).unwrap();
        assert!((v.value - 4.5).abs() < 1e-7);
    }

    #[test]
    fn zero_metric() {
        let s = build_632();
        let v = max_contextual(&s, &SuccessMetric::zero()).unwrap();
        assert_eq!(v.status, Status::Optimal);
        assert!(v.value.abs() < 1e-9);
    }

    #[test]
    fn noncontextual_porac2() {
        let s = build_porac(2).unwrap();
        let v = max_noncontextual(&s, &porac_metric(2)).unwrap();
        assert!((v.value - 0.75).abs() < 1e-7);
        let m = v.model.unwrap();
        let b = m.behaviour(&s);
        assert!((evaluate_metric(&porac_metric(2), &b).unwrap() - v.value).abs() < 1e-8);
    }

    #[test]
    fn uniform_behaviour_is_noncontextual() {
        let s = build_632();
        let m = membership_nc(&Behaviour::uniform(&s), &s).unwrap();
        assert!(m.is_feasible());
    }

    #[test]
    fn contextual_optimum_is_separated() {
        let s = build_632();
        let metric = table1_metric(1).unwrap();
        let b = max_contextual(&s, &metric).unwrap().behaviour.unwrap();
        match membership_nc(&b, &s).unwrap() {
            Membership::Infeasible { value, bound, .. } => assert!(value > bound + 1e-7),
            other => panic!("expected separation, got {other:?}"),
        }
    }
}
