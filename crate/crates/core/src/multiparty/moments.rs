use std::collections::HashMap;

use ctxwb_solver::{solve, ConicProgram, LinExpr, Relation, Sense, SolverOptions, Status};
use serde::{Deserialize, Serialize};

use super::{MultipartyScenario, Party};
use crate::error::{Error, Result};
use crate::scenario::SuccessMetric;

/// Product of projectors, Bob's factors first (they commute with
/// Charlie's). Each factor is a flattened effect index `y * K + k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BcWord {
    pub bob: Vec<usize>,
    pub charlie: Vec<usize>,
}

impl BcWord {
    fn identity() -> Self {
        BcWord { bob: Vec::new(), charlie: Vec::new() }
    }
}

/// Merge `P P = P`; `None` when two orthogonal projectors of one
/// measurement meet.
fn reduce(side: impl IntoIterator<Item = usize>, k: usize) -> Option<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    for e in side {
        match out.last() {
            Some(&l) if l == e => {}
            Some(&l) if l / k == e / k => return None,
            _ => out.push(e),
        }
    }
    Some(out)
}

/// Canonical word for `tr(rho u+ v)`; real moment matrices let a word and
/// its adjoint share one variable.
fn entry_key(u: &BcWord, v: &BcWord, k: usize) -> Option<BcWord> {
    let bob = reduce(u.bob.iter().rev().chain(&v.bob).copied(), k)?;
    let charlie = reduce(u.charlie.iter().rev().chain(&v.charlie).copied(), k)?;
    let w = BcWord { bob, charlie };
    let adj = BcWord { bob: w.bob.iter().rev().copied().collect(), charlie: w.charlie.iter().rev().copied().collect() };
    Some(w.min(adj))
}

/// Level `1 + BC` relaxation: one real moment matrix per preparation over
/// `I`, Bob's projectors, Charlie's projectors and every Bob-Charlie
/// product. The last outcome of each measurement is eliminated.
#[derive(Debug, Clone)]
pub struct BipartiteMomentProblem {
    pub words: Vec<BcWord>,
    pub program: ConicProgram,
    reps: Vec<HashMap<BcWord, LinExpr>>,
    k: usize,
    s_b: LinExpr,
    s_c: LinExpr,
}

impl BipartiteMomentProblem {
    pub fn build(ms: &MultipartyScenario) -> Result<Self> {
        let s = &ms.party;
        let k = s.k;
        let effects: Vec<usize> = (0..s.y).flat_map(|y| (0..k - 1).map(move |kk| y * k + kk)).collect();
        let mut words = vec![BcWord::identity()];
        words.extend(effects.iter().map(|&e| BcWord { bob: vec![e], charlie: vec![] }));
        words.extend(effects.iter().map(|&e| BcWord { bob: vec![], charlie: vec![e] }));
        for &b in &effects {
            for &c in &effects {
                words.push(BcWord { bob: vec![b], charlie: vec![c] });
            }
        }
        let n = words.len();
        let mut program = ConicProgram::new(Sense::Max);
        let mut reps: Vec<HashMap<BcWord, LinExpr>> = Vec::with_capacity(s.x);
        for _ in 0..s.x {
            let blk = program.add_symmetric(n, None);
            let mut rep: HashMap<BcWord, LinExpr> = HashMap::new();
            for i in 0..n {
                for j in i..n {
                    let entry = LinExpr::var(program.sym(blk, i, j));
                    match entry_key(&words[i], &words[j], k) {
                        None => program.add_constraint(entry, Relation::Eq, 0.0),
                        Some(key) => match rep.get(&key) {
                            Some(first) => {
                                let mut d = entry;
                                d.add_expr(first, -1.0);
                                program.add_constraint(d, Relation::Eq, 0.0);
                            }
                            None => {
                                rep.insert(key, entry);
                            }
                        },
                    }
                }
            }
            program.add_constraint(rep[&BcWord::identity()].clone(), Relation::Eq, 1.0);
            reps.push(rep);
        }
        let mut keys: Vec<&BcWord> = reps[0].keys().collect();
        keys.sort();
        for class in s.prep_f64() {
            for dist in &class[1..] {
                for key in &keys {
                    let mut e = LinExpr::new();
                    for (x, (a, b)) in dist.iter().zip(&class[0]).enumerate() {
                        if a != b {
                            e.add_expr(&reps[x][*key], a - b);
                        }
                    }
                    let e = e.normalized();
                    if !e.is_constant() {
                        program.add_constraint(e, Relation::Eq, 0.0);
                    }
                }
            }
        }
        program.remove_dependent_equalities(1e-9);
        let mut p = BipartiteMomentProblem { words, program, reps, k, s_b: LinExpr::new(), s_c: LinExpr::new() };
        p.s_b = p.party_metric(Party::Bob, &ms.metric);
        p.s_c = p.party_metric(Party::Charlie, &ms.metric);
        Ok(p)
    }

    /// Outcome `kk` of setting `y` as a combination of eliminated-basis
    /// projectors (`None` standing for the identity).
    fn effect(&self, y: usize, kk: usize) -> Vec<(Option<usize>, f64)> {
        if kk + 1 < self.k {
            vec![(Some(y * self.k + kk), 1.0)]
        } else {
            let mut v = vec![(None, 1.0)];
            v.extend((0..self.k - 1).map(|j| (Some(y * self.k + j), -1.0)));
            v
        }
    }

    fn moment(&self, x: usize, bob: Option<usize>, charlie: Option<usize>) -> LinExpr {
        let key = BcWord { bob: bob.into_iter().collect(), charlie: charlie.into_iter().collect() };
        self.reps[x][&key].clone()
    }

    /// `p_BC(kb, kc | x, yb, yc)`.
    pub fn joint(&self, x: usize, yb: usize, yc: usize, kb: usize, kc: usize) -> LinExpr {
        let mut e = LinExpr::new();
        for (b, cb) in self.effect(yb, kb) {
            for (c, cc) in self.effect(yc, kc) {
                e.add_expr(&self.moment(x, b, c), cb * cc);
            }
        }
        e.normalized()
    }

    /// Marginal of one party; independent of the other's setting by
    /// construction.
    pub fn marginal(&self, party: Party, x: usize, y: usize, kk: usize) -> LinExpr {
        let mut e = LinExpr::new();
        for (o, c) in self.effect(y, kk) {
            let m = match party {
                Party::Bob => self.moment(x, o, None),
                Party::Charlie => self.moment(x, None, o),
            };
            e.add_expr(&m, c);
        }
        e.normalized()
    }

    pub fn party_metric(&self, party: Party, metric: &SuccessMetric) -> LinExpr {
        let mut e = LinExpr::new();
        for t in &metric.terms {
            e.add_expr(&self.marginal(party, t.x, t.y, t.k), t.c);
        }
        e.normalized()
    }

    fn solve(&self, objective: LinExpr, floor_b: Option<f64>) -> Result<(Status, f64)> {
        let mut p = self.program.clone();
        p.objective = objective;
        if let Some(s) = floor_b {
            p.add_constraint(self.s_b.clone(), Relation::Ge, s);
        }
        let sol = solve(&p, &SolverOptions::default())?;
        Ok((sol.status, sol.objective))
    }

    fn optimal(&self, objective: LinExpr, what: &str) -> Result<f64> {
        match self.solve(objective, None)? {
            (Status::Optimal, v) => Ok(v),
            (st, _) => Err(Error::Numerical(format!("{what}: solver returned {st:?}"))),
        }
    }

    /// Upper bound on `S_B + S_C`.
    pub fn max_sum(&self) -> Result<f64> {
        let mut e = self.s_b.clone();
        e.add_expr(&self.s_c, 1.0);
        self.optimal(e, "S_B + S_C")
    }

    /// Upper bound on one party's success alone.
    pub fn single_party_max(&self, party: Party) -> Result<f64> {
        let e = match party {
            Party::Bob => self.s_b.clone(),
            Party::Charlie => self.s_c.clone(),
        };
        self.optimal(e, "single-party success")
    }

    /// Largest `S_C` compatible with `S_B >= s_b`.
    pub fn monogamy_point(&self, s_b: f64) -> Result<MonogamyPoint> {
        if !(0.0..=1.0).contains(&s_b) {
            return Err(Error::OutOfRange(format!("s_B = {s_b}")));
        }
        let (status, v) = self.solve(self.s_c.clone(), Some(s_b))?;
        let value = (status == Status::Optimal).then_some(v);
        Ok(MonogamyPoint { s_b, value, status })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonogamyPoint {
    pub s_b: f64,
    pub value: Option<f64>,
    pub status: Status,
}
