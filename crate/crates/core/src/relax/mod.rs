//! Moment-matrix relaxations of the quantum set: unitary (`Q1`),
//! projective (levels 1 and 2) and pure-state.

mod lemma;
mod words;

use std::collections::{HashMap, HashSet};

use ctxwb_solver::{solve, ConicProgram, LinExpr, Relation, Residuals, Sense, SolverOptions, Status, Var};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{evaluate_metric, Behaviour, Scenario, SuccessMetric, Term};

pub use lemma::{effect_from_unitary, unitary_from_effect};
pub use words::{projective_words, unitary_words, Atom, OperatorWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Unitary1,
    Projective(usize),
    PureState1,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Unitary1 => write!(f, "unitary-1"),
            Variant::Projective(l) => write!(f, "projective-{l}"),
            Variant::PureState1 => write!(f, "pure-state-1"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" | "unitary-1" | "q1" => Ok(Variant::Unitary1),
            "projective" | "projective-1" => Ok(Variant::Projective(1)),
            "projective-2" => Ok(Variant::Projective(2)),
            "pure" | "pure-state" | "pure-state-1" => Ok(Variant::PureState1),
            _ => Err(Error::parse("variant", format!("unknown relaxation `{s}`"))),
        }
    }
}

/// Which rows carry the adjoint relations `G(j,U) = G(U+,j)` and
/// `G(U,j) = G(j,U+)` of the unitary relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjointRule {
    /// Every index `j`. With `j = U` this gives `G(U+, U) = 1`, so each
    /// unitary acts as a reflection on the state and the effects behave as
    /// projectors.
    #[default]
    EveryIndex,
    /// Only `j = I`: the relations that hold for arbitrary unitaries, giving
    /// a valid bound for general POVMs.
    IdentityOnly,
}

/// Construction choices shared by every variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub adjoint: AdjointRule,
    /// Complex Hermitian moment matrices instead of real symmetric ones.
    /// Every constraint has real coefficients and the objective reads real
    /// parts, so `(G + conj G) / 2` is feasible whenever `G` is and the
    /// optimum is the same; the real form is four times smaller.
    pub complex: bool,
    /// Also index the unitaries of the last outcome, tied to the others by
    /// `sum_k (U_k + U_k+) = 2(2 - K) I`.
    pub last_outcome: bool,
}

impl RelaxOptions {
    /// Bound on the full POVM quantum set: adjoint relations on the
    /// identity row only, plus the last-outcome unitaries.
    pub fn sound() -> Self {
        RelaxOptions { adjoint: AdjointRule::IdentityOnly, complex: false, last_outcome: true }
    }
}

/// A built relaxation: moment blocks `Gamma_x` in `program`, plus the
/// linear map from block entries to `p(k|x,y)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentProblem {
    pub variant: Variant,
    pub words: Vec<OperatorWord>,
    pub shape: (usize, usize, usize),
    pub blocks: Vec<usize>,
    pub program: ConicProgram,
    /// Indexed like [`Behaviour::p`].
    pub extraction: Vec<LinExpr>,
}

impl MomentProblem {
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("moment problem serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("moment problem", e))
    }

    fn objective(&self, metric: &SuccessMetric) -> LinExpr {
        let (_, y, k) = self.shape;
        let mut e = LinExpr::new();
        for t in &metric.terms {
            e.add_expr(&self.extraction[(t.x * y + t.y) * k + t.k], t.c);
        }
        e.normalized()
    }

    fn behaviour(&self, sol: &ctxwb_solver::Solution) -> Behaviour {
        let (x, y, k) = self.shape;
        let mut b = Behaviour::zeros(x, y, k);
        b.p = self.extraction.iter().map(|e| sol.eval(e)).collect();
        b
    }
}

#[derive(Clone, Default)]
struct CExpr {
    re: LinExpr,
    im: LinExpr,
}

impl CExpr {
    fn entry(p: &ConicProgram, block: usize, i: usize, j: usize) -> Self {
        match p.blocks[block].kind {
            ctxwb_solver::BlockKind::Hermitian { .. } => {
                CExpr { re: p.herm_re(block, i, j), im: p.herm_im(block, i, j) }
            }
            _ => CExpr { re: LinExpr::var(p.sym(block, i, j)), im: LinExpr::new() },
        }
    }

    fn real(c: f64) -> Self {
        CExpr { re: LinExpr::constant(c), im: LinExpr::new() }
    }

    fn add(&mut self, o: &CExpr, s: f64) -> &mut Self {
        self.re.add_expr(&o.re, s);
        self.im.add_expr(&o.im, s);
        self
    }

    fn conj(&self) -> Self {
        CExpr { re: self.re.clone(), im: self.im.scaled(-1.0) }
    }

    fn minus(&self, o: &CExpr) -> Self {
        let mut d = self.clone();
        d.add(o, -1.0);
        d
    }
}

/// Collects equalities, dropping exact repeats and rows with no variables.
struct Sink {
    program: ConicProgram,
    seen: HashSet<Vec<(Var, i64)>>,
}

impl Sink {
    fn new() -> Self {
        Sink { program: ConicProgram::new(Sense::Max), seen: HashSet::new() }
    }

    fn zero(&mut self, e: LinExpr) {
        let mut e = e.normalized();
        e.terms.retain(|(_, c)| c.abs() > 1e-14);
        let Some(&(_, lead)) = e.terms.first() else {
            assert!(e.constant.abs() < 1e-9, "inconsistent constant constraint");
            return;
        };
        let mut key: Vec<(Var, i64)> = e.terms.iter().map(|(v, c)| (*v, (c / lead * 1e9).round() as i64)).collect();
        key.push((Var::scalar(usize::MAX, 0), (e.constant / lead * 1e9).round() as i64));
        if self.seen.insert(key) {
            let rhs = -e.constant;
            e.constant = 0.0;
            self.program.add_constraint(e, Relation::Eq, rhs);
        }
    }

    fn czero(&mut self, e: CExpr) {
        self.zero(e.re);
        self.zero(e.im);
    }

    fn ceq(&mut self, a: &CExpr, b: &CExpr) {
        self.czero(a.minus(b));
    }
}

fn add_blocks(sink: &mut Sink, x: usize, n: usize, complex: bool) -> Vec<usize> {
    (0..x)
        .map(|i| {
            let name = format!("G{i}");
            if complex {
                sink.program.add_hermitian(n, Some(&name))
            } else {
                sink.program.add_symmetric(n, Some(&name))
            }
        })
        .collect()
}

/// `sum_x alpha_j(x) Gamma_x` equal across `j`, entrywise.
fn prep_constraints(sink: &mut Sink, s: &Scenario, blocks: &[usize], n: usize) {
    for class in s.prep_f64() {
        for j in 1..class.len() {
            for r in 0..n {
                for c in r..n {
                    let mut e = CExpr::default();
                    for (x, &b) in blocks.iter().enumerate() {
                        let d = class[j][x] - class[0][x];
                        if d != 0.0 {
                            e.add(&CExpr::entry(&sink.program, b, r, c), d);
                        }
                    }
                    sink.czero(e);
                }
            }
        }
    }
}

/// Measurement classes: for each row/column index `o` and orientation,
/// `sum_{y,k} beta_j(k,y) T(o; y, k)` is equal across `j`, where `t(o, y, k)`
/// returns the term for `k <= K-2` and `last(o, y)` the one for `k = K-1`.
fn meas_constraints(
    sink: &mut Sink,
    s: &Scenario,
    blocks: &[usize],
    n: usize,
    t: &dyn Fn(&ConicProgram, usize, usize, usize, usize, bool) -> CExpr,
    last: &dyn Fn(&ConicProgram, usize, usize, usize, bool) -> CExpr,
) {
    for class in s.meas_f64() {
        for j in 1..class.len() {
            for &b in blocks {
                for o in 0..n {
                    for row in [true, false] {
                        let mut e = CExpr::default();
                        for y in 0..s.y {
                            for k in 0..s.k {
                                let d = class[j][y * s.k + k] - class[0][y * s.k + k];
                                if d == 0.0 {
                                    continue;
                                }
                                let term = if k + 1 == s.k {
                                    last(&sink.program, b, o, y, row)
                                } else {
                                    t(&sink.program, b, o, y, k, row)
                                };
                                e.add(&term, d);
                            }
                        }
                        sink.czero(e);
                    }
                }
            }
        }
    }
}

fn entry_oriented(p: &ConicProgram, b: usize, o: usize, c: usize, row: bool) -> CExpr {
    if row {
        CExpr::entry(p, b, o, c)
    } else {
        CExpr::entry(p, b, c, o)
    }
}

fn finish(variant: Variant, s: &Scenario, words: Vec<OperatorWord>, blocks: Vec<usize>, sink: Sink, extraction: Vec<LinExpr>) -> MomentProblem {
    let mut program = sink.program;
    // per-block rows combined along a preparation class repeat the class rows
    let dropped = program.remove_dependent_equalities(1e-9);
    log::debug!("{variant}: {} equalities kept, {dropped} dependent dropped", program.constraints.len());
    MomentProblem { variant, words, shape: (s.x, s.y, s.k), blocks, program, extraction }
}

/// Extraction with the last outcome eliminated.
fn extraction_with_last(s: &Scenario, f: impl Fn(usize, usize, usize) -> LinExpr) -> Vec<LinExpr> {
    let mut out = vec![LinExpr::new(); s.behaviour_len()];
    for x in 0..s.x {
        for y in 0..s.y {
            let mut last = LinExpr::constant(1.0);
            for k in 0..s.k - 1 {
                let e = f(x, y, k);
                last.add_expr(&e, -1.0);
                out[(x * s.y + y) * s.k + k] = e;
            }
            out[(x * s.y + y) * s.k + s.k - 1] = last.normalized();
        }
    }
    out
}

fn uidx(s: &Scenario, y: usize, k: usize, u: usize) -> usize {
    2 * (s.k - 1) * y + 2 * k + u + 1
}

fn build_unitary_core(s: &Scenario, opts: &RelaxOptions, states: bool) -> (Vec<OperatorWord>, Vec<usize>, Sink) {
    let mut words = unitary_words(s.y, s.k);
    let nu0 = words.len();
    if opts.last_outcome {
        for y in 0..s.y {
            words.push(OperatorWord::atom(Atom::U { y, k: s.k - 1 }));
            words.push(OperatorWord::atom(Atom::Udag { y, k: s.k - 1 }));
        }
    }
    let nu = words.len();
    if states {
        words.extend((0..s.x).map(|x| OperatorWord::atom(Atom::StateProj { x })));
    }
    let n = words.len();
    let mut sink = Sink::new();
    let blocks = add_blocks(&mut sink, s.x, n, opts.complex);
    for &b in &blocks {
        for i in 0..nu {
            let d = CExpr::entry(&sink.program, b, i, i);
            sink.ceq(&d, &CExpr::real(1.0));
        }
        let rows: Vec<usize> = match opts.adjoint {
            AdjointRule::EveryIndex => (0..nu).collect(),
            AdjointRule::IdentityOnly => vec![0],
        };
        for y in 0..s.y {
            for k in 0..s.k - 1 {
                let (u, ud) = (uidx(s, y, k, 0), uidx(s, y, k, 1));
                for &j in &rows {
                    let p = &sink.program;
                    let (a, bb) = (CExpr::entry(p, b, j, u), CExpr::entry(p, b, ud, j));
                    let (c, d) = (CExpr::entry(p, b, u, j), CExpr::entry(p, b, j, ud));
                    sink.ceq(&a, &bb);
                    sink.ceq(&c, &d);
                }
            }
        }
    }
    prep_constraints(&mut sink, s, &blocks, n);
    let t = |p: &ConicProgram, b: usize, o: usize, y: usize, k: usize, row: bool| {
        let mut e = entry_oriented(p, b, o, uidx(s, y, k, 0), row);
        e.add(&entry_oriented(p, b, o, uidx(s, y, k, 1), row), 1.0);
        e
    };
    let last = |p: &ConicProgram, b: usize, o: usize, y: usize, row: bool| {
        let mut e = CExpr::default();
        e.add(&entry_oriented(p, b, o, 0, row), 2.0 * (2.0 - s.k as f64));
        for k in 0..s.k - 1 {
            e.add(&t(p, b, o, y, k, row), -1.0);
        }
        e
    };
    if opts.last_outcome {
        for &b in &blocks {
            for y in 0..s.y {
                for o in 0..n {
                    for row in [true, false] {
                        let p = &sink.program;
                        let mut e = entry_oriented(p, b, o, nu0 + 2 * y, row);
                        e.add(&entry_oriented(p, b, o, nu0 + 2 * y + 1, row), 1.0);
                        let rhs = last(p, b, o, y, row);
                        sink.ceq(&e, &rhs);
                    }
                }
            }
        }
    }
    meas_constraints(&mut sink, s, &blocks, n, &t, &last);
    (words, blocks, sink)
}

fn unitary_extraction(s: &Scenario, p: &ConicProgram, blocks: &[usize]) -> Vec<LinExpr> {
    extraction_with_last(s, |x, y, k| {
        let mut e = LinExpr::constant(0.5);
        e.add_expr(&CExpr::entry(p, blocks[x], 0, uidx(s, y, k, 0)).re, 0.25);
        e.add_expr(&CExpr::entry(p, blocks[x], 0, uidx(s, y, k, 1)).re, 0.25);
        e
    })
}

pub fn build_unitary_relaxation(s: &Scenario) -> Result<MomentProblem> {
    build_unitary_relaxation_with(s, &RelaxOptions::default())
}

pub fn build_unitary_relaxation_with(s: &Scenario, opts: &RelaxOptions) -> Result<MomentProblem> {
    s.validate().into_result()?;
    let (words, blocks, sink) = build_unitary_core(s, opts, false);
    let ex = unitary_extraction(s, &sink.program, &blocks);
    Ok(finish(Variant::Unitary1, s, words, blocks, sink, ex))
}

/// Unitary relaxation with one projector `S_z` per preparation, standing
/// for the pure state `rho_z`.
pub fn build_pure_state_relaxation(s: &Scenario) -> Result<MomentProblem> {
    build_pure_state_relaxation_with(s, &RelaxOptions::default())
}

pub fn build_pure_state_relaxation_with(s: &Scenario, opts: &RelaxOptions) -> Result<MomentProblem> {
    s.validate().into_result()?;
    let (words, blocks, mut sink) = build_unitary_core(s, opts, true);
    let n = words.len();
    let base = n - s.x;
    let adj = |i: usize| -> usize {
        if i == 0 || i >= base {
            i
        } else {
            // U and U+ sit in adjacent odd/even slots
            if i % 2 == 1 { i + 1 } else { i - 1 }
        }
    };
    for x in 0..s.x {
        let b = blocks[x];
        let psi_x = base + x;
        for z in 0..s.x {
            let p = &sink.program;
            let d = CExpr::entry(p, b, base + z, base + z);
            let o = CExpr::entry(p, b, 0, base + z);
            sink.ceq(&d, &o);
        }
        for o in 0..n {
            let p = &sink.program;
            let (a, c) = (CExpr::entry(p, b, psi_x, o), CExpr::entry(p, b, 0, o));
            let (a2, c2) = (CExpr::entry(p, b, o, psi_x), CExpr::entry(p, b, o, 0));
            sink.ceq(&a, &c);
            sink.ceq(&a2, &c2);
        }
        // tr(rho_x A+ rho_z) = tr(rho_z rho_x A+)
        for z in 0..s.x {
            for a in 0..n {
                let p = &sink.program;
                let lhs = CExpr::entry(p, b, a, base + z);
                let rhs = CExpr::entry(p, blocks[z], psi_x, adj(a));
                sink.ceq(&lhs, &rhs);
            }
        }
    }
    let ex = unitary_extraction(s, &sink.program, &blocks);
    Ok(finish(Variant::PureState1, s, words, blocks, sink, ex))
}

pub fn build_projective_relaxation(s: &Scenario, level: usize) -> Result<MomentProblem> {
    build_projective_relaxation_with(s, level, &RelaxOptions::default())
}

pub fn build_projective_relaxation_with(s: &Scenario, level: usize, opts: &RelaxOptions) -> Result<MomentProblem> {
    s.validate().into_result()?;
    if !(1..=2).contains(&level) {
        return Err(Error::Unsupported(format!("projective level {level}; only 1 and 2 are built")));
    }
    let words = projective_words(s.y, s.k, level);
    let n = words.len();
    let pos: HashMap<&OperatorWord, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let proj = |y: usize, k: usize| pos[&OperatorWord::atom(Atom::Proj { y, k })];
    let mut sink = Sink::new();
    let blocks = add_blocks(&mut sink, s.x, n, opts.complex);
    for &b in &blocks {
        let one = CExpr::entry(&sink.program, b, 0, 0);
        sink.ceq(&one, &CExpr::real(1.0));
        // representative entry and whether it holds the adjoint word
        let mut reps: HashMap<OperatorWord, (usize, usize, bool)> = HashMap::new();
        for r in 0..n {
            for c in r..n {
                let e = CExpr::entry(&sink.program, b, r, c);
                let Some(w) = words[r].dagger().concat(&words[c]).reduce_projective() else {
                    sink.czero(e);
                    continue;
                };
                let wd = w.dagger();
                let (key, flipped) = if wd < w { (wd, true) } else { (w, false) };
                match reps.get(&key) {
                    None => {
                        reps.insert(key, (r, c, flipped));
                    }
                    Some(&(r0, c0, f0)) => {
                        let rep = CExpr::entry(&sink.program, b, r0, c0);
                        let rep = if f0 == flipped { rep } else { rep.conj() };
                        sink.ceq(&e, &rep);
                    }
                }
            }
        }
    }
    prep_constraints(&mut sink, s, &blocks, n);
    let t = |p: &ConicProgram, b: usize, o: usize, y: usize, k: usize, row: bool| entry_oriented(p, b, o, proj(y, k), row);
    let last = |p: &ConicProgram, b: usize, o: usize, y: usize, row: bool| {
        let mut e = entry_oriented(p, b, o, 0, row);
        for k in 0..s.k - 1 {
            e.add(&t(p, b, o, y, k, row), -1.0);
        }
        e
    };
    meas_constraints(&mut sink, s, &blocks, n, &t, &last);
    let ex = extraction_with_last(s, |x, y, k| CExpr::entry(&sink.program, blocks[x], 0, proj(y, k)).re);
    Ok(finish(Variant::Projective(level), s, words, blocks, sink, ex))
}

pub fn build_relaxation(s: &Scenario, v: Variant) -> Result<MomentProblem> {
    build_relaxation_with(s, v, &RelaxOptions::default())
}

pub fn build_relaxation_with(s: &Scenario, v: Variant, opts: &RelaxOptions) -> Result<MomentProblem> {
    match v {
        Variant::Unitary1 => build_unitary_relaxation_with(s, opts),
        Variant::Projective(l) => build_projective_relaxation_with(s, l, opts),
        Variant::PureState1 => build_pure_state_relaxation_with(s, opts),
    }
}

/// Complex matrix entries as `[re, im]` pairs.
pub type MomentDump = Vec<Vec<Vec<[f64; 2]>>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxBound {
    pub value: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behaviour: Option<Behaviour>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<f64>>,
    pub residuals: Residuals,
}

fn dump(problem: &MomentProblem, sol: &ctxwb_solver::Solution) -> MomentDump {
    problem
        .blocks
        .iter()
        .map(|&b| {
            let m = match problem.program.blocks[b].kind {
                ctxwb_solver::BlockKind::Hermitian { .. } => sol.hermitian(b),
                _ => sol.symmetric(b).map(|v| num_complex::Complex64::new(v, 0.0)),
            };
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
        })
        .collect()
}

/// Maximise the metric over the relaxation.
pub fn upper_bound(problem: &MomentProblem, metric: &SuccessMetric) -> Result<RelaxBound> {
    let (x, y, k) = problem.shape;
    metric.check_shape(x, y, k)?;
    let mut prog = problem.program.clone();
    prog.sense = Sense::Max;
    prog.objective = problem.objective(metric);
    let sol = solve(&prog, &SolverOptions::default())?;
    if !sol.is_optimal() {
        return Ok(RelaxBound {
            value: f64::NAN,
            status: sol.status,
            behaviour: None,
            moments: None,
            certificate: sol.certificate.as_ref().map(|c| c.multipliers.clone()),
            residuals: sol.residuals,
        });
    }
    Ok(RelaxBound {
        value: sol.objective,
        status: sol.status,
        behaviour: Some(problem.behaviour(&sol)),
        moments: Some(dump(problem, &sol)),
        certificate: Some(sol.duals.clone()),
        residuals: sol.residuals,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum QMembership {
    /// Moment matrices reproduce the behaviour to within `distance`
    /// (largest absolute deviation).
    Feasible { distance: f64, moments: MomentDump },
    /// Smallest achievable deviation is `distance`. When available, a
    /// metric whose value on the behaviour exceeds its relaxation bound.
    Infeasible { distance: f64, separation: Option<(SuccessMetric, f64, f64)> },
    /// The relaxation has no feasible point at all.
    EmptyRelaxation,
    NumericalTrouble { detail: String },
}

impl QMembership {
    pub fn is_feasible(&self) -> bool {
        matches!(self, QMembership::Feasible { .. })
    }
}

pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// Smallest max-deviation between the behaviour and any point of the
/// relaxation.
pub fn membership_q(b: &Behaviour, s: &Scenario, variant: Variant) -> Result<QMembership> {
    if !b.matches(s) {
        return Err(Error::Shape("behaviour does not match the scenario".into()));
    }
    b.check(1e-9)?;
    let problem = build_relaxation(s, variant)?;
    let mut prog = problem.program.clone();
    prog.sense = Sense::Min;
    let t = prog.add_nonneg(1, Some("t"));
    let tv = Var::scalar(t, 0);
    let mut rows = Vec::new();
    for x in 0..s.x {
        for y in 0..s.y {
            for k in 0..s.k - 1 {
                let i = b.index(x, y, k);
                let mut up = problem.extraction[i].clone();
                let c = up.constant;
                up.constant = 0.0;
                let mut lo = up.clone();
                up.add_term(tv, -1.0);
                lo.add_term(tv, 1.0);
                rows.push((i, prog.constraints.len()));
                prog.add_constraint(up, Relation::Le, b.p[i] - c);
                prog.add_constraint(lo, Relation::Ge, b.p[i] - c);
            }
        }
    }
    prog.objective = LinExpr::var(tv);
    let sol = solve(&prog, &SolverOptions::default())?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(QMembership::EmptyRelaxation),
        other => return Ok(QMembership::NumericalTrouble { detail: format!("SDP status {other:?}") }),
    }
    let distance = sol.objective.max(0.0);
    if distance <= MEMBERSHIP_TOL {
        return Ok(QMembership::Feasible { distance, moments: dump(&problem, &sol) });
    }
    let raw: Vec<(usize, f64)> = rows.iter().map(|&(i, r)| (i, sol.duals[r] + sol.duals[r + 1])).collect();
    let scale = raw.iter().fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
    let mut separation = None;
    if scale > 0.0 {
        for sign in [1.0, -1.0] {
            let terms: Vec<Term> = raw
                .iter()
                .filter(|(_, c)| c.abs() > 1e-9 * scale)
                .map(|&(i, c)| {
                    let (x, rest) = (i / (s.y * s.k), i % (s.y * s.k));
                    Term { x, y: rest / s.k, k: rest % s.k, c: sign * c / scale }
                })
                .collect();
            let metric = SuccessMetric { terms };
            let value = evaluate_metric(&metric, b)?;
            let bound = upper_bound(&problem, &metric)?;
            if bound.status == Status::Optimal && value > bound.value + 1e-7 {
                separation = Some((metric, value, bound.value));
                break;
            }
        }
    }
    Ok(QMembership::Infeasible { distance, separation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_632, build_mporac23, build_porac, porac_metric};

    #[test]
    fn sizes() {
        let p = build_unitary_relaxation(&build_632()).unwrap();
        assert_eq!((p.blocks.len(), p.size()), (6, 7));
        let p = build_unitary_relaxation(&build_porac(3).unwrap()).unwrap();
        assert_eq!((p.blocks.len(), p.size()), (8, 7));
        let p = build_unitary_relaxation(&build_mporac23()).unwrap();
        assert_eq!((p.blocks.len(), p.size()), (9, 9));
        let p = build_pure_state_relaxation(&build_porac(2).unwrap()).unwrap();
        assert_eq!(p.size(), 5 + 4);
    }

    #[test]
    fn extraction_sums_to_one() {
        let s = build_632();
        for p in [build_unitary_relaxation(&s).unwrap(), build_projective_relaxation(&s, 2).unwrap()] {
            for x in 0..s.x {
                for y in 0..s.y {
                    let mut e = LinExpr::new();
                    for k in 0..s.k {
                        e.add_expr(&p.extraction[(x * s.y + y) * s.k + k], 1.0);
                    }
                    let e = e.normalized();
                    assert!(e.terms.iter().all(|(_, c)| c.abs() < 1e-12));
                    assert!((e.constant - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn porac2_projective_level1() {
        let s = build_porac(2).unwrap();
        let p = build_projective_relaxation(&s, 1).unwrap();
        let v = upper_bound(&p, &porac_metric(2)).unwrap();
        assert!((v.value - 0.5 * (1.0 + 0.5f64.sqrt())).abs() < 1e-6, "{}", v.value);
    }

    #[test]
    fn json_round_trip() {
        let p = build_projective_relaxation(&build_porac(2).unwrap(), 2).unwrap();
        let back = MomentProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(back.words, p.words);
        assert_eq!(back.program.constraints.len(), p.program.constraints.len());
    }

    #[test]
    fn uniform_is_in_every_relaxation() {
        let s = build_632();
        for v in [Variant::Unitary1, Variant::Projective(1), Variant::PureState1] {
            let m = membership_q(&Behaviour::uniform(&s), &s, v).unwrap();
            assert!(m.is_feasible(), "{v}: {m:?}");
        }
    }
}
