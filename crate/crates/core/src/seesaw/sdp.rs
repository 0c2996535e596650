use ctxwb_solver::{solve, ConicProgram, LinExpr, Part, Relation, Sense, SolverOptions, Status, Var};

use super::realization::{hermitize, tidy_povm, tidy_state, CMat, QuantumRealization};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, SuccessMetric};

fn re(block: usize, i: usize, j: usize) -> Var {
    let (row, col) = if i <= j { (i, j) } else { (j, i) };
    Var { block, row, col, part: Part::Re }
}

fn im(block: usize, i: usize, j: usize) -> Var {
    Var { block, row: i, col: j, part: Part::Im }
}

/// `Re tr(H F)` for a Hermitian block `H` and a fixed matrix `F`.
fn re_trace_expr(block: usize, f: &CMat, out: &mut LinExpr, scale: f64) {
    let f = hermitize(f);
    let d = f.nrows();
    for i in 0..d {
        out.add_term(re(block, i, i), scale * f[(i, i)].re);
        for j in i + 1..d {
            out.add_term(re(block, i, j), 2.0 * scale * f[(i, j)].re);
            out.add_term(im(block, i, j), 2.0 * scale * f[(i, j)].im);
        }
    }
}

/// `sum_b c_b H_b = rhs`, entrywise on the upper triangle.
fn add_matrix_eq(p: &mut ConicProgram, lhs: &[(usize, f64)], rhs: &CMat) {
    let d = rhs.nrows();
    for i in 0..d {
        for j in i..d {
            let mut e = LinExpr::new();
            for &(b, c) in lhs {
                e.add_term(re(b, i, j), c);
            }
            p.add_constraint(e.normalized(), Relation::Eq, rhs[(i, j)].re);
            if i < j {
                let mut e = LinExpr::new();
                for &(b, c) in lhs {
                    e.add_term(im(b, i, j), c);
                }
                p.add_constraint(e.normalized(), Relation::Eq, rhs[(i, j)].im);
            }
        }
    }
}

/// Pairwise equalities `mix_j - mix_0 = 0` for one class.
fn add_class(p: &mut ConicProgram, class: &[Vec<f64>], blocks: &[usize], d: usize) {
    let zero = CMat::zeros(d, d);
    for dist in &class[1..] {
        let lhs: Vec<(usize, f64)> = dist
            .iter()
            .zip(&class[0])
            .enumerate()
            .filter(|(_, (a, b))| *a != *b)
            .map(|(i, (a, b))| (blocks[i], a - b))
            .collect();
        if !lhs.is_empty() {
            add_matrix_eq(p, &lhs, &zero);
        }
    }
}

fn states_program(s: &Scenario, d: usize, sense: Sense) -> (ConicProgram, Vec<usize>) {
    let mut p = ConicProgram::new(sense);
    let blocks: Vec<usize> = (0..s.x).map(|_| p.add_hermitian(d, None)).collect();
    for &b in &blocks {
        let mut tr = LinExpr::new();
        for i in 0..d {
            tr.add_term(re(b, i, i), 1.0);
        }
        p.add_constraint(tr, Relation::Eq, 1.0);
    }
    for class in s.prep_f64() {
        add_class(&mut p, &class, &blocks, d);
    }
    (p, blocks)
}

fn povms_program(s: &Scenario, d: usize, sense: Sense) -> (ConicProgram, Vec<usize>) {
    let mut p = ConicProgram::new(sense);
    let blocks: Vec<usize> = (0..s.y * s.k).map(|_| p.add_hermitian(d, None)).collect();
    let id = CMat::identity(d, d);
    for y in 0..s.y {
        let lhs: Vec<(usize, f64)> = (0..s.k).map(|k| (blocks[y * s.k + k], 1.0)).collect();
        add_matrix_eq(&mut p, &lhs, &id);
    }
    for class in s.meas_f64() {
        add_class(&mut p, &class, &blocks, d);
    }
    (p, blocks)
}

fn run(mut p: ConicProgram, blocks: &[usize], what: &str) -> Result<Vec<CMat>> {
    p.remove_dependent_equalities(1e-9);
    let sol = solve(&p, &SolverOptions::default())?;
    if sol.status != Status::Optimal {
        return Err(Error::Numerical(format!("{what} step ended with {:?} ({})", sol.status, sol.backend_status)));
    }
    Ok(blocks.iter().map(|&b| sol.hermitian(b)).collect())
}

/// Best states for fixed POVMs.
pub(crate) fn optimise_states(s: &Scenario, metric: &SuccessMetric, povms: &[Vec<CMat>], d: usize) -> Result<Vec<CMat>> {
    let (mut p, blocks) = states_program(s, d, Sense::Max);
    for t in &metric.terms {
        re_trace_expr(blocks[t.x], &povms[t.y][t.k], &mut p.objective, t.c);
    }
    p.objective.normalize();
    Ok(run(p, &blocks, "state")?.iter().map(tidy_state).collect())
}

/// Best POVMs for fixed states.
pub(crate) fn optimise_povms(s: &Scenario, metric: &SuccessMetric, states: &[CMat], d: usize) -> Result<Vec<Vec<CMat>>> {
    let (mut p, blocks) = povms_program(s, d, Sense::Max);
    for t in &metric.terms {
        re_trace_expr(blocks[s.effect_index(t.y, t.k)], &states[t.x], &mut p.objective, t.c);
    }
    p.objective.normalize();
    let flat = run(p, &blocks, "measurement")?;
    Ok(flat.chunks(s.k).map(tidy_povm).collect())
}

/// Minimise `sum_b ||H_b - A_b||_F^2` over the program's feasible set.
fn add_frobenius(p: &mut ConicProgram, blocks: &[usize], targets: &[CMat]) {
    for (&b, a) in blocks.iter().zip(targets) {
        let a = hermitize(a);
        let d = a.nrows();
        for i in 0..d {
            p.quadratic.push((re(b, i, i), 2.0));
            p.objective.add_term(re(b, i, i), -2.0 * a[(i, i)].re);
            for j in i + 1..d {
                p.quadratic.push((re(b, i, j), 4.0));
                p.objective.add_term(re(b, i, j), -4.0 * a[(i, j)].re);
                p.quadratic.push((im(b, i, j), 4.0));
                p.objective.add_term(im(b, i, j), -4.0 * a[(i, j)].im);
            }
        }
    }
}

pub(crate) fn project_states(s: &Scenario, raw: &[CMat], d: usize) -> Result<Vec<CMat>> {
    let (mut p, blocks) = states_program(s, d, Sense::Min);
    add_frobenius(&mut p, &blocks, raw);
    Ok(run(p, &blocks, "state projection")?.iter().map(tidy_state).collect())
}

pub(crate) fn project_povms(s: &Scenario, raw: &[Vec<CMat>], d: usize) -> Result<Vec<Vec<CMat>>> {
    let (mut p, blocks) = povms_program(s, d, Sense::Min);
    let flat: Vec<CMat> = raw.iter().flatten().cloned().collect();
    add_frobenius(&mut p, &blocks, &flat);
    let out = run(p, &blocks, "measurement projection")?;
    Ok(out.chunks(s.k).map(tidy_povm).collect())
}

/// Nearest (in Frobenius norm) states and POVMs satisfying the scenario's
/// equivalences. Sides that already comply are returned untouched.
pub fn project_to_equivalences(raw_states: &[CMat], raw_povms: &[Vec<CMat>], s: &Scenario) -> Result<QuantumRealization> {
    let d = raw_states.first().map(|m| m.nrows()).ok_or_else(|| Error::Shape("no states".into()))?;
    if raw_states.len() != s.x || raw_povms.len() != s.y || raw_povms.iter().any(|p| p.len() != s.k) {
        return Err(Error::Shape("raw realization does not match the scenario".into()));
    }
    if raw_states.iter().chain(raw_povms.iter().flatten()).any(|m| m.shape() != (d, d)) {
        return Err(Error::Shape(format!("all matrices must be {d}x{d}")));
    }
    let as_is = QuantumRealization { dim: d, states: raw_states.to_vec(), measurements: raw_povms.to_vec() };
    let states_ok = {
        let only = Scenario { meas_equivalences: Vec::new(), ..s.clone() };
        let probe = QuantumRealization { measurements: QuantumRealization::trivial(d, 0, s.y, s.k).measurements, ..as_is.clone() };
        probe.check_for(&only).is_ok()
    };
    let povms_ok = {
        let only = Scenario { prep_equivalences: Vec::new(), ..s.clone() };
        let probe = QuantumRealization { states: QuantumRealization::trivial(d, s.x, 0, s.k).states, ..as_is.clone() };
        probe.check_for(&only).is_ok()
    };
    let states = if states_ok { as_is.states } else { project_states(s, raw_states, d)? };
    let measurements = if povms_ok { as_is.measurements } else { project_povms(s, raw_povms, d)? };
    let r = QuantumRealization { dim: d, states, measurements };
    r.check_for(s)?;
    Ok(r)
}
