//! Checks that need no reference numbers: algebraic identities, LP
//! equalities on random scenarios, hierarchy monotonicity, round trips
//! and duality.

use std::time::Instant;

use ctxwb::polytope::{max_contextual, max_noncontextual, ContextualLp};
use ctxwb::relax::*;
use ctxwb::scenario::*;
use ctxwb::seesaw::{seesaw, QuantumRealization};
use ctxwb_solver::{solve, ConicProgram, LinExpr, Sense, SolverOptions};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anchors::Anchors;
use crate::report::{Cell, PresetReport};

const ROW: &str = "properties";

fn timed(mut c: Cell, start: Instant) -> Cell {
    c.seconds = start.elapsed().as_secs_f64();
    c
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn random_effect(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = a.adjoint() * a;
    let top = m.clone().symmetric_eigenvalues().max();
    m.unscale(top * rng.gen_range(1.0..2.0))
}

fn lemma(n: usize) -> Cell {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut failed = None;
    for i in 0..n {
        let d = 2 + i % 3;
        let m = random_effect(d, &mut rng);
        match unitary_from_effect(&m) {
            Ok(u) => {
                worst = worst.max(max_abs(&(effect_from_unitary(&u) - &m)));
                worst = worst.max(max_abs(&(&u * u.adjoint() - DMatrix::identity(d, d))));
            }
            Err(e) => failed = Some(e.to_string()),
        }
    }
    let ok = failed.is_none() && worst <= 1e-10;
    let note = failed.unwrap_or_else(|| format!("{n} random effects, d = 2..4; worst reconstruction or unitarity error <= 1e-10"));
    timed(Cell::holds(ROW, "effect-unitary round trip", ok, Some(worst), note), start)
}

/// Largest `S_C - S_NC` over random scenarios from `gen`.
fn lp_gap(column: &str, seed: u64, n: usize, gen: impl Fn(&mut ChaCha8Rng) -> Scenario) -> Cell {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let s = gen(&mut rng);
        let m = random_metric(&s, &mut rng);
        match (max_contextual(&s, &m), max_noncontextual(&s, &m)) {
            (Ok(c), Ok(nc)) => worst = worst.max((c.value - nc.value).abs()),
            (Err(e), _) | (_, Err(e)) => {
                return timed(Cell::holds(ROW, column, false, None, e.to_string()), start);
            }
        }
    }
    let note = format!("{n} random scenarios; |S_C - S_NC| <= 1e-7");
    timed(Cell::holds(ROW, column, worst <= 1e-7, Some(worst), note), start)
}

fn levels(n: usize) -> Cell {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n {
        let r = (|| -> anyhow::Result<f64> {
            let s = build_simplest_family(rng.gen_range(0.05..0.95))?;
            let m = random_metric(&s, &mut rng);
            let l1 = upper_bound(&build_projective_relaxation(&s, 1)?, &m)?.value;
            let l2 = upper_bound(&build_projective_relaxation(&s, 2)?, &m)?.value;
            Ok(l2 - l1)
        })();
        match r {
            Ok(d) if d.is_finite() => worst = worst.max(d),
            Ok(_) => return timed(Cell::holds(ROW, "projective level 2 <= level 1", false, None, "non-optimal solve".into()), start),
            Err(e) => return timed(Cell::holds(ROW, "projective level 2 <= level 1", false, None, e.to_string()), start),
        }
    }
    let note = format!("{n} random metrics on the two-bit family; largest level-2 minus level-1");
    timed(Cell::holds(ROW, "projective level 2 <= level 1", worst <= 1e-6, Some(worst), note), start)
}

fn monotone_seesaw() -> Cell {
    let start = Instant::now();
    let col = "see-saw iterations non-decreasing";
    let m = table1_metric(5).expect("bundled metric");
    match seesaw(&build_632(), &m, 2, 8, 3) {
        Ok(r) => {
            let drop = r
                .traces
                .iter()
                .flat_map(|t| t.values.windows(2).map(|w| w[0] - w[1]))
                .fold(0.0, f64::max);
            let steps: usize = r.traces.iter().map(|t| t.values.len()).sum();
            timed(Cell::holds(ROW, col, drop <= 1e-10, Some(drop), format!("{steps} iterates over 8 restarts; largest drop")), start)
        }
        Err(e) => timed(Cell::holds(ROW, col, false, None, e.to_string()), start),
    }
}

fn round_trips() -> Vec<Cell> {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut push = |what: &str, r: anyhow::Result<bool>| {
        let (ok, note) = match r {
            Ok(ok) => (ok, String::new()),
            Err(e) => (false, e.to_string()),
        };
        out.push(Cell::holds(ROW, format!("round trip: {what}"), ok, None, note));
    };
    push(
        "scenario JSON",
        (|| {
            let mut ok = true;
            for s in [build_632(), build_mporac23(), ncycle_scenario(5)?, build_simplest_family(0.35)?] {
                ok &= scenario_from_json(&scenario_to_json(&s))? == s;
            }
            Ok(ok)
        })(),
    );
    push(
        "metric JSON",
        (|| {
            let m = table1_metric(3)?;
            let back: SuccessMetric = serde_json::from_str(&serde_json::to_string(&m)?)?;
            Ok(back == m)
        })(),
    );
    push(
        "behaviour CSV",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let s = build_632();
            let mut b = Behaviour::zeros(s.x, s.y, s.k);
            for x in 0..s.x {
                for y in 0..s.y {
                    let p: f64 = rng.gen();
                    b.set(x, y, 0, p);
                    b.set(x, y, 1, 1.0 - p);
                }
            }
            Ok(behaviour_from_csv(&behaviour_to_csv(&b))? == b)
        })(),
    );
    push(
        "realization JSON",
        (|| {
            let s = build_porac(2)?;
            let r = seesaw(&s, &porac_metric(2), 2, 2, 0)?.realization;
            Ok(QuantumRealization::from_json(&r.to_json())? == r)
        })(),
    );
    push(
        "moment problem JSON",
        (|| {
            let p = build_unitary_relaxation(&build_632())?;
            Ok(MomentProblem::from_json(&p.to_json())?.to_json() == p.to_json())
        })(),
    );
    push(
        "conic program JSON",
        (|| {
            let p = ContextualLp::new(&build_mporac23()).program;
            let text = p.to_json()?;
            Ok(ConicProgram::from_json(&text)?.to_json()? == text)
        })(),
    );
    let seconds = start.elapsed().as_secs_f64();
    let n = out.len() as f64;
    for c in &mut out {
        c.seconds = seconds / n;
    }
    out
}

fn objective(p: &MomentProblem, m: &SuccessMetric) -> LinExpr {
    let (_, ny, nk) = p.shape;
    let mut e = LinExpr::new();
    for t in &m.terms {
        e.add_expr(&p.extraction[(t.x * ny + t.y) * nk + t.k], t.c);
    }
    e.normalized()
}

/// Dual bound above the primal value, and a repeated solve agrees.
fn duality() -> Vec<Cell> {
    let start = Instant::now();
    let mut programs: Vec<(String, ConicProgram)> = Vec::new();
    let s = build_632();
    let reference = build_unitary_relaxation(&s);
    let sound = build_unitary_relaxation_with(&s, &RelaxOptions::sound());
    for i in 1..=7 {
        let m = table1_metric(i).expect("bundled metric");
        for (tag, p) in [("Q1", &reference), ("Q1 sound", &sound)] {
            if let Ok(p) = p {
                let mut prog = p.program.clone();
                prog.sense = Sense::Max;
                prog.objective = objective(p, &m);
                programs.push((format!("632 metric {i} {tag}"), prog));
            }
        }
        let lp = ContextualLp::new(&s);
        let mut prog = lp.program.clone();
        prog.objective = lp.objective(&m);
        programs.push((format!("632 metric {i} C"), prog));
    }
    let expected = 21;
    let mut worst_gap: f64 = 0.0;
    let mut worst_repeat: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, prog) in &programs {
        let opts = SolverOptions::default();
        match (solve(prog, &opts), solve(prog, &opts)) {
            (Ok(a), Ok(b)) if a.is_optimal() && b.is_optimal() => {
                let scale = a.objective.abs().max(1.0);
                worst_gap = worst_gap.max((a.objective - a.dual_objective) / scale);
                worst_repeat = worst_repeat.max((a.objective - b.objective).abs());
            }
            (Ok(a), _) => failures.push(format!("{name}: {:?}", a.status)),
            (Err(e), _) => failures.push(format!("{name}: {e}")),
        }
    }
    let ok = failures.is_empty() && programs.len() == expected;
    let note = if failures.is_empty() {
        format!("{} LP/SDP solves; largest (primal - dual) / max(1, |primal|)", programs.len())
    } else {
        failures.join("; ")
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mut gap = Cell::holds(ROW, "weak duality", ok && worst_gap <= 1e-7, Some(worst_gap), note);
    gap.seconds = elapsed;
    let repeat = Cell::holds(
        ROW,
        "re-solve determinism",
        ok && worst_repeat <= 1e-10,
        Some(worst_repeat),
        "largest change of the optimum on an identical second solve".into(),
    );
    vec![gap, repeat]
}

pub fn properties(a: &Anchors) -> PresetReport {
    let mut rep = PresetReport::new("properties", a.version);
    rep.cells.push(lemma(50));
    rep.cells.push(lp_gap("no preparation equivalences: S_C = S_NC", 4, 20, |rng| {
        let (x, y, k) = (rng.gen_range(2..=4), rng.gen_range(1..=3), rng.gen_range(2..=3));
        let meas = rng.gen_range(0..=2);
        random_scenario(x, y, k, 0, meas, rng)
    }));
    rep.cells.push(lp_gap("at most three preparations: S_C = S_NC", 5, 20, |rng| {
        let (x, y, k) = (rng.gen_range(2..=3), rng.gen_range(1..=3), rng.gen_range(2..=3));
        let meas = rng.gen_range(0..=2);
        random_scenario(x, y, k, 1, meas, rng)
    }));
    rep.cells.push(levels(10));
    rep.cells.push(monotone_seesaw());
    rep.cells.extend(round_trips());
    rep.cells.extend(duality());
    rep
}
