use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ctxwb::polytope::{max_contextual, max_noncontextual, ContextualLp};
use ctxwb::relax::*;
use ctxwb::scenario::{save_behaviour, Behaviour};
use ctxwb::seesaw::{seesaw_with, SeesawOptions, SeesawResult};
use ctxwb_solver::Status;
use serde::Serialize;

use crate::anchors::Anchors;
use crate::exit;
use crate::inputs::scenario_and_metric;
use crate::report::{status_name, PresetReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Set {
    C,
    Nc,
    Q1,
    Qpi,
    Qpsi,
}

#[derive(Debug, Clone)]
pub struct BoundRequest {
    pub scenario: String,
    pub metric: String,
    pub set: Set,
    pub level: usize,
    pub sound: bool,
    pub expect: Option<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub export: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub scenario: String,
    pub metric: String,
    pub set: Set,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    pub sound: bool,
    pub value: Option<f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub behaviour: Option<Behaviour>,
}

impl BoundReport {
    pub fn exit_code(&self, expect: Option<f64>, tol: f64) -> i32 {
        match self.status.as_str() {
            "optimal" => match (expect, self.value) {
                (Some(want), Some(v)) if (v - want).abs() > tol => exit::ANCHOR_FAILURE,
                _ => exit::OK,
            },
            "infeasible" => exit::INFEASIBLE,
            _ => exit::ERROR,
        }
    }
}

fn relaxation(req: &BoundRequest, s: &ctxwb::scenario::Scenario) -> Result<MomentProblem> {
    let opts = if req.sound { RelaxOptions::sound() } else { RelaxOptions::default() };
    Ok(match req.set {
        Set::Q1 => build_unitary_relaxation_with(s, &opts)?,
        Set::Qpi => build_projective_relaxation_with(s, req.level, &opts)?,
        Set::Qpsi => build_pure_state_relaxation_with(s, &opts)?,
        Set::C | Set::Nc => unreachable!(),
    })
}

pub fn bound(req: &BoundRequest) -> Result<BoundReport> {
    let (s, m) = scenario_and_metric(&req.scenario, &req.metric)?;
    let (value, status, behaviour) = match req.set {
        Set::C | Set::Nc => {
            if let Some(path) = &req.export {
                if req.set == Set::Nc {
                    bail!("--export is available for c, q1, qpi and qpsi");
                }
                let lp = ContextualLp::new(&s);
                let mut prog = lp.program.clone();
                prog.objective = lp.objective(&m);
                prog.dump(path)?;
            }
            let r = if req.set == Set::C { max_contextual(&s, &m)? } else { max_noncontextual(&s, &m)? };
            (r.value, r.status, r.behaviour)
        }
        _ => {
            let p = relaxation(req, &s)?;
            if let Some(path) = &req.export {
                std::fs::write(path, p.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            let r = upper_bound(&p, &m)?;
            (r.value, r.status, r.behaviour)
        }
    };
    let report = BoundReport {
        scenario: req.scenario.clone(),
        metric: req.metric.clone(),
        set: req.set,
        level: (req.set == Set::Qpi).then_some(req.level),
        sound: req.sound,
        value: (status == Status::Optimal).then_some(value),
        status: status_name(status).into(),
        behaviour,
    };
    if let Some(out) = &req.out {
        write_bound(&report, out)?;
    }
    Ok(report)
}

fn write_bound(r: &BoundReport, out: &Path) -> Result<()> {
    if out.extension().is_some_and(|e| e == "csv") {
        let b = r.behaviour.as_ref().context("no optimal behaviour to write")?;
        save_behaviour(b, out)?;
    } else {
        std::fs::write(out, serde_json::to_string_pretty(r)?)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SeesawRequest {
    pub scenario: String,
    pub metric: String,
    pub dim: usize,
    pub max_dim: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub dump_realization: Option<PathBuf>,
}

/// One result per dimension from `dim` to `max_dim`.
pub fn seesaw_sweep(req: &SeesawRequest) -> Result<Vec<SeesawResult>> {
    let (s, m) = scenario_and_metric(&req.scenario, &req.metric)?;
    let top = req.max_dim.unwrap_or(req.dim);
    if top < req.dim {
        bail!("--max-dim {top} is below --dim {}", req.dim);
    }
    let mut out = Vec::new();
    for dim in req.dim..=top {
        let opts = SeesawOptions { dim, restarts: req.restarts, seed: req.seed, max_iter: req.max_iter, ..Default::default() };
        out.push(seesaw_with(&s, &m, &opts)?);
    }
    let best = out.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("at least one dimension");
    if let Some(path) = &req.dump_realization {
        std::fs::write(path, best.realization.to_json())?;
    }
    if let Some(path) = &req.out {
        std::fs::write(path, serde_json::to_string_pretty(&out)?)?;
    }
    Ok(out)
}

/// Runs the named presets (or all of them), printing each report and
/// writing files under `out`.
pub fn presets(names: &[String], anchors: &Anchors, out: Option<&Path>) -> Result<Vec<PresetReport>> {
    let names: Vec<String> = if names.iter().any(|n| n == "all") {
        crate::PRESETS.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    let mut reports = Vec::new();
    for n in &names {
        let r = crate::run_preset(n, anchors)?;
        print!("{}", r.render());
        if let Some(dir) = out {
            r.write_to(dir)?;
        }
        reports.push(r);
    }
    Ok(reports)
}
