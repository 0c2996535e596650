//! Lower bounds from explicit quantum realizations at fixed dimension.
//!
//! The see-saw alternates two SDPs: the best states for the current
//! POVMs (subject to the preparation equivalences), then the best POVMs for
//! those states (subject to the measurement equivalences). Each half-step
//! can only raise the objective, so each restart climbs to a local optimum.

mod naimark;
mod realization;
mod sdp;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{evaluate_metric, Behaviour, Scenario, SuccessMetric};

pub use naimark::naimark_check;
pub use realization::{behaviour_of, CMat, QuantumRealization};
pub use sdp::project_to_equivalences;

use realization::{hermitize, spectral_map};

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawOptions {
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once an iteration gains less than this.
    pub tol: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions { dim: 2, restarts: 20, seed: 0, max_iter: 200, tol: 1e-9 }
    }
}

/// Objective after each accepted iteration of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawResult {
    pub value: f64,
    pub realization: QuantumRealization,
    pub behaviour: Behaviour,
    /// Iterations of the winning restart.
    pub iterations: usize,
    /// Restarts that finished without solver failure.
    pub restarts: usize,
    pub best_restart: usize,
    pub seed: u64,
    pub dim: usize,
    pub traces: Vec<RestartTrace>,
}

/// Random complex Gaussian matrix.
fn ginibre(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        let (a, b): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
        num_complex::Complex64::new(a, b)
    })
}

fn random_state(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = ginibre(d, rng);
    let m = &g * g.adjoint();
    let t = m.trace().re;
    hermitize(&m.unscale(t))
}

fn random_povm(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<CMat> {
    let parts: Vec<CMat> = (0..k).map(|_| { let g = ginibre(d, rng); &g * g.adjoint() }).collect();
    let s = parts.iter().fold(CMat::zeros(d, d), |a, m| a + m);
    let t = spectral_map(&s, |x| 1.0 / x.sqrt());
    parts.iter().map(|m| hermitize(&(&t * m * &t))).collect()
}

fn value_of(metric: &SuccessMetric, r: &QuantumRealization) -> Result<(f64, Behaviour)> {
    let b = behaviour_of(r)?;
    Ok((evaluate_metric(metric, &b)?, b))
}

struct Climb {
    realization: QuantumRealization,
    value: f64,
    behaviour: Behaviour,
    values: Vec<f64>,
}

fn climb(s: &Scenario, metric: &SuccessMetric, opts: &SeesawOptions, restart: usize) -> Result<Climb> {
    let d = opts.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let states: Vec<CMat> = (0..s.x).map(|_| random_state(d, &mut rng)).collect();
    let povms: Vec<Vec<CMat>> = (0..s.y).map(|_| random_povm(d, s.k, &mut rng)).collect();
    let mut best = project_to_equivalences(&states, &povms, s)?;
    let (mut value, mut behaviour) = value_of(metric, &best)?;
    let mut values = vec![value];
    for _ in 0..opts.max_iter {
        let states = sdp::optimise_states(s, metric, &best.measurements, d)?;
        let measurements = sdp::optimise_povms(s, metric, &states, d)?;
        let next = QuantumRealization { dim: d, states, measurements };
        if let Err(e) = next.check_for(s) {
            log::debug!("restart {restart}: rejecting step ({e})");
            break;
        }
        let (v, b) = value_of(metric, &next)?;
        if v <= value {
            break;
        }
        let gain = v - value;
        best = next;
        value = v;
        behaviour = b;
        values.push(v);
        if gain < opts.tol {
            break;
        }
    }
    Ok(Climb { realization: best, value, behaviour, values })
}

/// Best see-saw value over `restarts` random starts at dimension `dim`.
pub fn seesaw(s: &Scenario, metric: &SuccessMetric, dim: usize, restarts: usize, seed: u64) -> Result<SeesawResult> {
    seesaw_with(s, metric, &SeesawOptions { dim, restarts, seed, ..Default::default() })
}

pub fn seesaw_with(s: &Scenario, metric: &SuccessMetric, opts: &SeesawOptions) -> Result<SeesawResult> {
    if opts.dim < 2 {
        return Err(Error::OutOfRange(format!("dimension {} (need at least 2)", opts.dim)));
    }
    if opts.restarts == 0 {
        return Err(Error::OutOfRange("at least one restart is needed".into()));
    }
    s.validate().into_result()?;
    metric.check_scenario(s)?;
    let runs: Vec<Result<Climb>> = (0..opts.restarts).into_par_iter().map(|r| climb(s, metric, opts, r)).collect();

    let mut traces = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, Climb)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(c) => {
                traces.push(RestartTrace { restart: r, values: c.values.clone(), error: None });
                if best.as_ref().map_or(true, |(_, b)| c.value > b.value) {
                    best = Some((r, c));
                }
            }
            Err(e) => {
                log::warn!("see-saw restart {r} discarded: {e}");
                traces.push(RestartTrace { restart: r, values: Vec::new(), error: Some(e.to_string()) });
            }
        }
    }
    let restarts = traces.iter().filter(|t| t.error.is_none()).count();
    let (best_restart, c) = best.ok_or_else(|| Error::Numerical("every see-saw restart failed".into()))?;
    Ok(SeesawResult {
        value: c.value,
        iterations: c.values.len() - 1,
        realization: c.realization,
        behaviour: c.behaviour,
        restarts,
        best_restart,
        seed: opts.seed,
        dim: opts.dim,
        traces,
    })
}
