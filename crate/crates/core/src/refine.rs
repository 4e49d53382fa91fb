//! Refinement studies: rerun with one knob halved per level and measure
//! `L²(0,T;L²)` distances between consecutive levels.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::solver::{run, History};
use crate::spectral::GridField;
use crate::value::{CompensatedSum, PathValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Knob {
    Tau,
    Eps,
    Rho,
}

impl FromStr for Knob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Knob::Tau),
            "eps" => Ok(Knob::Eps),
            "rho" => Ok(Knob::Rho),
            _ => Err(Error::InvalidConfig(format!("unknown knob {s:?} (expected tau, eps or rho)"))),
        }
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Knob::Tau => "tau",
            Knob::Eps => "eps",
            Knob::Rho => "rho",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineLevel {
    pub level: usize,
    pub tau: f64,
    pub eps: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineReport {
    pub knob: Knob,
    pub levels: Vec<RefineLevel>,
    /// `‖u^(l) - u^(l+1)‖_{L²(0,T;L²)}` for consecutive levels.
    pub u_diffs: Vec<f64>,
    pub p_diffs: Vec<f64>,
    /// Both differences non-increasing across the last two pairs (vacuous
    /// for two levels).
    pub contract_holds: bool,
}

fn level_config(base: &RunConfig, knob: Knob, level: usize) -> RunConfig {
    let mut cfg = base.clone();
    let f = 0.5f64.powi(level as i32);
    match knob {
        Knob::Tau => cfg.n_steps = base.n_steps << level,
        Knob::Eps => cfg.eps = base.eps * f,
        Knob::Rho => cfg.rho = base.rho * f,
    }
    cfg
}

/// `(Σ_k τ ‖a_{k·ra} - b_{k·rb}‖²)^(1/2)` over the coarse steps `k = 1..=n`.
fn l2_distance(a: &[GridField], ra: usize, b: &[GridField], rb: usize, n: usize, tau: f64) -> f64 {
    let s: CompensatedSum = (1..=n)
        .map(|k| tau * GridField::difference(&a[k * ra], &b[k * rb]).norm().powi(2))
        .collect();
    s.value().sqrt()
}

/// Run `levels` refinements of `knob` starting from `base` and compare
/// consecutive levels. Levels run on separate threads.
pub fn refine(base: &RunConfig, knob: Knob, levels: usize) -> Result<RefineReport> {
    if levels < 2 {
        return Err(Error::InvalidConfig(format!("refinement needs at least 2 levels, got {levels}")));
    }
    if (knob == Knob::Eps && base.eps <= 0.0) || (knob == Knob::Rho && base.rho <= 0.0) {
        return Err(Error::InvalidConfig(format!("cannot refine {knob} from a zero starting value")));
    }
    let configs: Vec<RunConfig> = (0..levels).map(|l| level_config(base, knob, l)).collect();
    let prepared = configs.iter().map(RunConfig::prepare).collect::<Result<Vec<_>>>()?;
    let runs: Vec<Result<History>> = std::thread::scope(|scope| {
        let handles: Vec<_> = prepared
            .iter()
            .map(|(cfg, u, p)| scope.spawn(move || run(cfg, u.clone(), p.clone()).map(|(h, _)| h)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("refinement thread panicked")).collect()
    });
    let histories = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut u_diffs = Vec::new();
    let mut p_diffs = Vec::new();
    for l in 0..levels - 1 {
        let coarse = &prepared[l].0.time;
        let (n, tau) = (coarse.n_steps(), coarse.tau());
        let rb = if knob == Knob::Tau { 2 } else { 1 };
        let (a, b) = (&histories[l], &histories[l + 1]);
        u_diffs.push(l2_distance(a.u_steps(), 1, b.u_steps(), rb, n, tau));
        p_diffs.push(l2_distance(a.p_steps(), 1, b.p_steps(), rb, n, tau));
    }
    let tail_ok = |d: &[f64]| d.len() < 2 || d[d.len() - 1] <= d[d.len() - 2];
    let contract_holds = tail_ok(&u_diffs) && tail_ok(&p_diffs);
    let levels = prepared
        .iter()
        .enumerate()
        .map(|(level, (cfg, _, _))| RefineLevel { level, tau: cfg.time.tau(), eps: cfg.eps, rho: cfg.rho })
        .collect();
    Ok(RefineReport { knob, levels, u_diffs, p_diffs, contract_holds })
}
