//! JSON run configuration: solver parameters, cosine-series initial data and
//! output settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::caputo::{FractionalOrder, TimeGrid};
use crate::error::{Error, Result};
use crate::rng::DEFAULT_SEED;
use crate::solver::SolverConfig;
use crate::spectral::{GridField, TorusGrid};

/// One term `amplitude · cos(mode · x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineMode {
    pub mode: Vec<i64>,
    pub amplitude: f64,
}

/// `offset + Σ amplitude · cos(mode · x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineSeries {
    pub offset: f64,
    #[serde(default)]
    pub modes: Vec<CosineMode>,
}

impl CosineSeries {
    pub fn constant(offset: f64) -> Self {
        Self { offset, modes: Vec::new() }
    }

    pub fn with_mode(mut self, mode: Vec<i64>, amplitude: f64) -> Self {
        self.modes.push(CosineMode { mode, amplitude });
        self
    }

    pub fn sample(&self, grid: TorusGrid) -> Result<GridField> {
        for m in &self.modes {
            if m.mode.len() != grid.dim() {
                return Err(Error::InvalidConfig(format!(
                    "mode {:?} has {} components on a {}-dimensional grid",
                    m.mode,
                    m.mode.len(),
                    grid.dim()
                )));
            }
            if !m.amplitude.is_finite() {
                return Err(Error::InvalidConfig("non-finite amplitude".into()));
            }
        }
        Ok(GridField::from_fn(grid, |x| {
            self.offset
                + self
                    .modes
                    .iter()
                    .map(|m| {
                        let phase: f64 = m.mode.iter().zip(x).map(|(&n, &xi)| n as f64 * xi).sum();
                        m.amplitude * phase.cos()
                    })
                    .sum::<f64>()
        }))
    }
}

fn default_picard_tol() -> f64 {
    1e-10
}
fn default_picard_max() -> usize {
    200
}
fn default_damping() -> f64 {
    1.0
}
fn default_tol_pos() -> f64 {
    1e-8
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub s: f64,
    pub dim: usize,
    pub points: usize,
    /// Final time `T`.
    pub horizon: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max")]
    pub picard_max: usize,
    #[serde(default = "default_damping")]
    pub picard_damping: f64,
    #[serde(default)]
    pub clip_negative: bool,
    #[serde(default = "default_tol_pos")]
    pub tol_pos: f64,
    pub u_init: CosineSeries,
    pub p_init: CosineSeries,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Write FLD1 snapshots every this many steps; 0 disables them.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl RunConfig {
    /// The 1-d smooth case: `u = 1 + 0.5 cos x`, `p = 1 + 0.3 cos x`,
    /// M = 64, α = 0.5, s = 0.75, τ = 1/64, T = 0.5, ϱ = ε = 1e-2.
    pub fn smooth_default() -> Self {
        Self {
            alpha: 0.5,
            s: 0.75,
            dim: 1,
            points: 64,
            horizon: 0.5,
            n_steps: 32,
            rho: 1e-2,
            eps: 1e-2,
            picard_tol: default_picard_tol(),
            picard_max: default_picard_max(),
            picard_damping: default_damping(),
            clip_negative: false,
            tol_pos: default_tol_pos(),
            u_init: CosineSeries::constant(1.0).with_mode(vec![1], 0.5),
            p_init: CosineSeries::constant(1.0).with_mode(vec![1], 0.3),
            output_dir: default_output_dir(),
            snapshot_every: 0,
            seed: DEFAULT_SEED,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(
            FractionalOrder::new(self.alpha)?,
            self.s,
            TorusGrid::new(self.dim, self.points)?,
            TimeGrid::from_horizon(self.horizon, self.n_steps)?,
        )
        .with_viscosity(self.rho, self.eps);
        cfg.picard_tol = self.picard_tol;
        cfg.picard_max = self.picard_max;
        cfg.picard_damping = self.picard_damping;
        cfg.clip_negative = self.clip_negative;
        cfg.tol_pos = self.tol_pos;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Solver configuration plus initial fields, checked to be strictly
    /// positive at every node.
    pub fn prepare(&self) -> Result<(SolverConfig, GridField, GridField)> {
        let cfg = self.solver_config()?;
        let u = self.u_init.sample(cfg.grid)?;
        let p = self.p_init.sample(cfg.grid)?;
        for (field, name) in [(&u, "u_in"), (&p, "p_in")] {
            if let Some(node) = field.samples().iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidInitialData { field: name, node, value: field.samples()[node] });
            }
        }
        Ok((cfg, u, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_defaults() {
        let text = r#"{
            "alpha": 0.5, "s": 0.75, "dim": 1, "points": 16, "horizon": 0.5, "n_steps": 8,
            "u_init": {"offset": 1.0, "modes": [{"mode": [1], "amplitude": 0.5}]},
            "p_init": {"offset": 1.0}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.picard_max, 200);
        assert_eq!(cfg.snapshot_every, 0);
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let (sc, u, p) = cfg.prepare().unwrap();
        assert_eq!(sc.time.n_steps(), 8);
        assert!((u.samples()[0] - 1.5).abs() < 1e-15);
        assert!(p.samples().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_modes() {
        let mut v: serde_json::Value = serde_json::from_str(&RunConfig::smooth_default().to_json()).unwrap();
        v["typo"] = 1.into();
        assert!(matches!(RunConfig::from_json(&v.to_string()), Err(Error::InvalidConfig(_))));

        let mut cfg = RunConfig::smooth_default();
        cfg.u_init = CosineSeries::constant(1.0).with_mode(vec![1, 1], 0.1);
        assert!(matches!(cfg.prepare(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn non_positive_initial_data() {
        let mut cfg = RunConfig::smooth_default();
        cfg.p_init = CosineSeries::constant(0.2).with_mode(vec![1], 0.5);
        match cfg.prepare() {
            Err(Error::InvalidInitialData { field: "p_in", value, .. }) => assert!(value <= 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
