//! Implicit time stepping of the regularized fractional porous-medium system
//!
//! ```text
//! D_τ u = div(u ∇p) + ϱ Δu
//! D_τ p + (-Δ)^s p - ε Δp = u²
//! ```
//!
//! on the torus, with the full Caputo memory. Each step is a fixed point of the
//! map that freezes the density in the nonlinear terms, solves the two linear
//! problems mode by mode, and feeds the new density back.

mod ledger;

use num_complex::Complex64;

pub use ledger::{diagnostics, format_float, DiagnosticsReport, EnergyLedger, LedgerRow, Verdict};

use crate::caputo::{build_weights, CaputoWeights, FractionalOrder, TimeGrid};
use crate::error::{Error, Result};
use crate::spectral::{dealias, GridField, Spectrum, TorusGrid};
use crate::value::PathValue;

/// Parameters of one run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolverConfig {
    pub alpha: FractionalOrder,
    /// Fractional-Laplacian power in `(0, 1]`.
    pub s: f64,
    pub grid: TorusGrid,
    pub time: TimeGrid,
    /// Density viscosity ϱ.
    pub rho: f64,
    /// Pressure viscosity ε.
    pub eps: f64,
    /// Stop when successive iterates differ by at most this in `L²`.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Relaxation θ in `z ← (1-θ)z + θ T(z)`.
    pub picard_damping: f64,
    /// Clip negative nodes after each step. Exploratory only: a clipped run is
    /// not certified.
    pub clip_negative: bool,
    /// Allowed undershoot below zero before positivity counts as violated.
    pub tol_pos: f64,
}

impl SolverConfig {
    pub fn new(alpha: FractionalOrder, s: f64, grid: TorusGrid, time: TimeGrid) -> Self {
        Self {
            alpha,
            s,
            grid,
            time,
            rho: 0.0,
            eps: 0.0,
            picard_tol: 1e-10,
            picard_max: 200,
            picard_damping: 1.0,
            clip_negative: false,
            tol_pos: 1e-8,
        }
    }

    pub fn with_viscosity(mut self, rho: f64, eps: f64) -> Self {
        self.rho = rho;
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.s > 0.0 && self.s <= 1.0) {
            return bad(format!("s must lie in (0, 1], got {}", self.s));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) || !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("viscosities must be finite and non-negative, got rho={} eps={}", self.rho, self.eps));
        }
        if !(self.picard_tol > 0.0) || !(self.tol_pos > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.picard_max == 0 {
            return bad("picard_max must be at least 1".into());
        }
        if !(self.picard_damping > 0.0 && self.picard_damping <= 1.0) {
            return bad(format!("picard_damping must lie in (0, 1], got {}", self.picard_damping));
        }
        Ok(())
    }
}

/// Outcome of one time step.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StepReport {
    pub k: usize,
    pub picard_iters: usize,
    pub picard_residual: f64,
    pub min_u: f64,
    pub min_p: f64,
    pub mean_u: f64,
}

/// Every computed step; index 0 holds the initial data.
#[derive(Debug, Clone)]
pub struct History {
    u: Vec<GridField>,
    p: Vec<GridField>,
    reports: Vec<StepReport>,
}

impl History {
    pub fn new(u_in: GridField, p_in: GridField) -> Result<Self> {
        if u_in.grid() != p_in.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u: vec![u_in], p: vec![p_in], reports: Vec::new() })
    }

    /// Number of stored time levels (steps completed plus one).
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u(&self, k: usize) -> &GridField {
        &self.u[k]
    }

    pub fn p(&self, k: usize) -> &GridField {
        &self.p[k]
    }

    pub fn u_steps(&self) -> &[GridField] {
        &self.u
    }

    pub fn p_steps(&self) -> &[GridField] {
        &self.p
    }

    pub fn reports(&self) -> &[StepReport] {
        &self.reports
    }

    pub fn push(&mut self, u: GridField, p: GridField, report: StepReport) -> Result<()> {
        if u.grid() != self.u[0].grid() || p.grid() != self.u[0].grid() {
            return Err(Error::GridMismatch);
        }
        self.u.push(u);
        self.p.push(p);
        self.reports.push(report);
        Ok(())
    }
}

/// Per-run precomputation: weights and the diagonal symbols of both solves.
#[derive(Debug, Clone)]
pub struct Stepper {
    config: SolverConfig,
    weights: CaputoWeights,
    /// `Γ(α) τ^(-α)`.
    c: f64,
    pressure_symbol: Vec<f64>,
    density_symbol: Vec<f64>,
    derivative: Vec<[Complex64; 3]>,
}

impl Stepper {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid;
        let weights = build_weights(config.alpha, config.time.n_steps())?;
        let c = config.alpha.gamma() / config.time.tau().powf(config.alpha.value());
        let mut pressure_symbol = Vec::with_capacity(grid.len());
        let mut density_symbol = Vec::with_capacity(grid.len());
        let mut derivative = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let k2 = grid.norm_sq(i);
            let frac = if k2 == 0.0 { 0.0 } else { k2.powf(config.s) };
            pressure_symbol.push(c + frac + config.eps * k2);
            density_symbol.push(c + config.rho * k2);
            let n = grid.wavevector(i);
            derivative.push(n.map(|nj| {
                if grid.is_nyquist(nj) {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, nj as f64)
                }
            }));
        }
        Ok(Self { config: config.clone(), weights, c, pressure_symbol, density_symbol, derivative })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn weights(&self) -> &CaputoWeights {
        &self.weights
    }

    /// Spectrum of `Σ_{j=0}^{k-2} λ_{k-j}(f_{j+1} - f_j) - f_{k-1}`: the part of
    /// `τ^α/Γ(α) (D_τ f)_k` that does not involve `f_k`.
    fn memory(&self, fields: &[GridField], k: usize) -> Vec<Complex64> {
        let n = self.config.grid.len();
        let mut acc = vec![Complex64::default(); n];
        for j in 0..k.saturating_sub(1) {
            let lam = self.weights.lambda(k - j);
            let (a, b) = (fields[j + 1].spectrum().coeffs(), fields[j].spectrum().coeffs());
            for i in 0..n {
                acc[i] += lam * (a[i] - b[i]);
            }
        }
        for (x, y) in acc.iter_mut().zip(fields[k - 1].spectrum().coeffs()) {
            *x -= y;
        }
        acc
    }

    fn solve_pressure(&self, z: &GridField, mem_p: &[Complex64]) -> GridField {
        let sq = dealias(z.zip_map(z, |a, b| a * b).expect("same grid").spectrum());
        let coeffs = sq
            .coeffs()
            .iter()
            .zip(mem_p)
            .zip(&self.pressure_symbol)
            .map(|((r, m), d)| (r - self.c * m) / d)
            .collect();
        Spectrum::from_coeffs(self.config.grid, coeffs).expect("grid length").to_field()
    }

    fn solve_density(&self, z: &GridField, p: &GridField, mem_u: &[Complex64]) -> GridField {
        let grid = self.config.grid;
        let z_plus = z.map(|x| x.max(0.0));
        let p_hat = p.spectrum().coeffs();
        let mut div = vec![Complex64::default(); grid.len()];
        for j in 0..grid.dim() {
            let dp: Vec<Complex64> = p_hat.iter().zip(&self.derivative).map(|(c, d)| c * d[j]).collect();
            let dp = Spectrum::from_coeffs(grid, dp).expect("grid length").to_field();
            let flux = z_plus.zip_map(&dp, |a, b| a * b).expect("same grid");
            let flux = dealias(flux.spectrum());
            for ((acc, f), d) in div.iter_mut().zip(flux.coeffs()).zip(&self.derivative) {
                *acc += d[j] * f;
            }
        }
        let coeffs = div
            .iter()
            .zip(mem_u)
            .zip(&self.density_symbol)
            .map(|((r, m), d)| (r - self.c * m) / d)
            .collect();
        Spectrum::from_coeffs(grid, coeffs).expect("grid length").to_field()
    }

    fn check_history(&self, history: &History, k: usize) -> Result<()> {
        let n = self.config.time.n_steps();
        if k == 0 || k > n || history.len() != k {
            return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: n.min(history.len()) });
        }
        if history.u(0).grid() != self.config.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Pressure at step `k` given the density iterate `z`:
    /// `(c + |n|^(2s) + ε|n|²) p̂_k = (z²)^ - c·memory^`.
    pub fn pressure_step(&self, history: &History, k: usize, z: &GridField) -> Result<GridField> {
        self.check_history(history, k)?;
        z.same_grid(history.u(0))?;
        Ok(self.solve_pressure(z, &self.memory(history.p_steps(), k)))
    }

    /// Density at step `k` given the iterate `z` and the matching pressure:
    /// `(c + ϱ|n|²) û_k = div(z⁺ ∇p_k)^ - c·memory^`.
    pub fn density_step(&self, history: &History, k: usize, z: &GridField, p_k: &GridField) -> Result<GridField> {
        self.check_history(history, k)?;
        z.same_grid(p_k)?;
        z.same_grid(history.u(0))?;
        Ok(self.solve_density(z, p_k, &self.memory(history.u_steps(), k)))
    }

    /// Fixed-point iteration for step `k`, started from `u_{k-1}`.
    pub fn picard_solve(&self, history: &History, k: usize) -> Result<(GridField, GridField, StepReport)> {
        self.check_history(history, k)?;
        let mem_u = self.memory(history.u_steps(), k);
        let mem_p = self.memory(history.p_steps(), k);
        let theta = self.config.picard_damping;
        let mut z = history.u(k - 1).clone();
        let mut residuals = Vec::new();
        for it in 1..=self.config.picard_max {
            let p = self.solve_pressure(&z, &mem_p);
            let mut next = self.solve_density(&z, &p, &mem_u);
            if theta < 1.0 {
                next.scale(theta);
                next.add_scaled(1.0 - theta, &z);
            }
            let r = GridField::difference(&next, &z).norm();
            residuals.push(r);
            z = next;
            if !r.is_finite() {
                break;
            }
            if r <= self.config.picard_tol {
                let p = self.solve_pressure(&z, &mem_p);
                let report = StepReport {
                    k,
                    picard_iters: it,
                    picard_residual: r,
                    min_u: z.min(),
                    min_p: p.min(),
                    mean_u: z.mean(),
                };
                return Ok((z, p, report));
            }
        }
        Err(Error::NonConvergence {
            step: k,
            iterations: residuals.len(),
            last: residuals.last().copied().unwrap_or(f64::NAN),
            residuals,
        })
    }

    /// Fixed-point defect of a stored step, measured in solution units:
    /// `‖T_u(u_k, p_k) - u_k‖ + ‖T_p(u_k) - p_k‖`. Equivalently, the weak-form
    /// residual against every retained mode, each divided by its diagonal
    /// symbol.
    pub fn step_defect(&self, history: &History, k: usize) -> Result<f64> {
        if k == 0 || k >= history.len() {
            return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: history.len() - 1 });
        }
        let mem_u = self.memory(history.u_steps(), k);
        let mem_p = self.memory(history.p_steps(), k);
        let (u, p) = (history.u(k), history.p(k));
        let du = GridField::difference(&self.solve_density(u, p, &mem_u), u).norm();
        let dp = GridField::difference(&self.solve_pressure(u, &mem_p), p).norm();
        Ok(du + dp)
    }
}

fn check_initial(field: &GridField, name: &'static str) -> Result<()> {
    match field.samples().iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        Some(node) => Err(Error::InvalidInitialData { field: name, node, value: field.samples()[node] }),
        None => Ok(()),
    }
}

/// Run all steps, calling `observe(k, u_k, p_k)` after each one.
pub fn run_observed(
    config: &SolverConfig,
    u_in: GridField,
    p_in: GridField,
    mut observe: impl FnMut(usize, &GridField, &GridField) -> Result<()>,
) -> Result<(History, EnergyLedger)> {
    let stepper = Stepper::new(config)?;
    if u_in.grid() != config.grid || p_in.grid() != config.grid {
        return Err(Error::GridMismatch);
    }
    check_initial(&u_in, "u_in")?;
    check_initial(&p_in, "p_in")?;
    observe(0, &u_in, &p_in)?;
    let mut ledger = EnergyLedger::start(config, &u_in, &p_in)?;
    let mut history = History::new(u_in, p_in)?;
    for k in 1..=config.time.n_steps() {
        let (mut u, mut p, report) = stepper.picard_solve(&history, k)?;
        if config.clip_negative && (u.min() < 0.0 || p.min() < 0.0) {
            u = u.map(|x| x.max(0.0));
            p = p.map(|x| x.max(0.0));
            ledger.decertify();
        }
        observe(k, &u, &p)?;
        ledger.record(&u, &p, report.picard_iters)?;
        history.push(u, p, report)?;
    }
    Ok((history, ledger))
}

/// Run all steps from positive initial data.
pub fn run(config: &SolverConfig, u_in: GridField, p_in: GridField) -> Result<(History, EnergyLedger)> {
    run_observed(config, u_in, p_in, |_, _, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn base_config(alpha: f64, d: usize, m: usize, tau: f64, n: usize) -> SolverConfig {
        SolverConfig::new(
            FractionalOrder::new(alpha).unwrap(),
            0.75,
            TorusGrid::new(d, m).unwrap(),
            TimeGrid::new(tau, n).unwrap(),
        )
        .with_viscosity(1e-2, 1e-2)
    }

    #[test]
    fn validation() {
        let mut c = base_config(0.5, 1, 16, 0.1, 4);
        assert!(c.validate().is_ok());
        c.s = 1.5;
        assert!(c.validate().is_err());
        c.s = 0.5;
        c.picard_damping = 0.0;
        assert!(c.validate().is_err());
        c.picard_damping = 1.0;
        c.rho = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn constant_history_pressure_is_stationary() {
        let cfg = base_config(0.6, 1, 16, 0.1, 4);
        let stepper = Stepper::new(&cfg).unwrap();
        let g = cfg.grid;
        let c = 2.5;
        let mut h = History::new(GridField::constant(g, 0.0), GridField::constant(g, c)).unwrap();
        let report = StepReport { k: 1, picard_iters: 1, picard_residual: 0.0, min_u: 0.0, min_p: c, mean_u: 0.0 };
        h.push(GridField::constant(g, 0.0), GridField::constant(g, c), report).unwrap();
        let p = stepper.pressure_step(&h, 2, &GridField::constant(g, 0.0)).unwrap();
        assert!(p.samples().iter().all(|x| (x - c).abs() < 1e-13));
        let u = stepper
            .density_step(&h, 2, &GridField::constant(g, 0.0), &p)
            .unwrap();
        assert!(u.samples().iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn first_step_with_constant_density() {
        let cfg = base_config(0.4, 1, 16, 0.05, 3);
        let stepper = Stepper::new(&cfg).unwrap();
        let (a, c) = (1.3, 0.7);
        let h = History::new(GridField::constant(cfg.grid, a), GridField::constant(cfg.grid, c)).unwrap();
        let p = stepper.pressure_step(&h, 1, &GridField::constant(cfg.grid, a)).unwrap();
        let expect = c + 0.05f64.powf(0.4) / cfg.alpha.gamma() * a * a;
        assert!(p.samples().iter().all(|x| (x - expect).abs() < 1e-13));
    }

    #[test]
    fn history_index_is_checked() {
        let cfg = base_config(0.5, 1, 16, 0.1, 4);
        let stepper = Stepper::new(&cfg).unwrap();
        let h = History::new(GridField::constant(cfg.grid, 1.0), GridField::constant(cfg.grid, 1.0)).unwrap();
        assert!(stepper.picard_solve(&h, 2).is_err());
        assert!(stepper.picard_solve(&h, 0).is_err());
        assert!(stepper.picard_solve(&h, 1).is_ok());
    }

    #[test]
    fn zero_density_converges_immediately() {
        let cfg = base_config(0.5, 1, 16, 0.1, 4);
        let stepper = Stepper::new(&cfg).unwrap();
        let g = cfg.grid;
        let h = History::new(GridField::constant(g, 0.0), GridField::from_fn(g, |x| 1.0 + 0.2 * x[0].cos())).unwrap();
        let (u, _, report) = stepper.picard_solve(&h, 1).unwrap();
        assert_eq!(report.picard_iters, 1);
        assert!(u.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_non_positive_initial_data() {
        let cfg = base_config(0.5, 1, 16, 0.1, 2);
        let u = GridField::from_fn(cfg.grid, |x| x[0].cos());
        let p = GridField::constant(cfg.grid, 1.0);
        match run(&cfg, u, p) {
            Err(Error::InvalidInitialData { field: "u_in", node, value }) => {
                assert!(value <= 0.0);
                assert!(node > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_data_follow_scalar_recursion() {
        let (tau, n, alpha) = (1.0 / 16.0, 8, 0.5);
        let cfg = base_config(alpha, 1, 16, tau, n);
        let (a, c) = (1.0, 1.0);
        let (hist, ledger) = run(&cfg, GridField::constant(cfg.grid, a), GridField::constant(cfg.grid, c)).unwrap();
        let g = cfg.alpha.gamma();
        for k in 1..=n {
            assert!(hist.u(k).samples().iter().all(|x| (x - a).abs() < 1e-13));
            let s: f64 = (1..=k).map(|i| ((k - i + 1) as f64).powf(alpha - 1.0)).sum();
            let expect = c + tau.powf(alpha) / g * a * a * s;
            assert!((hist.p(k).mean() - expect).abs() < 1e-12);
            assert!((ledger.rows()[k].h - TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn damping_reaches_same_fixed_point() {
        let mut cfg = base_config(0.5, 1, 32, 1.0 / 32.0, 4);
        let u = GridField::from_fn(cfg.grid, |x| 1.0 + 0.5 * x[0].cos());
        let p = GridField::from_fn(cfg.grid, |x| 1.0 + 0.3 * x[0].cos());
        let (h1, _) = run(&cfg, u.clone(), p.clone()).unwrap();
        cfg.picard_damping = 0.7;
        cfg.picard_tol = 1e-12;
        let (h2, _) = run(&cfg, u, p).unwrap();
        let d = GridField::difference(h1.u(4), h2.u(4)).norm();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn non_convergence_carries_residuals() {
        let mut cfg = base_config(0.5, 1, 32, 1.0 / 32.0, 4);
        cfg.picard_max = 2;
        cfg.picard_tol = 1e-15;
        let u = GridField::from_fn(cfg.grid, |x| 1.0 + 0.5 * x[0].cos());
        let p = GridField::from_fn(cfg.grid, |x| 1.0 + 0.3 * x[0].cos());
        match run(&cfg, u, p) {
            Err(Error::NonConvergence { step: 1, iterations: 2, residuals, .. }) => assert_eq!(residuals.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
