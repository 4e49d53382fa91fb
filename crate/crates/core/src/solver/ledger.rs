use std::io::Write;

use super::{History, SolverConfig, Stepper};
use crate::caputo::{left_caputo, SampledPath};
use crate::error::Result;
use crate::spectral::{energy, hs_seminorm, lp_norm, GridField};
use crate::value::LpExponent;

/// Energy-inequality slack allowed for Picard truncation.
pub const ENERGY_TOL: f64 = 1e-6;
/// Mass drift allowed over a run.
pub const MASS_TOL: f64 = 1e-12;

/// One ledger line.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LedgerRow {
    pub step: usize,
    pub t: f64,
    /// `H[u_k, p_k] = ∫ u² + ½|∇p|²`.
    pub h: f64,
    /// Discrete fractional integral of the dissipation up to step k.
    pub s: f64,
    /// `ϱ‖∇u_k‖²`.
    pub d_u: f64,
    /// `½‖(-Δ)^(s/2)∇p_k‖²`.
    pub d_p: f64,
    /// `(ε/2)‖Δp_k‖²`.
    pub d_e: f64,
    pub mean_u: f64,
    pub mean_p: f64,
    pub min_u: f64,
    pub min_p: f64,
    /// `Σ_{i≤k} τ‖u_i‖³_{L³}`.
    pub l3_accum: f64,
    pub picard_iters: usize,
}

/// Per-step energy, dissipation and monitor values of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EnergyLedger {
    rows: Vec<LedgerRow>,
    certified: bool,
    #[serde(skip)]
    params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Params {
    tau: f64,
    alpha: f64,
    gamma: f64,
    s: f64,
    rho: f64,
    eps: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self { tau: 1.0, alpha: 1.0, gamma: 1.0, s: 1.0, rho: 0.0, eps: 0.0 }
    }
}

impl EnergyLedger {
    pub(crate) fn start(config: &SolverConfig, u_in: &GridField, p_in: &GridField) -> Result<Self> {
        let params = Params {
            tau: config.time.tau(),
            alpha: config.alpha.value(),
            gamma: config.alpha.gamma(),
            s: config.s,
            rho: config.rho,
            eps: config.eps,
        };
        let mut ledger = Self { rows: Vec::new(), certified: true, params };
        let row = ledger.make_row(0, u_in, p_in, 0)?;
        ledger.rows.push(row);
        Ok(ledger)
    }

    fn make_row(&self, step: usize, u: &GridField, p: &GridField, picard_iters: usize) -> Result<LedgerRow> {
        let pr = self.params;
        let d_u = pr.rho * hs_seminorm(u, 1.0).powi(2);
        let d_p = 0.5 * hs_seminorm(p, pr.s + 1.0).powi(2);
        let d_e = 0.5 * pr.eps * hs_seminorm(p, 2.0).powi(2);
        let l3_prev = self.rows.last().map_or(0.0, |r| r.l3_accum);
        let l3_accum = if step == 0 { 0.0 } else { l3_prev + pr.tau * lp_norm(u, LpExponent::Three).powi(3) };
        let mut row = LedgerRow {
            step,
            t: step as f64 * pr.tau,
            h: energy(u, p)?,
            s: 0.0,
            d_u,
            d_p,
            d_e,
            mean_u: u.mean(),
            mean_p: p.mean(),
            min_u: u.min(),
            min_p: p.min(),
            l3_accum,
            picard_iters,
        };
        if step > 0 {
            // (τ^α/Γ_α) Σ_{i=1}^k (k-i+1)^(α-1) D(i)
            let sum: f64 = self.rows[1..]
                .iter()
                .map(|r| r.d_u + r.d_p + r.d_e)
                .chain(std::iter::once(d_u + d_p + d_e))
                .enumerate()
                .map(|(i, d)| ((step - i) as f64).powf(pr.alpha - 1.0) * d)
                .sum();
            row.s = pr.tau.powf(pr.alpha) / pr.gamma * sum;
        }
        Ok(row)
    }

    pub(crate) fn record(&mut self, u: &GridField, p: &GridField, picard_iters: usize) -> Result<()> {
        let row = self.make_row(self.rows.len(), u, p, picard_iters)?;
        self.rows.push(row);
        Ok(())
    }

    pub(crate) fn decertify(&mut self) {
        self.certified = false;
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    /// False once any step was clipped.
    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn initial_energy(&self) -> f64 {
        self.rows[0].h
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,t,H,S,mean_u,mean_p,min_u,min_p,l3_accum,picard_iters")?;
        for r in &self.rows {
            let cols = [r.t, r.h, r.s, r.mean_u, r.mean_p, r.min_u, r.min_p, r.l3_accum].map(format_float);
            writeln!(w, "{},{},{}", r.step, cols.join(","), r.picard_iters)?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal, switching to exponent form for very large or
/// small magnitudes.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || (x.is_finite() && (1e-4..1e15).contains(&x.abs())) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Pass/fail of one structural property of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Verdict {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    /// The limit it is compared with.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticsReport {
    pub verdicts: Vec<Verdict>,
    pub certified: bool,
    pub l3_accum: f64,
    pub max_picard_iters: usize,
}

impl DiagnosticsReport {
    pub fn all_passed(&self) -> bool {
        self.certified && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

fn verdict_le(name: &'static str, worst: f64, limit: f64) -> Verdict {
    Verdict { name, passed: worst <= limit, worst, limit }
}

/// Check a completed run against its structural properties: mass
/// conservation, the energy inequality, positivity, the pressure-mean bound,
/// the pressure zero-mode balance and the per-step fixed-point defect.
pub fn diagnostics(history: &History, ledger: &EnergyLedger, config: &SolverConfig) -> Result<DiagnosticsReport> {
    let rows = ledger.rows();
    let h0 = ledger.initial_energy();
    let mut verdicts = Vec::new();

    let mass0 = rows[0].mean_u;
    let drift = rows.iter().map(|r| (r.mean_u - mass0).abs()).fold(0.0, f64::max);
    verdicts.push(verdict_le("mass", drift, MASS_TOL));

    // step 0 is 0 by construction; report the stepped rows when there are any
    let stepped = if rows.len() > 1 { &rows[1..] } else { rows };
    let excess = stepped.iter().map(|r| (r.h + r.s) / h0 - 1.0).fold(f64::NEG_INFINITY, f64::max);
    verdicts.push(verdict_le("energy", excess, ENERGY_TOL));

    let lowest = rows.iter().map(|r| r.min_u.min(r.min_p)).fold(f64::INFINITY, f64::min);
    verdicts.push(Verdict { name: "positivity", passed: lowest >= -config.tol_pos, worst: lowest, limit: -config.tol_pos });

    let alpha = config.alpha.value();
    let big_t = config.time.horizon();
    let bound = rows[0].mean_p + h0 * big_t.powf(alpha) / (alpha * config.alpha.gamma() * config.grid.volume()) * (1.0 + ENERGY_TOL);
    let top = rows.iter().map(|r| r.mean_p).fold(f64::NEG_INFINITY, f64::max);
    verdicts.push(verdict_le("pressure_mean_bound", top, bound));

    // D_τ(mean p)_k = mean(u_k²)
    let means = SampledPath::new(config.time, history.p_steps().iter().map(GridField::mean).collect())?;
    let stepper = Stepper::new(config)?;
    let d_mean = left_caputo(&means, stepper.weights())?;
    let mut zero_mode = 0.0f64;
    for k in 1..history.len() {
        let sq = history.u(k).map(|x| x * x).mean();
        zero_mode = zero_mode.max((d_mean.value(k) - sq).abs() / sq.abs().max(1.0));
    }
    verdicts.push(verdict_le("pressure_zero_mode", zero_mode, 1e-10));

    let mut defect = 0.0f64;
    for k in 1..history.len() {
        defect = defect.max(stepper.step_defect(history, k)?);
    }
    verdicts.push(verdict_le("weak_form", defect, 10.0 * config.picard_tol));

    let picard = history.reports().iter().map(|r| r.picard_residual).fold(0.0, f64::max);
    verdicts.push(verdict_le("picard", picard, config.picard_tol));

    Ok(DiagnosticsReport {
        verdicts,
        certified: ledger.certified(),
        l3_accum: rows.last().map_or(0.0, |r| r.l3_accum),
        max_picard_iters: rows.iter().map(|r| r.picard_iters).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caputo::{FractionalOrder, TimeGrid};
    use crate::solver::run;
    use crate::spectral::TorusGrid;
    use std::f64::consts::TAU;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1e-7), "1e-7");
        assert_eq!(format_float(-2.5e20), "-2.5e20");
    }

    #[test]
    fn constant_run_diagnostics() {
        let cfg = SolverConfig::new(
            FractionalOrder::new(0.5).unwrap(),
            0.75,
            TorusGrid::new(1, 16).unwrap(),
            TimeGrid::from_horizon(0.5, 8).unwrap(),
        )
        .with_viscosity(1e-2, 1e-2);
        let a = 1.5;
        let (h, l) = run(&cfg, GridField::constant(cfg.grid, a), GridField::constant(cfg.grid, 1.0)).unwrap();
        let report = diagnostics(&h, &l, &cfg).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert!((report.l3_accum - 0.5 * TAU * a * a * a).abs() < 1e-12);
        assert!(l.rows().iter().all(|r| r.s == 0.0));

        let mut csv = Vec::new();
        l.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("step,t,H,S,mean_u,mean_p,min_u,min_p,l3_accum,picard_iters\n"));
        assert_eq!(text.lines().count(), 10);
    }
}
