//! Seeded verification suites over the whole library. Each suite is a list
//! of named checks with the observed value and the limit it is held to.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::caputo::{
    build_weights, discrete_ibp_residual, discrete_ibp_terms, ftc_reconstruct_backward, ftc_reconstruct_forward,
    left_caputo, right_caputo, CaputoWeights, FractionalOrder, SampledPath, TestFunction, TimeGrid,
};
use crate::compactness::{
    combined_shift_check, interpolant_shift_check, mu_coefficient_scan, mu_envelope, piecewise_shift_check,
    LinearInterpolant,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::oracle::{continuous_left_caputo, ibp_continuous_terms, SmoothFunction};
use crate::rng::{seeded, SuiteRng, DEFAULT_SEED};
use crate::solver::{diagnostics, run};
use crate::spectral::{frac_laplacian, laplacian, GridField, TorusGrid};
use crate::value::LpExponent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Weights,
    Caputo,
    Ibp,
    Compactness,
    Spectral,
    Solver,
    All,
}

impl Suite {
    const EACH: [Suite; 6] = [Suite::Weights, Suite::Caputo, Suite::Ibp, Suite::Compactness, Suite::Spectral, Suite::Solver];

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::EACH.to_vec(),
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "weights" => Suite::Weights,
            "caputo" => Suite::Caputo,
            "ibp" => Suite::Ibp,
            "compactness" => Suite::Compactness,
            "spectral" => Suite::Spectral,
            "solver" => Suite::Solver,
            "all" => Suite::All,
            _ => return Err(Error::InvalidConfig(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Weights => "weights",
            Suite::Caputo => "caputo",
            Suite::Ibp => "ibp",
            Suite::Compactness => "compactness",
            Suite::Spectral => "spectral",
            Suite::Solver => "solver",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Add `delta` to `λ_k` in every weight table the suites build; used to
    /// confirm that the checks notice a broken table.
    pub perturb_weight: Option<(usize, f64)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, perturb_weight: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub first_failure: Option<String>,
    pub checks: Vec<Check>,
}

struct Checks {
    suite: Suite,
    out: Vec<Check>,
}

impl Checks {
    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        let passed = value <= limit;
        self.out.push(Check { suite: self.suite, name: name.into(), passed, value, limit });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.out.push(Check { suite: self.suite, name: name.into(), passed: ok, value: f64::from(u8::from(!ok)), limit: 0.0 });
    }
}

const ALPHAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).expect("suite orders are valid")
}

fn weights(a: f64, n: usize, opts: &VerifyOptions) -> Result<CaputoWeights> {
    let w = build_weights(order(a), n)?;
    Ok(match opts.perturb_weight {
        Some((k, delta)) if k >= 1 && k <= n => {
            let mut raw = w.as_slice().to_vec();
            raw[k - 1] += delta;
            CaputoWeights::from_raw(order(a), raw)
        }
        _ => w,
    })
}

fn random_path(rng: &mut SuiteRng, n: usize) -> SampledPath<f64> {
    let grid = TimeGrid::from_horizon(1.0, n).expect("positive step count");
    SampledPath::new(grid, (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("length n + 1")
}

fn rel_max_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0, |m: f64, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn suite_weights(c: &mut Checks, opts: &VerifyOptions) -> Result<()> {
    let n = 10_000;
    for a in ALPHAS {
        let w = weights(a, n, opts)?;
        let lam = w.as_slice();
        c.at_most(format!("identity alpha={a}"), w.max_identity_residual(), 1e-10);
        c.flag(format!("strictly decreasing alpha={a}"), lam.windows(2).all(|p| p[1] < p[0]));
        let excess = lam.iter().enumerate().map(|(i, l)| l - ((i + 1) as f64).powf(-a)).fold(f64::NEG_INFINITY, f64::max);
        c.at_most(format!("lambda_k <= k^-alpha alpha={a}"), excess, 0.0);
    }
    let w = weights(1.0, 64, opts)?;
    c.flag("classical weights", w.lambda(1) == 1.0 && w.as_slice()[1..].iter().all(|&l| l == 0.0));
    Ok(())
}

fn suite_caputo(c: &mut Checks, rng: &mut SuiteRng, opts: &VerifyOptions) -> Result<()> {
    let w1 = weights(1.0, 128, opts)?;
    let mut mismatches = 0usize;
    for _ in 0..100 {
        let f = random_path(rng, 128);
        let df = left_caputo(&f, &w1)?;
        let tau = f.grid().tau();
        let v = f.values();
        mismatches += (1..=128).filter(|&k| df.value(k).to_bits() != ((v[k] - v[k - 1]) / tau).to_bits()).count();
    }
    c.at_most("classical limit is the backward difference", mismatches as f64, 0.0);

    let tables: Vec<CaputoWeights> = ALPHAS.iter().map(|&a| weights(a, 64, opts)).collect::<Result<_>>()?;
    let (mut fwd, mut bwd) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let w = &tables[i % tables.len()];
        let f = random_path(rng, 64);
        let back = ftc_reconstruct_forward(&left_caputo(&f, w)?, f.initial(), w)?;
        fwd = fwd.max(rel_max_error(back.values(), f.values()));
        let back = ftc_reconstruct_backward(&right_caputo(&f, w)?, f.last(), w)?;
        bwd = bwd.max(rel_max_error(back.values(), f.values()));
    }
    c.at_most("forward reconstruction", fwd, 1e-12);
    c.at_most("backward reconstruction", bwd, 1e-12);

    for a in [0.3, 0.5, 0.8] {
        for (label, coeffs) in [("t", vec![0.0, 1.0]), ("t^2", vec![0.0, 0.0, 1.0])] {
            let f = SmoothFunction::polynomial(coeffs, 1.0)?;
            let mut errs = Vec::new();
            for n in [16, 32, 64, 128] {
                let grid = TimeGrid::from_horizon(1.0, n)?;
                let df = left_caputo(&SampledPath::from_fn(grid, |t| f.eval(t)), &weights(a, n, opts)?)?;
                let mut e = 0.0f64;
                for k in 1..=n {
                    e = e.max((df.value(k) - continuous_left_caputo(&f, grid.time(k), order(a))?).abs());
                }
                errs.push(e);
            }
            let worst_ratio = errs.windows(2).map(|p| p[1] / p[0]).fold(0.0, f64::max);
            c.at_most(format!("oracle convergence f={label} alpha={a}"), worst_ratio, 1.0 - f64::EPSILON);
        }
    }
    Ok(())
}

fn suite_ibp(c: &mut Checks, rng: &mut SuiteRng, opts: &VerifyOptions) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let a = ALPHAS[i % ALPHAS.len()];
        let f = random_path(rng, 16);
        let phi = TestFunction::Polynomial((0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
        worst = worst.max(discrete_ibp_residual(&f, &phi, &weights(a, 16, opts)?)?);
    }
    c.at_most("discrete identity", worst, 1e-10);

    let fc = [1.0, 0.5, -0.8, 0.3];
    let pc = [0.7, 1.0, -0.4];
    for a in [0.5, 0.8] {
        let cont = ibp_continuous_terms(
            &SmoothFunction::polynomial(fc.to_vec(), 1.0)?,
            &SmoothFunction::polynomial(pc.to_vec(), 1.0)?,
            order(a),
        )?;
        let grid = TimeGrid::from_horizon(1.0, 256)?;
        let f = SampledPath::from_fn(grid, |t| fc.iter().rev().fold(0.0, |acc, &x| acc * t + x));
        let d = discrete_ibp_terms(&f, &TestFunction::Polynomial(pc.to_vec()), &weights(a, 256, opts)?)?;
        let scale = [cont.lhs, cont.interior, cont.end, cont.start].iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        let err = [d.lhs - cont.lhs, d.interior - cont.interior, d.end - cont.end, d.start - cont.start]
            .iter()
            .fold(0.0, |m: f64, x| m.max(x.abs()))
            / scale;
        c.at_most(format!("terms near continuous limit alpha={a}"), err, 0.05);
    }
    Ok(())
}

fn suite_compactness(c: &mut Checks, rng: &mut SuiteRng, opts: &VerifyOptions) -> Result<()> {
    let exps = [LpExponent::One, LpExponent::Two, LpExponent::Inf];
    let sizes = [8, 16, 32];
    let tables: Vec<Vec<CaputoWeights>> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&a| sizes.iter().map(|&n| weights(a, n, opts)).collect())
        .collect::<Result<_>>()?;
    let (mut jump, mut interp, mut combined) = ([0.0f64; 3], [0.0f64; 3], [0.0f64; 3]);
    for i in 0..1000 {
        let w = &tables[i % 3][(i / 3) % 3];
        let f = random_path(rng, sizes[(i / 3) % 3]);
        let li = LinearInterpolant::new(f.clone());
        let h = rng.random_range(0.05..2.0) * f.grid().tau();
        for (e, &p) in exps.iter().enumerate() {
            jump[e] = jump[e].max(piecewise_shift_check(&f, w, p)?.ratio);
            interp[e] = interp[e].max(interpolant_shift_check(&li, w.order(), h, p)?.ratio);
            combined[e] = combined[e].max(combined_shift_check(&li, w, h, p)?.ratio);
        }
    }
    for (e, p) in exps.iter().enumerate() {
        c.at_most(format!("tau-jump estimate p={p}"), jump[e], 1.0 + 1e-9);
        c.at_most(format!("interpolant shift p={p}"), interp[e], 1.0 + 1e-9);
        c.at_most(format!("combined shift p={p}"), combined[e], 1.0 + 1e-9);
    }
    for a in [0.25, 0.5, 0.75] {
        let worst = [8, 32, 128]
            .iter()
            .map(|&n| mu_coefficient_scan(order(a), n, 16))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        c.at_most(format!("mu coefficients alpha={a}"), worst, mu_envelope(order(a)));
    }
    Ok(())
}

fn random_field(rng: &mut SuiteRng, grid: TorusGrid) -> GridField {
    GridField::new(grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("grid-sized samples")
}

fn suite_spectral(c: &mut Checks, rng: &mut SuiteRng) -> Result<()> {
    let grid = TorusGrid::new(2, 32)?;
    let mut eig = 0.0f64;
    for _ in 0..10 {
        let s = rng.random_range(0.05..1.0);
        let n = [rng.random_range(-10i64..=10), rng.random_range(-10i64..=10)];
        let norm2 = (n[0] * n[0] + n[1] * n[1]) as f64;
        let f = GridField::from_fn(grid, |x| (n[0] as f64 * x[0] + n[1] as f64 * x[1]).cos());
        let lf = frac_laplacian(&f, s)?;
        let expect = f.map(|v| norm2.powf(s) * v);
        let diff = lf.samples().iter().zip(expect.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        eig = eig.max(diff / norm2.powf(s).max(1.0));
    }
    c.at_most("fractional Laplacian eigenfunctions", eig, 1e-12);

    let (mut parseval, mut lap) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let f = random_field(rng, grid);
        let physical = f.inner(&f)?;
        let spectral = grid.volume() * f.spectrum().energy();
        parseval = parseval.max((physical - spectral).abs() / physical);
        let a = frac_laplacian(&f, 1.0)?;
        let b = laplacian(&f).map(|v| -v);
        lap = lap.max(rel_max_error(a.samples(), b.samples()));
    }
    c.at_most("Parseval", parseval, 1e-10);
    c.at_most("s = 1 matches the Laplacian", lap, 1e-12);
    Ok(())
}

fn suite_solver(c: &mut Checks) -> Result<()> {
    let (cfg, u, p) = RunConfig::smooth_default().prepare()?;
    let (history, ledger) = run(&cfg, u, p)?;
    let report = diagnostics(&history, &ledger, &cfg)?;
    for v in &report.verdicts {
        c.out.push(Check { suite: c.suite, name: format!("smooth run {}", v.name), passed: v.passed, value: v.worst, limit: v.limit });
    }
    c.flag("smooth run certified", report.certified);

    let mut constants = RunConfig::smooth_default();
    constants.points = 16;
    constants.u_init.modes.clear();
    constants.p_init.modes.clear();
    let (cfg, u, p) = constants.prepare()?;
    let (history, ledger) = run(&cfg, u, p)?;
    let (alpha, tau) = (cfg.alpha.value(), cfg.time.tau());
    let mut err = 0.0f64;
    for k in 1..history.len() {
        let s: f64 = (1..=k).map(|i| ((k - i + 1) as f64).powf(alpha - 1.0)).sum();
        let expect = 1.0 + tau.powf(alpha) / cfg.alpha.gamma() * s;
        err = err.max((history.p(k).mean() - expect).abs());
        err = err.max((ledger.rows()[k].h - cfg.grid.volume()).abs());
    }
    c.at_most("constant data follow the scalar recursion", err, 1e-11);
    Ok(())
}

/// Run `suite` (or every suite) with the given options.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<VerifySummary> {
    let mut rng = seeded(opts.seed);
    let mut checks = Vec::new();
    for member in suite.members() {
        let mut c = Checks { suite: member, out: Vec::new() };
        match member {
            Suite::Weights => suite_weights(&mut c, opts)?,
            Suite::Caputo => suite_caputo(&mut c, &mut rng, opts)?,
            Suite::Ibp => suite_ibp(&mut c, &mut rng, opts)?,
            Suite::Compactness => suite_compactness(&mut c, &mut rng, opts)?,
            Suite::Spectral => suite_spectral(&mut c, &mut rng)?,
            Suite::Solver => suite_solver(&mut c)?,
            Suite::All => unreachable!("expanded by members"),
        }
        checks.extend(c.out);
    }
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| format!("{}: {}", c.suite, c.name));
    Ok(VerifySummary { suite, seed: opts.seed, passed: first_failure.is_none(), first_failure, checks })
}
