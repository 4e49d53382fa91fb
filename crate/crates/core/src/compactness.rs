//! Shift estimates for piecewise-constant paths and their linear
//! interpolants, and the coefficient bounds that tie the interpolant's
//! continuous Caputo derivative to the discrete one.
//!
//! Two time conventions appear. The discrete derivative and the τ-jump
//! estimate read `f_k` on `((k-1)τ, kτ]`; the interpolant gap reads `f_n` on
//! `[t_n, t_{n+1})`, the cell on which the interpolant starts from `f_n`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::caputo::{left_caputo, CaputoWeights, FractionalOrder, SampledPath};
use crate::error::{Error, Result};
use crate::quadrature::GAUSS4;
use crate::special::zeta;
use crate::value::{CompensatedSum, LpExponent, PathValue};

/// Evaluation points per τ-cell for time norms of the interpolant derivative.
pub const MESH_PER_CELL: usize = 16;

/// One side of a shift estimate and the bound it is compared with.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShiftReport {
    pub h: f64,
    pub p: LpExponent,
    pub shift_norm: f64,
    pub derivative_norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl ShiftReport {
    fn new(h: f64, p: LpExponent, shift_norm: f64, derivative_norm: f64, bound: f64) -> Self {
        let ratio = if shift_norm == 0.0 { 0.0 } else { shift_norm / bound };
        Self { h, p, shift_norm, derivative_norm, bound, ratio }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.ratio <= 1.0 + tol
    }
}

fn check_exponent(p: LpExponent) -> Result<()> {
    if p == LpExponent::Three {
        Err(Error::domain("shift estimates are checked for p in {1, 2, inf}"))
    } else {
        Ok(())
    }
}

/// `‖·‖_{L^p}` of a piecewise-constant function given its per-cell norms.
fn cell_norm(norms: impl Iterator<Item = f64>, tau: f64, p: LpExponent) -> f64 {
    match p {
        LpExponent::Inf => norms.fold(0.0, f64::max),
        _ => {
            let e = p.as_f64();
            let s: CompensatedSum = norms.map(|x| x.powf(e)).collect();
            (tau * s.value()).powf(1.0 / e)
        }
    }
}

/// `2^(1+1/p)`, with `1/∞ = 0`.
fn jump_factor(p: LpExponent) -> f64 {
    2f64.powf(1.0 + 1.0 / p.as_f64())
}

/// `‖D_τ f‖_{L^p(0,T)}` for the piecewise-constant discrete derivative.
fn discrete_derivative_norm<V: PathValue>(path: &SampledPath<V>, weights: &CaputoWeights, p: LpExponent) -> Result<f64> {
    let df = left_caputo(path, weights)?;
    Ok(cell_norm(df.values()[1..].iter().map(PathValue::norm), path.grid().tau(), p))
}

/// τ-jump estimate: `‖f(·+τ) - f‖_{L^p(0,T-τ)}` against
/// `2^(1+1/p) τ^α/Γ(α) ‖D_τ f‖_{L^p(0,T)}`.
pub fn piecewise_shift_check<V: PathValue>(
    path: &SampledPath<V>,
    weights: &CaputoWeights,
    p: LpExponent,
) -> Result<ShiftReport> {
    check_exponent(p)?;
    let tau = path.grid().tau();
    let v = path.values();
    let shift = cell_norm((1..path.n_steps()).map(|k| V::difference(&v[k + 1], &v[k]).norm()), tau, p);
    let deriv = discrete_derivative_norm(path, weights, p)?;
    let order = weights.order();
    let bound = jump_factor(p) * tau.powf(order.value()) / order.gamma() * deriv;
    Ok(ShiftReport::new(tau, p, shift, deriv, bound))
}

/// Piecewise-linear interpolant of a sampled path.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInterpolant<V> {
    base: SampledPath<V>,
    increments: Vec<V>,
}

impl<V: PathValue> LinearInterpolant<V> {
    pub fn new(base: SampledPath<V>) -> Self {
        let increments = base.values().windows(2).map(|w| V::difference(&w[1], &w[0])).collect();
        Self { base, increments }
    }

    pub fn base(&self) -> &SampledPath<V> {
        &self.base
    }

    pub fn horizon(&self) -> f64 {
        self.base.grid().horizon()
    }

    /// `f_n + (t - t_n)/τ (f_{n+1} - f_n)` on `[t_n, t_{n+1}]`; clamped to `[0, T]`.
    pub fn eval(&self, t: f64) -> V {
        let grid = self.base.grid();
        let n_steps = grid.n_steps();
        let rho = (t / grid.tau()).clamp(0.0, n_steps as f64);
        let nearest = rho.round();
        if (rho - nearest).abs() <= 4.0 * f64::EPSILON * nearest {
            // grid times reproduce the samples exactly
            return self.base.value(nearest as usize).clone();
        }
        let n = (rho.floor() as usize).min(n_steps - 1);
        let mut v = self.base.value(n).clone();
        v.add_scaled(rho - n as f64, &self.increments[n]);
        v
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon()).contains(&t) {
            Ok(())
        } else {
            Err(Error::domain(format!("t = {t} outside [0, {}]", self.horizon())))
        }
    }
}

/// `x_+^(1-α)`.
fn g_pow(x: f64, one_minus_alpha: f64) -> f64 {
    if x > 0.0 {
        x.powf(one_minus_alpha)
    } else {
        0.0
    }
}

/// Continuous Caputo derivative of the linear interpolant, in closed form:
/// `τ^(-α)/((1-α)Γ(1-α)) Σ_n (f_{n+1} - f_n)(g_n(t) - g_{n+1}(t))` with
/// `g_n(t) = τ^(α-1)(t - t_n)_+^(1-α)`.
pub fn interpolant_caputo<V: PathValue>(interp: &LinearInterpolant<V>, order: FractionalOrder, t: f64) -> Result<V> {
    let gamma_c = order
        .gamma_complement()
        .ok_or_else(|| Error::domain("closed form needs alpha < 1; use the slope directly"))?;
    interp.check_time(t)?;
    let tau = interp.base.grid().tau();
    let alpha = order.value();
    let b = 1.0 - alpha;
    let rho = t / tau;
    let mut acc = interp.base.initial().zeros_like();
    let active = (rho.ceil() as usize).min(interp.increments.len());
    for (n, d) in interp.increments[..active].iter().enumerate() {
        let e = g_pow(rho - n as f64, b) - g_pow(rho - n as f64 - 1.0, b);
        acc.add_scaled(e, d);
    }
    acc.scale(tau.powf(-alpha) / (b * gamma_c));
    Ok(acc)
}

/// Evaluation mesh for time norms of functions that behave like
/// `(t - t_n)^(1-α)` just right of each node: every cell carries four graded
/// Gauss cells for `L^1`/`L^2` and [`MESH_PER_CELL`] uniform points plus the
/// nodes for `L^∞`. Coordinates are in units of τ.
struct Mesh {
    quad: Vec<(f64, f64)>,
    sup: Vec<f64>,
}

impl Mesh {
    fn new(alpha: f64, n_steps: usize) -> Self {
        let q = 1.0 / (1.0 - alpha);
        let sub = MESH_PER_CELL / GAUSS4.len();
        let mut quad = Vec::with_capacity(n_steps * MESH_PER_CELL);
        let mut sup = Vec::with_capacity(n_steps * MESH_PER_CELL + 1);
        for n in 0..n_steps {
            for i in 0..sub {
                let (a, b) = (i as f64 / sub as f64, (i + 1) as f64 / sub as f64);
                for (w, gw) in GAUSS4.mapped(a, b) {
                    quad.push((n as f64 + w.powf(q), gw * q * w.powf(q - 1.0)));
                }
            }
            for j in 0..MESH_PER_CELL {
                sup.push(n as f64 + j as f64 / MESH_PER_CELL as f64);
            }
        }
        sup.push(n_steps as f64);
        Self { quad, sup }
    }

    /// `‖v‖_{L^p(0, Nτ)}` from values at the mesh points.
    fn norm(&self, tau: f64, p: LpExponent, value_norm: impl Fn(f64) -> f64) -> f64 {
        match p {
            LpExponent::Inf => self.sup.iter().map(|&r| value_norm(r)).fold(0.0, f64::max),
            _ => {
                let e = p.as_f64();
                let s: CompensatedSum = self.quad.iter().map(|&(r, w)| w * value_norm(r).powf(e)).collect();
                (tau * s.value()).powf(1.0 / e)
            }
        }
    }
}

/// `‖D_t f̃‖_{L^p(0,T)}` on the evaluation mesh.
pub fn interpolant_caputo_norm<V: PathValue>(
    interp: &LinearInterpolant<V>,
    order: FractionalOrder,
    p: LpExponent,
) -> Result<f64> {
    check_exponent(p)?;
    if order.is_classical() {
        return Err(Error::domain("closed form needs alpha < 1"));
    }
    let grid = interp.base.grid();
    let tau = grid.tau();
    let mesh = Mesh::new(order.value(), grid.n_steps());
    let horizon = grid.horizon();
    Ok(mesh.norm(tau, p, |r| {
        let t = (r * tau).min(horizon);
        interpolant_caputo(interp, order, t).expect("mesh inside [0, T]").norm()
    }))
}

/// Integral of `‖a + θ(b-a)‖^e` over a segment of length `len`.
fn linear_segment_integral<V: PathValue>(a: &V, b: &V, len: f64, e: f64) -> f64 {
    let at = |theta: f64| {
        let mut v = a.clone();
        v.scale(1.0 - theta);
        v.add_scaled(theta, b);
        v.norm().powf(e)
    };
    // on each side of a sign change the integrand is a polynomial of degree ≤ 2
    match V::zero_crossing(a, b) {
        Some(c) => len * (GAUSS4.integrate(0.0, c, at) + GAUSS4.integrate(c, 1.0, at)) / 1.0,
        None => len * crate::quadrature::GAUSS8.integrate(0.0, 1.0, at),
    }
}

/// `‖f̃(·+h) - f̃‖_{L^p(0,T-h)}`, integrated piece by piece between the
/// breakpoints `t_n` and `t_n - h` where the difference is linear.
pub fn interpolant_shift_norm<V: PathValue>(interp: &LinearInterpolant<V>, h: f64, p: LpExponent) -> Result<f64> {
    check_exponent(p)?;
    let big_t = interp.horizon();
    if !(h > 0.0 && h < big_t) {
        return Err(Error::domain(format!("shift h = {h} must lie in (0, {big_t})")));
    }
    let end = big_t - h;
    let grid = interp.base.grid();
    let mut cuts = vec![0.0, end];
    for n in 1..grid.n_steps() {
        let t = grid.time(n);
        for c in [t, t - h] {
            if c > 0.0 && c < end {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * big_t);
    let diff = |t: f64| V::difference(&interp.eval(t + h), &interp.eval(t));
    let pieces = cuts.windows(2).map(|w| (w[0], w[1]));
    Ok(match p {
        LpExponent::Inf => cuts.iter().map(|&t| diff(t).norm()).fold(0.0, f64::max),
        _ => {
            let e = p.as_f64();
            let s: CompensatedSum = pieces
                .map(|(a, b)| linear_segment_integral(&diff(a), &diff(b), b - a, e))
                .collect();
            s.value().powf(1.0 / e)
        }
    })
}

/// Shift of the interpolant against `2h^α/(Γ(α)α) ‖D_t f̃‖_{L^p(0,T)}`.
pub fn interpolant_shift_check<V: PathValue>(
    interp: &LinearInterpolant<V>,
    order: FractionalOrder,
    h: f64,
    p: LpExponent,
) -> Result<ShiftReport> {
    let shift = interpolant_shift_norm(interp, h, p)?;
    let deriv = interpolant_caputo_norm(interp, order, p)?;
    let alpha = order.value();
    let bound = 2.0 * h.powf(alpha) / (order.gamma() * alpha) * deriv;
    Ok(ShiftReport::new(h, p, shift, deriv, bound))
}

/// `w_0 = 1`, `w_s = (s+1)^(α-1) - s^(α-1)`.
fn mu_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    for (s, ws) in w.iter_mut().enumerate().skip(1) {
        *ws = ((s + 1) as f64).powf(alpha - 1.0) - (s as f64).powf(alpha - 1.0);
    }
    w
}

/// `μ_k(t)` for `k = 1..=N` at `ρ = t/τ`:
/// `μ_k = Σ_{s=0}^{N-k} w_s ((ρ-s-k+1)_+^(1-α) - (ρ-s-k)_+^(1-α))`.
fn mu_row(alpha: f64, w: &[f64], rho: f64) -> Vec<f64> {
    let n = w.len();
    let b = 1.0 - alpha;
    // e_m = g_{m-1} - g_m, nonzero only while m - 1 < ρ
    let live = (rho.ceil() as usize).min(n);
    let e: Vec<f64> = (1..=live).map(|m| g_pow(rho - m as f64 + 1.0, b) - g_pow(rho - m as f64, b)).collect();
    (1..=n)
        .map(|k| {
            if k > live {
                return 0.0;
            }
            let s: CompensatedSum = (0..=live - k).map(|s| w[s] * e[s + k - 1]).collect();
            s.value()
        })
        .collect()
}

/// `max |μ_k(t)|` over `k = 1..N` and `eval_points` uniform points per
/// τ-cell (plus `t = T`).
pub fn mu_coefficient_scan(order: FractionalOrder, n_steps: usize, eval_points: usize) -> Result<f64> {
    if order.is_classical() {
        return Err(Error::domain("coefficient scan needs alpha < 1"));
    }
    if n_steps == 0 || eval_points == 0 {
        return Err(Error::domain("need at least one step and one evaluation point"));
    }
    let alpha = order.value();
    let w = mu_weights(alpha, n_steps);
    let mut best = 0.0f64;
    for n in 0..n_steps {
        for j in 0..eval_points {
            let rho = n as f64 + j as f64 / eval_points as f64;
            best = mu_row(alpha, &w, rho).iter().fold(best, |m, x| m.max(x.abs()));
        }
    }
    let last = mu_row(alpha, &w, n_steps as f64);
    Ok(last.iter().fold(best, |m, x| m.max(x.abs())))
}

/// Explicit bound on `|μ_k|`: `1 + 6 + α(1-α)ζ(1+α) + 1`.
pub fn mu_envelope(order: FractionalOrder) -> f64 {
    let a = order.value();
    8.0 + a * (1.0 - a) * zeta(1.0 + a).expect("1 + alpha > 1")
}

/// Schur-test constant for `D_t f̃ = Σ_k μ_k D_k / (Γ(1-α)Γ(α)(1-α))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SchurConstant {
    /// `sup_t Σ_k |μ_k(t)|` over the mesh.
    pub row_sup: f64,
    /// `max_k τ⁻¹ ∫ |μ_k|` with the mesh quadrature.
    pub col_sup: f64,
    /// `max(row_sup, col_sup) / (Γ(1-α)Γ(α)(1-α))`.
    pub constant: f64,
}

/// Empirical constant of the interpolant-versus-discrete derivative bound.
/// It depends only on α and N (μ_k is a function of t/τ); results are
/// cached per pair.
pub fn schur_constant(order: FractionalOrder, n_steps: usize) -> Result<SchurConstant> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), SchurConstant>>> = OnceLock::new();
    let gamma_c = order
        .gamma_complement()
        .ok_or_else(|| Error::domain("Schur constant needs alpha < 1"))?;
    let key = (order.value().to_bits(), n_steps);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&key) {
        return Ok(*c);
    }
    let alpha = order.value();
    let w = mu_weights(alpha, n_steps);
    let mesh = Mesh::new(alpha, n_steps);
    let mut row_sup = 0.0f64;
    let mut col = vec![0.0; n_steps];
    for &(rho, wt) in &mesh.quad {
        let mu = mu_row(alpha, &w, rho);
        row_sup = row_sup.max(mu.iter().map(|x| x.abs()).sum());
        for (c, m) in col.iter_mut().zip(&mu) {
            *c += wt * m.abs();
        }
    }
    for &rho in &mesh.sup {
        row_sup = row_sup.max(mu_row(alpha, &w, rho).iter().map(|x| x.abs()).sum());
    }
    let col_sup = col.iter().copied().fold(0.0, f64::max);
    let constant = row_sup.max(col_sup) / (gamma_c * order.gamma() * (1.0 - alpha));
    let c = SchurConstant { row_sup, col_sup, constant };
    cache.lock().unwrap().insert(key, c);
    Ok(c)
}

/// The interpolant shift estimate chained with the Schur bound, against
/// `2h^α/(Γ(α)α) · C_α · ‖D_τ f‖_{L^p(0,T)}`.
pub fn combined_shift_check<V: PathValue>(
    interp: &LinearInterpolant<V>,
    weights: &CaputoWeights,
    h: f64,
    p: LpExponent,
) -> Result<ShiftReport> {
    let order = weights.order();
    let shift = interpolant_shift_norm(interp, h, p)?;
    let deriv = discrete_derivative_norm(interp.base(), weights, p)?;
    let c = schur_constant(order, interp.base().n_steps())?.constant;
    let alpha = order.value();
    let bound = 2.0 * h.powf(alpha) / (order.gamma() * alpha) * c * deriv;
    Ok(ShiftReport::new(h, p, shift, deriv, bound))
}

/// Distance between the piecewise-constant path and its interpolant,
/// alongside the τ-shift it is compared with.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GapReport {
    pub p: LpExponent,
    /// `‖f - f̃‖_{L^p(0,T)}`.
    pub gap: f64,
    /// `‖f(·+τ) - f‖_{L^p(0,T-τ)}`.
    pub shift: f64,
}

impl GapReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.gap <= self.shift * (1.0 + tol)
    }
}

/// Gap between `f` (equal to `f_n` on `[t_n, t_{n+1})`) and its interpolant.
///
/// On cell `n` the gap is `θ(f_{n+1} - f_n)` for `θ ∈ [0, 1)`, giving exact
/// cell integrals `τ|Δ|/2` (p = 1), `τ|Δ|²/3` (p = 2), `|Δ|` (p = ∞). The
/// shift only sees `Δ_0..Δ_{N-2}`, so the comparison can fail when the last
/// increment dominates.
pub fn constant_to_piecewise_gap<V: PathValue>(interp: &LinearInterpolant<V>, p: LpExponent) -> Result<GapReport> {
    check_exponent(p)?;
    let tau = interp.base.grid().tau();
    let norms: Vec<f64> = interp.increments.iter().map(PathValue::norm).collect();
    let gap = match p {
        LpExponent::One => tau * norms.iter().sum::<f64>() / 2.0,
        LpExponent::Two => (tau * norms.iter().map(|x| x * x).sum::<f64>() / 3.0).sqrt(),
        _ => norms.iter().copied().fold(0.0, f64::max),
    };
    let shift = cell_norm(norms[..norms.len() - 1].iter().copied(), tau, p);
    Ok(GapReport { p, gap, shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caputo::{build_weights, TimeGrid};
    use crate::oracle::{continuous_left_caputo, SmoothFunction};
    use crate::rng::seeded;
    use crate::special::gamma_fn;
    use rand::Rng;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    fn random_path(n: usize, seed: u64) -> SampledPath<f64> {
        let mut rng = seeded(seed);
        let grid = TimeGrid::from_horizon(1.0, n).unwrap();
        SampledPath::new(grid, (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn constant_paths_give_zero_ratios() {
        let grid = TimeGrid::from_horizon(1.0, 16).unwrap();
        let f = SampledPath::from_fn(grid, |_| 2.0);
        let w = build_weights(order(0.5), 16).unwrap();
        let interp = LinearInterpolant::new(f.clone());
        for p in [LpExponent::One, LpExponent::Two, LpExponent::Inf] {
            assert_eq!(piecewise_shift_check(&f, &w, p).unwrap().ratio, 0.0);
            assert_eq!(interpolant_shift_check(&interp, order(0.5), 0.1, p).unwrap().ratio, 0.0);
            assert_eq!(constant_to_piecewise_gap(&interp, p).unwrap().gap, 0.0);
        }
        assert_eq!(interpolant_caputo(&interp, order(0.5), 0.7).unwrap(), 0.0);
    }

    #[test]
    fn rejects_cubic_exponent_and_bad_shift() {
        let f = random_path(8, 0);
        let w = build_weights(order(0.5), 8).unwrap();
        assert!(piecewise_shift_check(&f, &w, LpExponent::Three).is_err());
        let interp = LinearInterpolant::new(f);
        assert!(interpolant_shift_check(&interp, order(0.5), 1.0, LpExponent::One).is_err());
        assert!(interpolant_shift_check(&interp, order(0.5), 0.0, LpExponent::One).is_err());
        assert!(interpolant_caputo(&interp, order(1.0), 0.5).is_err());
        assert!(interpolant_caputo(&interp, order(0.5), 1.5).is_err());
    }

    #[test]
    fn interpolant_matches_nodes() {
        let f = random_path(10, 3);
        let interp = LinearInterpolant::new(f.clone());
        for k in 0..=10 {
            assert_eq!(interp.eval(f.grid().time(k)), *f.value(k));
        }
        let mid = interp.eval(0.15);
        assert!((mid - 0.5 * (f.value(1) + f.value(2))).abs() < 1e-15);
    }

    #[test]
    fn classical_jump_bound() {
        // α = 1, p = 1: bound is 4τ ‖backward difference‖_{L^1}
        let f = random_path(32, 9);
        let w = build_weights(order(1.0), 32).unwrap();
        let r = piecewise_shift_check(&f, &w, LpExponent::One).unwrap();
        let tau = f.grid().tau();
        let bd: f64 = (1..=32).map(|k| tau * ((f.value(k) - f.value(k - 1)) / tau).abs()).sum();
        assert!((r.bound - 4.0 * tau * bd).abs() < 1e-12);
        assert!(r.ratio <= 1.0);
    }

    #[test]
    fn single_jump_closed_form() {
        let grid = TimeGrid::new(0.25, 4).unwrap();
        let f = SampledPath::new(grid, vec![0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let interp = LinearInterpolant::new(f);
        let a = 0.4;
        for t in [0.01, 0.1, 0.25] {
            let got = interpolant_caputo(&interp, order(a), t).unwrap();
            let expect = t.powf(1.0 - a) / (0.25 * gamma_fn(2.0 - a).unwrap());
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let f = random_path(8, 21);
        let interp = LinearInterpolant::new(f.clone());
        let tau = f.grid().tau();
        // the interpolant's derivative is piecewise constant, so the reference
        // is assembled cell by cell from the quadrature oracle on linear pieces
        for t in [0.3, 0.61, 1.0] {
            let o = order(0.45);
            let got = interpolant_caputo(&interp, o, t).unwrap();
            let mut reference = 0.0;
            for n in 0..8 {
                let (a, b) = (n as f64 * tau, ((n + 1) as f64 * tau).min(t));
                if a >= t {
                    break;
                }
                let s = (f.value(n + 1) - f.value(n)) / tau;
                let seg = SmoothFunction::polynomial(vec![0.0, s], 1.0).unwrap();
                // ∫_a^b s (t-r)^(-α) dr = D(s·x)(t-a) - D(s·x)(t-b)
                let lo = continuous_left_caputo(&seg, t - a, o).unwrap();
                let hi = if t - b > 0.0 { continuous_left_caputo(&seg, t - b, o).unwrap() } else { 0.0 };
                reference += lo - hi;
            }
            assert!((got - reference).abs() < 1e-8, "{got} vs {reference}");
        }
    }

    #[test]
    fn shift_checks_on_random_paths() {
        for seed in 0..50 {
            let f = random_path(16 + (seed as usize % 3) * 24, seed);
            let n = f.n_steps();
            let o = order([0.25, 0.5, 0.75][seed as usize % 3]);
            let w = build_weights(o, n).unwrap();
            let interp = LinearInterpolant::new(f.clone());
            let tau = f.grid().tau();
            for p in [LpExponent::One, LpExponent::Two, LpExponent::Inf] {
                assert!(piecewise_shift_check(&f, &w, p).unwrap().holds(1e-9));
                for h in [0.5 * tau, tau, 2.0 * tau] {
                    let r = interpolant_shift_check(&interp, o, h, p).unwrap();
                    assert!(r.holds(1e-9), "{r:?}");
                    assert!(combined_shift_check(&interp, &w, h, p).unwrap().holds(1e-9));
                }
            }
        }
    }

    #[test]
    fn linear_samples_shift() {
        let grid = TimeGrid::from_horizon(1.0, 32).unwrap();
        let interp = LinearInterpolant::new(SampledPath::from_fn(grid, |t| t));
        let r = interpolant_shift_check(&interp, order(0.5), 0.1, LpExponent::Inf).unwrap();
        assert!((r.shift_norm - 0.1).abs() < 1e-14);
        assert!(r.ratio <= 1.0);
    }

    #[test]
    fn exact_shift_norm_for_scalar_kink() {
        // f̃ = hat with peak at t = 0.5; shift h = 0.25 gives a difference
        // that changes sign inside a piece
        let grid = TimeGrid::new(0.5, 2).unwrap();
        let interp = LinearInterpolant::new(SampledPath::new(grid, vec![0.0, 1.0, 0.0]).unwrap());
        let l1 = interpolant_shift_norm(&interp, 0.25, LpExponent::One).unwrap();
        // d(t) = 0.5 on [0,0.25], 1.5-4t on [0.25,0.5], -0.5 on [0.5,0.75]
        assert!((l1 - (0.125 + 0.0625 + 0.125)).abs() < 1e-15);
    }

    #[test]
    fn mu_scan_small_cases() {
        let one = mu_coefficient_scan(order(0.5), 1, 64).unwrap();
        assert!(one <= 1.0 + 1e-15);
        for a in [0.25, 0.5, 0.75] {
            let big = mu_coefficient_scan(order(a), 128, 16).unwrap();
            assert!(big <= mu_envelope(order(a)));
            let mid = mu_coefficient_scan(order(a), 32, 16).unwrap();
            assert!((big - mid).abs() < 0.1 * big);
        }
    }

    #[test]
    fn schur_constant_bounds_interpolant_derivative() {
        let o = order(0.5);
        let c = schur_constant(o, 32).unwrap();
        assert!(c.constant.is_finite() && c.constant > 0.0);
        let w = build_weights(o, 32).unwrap();
        for seed in 0..10 {
            let f = random_path(32, 100 + seed);
            let interp = LinearInterpolant::new(f.clone());
            for p in [LpExponent::One, LpExponent::Two, LpExponent::Inf] {
                let cont = interpolant_caputo_norm(&interp, o, p).unwrap();
                let disc = discrete_derivative_norm(&f, &w, p).unwrap();
                assert!(cont <= c.constant * disc * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn gap_against_shift() {
        for seed in 0..20 {
            let interp = LinearInterpolant::new(random_path(64, seed));
            for p in [LpExponent::One, LpExponent::Two] {
                assert!(constant_to_piecewise_gap(&interp, p).unwrap().holds(1e-12));
            }
        }
    }

    #[test]
    fn gap_fails_when_last_increment_dominates() {
        let grid = TimeGrid::new(0.25, 4).unwrap();
        let interp = LinearInterpolant::new(SampledPath::new(grid, vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap());
        let r = constant_to_piecewise_gap(&interp, LpExponent::Inf).unwrap();
        assert_eq!((r.gap, r.shift), (1.0, 0.0));
        assert!(!r.holds(1e-9));
    }
}
