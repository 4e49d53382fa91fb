//! Continuous-time Caputo derivatives by quadrature, used as independent
//! references for the discrete operators.
//!
//! Every integral with an endpoint singularity `r^(-α)` or `r^(α-1)` is taken
//! on a graded mesh that absorbs the singular weight exactly, so smooth
//! integrands converge at the full Gauss rate.

use std::sync::Arc;

use rand::Rng;

use crate::caputo::FractionalOrder;
use crate::error::{Error, Result};
use crate::quadrature::{graded, singular_weighted};
use crate::rng::seeded;

/// Cells in every graded inner integral.
pub const INNER_CELLS: usize = 256;
/// Cells per half-interval in nested outer integrals.
pub const OUTER_CELLS: usize = 64;

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A C¹ function on `[0, T]` given with its derivative.
#[derive(Clone)]
pub struct SmoothFunction {
    f: Scalar,
    df: Scalar,
    horizon: f64,
}

impl std::fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothFunction").field("horizon", &self.horizon).finish_non_exhaustive()
    }
}

impl SmoothFunction {
    /// Checks `df` against central differences of `f` at five pseudo-random
    /// interior points.
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
        }
        let mut rng = seeded(0x5eed);
        let h = 1e-5 * horizon.max(1.0);
        for _ in 0..5 {
            let t = horizon * rng.random_range(0.05..0.95);
            let fd = (f(t + h) - f(t - h)) / (2.0 * h);
            let exact = df(t);
            if !((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs())) {
                return Err(Error::domain(format!(
                    "supplied derivative {exact} disagrees with finite difference {fd} at t = {t}"
                )));
            }
        }
        Ok(Self { f: Arc::new(f), df: Arc::new(df), horizon })
    }

    /// `c_0 + c_1 t + …` on `[0, horizon]`.
    pub fn polynomial(coeffs: Vec<f64>, horizon: f64) -> Result<Self> {
        let dc: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
        let horner = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci);
        Self::new(move |t| horner(&coeffs, t), move |t| horner(&dc, t), horizon)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        (self.df)(t)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `t ↦ f(T - t)`.
    pub fn reflected(&self) -> Self {
        let (f, df, big_t) = (Arc::clone(&self.f), Arc::clone(&self.df), self.horizon);
        Self {
            f: Arc::new(move |t| f(big_t - t)),
            df: Arc::new(move |t| -df(big_t - t)),
            horizon: big_t,
        }
    }
}

fn fractional(order: FractionalOrder) -> Result<(f64, f64)> {
    match order.gamma_complement() {
        Some(g) => Ok((order.value(), g)),
        None => Err(Error::domain("continuous reference needs alpha < 1")),
    }
}

fn check_time(f: &SmoothFunction, t: f64, open_end: bool) -> Result<()> {
    let ok = if open_end {
        t >= 0.0 && t < f.horizon
    } else {
        t > 0.0 && t <= f.horizon
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("t = {t} outside the admissible range for horizon {}", f.horizon)))
    }
}

/// `1/Γ(1-α) ∫_0^t f'(s) (t-s)^(-α) ds`.
pub fn continuous_left_caputo(f: &SmoothFunction, t: f64, order: FractionalOrder) -> Result<f64> {
    let (alpha, g) = fractional(order)?;
    check_time(f, t, false)?;
    Ok(singular_weighted(t, -alpha, INNER_CELLS, |r| f.deriv(t - r)) / g)
}

/// The same derivative written without `f'`:
/// `1/Γ(1-α) [ (f(t)-f(0)) t^(-α) + α ∫_0^t (f(t)-f(t-r)) r^(-1-α) dr ]`.
pub fn continuous_left_caputo_alt(f: &SmoothFunction, t: f64, order: FractionalOrder) -> Result<f64> {
    let (alpha, g) = fractional(order)?;
    check_time(f, t, false)?;
    let ft = f.eval(t);
    // difference quotient loses digits as r → 0; the region below the guard
    // carries a vanishing share of the weight
    let quotient = |r: f64| {
        if r > 1e-6 * t {
            (ft - f.eval(t - r)) / r
        } else {
            f.deriv(t - 0.5 * r)
        }
    };
    let tail = singular_weighted(t, -alpha, INNER_CELLS, quotient);
    Ok(((ft - f.eval(0.0)) * t.powf(-alpha) + alpha * tail) / g)
}

/// `1/Γ(1-α) ∫_t^T f'(s) (s-t)^(-α) ds`.
pub fn continuous_right_caputo(f: &SmoothFunction, t: f64, order: FractionalOrder) -> Result<f64> {
    let (alpha, g) = fractional(order)?;
    check_time(f, t, true)?;
    Ok(right_from_end(f, f.horizon - t, alpha, g))
}

/// Right derivative at `T - dist`, parametrized by the distance to the end so
/// points that round onto `T` stay usable.
fn right_from_end(f: &SmoothFunction, dist: f64, alpha: f64, gamma_c: f64) -> f64 {
    let big_t = f.horizon;
    singular_weighted(dist, -alpha, INNER_CELLS, |r| f.deriv(big_t - dist + r)) / gamma_c
}

/// `1/Γ(1-α) [ (f(T)-f(t)) (T-t)^(-α) + α ∫_0^(T-t) (f(t+r)-f(t)) r^(-1-α) dr ]`.
pub fn continuous_right_caputo_alt(f: &SmoothFunction, t: f64, order: FractionalOrder) -> Result<f64> {
    let (alpha, g) = fractional(order)?;
    check_time(f, t, true)?;
    let len = f.horizon - t;
    let ft = f.eval(t);
    let quotient = |r: f64| {
        if r > 1e-6 * len {
            (f.eval(t + r) - ft) / r
        } else {
            f.deriv(t + 0.5 * r)
        }
    };
    let tail = singular_weighted(len, -alpha, INNER_CELLS, quotient);
    Ok(((f.eval(f.horizon) - ft) * len.powf(-alpha) + alpha * tail) / g)
}

/// `∫_0^T g` with nodes clustered toward both endpoints, for integrands that
/// behave like powers of `t` and `T - t` there. `g` receives `t` and `T - t`.
fn two_sided(big_t: f64, alpha: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let q = 1.0 / (1.0 - alpha);
    let half = 0.5 * big_t;
    graded(half, q, OUTER_CELLS, |s| g(s, big_t - s)) + graded(half, q, OUTER_CELLS, |r| g(big_t - r, r))
}

/// `|f(t) - f(0) - 1/Γ(α) ∫_0^t (t-s)^(α-1) D f(s) ds|` with the inner
/// derivative from [`continuous_left_caputo`].
pub fn continuous_ftc_residual(f: &SmoothFunction, t: f64, order: FractionalOrder) -> Result<f64> {
    let (alpha, _) = fractional(order)?;
    check_time(f, t, false)?;
    let caputo = |s: f64| continuous_left_caputo(f, s, order).expect("s inside (0, t]");
    let half = 0.5 * t;
    let near = singular_weighted(half, alpha - 1.0, OUTER_CELLS, |r| caputo(t - r));
    let far = graded(half, 1.0 / (1.0 - alpha), OUTER_CELLS, |s| (t - s).powf(alpha - 1.0) * caputo(s));
    Ok((f.eval(t) - f.eval(0.0) - (near + far) / order.gamma()).abs())
}

/// The terms of the continuous integration-by-parts identity
/// `lhs = interior + end + start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousIbpTerms {
    /// `∫_0^T D f · φ`.
    pub lhs: f64,
    /// `-∫_0^T f · *D φ`.
    pub interior: f64,
    /// `φ(T)/Γ(1-α) ∫_0^T f(t) (T-t)^(-α) dt`.
    pub end: f64,
    /// `-f(0)/Γ(1-α) ∫_0^T φ(s) s^(-α) ds`.
    pub start: f64,
}

impl ContinuousIbpTerms {
    pub fn residual(&self) -> f64 {
        (self.lhs - (self.interior + self.end + self.start)).abs()
    }
}

pub fn ibp_continuous_terms(f: &SmoothFunction, phi: &SmoothFunction, order: FractionalOrder) -> Result<ContinuousIbpTerms> {
    let (alpha, g) = fractional(order)?;
    let big_t = f.horizon;
    if (phi.horizon - big_t).abs() > 1e-12 * big_t {
        return Err(Error::domain("f and phi must share a horizon"));
    }
    let lhs = two_sided(big_t, alpha, |t, _| {
        continuous_left_caputo(f, t, order).expect("t inside (0, T]") * phi.eval(t)
    });
    let interior = -two_sided(big_t, alpha, |t, dist| f.eval(t) * right_from_end(phi, dist, alpha, g));
    let end = phi.eval(big_t) / g * singular_weighted(big_t, -alpha, INNER_CELLS, |r| f.eval(big_t - r));
    let start = -f.eval(0.0) / g * singular_weighted(big_t, -alpha, INNER_CELLS, |s| phi.eval(s));
    Ok(ContinuousIbpTerms { lhs, interior, end, start })
}

/// Absolute residual of the continuous integration-by-parts identity.
pub fn ibp_continuous_residual(f: &SmoothFunction, phi: &SmoothFunction, order: FractionalOrder) -> Result<f64> {
    Ok(ibp_continuous_terms(f, phi, order)?.residual())
}
