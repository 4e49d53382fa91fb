//! Discrete Caputo weights and the left/right discrete operators built on them.
//!
//! Grids are uniform, `t_k = k·τ`. A path `f_0..f_N` is read as the
//! piecewise-constant function equal to `f_k` on `((k-1)τ, kτ]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::quadrature::GAUSS8;
use crate::special::gamma_fn;
use crate::value::{CompensatedSum, PathValue};

/// Largest weight table [`build_weights`] will produce. The recurrence is
/// O(N²): 10⁴ takes well under a second, 10⁵ a little under a minute.
pub const MAX_WEIGHTS: usize = 100_000;

/// Fractional order `α ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::domain(format!("fractional order must lie in (0, 1], got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `Γ(α)`.
    pub fn gamma(self) -> f64 {
        gamma_fn(self.0).expect("alpha > 0")
    }

    /// `Γ(1 - α)`, undefined at `α = 1`.
    pub fn gamma_complement(self) -> Option<f64> {
        if self.is_classical() {
            None
        } else {
            Some(gamma_fn(1.0 - self.0).expect("alpha < 1"))
        }
    }

    /// `m^(α-1)`, the convolution kernel of the discrete integral.
    pub fn kernel(self, m: usize) -> f64 {
        (m as f64).powf(self.0 - 1.0)
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(o: FractionalOrder) -> f64 {
        o.0
    }
}

/// Uniform grid `t_k = k·τ`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    tau: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, n_steps: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::domain(format!("time step must be positive, got {tau}")));
        }
        if n_steps == 0 {
            return Err(Error::domain("a time grid needs at least one step"));
        }
        Ok(Self { tau, n_steps })
    }

    /// `n_steps` equal steps covering `[0, horizon]`.
    pub fn from_horizon(horizon: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::domain("a time grid needs at least one step"));
        }
        Self::new(horizon / n_steps as f64, n_steps)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn horizon(&self) -> f64 {
        self.tau * self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    /// Index of the cell `((k-1)τ, kτ]` containing `t ∈ (0, T]`.
    pub fn cell_of(&self, t: f64) -> usize {
        let k = (t / self.tau).ceil() as usize;
        k.clamp(1, self.n_steps)
    }
}

/// The weights `λ_1..λ_N` for one fractional order.
#[derive(Debug, Clone, PartialEq)]
pub struct CaputoWeights {
    order: FractionalOrder,
    lambdas: Vec<f64>,
}

impl CaputoWeights {
    /// Wrap a table without checking it. Used to inject perturbed tables when
    /// checking that the verifiers notice.
    pub fn from_raw(order: FractionalOrder, lambdas: Vec<f64>) -> Self {
        Self { order, lambdas }
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `λ_k`, one-based.
    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambdas
    }

    /// `Σ_{j=1}^i (i-j+1)^(α-1) λ_j - 1`, which vanishes for exact weights.
    pub fn identity_residual(&self, i: usize) -> f64 {
        let a = self.order;
        let s: CompensatedSum = (1..=i).map(|j| a.kernel(i - j + 1) * self.lambda(j)).collect();
        s.value() - 1.0
    }

    pub fn max_identity_residual(&self) -> f64 {
        let kernel: Vec<f64> = (0..=self.len()).map(|m| self.order.kernel(m)).collect();
        (1..=self.len())
            .map(|i| {
                let s: CompensatedSum = (1..=i).map(|j| kernel[i - j + 1] * self.lambdas[j - 1]).collect();
                (s.value() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn require(&self, n: usize) -> Result<()> {
        if self.len() < n {
            Err(Error::LengthMismatch { expected: n, found: self.len() })
        } else {
            Ok(())
        }
    }
}

/// `m^(α-1) - (m+1)^(α-1)` for `m ≥ 1`, without the cancellation of the
/// naive difference.
fn kernel_drop(alpha: f64, m: usize) -> f64 {
    let m = m as f64;
    -m.powf(alpha - 1.0) * ((alpha - 1.0) * (1.0 / m).ln_1p()).exp_m1()
}

/// `λ_1 = 1`, `λ_{k+1} = Σ_{j=1}^k ((k-j+1)^(α-1) - (k-j+2)^(α-1)) λ_j`.
pub fn build_weights(order: FractionalOrder, n: usize) -> Result<CaputoWeights> {
    if n == 0 {
        return Err(Error::domain("need at least one weight"));
    }
    if n > MAX_WEIGHTS {
        return Err(Error::domain(format!("{n} weights exceeds the cap of {MAX_WEIGHTS}")));
    }
    let mut lambdas = vec![0.0; n];
    lambdas[0] = 1.0;
    if order.is_classical() {
        return Ok(CaputoWeights { order, lambdas });
    }
    let alpha = order.value();
    let drops: Vec<f64> = (1..n).map(|m| kernel_drop(alpha, m)).collect();
    for k in 1..n {
        // every term is positive, so compensated summation is all we need
        let mut acc = CompensatedSum::new();
        for j in 1..=k {
            acc.add(drops[k - j] * lambdas[j - 1]);
        }
        lambdas[k] = acc.value();
    }
    Ok(CaputoWeights { order, lambdas })
}

/// Weight tables shared across threads. Tables are prefix-stable, so one
/// table per order serves every shorter request.
#[derive(Debug, Default)]
pub struct WeightCache {
    tables: Mutex<HashMap<u64, Arc<CaputoWeights>>>,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, order: FractionalOrder, n: usize) -> Result<Arc<CaputoWeights>> {
        let key = order.value().to_bits();
        if let Some(w) = self.tables.lock().unwrap().get(&key) {
            if w.len() >= n {
                return Ok(Arc::clone(w));
            }
        }
        let w = Arc::new(build_weights(order, n)?);
        let mut tables = self.tables.lock().unwrap();
        let slot = tables.entry(key).or_insert_with(|| Arc::clone(&w));
        if slot.len() < n {
            *slot = Arc::clone(&w);
        }
        Ok(Arc::clone(slot))
    }
}

/// Samples `f_0..f_N` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath<V> {
    grid: TimeGrid,
    values: Vec<V>,
}

impl<V: PathValue> SampledPath<V> {
    pub fn new(grid: TimeGrid, values: Vec<V>) -> Result<Self> {
        if values.len() != grid.n_steps() + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.n_steps() + 1,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.compatible(&values[0])) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> V) -> Self {
        let values = (0..=grid.n_steps()).map(|k| f(grid.time(k))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps()
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn into_values(self) -> Vec<V> {
        self.values
    }

    pub fn value(&self, k: usize) -> &V {
        &self.values[k]
    }

    pub fn initial(&self) -> &V {
        &self.values[0]
    }

    pub fn last(&self) -> &V {
        &self.values[self.values.len() - 1]
    }

    /// `g_k = f_{N-k}`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid, values }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if other.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| {
                let mut v = x.clone();
                v.scale(a);
                v.add_scaled(b, y);
                v
            })
            .collect();
        Ok(Self { grid: self.grid, values })
    }

    fn increments(&self) -> Vec<V> {
        self.values.windows(2).map(|w| V::difference(&w[1], &w[0])).collect()
    }
}

/// `(D f)_k = Γ_α τ^(-α) Σ_{j=0}^{k-1} λ_{k-j} (f_{j+1} - f_j)`, `(D f)_0 = 0`.
pub fn left_caputo<V: PathValue>(path: &SampledPath<V>, weights: &CaputoWeights) -> Result<SampledPath<V>> {
    let n = path.n_steps();
    weights.require(n)?;
    let order = weights.order();
    let (gamma, tau_a) = (order.gamma(), path.grid.tau().powf(order.value()));
    let inc = path.increments();
    let zero = path.initial().zeros_like();
    let mut out = Vec::with_capacity(n + 1);
    out.push(zero.clone());
    for k in 1..=n {
        let mut acc = zero.clone();
        for (j, d) in inc[..k].iter().enumerate() {
            acc.add_scaled(weights.lambda(k - j), d);
        }
        acc.scale(gamma);
        acc.div_scalar(tau_a);
        out.push(acc);
    }
    Ok(SampledPath { grid: path.grid, values: out })
}

/// `(*D f)_k = Γ_α τ^(-α) Σ_{j=k+1}^N λ_{j-k} (f_j - f_{j-1})`, `(*D f)_N = 0`.
pub fn right_caputo<V: PathValue>(path: &SampledPath<V>, weights: &CaputoWeights) -> Result<SampledPath<V>> {
    let n = path.n_steps();
    weights.require(n)?;
    let order = weights.order();
    let (gamma, tau_a) = (order.gamma(), path.grid.tau().powf(order.value()));
    let inc = path.increments();
    let zero = path.initial().zeros_like();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let mut acc = zero.clone();
        for j in k + 1..=n {
            acc.add_scaled(weights.lambda(j - k), &inc[j - 1]);
        }
        acc.scale(gamma);
        acc.div_scalar(tau_a);
        out.push(acc);
    }
    out.push(zero);
    Ok(SampledPath { grid: path.grid, values: out })
}

/// Invert [`left_caputo`]: `f_n = f_0 + τ^α/Γ_α Σ_{k=1}^n (n-k+1)^(α-1) df_k`.
/// Index 0 of `df` is ignored.
pub fn ftc_reconstruct_forward<V: PathValue>(
    df: &SampledPath<V>,
    f_in: &V,
    weights: &CaputoWeights,
) -> Result<SampledPath<V>> {
    let n = df.n_steps();
    weights.require(n)?;
    if !f_in.compatible(df.initial()) {
        return Err(Error::GridMismatch);
    }
    let order = weights.order();
    let (gamma, tau_a) = (order.gamma(), df.grid.tau().powf(order.value()));
    let kernel: Vec<f64> = (0..=n).map(|m| order.kernel(m)).collect();
    let mut out = Vec::with_capacity(n + 1);
    out.push(f_in.clone());
    for m in 1..=n {
        let mut acc = f_in.zeros_like();
        for k in 1..=m {
            acc.add_scaled(kernel[m - k + 1], &df.values[k]);
        }
        acc.scale(tau_a);
        acc.div_scalar(gamma);
        let mut f = f_in.clone();
        f.add_scaled(1.0, &acc);
        out.push(f);
    }
    Ok(SampledPath { grid: df.grid, values: out })
}

/// Invert [`right_caputo`]: `f_n = f_N - τ^α/Γ_α Σ_{k=n}^{N-1} (k-n+1)^(α-1) rdf_k`.
/// Index N of `rdf` is ignored.
pub fn ftc_reconstruct_backward<V: PathValue>(
    rdf: &SampledPath<V>,
    f_end: &V,
    weights: &CaputoWeights,
) -> Result<SampledPath<V>> {
    let n = rdf.n_steps();
    weights.require(n)?;
    if !f_end.compatible(rdf.initial()) {
        return Err(Error::GridMismatch);
    }
    let order = weights.order();
    let (gamma, tau_a) = (order.gamma(), rdf.grid.tau().powf(order.value()));
    let kernel: Vec<f64> = (0..=n).map(|m| order.kernel(m)).collect();
    let mut out = vec![f_end.clone(); n + 1];
    for m in 0..n {
        let mut acc = f_end.zeros_like();
        for k in m..n {
            acc.add_scaled(kernel[k - m + 1], &rdf.values[k]);
        }
        acc.scale(tau_a);
        acc.div_scalar(gamma);
        out[m].add_scaled(-1.0, &acc);
    }
    Ok(SampledPath { grid: rdf.grid, values: out })
}

/// The piecewise-constant weight density `τ^(-α) λ_{⌈t/τ⌉}`.
pub fn weight_density(weights: &CaputoWeights, grid: &TimeGrid, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= grid.horizon()) {
        return Err(Error::domain(format!("t = {t} outside (0, {}]", grid.horizon())));
    }
    weights.require(grid.n_steps())?;
    let k = grid.cell_of(t);
    Ok(weights.lambda(k) / grid.tau().powf(weights.order().value()))
}

/// Test function for the discrete integration-by-parts identity.
#[derive(Clone)]
pub enum TestFunction {
    /// Coefficients `c_0 + c_1 t + …`; cell integrals taken in closed form.
    Polynomial(Vec<f64>),
    /// Anything else; cell integrals by 8-point Gauss–Legendre.
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            TestFunction::General(_) => f.write_str("General(..)"),
        }
    }
}

impl TestFunction {
    pub fn general(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction::General(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TestFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci),
            TestFunction::General(f) => f(t),
        }
    }

    fn antiderivative(c: &[f64], t: f64) -> f64 {
        c.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &ci)| acc * t + ci / (i + 1) as f64)
            * t
    }

    /// `Φ_k = ∫_{t_{k-1}}^{t_k} φ`, `k = 1..=N` (stored at index `k-1`).
    pub fn cell_integrals(&self, grid: &TimeGrid) -> Vec<f64> {
        (1..=grid.n_steps())
            .map(|k| {
                let (a, b) = (grid.time(k - 1), grid.time(k));
                match self {
                    TestFunction::Polynomial(c) => Self::antiderivative(c, b) - Self::antiderivative(c, a),
                    TestFunction::General(f) => GAUSS8.integrate(a, b, |t| f(t)),
                }
            })
            .collect()
    }
}

/// The four quantities of the discrete integration-by-parts identity
/// `lhs = interior + end + start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpTerms {
    /// `Σ_k (D f)_k Φ_k`.
    pub lhs: f64,
    /// `-τ Σ_{k=1}^{N-1} f_k (*D g)_k` with `g_k = Φ_k/τ`.
    pub interior: f64,
    /// `Γ_α τ^(-α) Φ_N Σ_j λ_{N-j+1} f_j`.
    pub end: f64,
    /// `-Γ_α τ^(-α) f_0 Σ_k λ_k Φ_k`.
    pub start: f64,
}

impl IbpTerms {
    pub fn residual(&self) -> f64 {
        (self.lhs - (self.interior + self.end + self.start)).abs()
    }

    /// Magnitude of the largest term, for relative comparisons.
    pub fn scale(&self) -> f64 {
        [self.lhs, self.interior, self.end, self.start]
            .iter()
            .fold(0.0, |m, x| f64::max(m, x.abs()))
    }
}

/// Evaluate both sides of the discrete integration-by-parts identity.
///
/// The interior term is computed through [`right_caputo`] applied to the cell
/// averages of `φ`, not through a rearranged sum, so the identity is a real
/// check of the two operators against each other.
pub fn discrete_ibp_terms(f: &SampledPath<f64>, phi: &TestFunction, weights: &CaputoWeights) -> Result<IbpTerms> {
    let grid = f.grid();
    let n = grid.n_steps();
    weights.require(n)?;
    let tau = grid.tau();
    let c = weights.order().gamma() / tau.powf(weights.order().value());
    let cells = phi.cell_integrals(&grid);

    let df = left_caputo(f, weights)?;
    let lhs: CompensatedSum = (1..=n).map(|k| df.values[k] * cells[k - 1]).collect();

    let mut g = vec![0.0; n + 1];
    for k in 1..=n {
        g[k] = cells[k - 1] / tau;
    }
    let rg = right_caputo(&SampledPath { grid, values: g }, weights)?;
    let interior: CompensatedSum = (1..n).map(|k| -tau * f.values[k] * rg.values[k]).collect();

    let end: CompensatedSum = (1..=n).map(|j| weights.lambda(n - j + 1) * f.values[j]).collect();
    let start: CompensatedSum = (1..=n).map(|k| weights.lambda(k) * cells[k - 1]).collect();

    Ok(IbpTerms {
        lhs: lhs.value(),
        interior: interior.value(),
        end: c * cells[n - 1] * end.value(),
        start: -c * f.values[0] * start.value(),
    })
}

/// `|lhs - rhs|` of the discrete integration-by-parts identity.
pub fn discrete_ibp_residual(f: &SampledPath<f64>, phi: &TestFunction, weights: &CaputoWeights) -> Result<f64> {
    Ok(discrete_ibp_terms(f, phi, weights)?.residual())
}

/// `(D f)_k` for a scalar path at a single index.
fn left_caputo_at(values: &[f64], weights: &CaputoWeights, tau: f64, k: usize) -> f64 {
    let acc: CompensatedSum = (0..k)
        .map(|j| weights.lambda(k - j) * (values[j + 1] - values[j]))
        .collect();
    let order = weights.order();
    acc.value() * order.gamma() / tau.powf(order.value())
}

/// `f_k (D f)_k - ½ (D f²)_k`, which is non-negative for every real path.
pub fn caputo_square_gap(f: &SampledPath<f64>, weights: &CaputoWeights, k: usize) -> Result<f64> {
    let n = f.n_steps();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: n });
    }
    weights.require(k)?;
    let tau = f.grid().tau();
    let sq: Vec<f64> = f.values.iter().map(|x| x * x).collect();
    let d = left_caputo_at(&f.values, weights, tau, k);
    let d_sq = left_caputo_at(&sq, weights, tau, k);
    Ok(f.values[k] * d - 0.5 * d_sq)
}
