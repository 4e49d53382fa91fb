//! Value spaces a sampled path can live in.

/// A normed linear space usable as the range of a [`SampledPath`].
///
/// Scalars and grid fields implement this; the discrete Caputo operators are
/// written against it so the same code serves both.
///
/// [`SampledPath`]: crate::caputo::SampledPath
pub trait PathValue: Clone {
    /// The additive identity in the same space (same grid, for fields).
    fn zeros_like(&self) -> Self;

    /// `self += a * other`.
    fn add_scaled(&mut self, a: f64, other: &Self);

    fn scale(&mut self, a: f64);

    /// Divide by a scalar (kept separate from `scale(1/d)` so that division
    /// rounds exactly like a hand-written quotient).
    fn div_scalar(&mut self, d: f64);

    fn norm(&self) -> f64;

    /// Whether two values live in the same space.
    fn compatible(&self, _other: &Self) -> bool {
        true
    }

    /// For `a + θ(b - a)`, the `θ ∈ (0, 1)` where the value vanishes, if the
    /// space is one-dimensional and a sign change occurs.
    fn zero_crossing(_a: &Self, _b: &Self) -> Option<f64> {
        None
    }

    fn difference(a: &Self, b: &Self) -> Self {
        let mut d = a.clone();
        d.add_scaled(-1.0, b);
        d
    }
}

impl PathValue for f64 {
    fn zeros_like(&self) -> Self {
        0.0
    }

    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }

    fn scale(&mut self, a: f64) {
        *self *= a;
    }

    fn div_scalar(&mut self, d: f64) {
        *self /= d;
    }

    fn norm(&self) -> f64 {
        self.abs()
    }

    fn zero_crossing(a: &Self, b: &Self) -> Option<f64> {
        if (*a < 0.0 && *b > 0.0) || (*a > 0.0 && *b < 0.0) {
            Some(a / (a - b))
        } else {
            None
        }
    }

    fn difference(a: &Self, b: &Self) -> Self {
        a - b
    }
}

/// Exponent of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LpExponent {
    One,
    Two,
    Three,
    Inf,
}

impl LpExponent {
    pub fn as_f64(self) -> f64 {
        match self {
            LpExponent::One => 1.0,
            LpExponent::Two => 2.0,
            LpExponent::Three => 3.0,
            LpExponent::Inf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        self != LpExponent::Inf
    }
}

impl std::fmt::Display for LpExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpExponent::One => write!(f, "1"),
            LpExponent::Two => write!(f, "2"),
            LpExponent::Three => write!(f, "3"),
            LpExponent::Inf => write!(f, "inf"),
        }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let acc: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn scalar_zero_crossing() {
        assert_eq!(f64::zero_crossing(&-1.0, &3.0), Some(0.25));
        assert_eq!(f64::zero_crossing(&1.0, &3.0), None);
        assert_eq!(f64::zero_crossing(&0.0, &3.0), None);
    }
}
