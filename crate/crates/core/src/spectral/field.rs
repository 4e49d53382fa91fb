use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::fft::transform;
use super::TorusGrid;
use crate::error::{Error, Result};
use crate::value::PathValue;

/// Fourier coefficients in FFT order, normalized so that
/// `û(n) = (2π)^(-d) ∫ u e^(-in·x)` for band-limited `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: coeffs.len() });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the mode with the given per-axis wavenumbers.
    pub fn mode(&self, n: &[i64]) -> Complex64 {
        let m = self.grid.points() as i64;
        let flat = n.iter().fold(0usize, |acc, &k| acc * self.grid.points() + k.rem_euclid(m) as usize);
        self.coeffs[flat]
    }

    /// Multiply each coefficient by `symbol(wavevector)`.
    pub fn apply(&self, symbol: impl Fn([i64; 3]) -> Complex64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(self.grid.wavevector(i)))
            .collect();
        Spectrum { grid: self.grid, coeffs }
    }

    /// Real field with these coefficients (imaginary residue discarded).
    pub fn to_field(&self) -> GridField {
        let mut data = self.coeffs.clone();
        transform(&mut data, &self.grid, true);
        GridField::from_parts(self.grid, data.into_iter().map(|z| z.re).collect())
    }

    /// `Σ |û(n)|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// A real field sampled at the nodes of a torus grid. The spectrum is
/// computed on first use and cached.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: TorusGrid,
    samples: Vec<f64>,
    spectrum: OnceLock<Arc<Spectrum>>,
}

impl PartialEq for GridField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl GridField {
    fn from_parts(grid: TorusGrid, samples: Vec<f64>) -> Self {
        Self { grid, samples, spectrum: OnceLock::new() }
    }

    pub fn new(grid: TorusGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: samples.len() });
        }
        Ok(Self::from_parts(grid, samples))
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self::from_parts(grid, vec![c; grid.len()])
    }

    /// Sample `f(x)` at every node; `x` has `dim` coordinates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let samples = (0..grid.len()).map(|i| f(&grid.coords(i)[..d])).collect();
        Self::from_parts(grid, samples)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> = self.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            transform(&mut data, &self.grid, false);
            Arc::new(Spectrum { grid: self.grid, coeffs: data })
        })
    }

    /// Node average, equal to `(2π)^(-d) ∫ u`.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        Self::from_parts(self.grid, self.samples.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.grid, samples))
    }

    pub(crate) fn same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `∫ u v` by node quadrature.
    pub fn inner(&self, other: &GridField) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    fn touch(&mut self) -> &mut Vec<f64> {
        self.spectrum = OnceLock::new();
        &mut self.samples
    }
}

impl PathValue for GridField {
    fn zeros_like(&self) -> Self {
        Self::constant(self.grid, 0.0)
    }

    fn add_scaled(&mut self, a: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        for (x, y) in self.touch().iter_mut().zip(&other.samples) {
            *x += a * y;
        }
    }

    fn scale(&mut self, a: f64) {
        self.touch().iter_mut().for_each(|x| *x *= a);
    }

    fn div_scalar(&mut self, d: f64) {
        self.touch().iter_mut().for_each(|x| *x /= d);
    }

    /// `L²` norm over the torus.
    fn norm(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    fn compatible(&self, other: &Self) -> bool {
        self.grid == other.grid
    }
}

/// `d` component fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<GridField>,
}

impl VectorField {
    pub fn new(components: Vec<GridField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::domain("a vector field needs components"));
        };
        let grid = first.grid();
        if components.len() != grid.dim() {
            return Err(Error::LengthMismatch { expected: grid.dim(), found: components.len() });
        }
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn grid(&self) -> TorusGrid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[GridField] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &GridField {
        &self.components[j]
    }

    /// Pointwise `|v|²`.
    pub fn norm_sq_field(&self) -> GridField {
        let grid = self.grid();
        let samples = (0..grid.len())
            .map(|i| self.components.iter().map(|c| c.samples[i] * c.samples[i]).sum())
            .collect();
        GridField::from_parts(grid, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for (d, m) in [(1, 32), (2, 16), (3, 8)] {
            let g = TorusGrid::new(d, m).unwrap();
            let f = GridField::from_fn(g, |x| x.iter().map(|t| (t * 1.3).sin().exp()).product());
            let back = f.spectrum().to_field();
            let scale = f.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (a, b) in f.samples().iter().zip(back.samples()) {
                assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn cosine_coefficients_and_symmetry() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = GridField::from_fn(g, |x| 3.0 + (2.0 * x[0] - x[1]).cos());
        let s = f.spectrum();
        assert!((s.mode(&[0, 0]).re - 3.0).abs() < 1e-14);
        assert!((s.mode(&[2, -1]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((s.mode(&[-2, 1]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        for i in 0..g.len() {
            let n = g.wavevector(i);
            let c = s.coeffs()[i];
            let conj = s.mode(&[-n[0], -n[1]]);
            assert!((c - conj.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn cache_invalidated_by_mutation() {
        let g = TorusGrid::new(1, 8).unwrap();
        let mut f = GridField::constant(g, 1.0);
        assert!((f.spectrum().coeffs()[0].re - 1.0).abs() < 1e-15);
        f.scale(2.0);
        assert!((f.spectrum().coeffs()[0].re - 2.0).abs() < 1e-15);
        let other = f.clone();
        f.add_scaled(1.0, &other);
        assert!((f.spectrum().coeffs()[0].re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn vector_field_checks_shape() {
        let g1 = TorusGrid::new(2, 8).unwrap();
        let g2 = TorusGrid::new(2, 10).unwrap();
        assert!(VectorField::new(vec![GridField::constant(g1, 0.0)]).is_err());
        assert!(VectorField::new(vec![GridField::constant(g1, 0.0), GridField::constant(g2, 0.0)]).is_err());
        assert!(VectorField::new(vec![GridField::constant(g1, 0.0); 2]).is_ok());
    }
}
