use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Uniform grid on the torus `[0, 2π)^d`.
///
/// Wavenumbers are integers, so `|n|^(2s)` is the fractional-Laplacian symbol
/// with no rescaling. Storage is row-major with axis 0 slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::domain(format!("torus dimension must be 1, 2 or 3, got {dim}")));
        }
        if points < 8 || points % 2 != 0 {
            return Err(Error::domain(format!("points per dimension must be even and at least 8, got {points}")));
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total node count `M^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.points as f64
    }

    /// Quadrature weight of one node, `(2π/M)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `(2π)^d`.
    pub fn volume(&self) -> f64 {
        TAU.powi(self.dim as i32)
    }

    /// Signed wavenumber of FFT slot `i`; slot `M/2` is `-M/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    pub fn is_nyquist(&self, n: i64) -> bool {
        n == -(self.points as i64) / 2
    }

    /// Per-axis indices of a flat index (unused axes are 0).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            idx[a] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        self.multi_index(flat).map(|i| i as f64 * h)
    }

    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let mut n = [0; 3];
        for a in 0..self.dim {
            n[a] = self.wavenumber(idx[a]);
        }
        n
    }

    /// `|n|²` for the mode at a flat index.
    pub fn norm_sq(&self, flat: usize) -> f64 {
        self.wavevector(flat).iter().map(|&n| (n * n) as f64).sum()
    }

    /// Stride of axis `a` in flat storage.
    pub(crate) fn stride(&self, a: usize) -> usize {
        self.points.pow((self.dim - 1 - a) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TorusGrid::new(0, 16).is_err());
        assert!(TorusGrid::new(4, 16).is_err());
        assert!(TorusGrid::new(1, 6).is_err());
        assert!(TorusGrid::new(1, 9).is_err());
        assert!(TorusGrid::new(3, 8).is_ok());
    }

    #[test]
    fn fft_order_wavenumbers() {
        let g = TorusGrid::new(1, 8).unwrap();
        let n: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(n, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(-4));
    }

    #[test]
    fn flat_layout_is_row_major() {
        let g = TorusGrid::new(3, 8).unwrap();
        assert_eq!(g.multi_index(1), [0, 0, 1]);
        assert_eq!(g.multi_index(8), [0, 1, 0]);
        assert_eq!(g.multi_index(64 + 2 * 8 + 3), [1, 2, 3]);
        assert_eq!(g.stride(0), 64);
        assert_eq!(g.wavevector(64 * 7 + 8 * 4 + 1), [-1, -4, 1]);
    }
}
