use num_complex::Complex64;

use super::{GridField, Spectrum, VectorField};
use crate::error::{Error, Result};
use crate::value::LpExponent;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn norm_sq(n: [i64; 3]) -> f64 {
    n.iter().map(|&k| (k * k) as f64).sum()
}

/// `(-Δ)^s` with symbol `|n|^(2s)`.
pub fn frac_laplacian(f: &GridField, s: f64) -> Result<GridField> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain(format!("fractional power must lie in (0, 1], got {s}")));
    }
    Ok(f.spectrum().apply(|n| real(norm_sq(n).powf(s))).to_field())
}

/// `Δ` with symbol `-|n|²`.
pub fn laplacian(f: &GridField) -> GridField {
    f.spectrum().apply(|n| real(-norm_sq(n))).to_field()
}

/// Symbol of `∂_j`. The Nyquist slot has no real partner, so its derivative is
/// set to zero to keep derivatives of real fields real.
pub(crate) fn derivative_symbol(grid: &super::TorusGrid, n: [i64; 3], j: usize) -> Complex64 {
    if grid.is_nyquist(n[j]) {
        Complex64::default()
    } else {
        I * n[j] as f64
    }
}

pub fn gradient(f: &GridField) -> VectorField {
    let grid = f.grid();
    let spec = f.spectrum();
    let components = (0..grid.dim())
        .map(|j| spec.apply(|n| derivative_symbol(&grid, n, j)).to_field())
        .collect();
    VectorField::new(components).expect("one component per axis")
}

pub fn divergence(v: &VectorField) -> GridField {
    let grid = v.grid();
    let mut acc = Spectrum::zeros(grid);
    for (j, c) in v.components().iter().enumerate() {
        let d = c.spectrum().apply(|n| derivative_symbol(&grid, n, j));
        for (a, b) in acc.coeffs_mut().iter_mut().zip(d.coeffs()) {
            *a += b;
        }
    }
    acc.to_field()
}

/// `L^p(T^d)` norm by node quadrature.
pub fn lp_norm(f: &GridField, p: LpExponent) -> f64 {
    let w = f.grid().cell_volume();
    let xs = f.samples().iter().map(|x| x.abs());
    match p {
        LpExponent::One => xs.sum::<f64>() * w,
        LpExponent::Two => (xs.map(|x| x * x).sum::<f64>() * w).sqrt(),
        LpExponent::Three => (xs.map(|x| x * x * x).sum::<f64>() * w).cbrt(),
        LpExponent::Inf => xs.fold(0.0, f64::max),
    }
}

/// `‖(-Δ)^(s/2) f‖_{L²}` via Parseval.
pub fn hs_seminorm(f: &GridField, s: f64) -> f64 {
    let grid = f.grid();
    let sum: f64 = f
        .spectrum()
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k2 = grid.norm_sq(i);
            if k2 == 0.0 {
                0.0
            } else {
                k2.powf(s) * c.norm_sqr()
            }
        })
        .sum();
    (grid.volume() * sum).sqrt()
}

/// `∫ u² + ½|∇p|²`.
pub fn energy(u: &GridField, p: &GridField) -> Result<f64> {
    u.same_grid(p)?;
    let grad_sq = gradient(p).norm_sq_field();
    let s: f64 = u.samples().iter().zip(grad_sq.samples()).map(|(a, g)| a * a + 0.5 * g).sum();
    Ok(s * u.grid().cell_volume())
}

/// Two-thirds rule: drop every mode with some `|n_i| > M/3`.
pub fn dealias(spec: &Spectrum) -> Spectrum {
    let grid = spec.grid();
    let cut = grid.points() as i64 / 3;
    let d = grid.dim();
    spec.apply(|n| if n[..d].iter().any(|k| k.abs() > cut) { Complex64::default() } else { real(1.0) })
}

/// Pointwise product followed by the two-thirds rule.
pub fn dealiased_product(a: &GridField, b: &GridField) -> Result<Spectrum> {
    let prod = a.zip_map(b, |x, y| x * y)?;
    Ok(dealias(prod.spectrum()))
}
