//! Periodic fields on `[0, 2π)^d`, their spectra, and spectral operators.

mod fft;
mod field;
mod grid;
mod ops;
pub mod snapshot;

pub use field::{GridField, Spectrum, VectorField};
pub use grid::TorusGrid;
pub use ops::{
    dealias, dealiased_product, divergence, energy, frac_laplacian, gradient, hs_seminorm, laplacian, lp_norm,
};
