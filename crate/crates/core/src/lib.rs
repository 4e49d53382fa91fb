//! Discrete Caputo calculus on uniform grids, with continuous reference
//! quadratures, compactness-estimate checks, a periodic spectral toolkit and an
//! implicit memory-aware solver for a regularized fractional porous-medium
//! system.

pub mod caputo;
pub mod compactness;
pub mod config;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod refine;
pub mod rng;
pub mod run;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod value;
pub mod verify;

pub use caputo::{
    build_weights, caputo_square_gap, discrete_ibp_residual, discrete_ibp_terms, ftc_reconstruct_backward,
    ftc_reconstruct_forward, left_caputo, right_caputo, weight_density, CaputoWeights, FractionalOrder, IbpTerms,
    SampledPath, TestFunction, TimeGrid, WeightCache,
};
pub use error::{Error, Result};
pub use special::gamma_fn;
pub use value::{LpExponent, PathValue};
