//! Numerical toolkit for commuting operator pairs on the symmetrized bidisc:
//! point geometry, bivariate polynomial varieties, Γ-contraction tests,
//! dilation models and spectral-set checks.

pub mod band;
pub mod bipoly;
pub mod decomp;
pub mod dilation;
pub mod error;
pub mod gamma_geom;
pub mod io;
pub mod numlin;
pub mod pairs;
mod par;
pub mod random;
pub mod registry;
pub mod spectra_sets;

pub use error::{Error, Result};
