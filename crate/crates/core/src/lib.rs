//! Numerical laboratory for loss of regularity in transport by
//! divergence-free velocity fields.
//!
//! * [`field`]: periodic grids, sampled fields, cubes and smooth test data.
//! * [`sobolev`]: multiplier and Gagliardo fractional Sobolev norms, scaling,
//!   interpolation and almost-orthogonality bounds.
//! * [`mixing`]: exactly invertible shear protocols, transport along them
//!   and estimation of mixing rate constants.
//! * [`series`]: exact convergence verdicts for exp-polynomial series.
//! * [`patchwork`]: rescaled pieces accumulating at a point, parameter
//!   schedules and condition certificates.

pub mod error;
pub mod field;
pub mod interp;
pub mod mixing;
pub mod patchwork;
pub mod series;
pub mod sobolev;
pub mod spectral;

pub use error::{Error, Result};
