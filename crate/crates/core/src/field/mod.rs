//! Grids, sampled fields, cube geometry and smooth test data.

mod geometry;
mod grid;
pub mod io;
mod profiles;
mod scalar;

pub use geometry::{cube_distance_to_complement, Cube};
pub use grid::Grid;
pub use profiles::{
    extend_to_dimension, make_bump, make_dipole, make_modulated_bump, mollifier, radial_cutoff, smooth_step,
};
pub use scalar::{ScalarField, SupportBox, VectorField, DIVERGENCE_TOL, SUPPORT_TOL};

pub(crate) use scalar::lp_norm;
