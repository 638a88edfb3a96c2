//! Numerical toolkit for supercritical Sobolev inequalities on radial
//! functions of the unit ball: sharp constants, bubble asymptotics,
//! Hardy-Rellich type inequalities and a mountain-pass solver for the
//! polyharmonic equation with exponent `2n/(n-2m) + |x|^alpha`.

pub mod bubbles;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod inequalities;
pub mod linalg;
pub mod optimize;
pub mod params;
pub mod profile;
pub mod radial_core;
pub mod spline;
pub mod stencil;

pub use error::{Error, Result};
pub use grid::{make_grid, QuadratureRule, RadialGrid};
pub use params::ProblemParams;
pub use profile::RadialProfile;
