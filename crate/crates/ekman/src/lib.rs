//! Ekman boundary-layer approximate solutions for fast-rotating fluids over
//! topography, with exact differentiation, verification studies and an
//! axisymmetric Stokes–Coriolis reference solver.
//!
//! Module layout:
//!
//! * [`geometry`]: shore distance, moving frame, depth profile, δ and λ_φ.
//! * [`profiles`]: closed-form terms of the approximate solution.
//! * [`calculus`]: scalar jets, differential operators, quadrature and norms.
//! * [`verify`]: property checks and convergence studies.
//! * [`solver`]: direct axisymmetric solver in terrain-following coordinates.

pub mod calculus;
pub mod error;
pub mod geometry;
pub mod par;
pub mod profiles;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
