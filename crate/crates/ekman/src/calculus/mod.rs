//! Exact differentiation, differential operators, quadrature and norms.

pub mod norms;
pub mod ops;
pub mod quadrature;
pub mod scalar;
pub mod smooth;

pub use ops::{FrameJet, Vec3};
pub use quadrature::Rule;
pub use scalar::{Jet, Scalar, Series};
