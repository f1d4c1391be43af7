//! Shore geometry, depth profile and the derived coefficients δ and λ_φ.

pub mod depth;
pub mod shore;
pub mod topography;

pub use depth::{DepthFamily, DepthProfile};
pub use shore::{ConvexShore, FourierCurve, ShoreFrame};
pub use topography::{delta_of, lambda_of, Probe, RadialSeries, Topography};
