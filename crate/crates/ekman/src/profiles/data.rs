//! Initial azimuthal swirl profiles `u₀^θ(ρ)`.

use serde::{Deserialize, Serialize};

use crate::calculus::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwirlFamily {
    /// `A φ(ρ) exp(-(ρ-ρc)²/w²)`: vanishes like φ at the shore.
    Gaussian,
    /// `A exp(-((ρ-ρ₀)/w)⁴)`: nonzero at the shore, so `u₀/φ` is unbounded.
    ShoreConstant,
}

impl std::str::FromStr for SwirlFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SwirlFamily::Gaussian),
            "shore-constant" | "shore_constant" => Ok(SwirlFamily::ShoreConstant),
            _ => Err(Error::Config(format!("unknown data family '{s}'"))),
        }
    }
}

impl SwirlFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SwirlFamily::Gaussian => "gaussian",
            SwirlFamily::ShoreConstant => "shore-constant",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialSwirl {
    pub family: SwirlFamily,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl InitialSwirl {
    pub fn new(family: SwirlFamily, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::Config(format!(
                "data needs finite amplitude/center and width > 0 (got {amplitude}, {center}, {width})"
            )));
        }
        Ok(InitialSwirl {
            family,
            amplitude,
            center,
            width,
        })
    }

    /// `u₀^θ` given ρ, the depth φ(ρ) and the shore abscissa ρ₀.
    pub fn u0<T: Scalar>(&self, rho: T, phi: T, rho0: f64) -> T {
        match self.family {
            SwirlFamily::Gaussian => {
                let d = (rho - self.center) / self.width;
                phi * (-(d * d)).exp() * self.amplitude
            }
            SwirlFamily::ShoreConstant => {
                let d = (rho - rho0) / self.width;
                let d2 = d * d;
                (-(d2 * d2)).exp() * self.amplitude
            }
        }
    }

    /// Radius beyond which `u₀` is below double precision relative to its peak.
    pub fn support_end(&self, rho0: f64) -> f64 {
        match self.family {
            SwirlFamily::Gaussian => self.center.max(rho0) + 6.2 * self.width,
            SwirlFamily::ShoreConstant => rho0 + 2.5 * self.width,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_ratio_to_depth_is_bounded() {
        let d = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
        for i in 1..100 {
            let phi = i as f64 * 0.01;
            assert!(d.u0(0.1 + phi, phi, 0.1) / phi <= 0.25);
        }
        assert!(d.u0(d.support_end(0.1), 4.0, 0.1).abs() < 1e-16);
    }

    #[test]
    fn shore_constant_is_flat_at_shore() {
        let d = InitialSwirl::new(SwirlFamily::ShoreConstant, 0.25, 0.0, 2.0).unwrap();
        assert_eq!(d.u0(0.1, 0.0, 0.1), 0.25);
    }
}
