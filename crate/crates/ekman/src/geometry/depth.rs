//! Depth profiles `φ(ρ)` on `[ρ₀, ∞)`.

use serde::{Deserialize, Serialize};

use crate::calculus::scalar::Scalar;
use crate::calculus::smooth::chi;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthFamily {
    /// `H (1 - exp(-(ρ-ρ₀)/ℓ))`
    Exp,
    /// `H tanh((ρ-ρ₀)/ℓ)`
    Tanh,
    /// Equal to `H` for `ρ ≥ ρ₀ + ℓ`, smoothly joined to an exponential ramp.
    FlatCap,
}

impl std::str::FromStr for DepthFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(DepthFamily::Exp),
            "tanh" => Ok(DepthFamily::Tanh),
            "flat-cap" | "flat_cap" => Ok(DepthFamily::FlatCap),
            _ => Err(Error::Config(format!("unknown depth family '{s}'"))),
        }
    }
}

impl DepthFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DepthFamily::Exp => "exp",
            DepthFamily::Tanh => "tanh",
            DepthFamily::FlatCap => "flat-cap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub family: DepthFamily,
    pub rho0: f64,
    pub h: f64,
    pub ell: f64,
}

impl DepthProfile {
    pub fn new(family: DepthFamily, rho0: f64, h: f64, ell: f64) -> Result<Self> {
        if !(rho0 > 0.0) || !(h > 0.0) || !(ell > 0.0) {
            return Err(Error::Config(format!(
                "depth needs rho0 > 0, H > 0, ell > 0 (got {rho0}, {h}, {ell})"
            )));
        }
        Ok(DepthProfile { family, rho0, h, ell })
    }

    /// `φ` evaluated without the domain check.
    pub fn phi<T: Scalar>(&self, rho: T) -> T {
        let s = (rho - self.rho0) / self.ell;
        match self.family {
            DepthFamily::Exp => (-(-s).exp() + 1.0) * self.h,
            DepthFamily::Tanh => s.tanh() * self.h,
            DepthFamily::FlatCap => {
                let q = -(s * -3.0).exp() + 1.0;
                let step = -chi(s) + 1.0;
                (q + step * (-q + 1.0)) * self.h
            }
        }
    }

    /// `φ`, rejecting `ρ < ρ₀`.
    pub fn eval<T: Scalar>(&self, rho: T) -> Result<T> {
        if rho.val() < self.rho0 {
            return Err(Error::Domain(format!(
                "rho = {} lies on land (rho0 = {})",
                rho.val(),
                self.rho0
            )));
        }
        Ok(self.phi(rho))
    }

    /// Abscissa where `φ = target`, found by bisection; `None` if the depth
    /// never reaches it.
    pub fn rho_at_depth(&self, target: f64) -> Option<f64> {
        if target <= 0.0 {
            return Some(self.rho0);
        }
        if target >= self.h {
            return match self.family {
                DepthFamily::FlatCap if target == self.h => Some(self.rho0 + self.ell),
                _ => None,
            };
        }
        let mut lo = self.rho0;
        let mut hi = self.rho0 + self.ell;
        while self.phi(hi) < target {
            hi = self.rho0 + 2.0 * (hi - self.rho0);
            if hi > self.rho0 + 1e6 * self.ell {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.phi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// True for the validation profile with a flat plateau.
    pub fn has_flat_region(&self) -> bool {
        self.family == DepthFamily::FlatCap
    }
}
