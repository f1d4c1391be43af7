use serde::Serialize;

use super::depth::DepthProfile;
use super::shore::{ConvexShore, ShoreFrame};
use crate::calculus::scalar::{Scalar, Series};
use crate::error::{Error, Result};

/// Slope factor `δ = (1 + φ′²)^{3/4}`.
pub fn delta_of<T: Scalar>(dphi: T) -> T {
    (dphi * dphi + 1.0).powf(0.75)
}

/// Pumping coefficient `λ_φ = √(2β)(1 + δ^{1/3}) / (2φ)`.
pub fn lambda_of<T: Scalar>(phi: T, dphi: T, beta: f64) -> T {
    let d13 = (dphi * dphi + 1.0).powf(0.25);
    (d13 + 1.0) * ((2.0 * beta).sqrt() * 0.5) / phi
}

/// Radial quantities as Taylor series about a fixed ρ.
#[derive(Clone, Copy, Debug)]
pub struct RadialSeries {
    pub rho: f64,
    pub phi: Series,
    pub dphi: Series,
    pub delta: Series,
    /// `λ_φ`; zero series where `φ = 0`.
    pub lambda: Series,
}

#[derive(Clone, Debug)]
pub struct Topography {
    pub shore: ConvexShore,
    pub depth: DepthProfile,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub inside: bool,
    pub d_phi: f64,
}

impl Topography {
    pub fn new(shore: ConvexShore, depth: DepthProfile, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        Ok(Topography { shore, depth, beta })
    }

    /// `√(2β)`.
    pub fn s(&self) -> f64 {
        (2.0 * self.beta).sqrt()
    }

    /// Flat-bottom pumping rate `√(2β)/H`.
    pub fn lambda_flat(&self) -> f64 {
        self.s() / self.depth.h
    }

    pub fn phi(&self, rho: f64) -> Result<f64> {
        self.depth.eval(rho)
    }

    pub fn dphi(&self, rho: f64) -> Result<f64> {
        self.depth.eval(rho)?;
        Ok(self.depth.phi(Series::var(rho)).derivative(1))
    }

    pub fn delta(&self, rho: f64) -> Result<f64> {
        Ok(delta_of(self.dphi(rho)?))
    }

    pub fn lambda_phi(&self, rho: f64) -> Result<f64> {
        let phi = self.phi(rho)?;
        if phi <= 0.0 {
            return Err(Error::ShoreSingularity { rho });
        }
        Ok(lambda_of(phi, self.dphi(rho)?, self.beta))
    }

    pub fn radial(&self, rho: f64) -> Result<RadialSeries> {
        let phi = self.depth.eval(Series::var(rho))?;
        let dphi = phi.deriv();
        let delta = delta_of(dphi);
        let lambda = if phi.val() > 0.0 {
            lambda_of(phi, dphi, self.beta)
        } else {
            Series::cst(0.0)
        };
        Ok(RadialSeries {
            rho,
            phi,
            dphi,
            delta,
            lambda,
        })
    }

    pub fn frame<T: Scalar>(&self, x: T, y: T) -> Result<ShoreFrame<T>> {
        self.shore.frame(x, y)
    }

    /// Membership in `Ω_φ` and distance to its top and bottom.
    pub fn domain_probe(&self, x: [f64; 3]) -> Probe {
        let outside = Probe {
            inside: false,
            d_phi: 0.0,
        };
        let Ok(f) = self.shore.frame(x[0], x[1]) else {
            return outside;
        };
        if f.rho <= self.depth.rho0 {
            return outside;
        }
        let phi = self.depth.phi(f.rho);
        let z = x[2];
        if z > -phi && z < 0.0 {
            Probe {
                inside: true,
                d_phi: (-z).min(phi + z),
            }
        } else {
            outside
        }
    }
}
