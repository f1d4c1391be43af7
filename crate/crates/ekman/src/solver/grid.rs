//! Staggered grid in terrain-following coordinates `(ρ, σ)`, `z = σ φ(ρ)`.
//!
//! Cells carry the pressure. The radial and azimuthal velocities share the
//! interior radial faces (at cell-centre heights), the vertical velocity
//! lives on interior σ-faces (at cell-centre radii). Wall values are zero
//! and are not stored.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexShore, Topography};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nr: usize,
    pub nz: usize,
    /// Distance of the inner wall from the shore.
    pub rho_min: f64,
    /// Distance of the outer wall from the shore.
    pub rho_out: f64,
    /// tanh clustering strength of the σ-levels at both ends; 0 is uniform.
    pub stretch: f64,
}

#[derive(Clone, Debug)]
pub struct Grid2D {
    pub radius: f64,
    pub nr: usize,
    pub nz: usize,
    pub rho_f: Vec<f64>,
    pub rho_c: Vec<f64>,
    pub sig_f: Vec<f64>,
    pub sig_c: Vec<f64>,
    pub phi_f: Vec<f64>,
    pub phi_c: Vec<f64>,
    pub dphi_c: Vec<f64>,
    pub dphi_f: Vec<f64>,
    /// Cell volumes (2π included).
    pub vol_c: Vec<f64>,
    /// Control volumes of the radial-face nodes.
    pub mass_u: Vec<f64>,
    /// Control volumes of the σ-face nodes.
    pub mass_w: Vec<f64>,
}

/// σ-levels from -1 to 0, clustered at both ends.
pub fn sigma_levels(nz: usize, stretch: f64) -> Vec<f64> {
    (0..=nz)
        .map(|j| {
            let xi = j as f64 / nz as f64;
            if stretch <= 0.0 {
                xi - 1.0
            } else {
                let y = (stretch * (2.0 * xi - 1.0)).tanh() / stretch.tanh();
                0.5 * (1.0 + y) - 1.0
            }
        })
        .collect()
}

impl Grid2D {
    pub fn new(topo: &Topography, spec: &GridSpec) -> Result<Self> {
        let ConvexShore::Disk { radius } = topo.shore else {
            return Err(Error::Config("the solver runs on the disk shore only".into()));
        };
        let GridSpec {
            nr,
            nz,
            rho_min,
            rho_out,
            stretch,
        } = *spec;
        if nr < 4 || nz < 4 {
            return Err(Error::Config(format!("grid {nr}x{nz} is too small")));
        }
        if !(rho_min > topo.depth.rho0) || !(rho_out > rho_min) {
            return Err(Error::Config(format!(
                "solver walls need rho0 < rho_min < rho_out (got {}, {rho_min}, {rho_out})",
                topo.depth.rho0
            )));
        }
        let rho_f: Vec<f64> = (0..=nr)
            .map(|i| rho_min + (rho_out - rho_min) * i as f64 / nr as f64)
            .collect();
        let rho_c: Vec<f64> = rho_f.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let sig_f = sigma_levels(nz, stretch);
        let sig_c: Vec<f64> = sig_f.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let phi_f: Vec<f64> = rho_f.iter().map(|&r| topo.depth.phi(r)).collect();
        let phi_c: Vec<f64> = rho_c.iter().map(|&r| topo.depth.phi(r)).collect();
        let dphi_c: Vec<f64> = rho_c
            .iter()
            .map(|&r| topo.dphi(r))
            .collect::<Result<_>>()?;
        let dphi_f: Vec<f64> = rho_f
            .iter()
            .map(|&r| topo.dphi(r))
            .collect::<Result<_>>()?;
        if phi_f[0] <= 0.0 {
            return Err(Error::Config("the inner wall must stand in water (phi > 0)".into()));
        }
        let dr: Vec<f64> = rho_f.windows(2).map(|w| w[1] - w[0]).collect();
        let ds: Vec<f64> = sig_f.windows(2).map(|w| w[1] - w[0]).collect();
        let mut vol_c = vec![0.0; nr * nz];
        for i in 0..nr {
            for j in 0..nz {
                vol_c[i * nz + j] = 2.0 * PI * (radius + rho_c[i]) * phi_c[i] * dr[i] * ds[j];
            }
        }
        let mut mass_u = vec![0.0; (nr - 1) * nz];
        for i in 1..nr {
            let w = 0.5 * (dr[i - 1] + dr[i]);
            for j in 0..nz {
                mass_u[(i - 1) * nz + j] = 2.0 * PI * (radius + rho_f[i]) * phi_f[i] * w * ds[j];
            }
        }
        let mut mass_w = vec![0.0; nr * (nz - 1)];
        for i in 0..nr {
            for j in 1..nz {
                let w = 0.5 * (ds[j - 1] + ds[j]);
                mass_w[i * (nz - 1) + j - 1] = 2.0 * PI * (radius + rho_c[i]) * phi_c[i] * dr[i] * w;
            }
        }
        Ok(Grid2D {
            radius,
            nr,
            nz,
            rho_f,
            rho_c,
            sig_f,
            sig_c,
            phi_f,
            phi_c,
            dphi_c,
            dphi_f,
            vol_c,
            mass_u,
            mass_w,
        })
    }

    pub fn n_u(&self) -> usize {
        (self.nr - 1) * self.nz
    }

    pub fn n_w(&self) -> usize {
        self.nr * (self.nz - 1)
    }

    pub fn n_c(&self) -> usize {
        self.nr * self.nz
    }

    /// Radial-face node: face `i ∈ 1..nr`, level `j ∈ 0..nz`.
    #[inline]
    pub fn u_idx(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.nz + j
    }

    /// σ-face node: column `i ∈ 0..nr`, face `j ∈ 1..nz`.
    #[inline]
    pub fn w_idx(&self, i: usize, j: usize) -> usize {
        i * (self.nz - 1) + j - 1
    }

    #[inline]
    pub fn c_idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    /// `(ρ, z)` of a radial-face node.
    pub fn u_pos(&self, i: usize, j: usize) -> (f64, f64) {
        (self.rho_f[i], self.sig_c[j] * self.phi_f[i])
    }

    /// `(ρ, z)` of a σ-face node.
    pub fn w_pos(&self, i: usize, j: usize) -> (f64, f64) {
        (self.rho_c[i], self.sig_f[j] * self.phi_c[i])
    }

    pub fn r(&self, rho: f64) -> f64 {
        self.radius + rho
    }

    /// Largest physical thickness of a wall-adjacent cell.
    pub fn max_wall_spacing(&self) -> f64 {
        let d0 = self.sig_f[1] - self.sig_f[0];
        let d1 = self.sig_f[self.nz] - self.sig_f[self.nz - 1];
        let pmax = self.phi_f.iter().copied().fold(0.0, f64::max);
        d0.max(d1) * pmax
    }

    pub fn volume(&self) -> f64 {
        self.vol_c.iter().sum()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{DepthFamily, DepthProfile};

    pub(crate) fn topo(family: DepthFamily) -> Topography {
        Topography::new(
            ConvexShore::disk(1.0).unwrap(),
            DepthProfile::new(family, 0.1, 4.0, 2.0).unwrap(),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn levels_span_the_column_and_cluster() {
        let s = sigma_levels(40, 2.0);
        assert_eq!(s[0], -1.0);
        assert!(s[40].abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(s[1] - s[0] < 0.5 * (s[21] - s[20]));
    }

    #[test]
    fn volumes_match_the_column_integral() {
        let t = topo(DepthFamily::Exp);
        let spec = GridSpec {
            nr: 400,
            nz: 8,
            rho_min: 0.5,
            rho_out: 6.0,
            stretch: 2.0,
        };
        let g = Grid2D::new(&t, &spec).unwrap();
        let exact = crate::calculus::Rule::uniform(0.5, 6.0, 64, 8)
            .integrate(|r| 2.0 * PI * (1.0 + r) * t.depth.phi(r));
        assert!((g.volume() / exact - 1.0).abs() < 1e-5);
        let mu: f64 = g.mass_u.iter().sum();
        let mw: f64 = g.mass_w.iter().sum();
        assert!(mu < exact && mw < exact);
    }

    #[test]
    fn rejects_curved_shore_and_dry_wall() {
        let mut t = topo(DepthFamily::Exp);
        let spec = GridSpec {
            nr: 8,
            nz: 8,
            rho_min: 0.05,
            rho_out: 4.0,
            stretch: 1.0,
        };
        assert!(Grid2D::new(&t, &spec).is_err());
        t.shore = ConvexShore::Curve(crate::geometry::FourierCurve::new(8.0, 0.01, 3, 256).unwrap());
        assert!(Grid2D::new(&t, &GridSpec { rho_min: 0.5, ..spec }).is_err());
    }
}
