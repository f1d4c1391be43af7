//! Boundary-layer adapted quadrature over `Ω_φ`, the norms built on it, and
//! time integration on geometric grids.

use serde::{Deserialize, Serialize};

use super::quadrature::{breaks_with, Rule};
use crate::error::{Error, Result};
use crate::geometry::Topography;
use crate::par;

/// Width of the layer panels, in layer thicknesses.
pub const LAYER_SPAN: f64 = 40.0;

/// Sub-panel breaks inside a layer panel, in layer thicknesses.
const LAYER_BREAKS: [f64; 17] = [
    0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0, 10.0, 13.0, 17.0, 22.0, 30.0, 40.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Radial nodes (rounded up to whole 8-point panels).
    pub n_rho: usize,
    /// Nodes across the column interior between the layer panels.
    pub n_z_interior: usize,
    /// Gauss nodes per layer sub-panel.
    pub n_z_layer: usize,
    /// Time horizon `T* = factor / λ`.
    pub t_star_factor: f64,
    /// Tangential nodes for non-circular shores.
    pub n_omega: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            n_rho: 192,
            n_z_interior: 32,
            n_z_layer: 6,
            t_star_factor: 8.0,
            n_omega: 64,
        }
    }
}

impl QuadConfig {
    pub fn refined(&self) -> Self {
        QuadConfig {
            n_rho: 2 * self.n_rho,
            n_z_interior: 2 * self.n_z_interior,
            n_z_layer: 2 * self.n_z_layer,
            t_star_factor: self.t_star_factor,
            n_omega: 2 * self.n_omega,
        }
    }
}

/// One vertical column of the domain quadrature.
#[derive(Clone, Debug)]
pub struct QuadColumn {
    pub xh: [f64; 2],
    pub rho: f64,
    /// Horizontal weight (area element included).
    pub weight: f64,
    pub phi: f64,
    pub z: Rule,
}

/// Vertical scales that shape the column rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerScales {
    /// `√E`.
    pub layer: f64,
    /// `ε^{1-a}`.
    pub cutoff: f64,
}

#[derive(Clone, Debug)]
pub struct DomainQuadrature {
    pub columns: Vec<QuadColumn>,
    pub rho_range: (f64, f64),
}

/// Vertical rule on `[-φ, 0]` with graded panels in both layers.
pub fn column_rule(phi: f64, delta: f64, scales: LayerScales, cfg: &QuadConfig) -> Rule {
    let half = 0.5 * phi;
    let mut breaks = vec![-phi, 0.0, -half];
    for &b in LAYER_BREAKS.iter() {
        let ds = b * scales.layer;
        if ds < half {
            breaks.push(-ds);
        }
        let db = b * delta * scales.layer;
        if db < half {
            breaks.push(-phi + db);
        }
    }
    for f in [0.5, 0.75, 1.0] {
        let d = f * scales.cutoff;
        if d < phi {
            breaks.push(-d);
            breaks.push(-phi + d);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * phi);
    let top_layer = (LAYER_SPAN * scales.layer).min(half);
    let bot_layer = (LAYER_SPAN * delta * scales.layer).min(half);
    let middle = phi - top_layer - bot_layer;
    let n_mid = cfg.n_z_interior.div_ceil(cfg.n_z_layer).max(1);
    let h = if middle > 0.0 {
        middle / n_mid as f64
    } else {
        phi
    };
    let cuts = breaks_with(-phi, 0.0, h.max(1e-300), &breaks);
    Rule::composite(&cuts, cfg.n_z_layer)
}

impl DomainQuadrature {
    /// Quadrature over `{ρ₀ < ρ < rho_max}` of `Ω_φ`. Radial break points
    /// in `extra` (e.g. the cut-off transition) are honoured.
    pub fn new(
        topo: &Topography,
        scales: LayerScales,
        rho_max: f64,
        extra: &[f64],
        cfg: &QuadConfig,
    ) -> Result<Self> {
        let rho0 = topo.depth.rho0;
        if !(rho_max > rho0) {
            return Err(Error::Config(format!(
                "quadrature range [{rho0}, {rho_max}] is empty"
            )));
        }
        let panels = cfg.n_rho.div_ceil(8).max(1);
        let h = (rho_max - rho0) / panels as f64;
        let radial = Rule::composite(&breaks_with(rho0, rho_max, h, extra), 8);
        let mut columns = Vec::new();
        match &topo.shore {
            crate::geometry::ConvexShore::Disk { radius } => {
                for (&rho, &w) in radial.nodes.iter().zip(&radial.weights) {
                    columns.push(Self::make_column(
                        topo,
                        [radius + rho, 0.0],
                        rho,
                        w * 2.0 * std::f64::consts::PI * (radius + rho),
                        scales,
                        cfg,
                    )?);
                }
            }
            shore => {
                let len = shore.length();
                let dw = len / cfg.n_omega as f64;
                for j in 0..cfg.n_omega {
                    let om = j as f64 * dw;
                    let k = shore.curvature(om);
                    for (&rho, &w) in radial.nodes.iter().zip(&radial.weights) {
                        let xh = shore.point(om, rho);
                        columns.push(Self::make_column(
                            topo,
                            xh,
                            rho,
                            w * dw * (1.0 + rho * k),
                            scales,
                            cfg,
                        )?);
                    }
                }
            }
        }
        Ok(DomainQuadrature {
            columns,
            rho_range: (rho0, rho_max),
        })
    }

    fn make_column(
        topo: &Topography,
        xh: [f64; 2],
        rho: f64,
        weight: f64,
        scales: LayerScales,
        cfg: &QuadConfig,
    ) -> Result<QuadColumn> {
        let phi = topo.phi(rho)?;
        let delta = topo.delta(rho)?;
        Ok(QuadColumn {
            xh,
            rho,
            weight,
            phi,
            z: column_rule(phi, delta, scales, cfg),
        })
    }

    pub fn n_points(&self) -> usize {
        self.columns.iter().map(|c| c.z.len()).sum()
    }

    /// `Σ_col w_col · f(col)`, with columns evaluated in parallel and summed
    /// in a fixed order.
    pub fn integrate_columns<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&QuadColumn) -> Result<f64> + Sync + Send,
    {
        let vals = par::map(&self.columns, |c| f(c).map(|v| v * c.weight));
        let vals: Result<Vec<f64>> = vals.into_iter().collect();
        Ok(par::ordered_sum(&vals?))
    }

    /// Per-column values, in column order.
    pub fn map_columns<O, F>(&self, f: F) -> Result<Vec<O>>
    where
        O: Send,
        F: Fn(&QuadColumn) -> Result<O> + Sync + Send,
    {
        par::map(&self.columns, f).into_iter().collect()
    }

    /// `‖F‖_{L²(Ω)}` where `sq(col, z)` returns `|F|²`.
    pub fn norm_l2<F>(&self, sq: F) -> Result<f64>
    where
        F: Fn(&QuadColumn, f64) -> Result<f64> + Sync + Send,
    {
        let s = self.integrate_columns(|c| vertical(c, |z| sq(c, z)))?;
        Ok(s.max(0.0).sqrt())
    }

    /// `sup_{x_h} (∫ |F|² dz)^{1/2}`.
    pub fn norm_linf_l2<F>(&self, sq: F) -> Result<f64>
    where
        F: Fn(&QuadColumn, f64) -> Result<f64> + Sync + Send,
    {
        let v = self.map_columns(|c| vertical(c, |z| sq(c, z)))?;
        Ok(v.into_iter().fold(0.0, f64::max).sqrt())
    }

    /// `sup_{x_h} (∫ d_φ |F|² dz)^{1/2}` with `d_φ = min(-z, φ+z)`.
    pub fn norm_weighted_dphi<F>(&self, sq: F) -> Result<f64>
    where
        F: Fn(&QuadColumn, f64) -> Result<f64> + Sync + Send,
    {
        self.norm_linf_l2(|c, z| Ok((-z).min(c.phi + z) * sq(c, z)?))
    }

    /// Volume of the covered part of `Ω_φ`.
    pub fn volume(&self) -> f64 {
        self.columns
            .iter()
            .map(|c| c.weight * c.z.weights.iter().sum::<f64>())
            .sum()
    }
}

/// Weighted vertical sum over a column.
pub fn vertical<F>(c: &QuadColumn, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut s = 0.0;
    for (&z, &w) in c.z.nodes.iter().zip(&c.z.weights) {
        s += w * f(z)?;
    }
    Ok(s)
}

/// `t = 0` followed by `n - 1` geometric points from `1e-3 T*` to `T*`.
pub fn time_grid(t_star: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let mut t = vec![0.0];
    let t0 = 1e-3 * t_star;
    let m = n - 1;
    for i in 0..m {
        let f = if m == 1 { 1.0 } else { i as f64 / (m - 1) as f64 };
        t.push(t0 * (t_star / t0).powf(f));
    }
    t
}

/// Time integral of a sampled norm, with an exponential tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeIntegral {
    pub value: f64,
    pub tail: f64,
}

/// `∫₀^{T*} v dt` by piecewise-exponential interpolation, and the tail
/// bound `v(T*)/λ`.
pub fn time_l1(t: &[f64], v: &[f64], lambda: f64) -> TimeIntegral {
    assert_eq!(t.len(), v.len());
    let mut s = 0.0;
    for i in 0..t.len().saturating_sub(1) {
        let dt = t[i + 1] - t[i];
        let (a, b) = (v[i], v[i + 1]);
        let seg = if a > 0.0 && b > 0.0 && (a - b).abs() > 1e-12 * a.max(b) {
            dt * (b - a) / (b / a).ln()
        } else {
            0.5 * dt * (a + b)
        };
        s += seg;
    }
    let tail = v.last().copied().unwrap_or(0.0) / lambda;
    TimeIntegral { value: s, tail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexShore, DepthFamily, DepthProfile};

    fn topo() -> Topography {
        Topography::new(
            ConvexShore::disk(1.0).unwrap(),
            DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap(),
            0.5,
        )
        .unwrap()
    }

    fn scales(eps: f64) -> LayerScales {
        LayerScales {
            layer: eps,
            cutoff: eps.powf(0.25),
        }
    }

    #[test]
    fn volume_matches_radial_oracle() {
        let t = topo();
        let q = DomainQuadrature::new(&t, scales(0.1), 10.0, &[], &QuadConfig::default()).unwrap();
        let oracle = Rule::uniform(0.1, 10.0, 400, 16)
            .integrate(|r| 2.0 * std::f64::consts::PI * (1.0 + r) * t.depth.phi(r));
        assert!((q.volume() - oracle).abs() <= 1e-8 * oracle);
    }

    #[test]
    fn surface_exponential_integral() {
        let t = topo();
        let eps = 0.05;
        let cfg = QuadConfig::default();
        let rule = column_rule(3.0, 1.2, scales(eps), &cfg);
        let e = eps;
        let q = rule.integrate(|z| (2.0 * z / e).exp());
        assert!((q - e / 2.0).abs() < 1e-12);
        let _ = t;
    }

    #[test]
    fn time_l1_exact_for_exponentials() {
        let t = time_grid(8.0, 24);
        let v: Vec<f64> = t.iter().map(|s| (-s).exp()).collect();
        let r = time_l1(&t, &v, 1.0);
        assert!((r.value - (1.0 - (-8.0f64).exp())).abs() < 1e-12);
        assert!((r.tail - (-8.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn time_grid_shape() {
        let t = time_grid(10.0, 24);
        assert_eq!(t.len(), 24);
        assert_eq!(t[0], 0.0);
        assert!((t[1] - 0.01).abs() < 1e-15);
        assert!((t[23] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn curve_area_element() {
        use crate::geometry::FourierCurve;
        let shore = ConvexShore::Curve(FourierCurve::new(6.0, 0.3, 4, 256).unwrap());
        let t = Topography::new(
            shore,
            DepthProfile::new(DepthFamily::Tanh, 0.1, 1.0, 1.0).unwrap(),
            0.5,
        )
        .unwrap();
        let cfg = QuadConfig {
            n_omega: 128,
            ..QuadConfig::default()
        };
        let q = DomainQuadrature::new(&t, scales(0.1), 3.0, &[], &cfg).unwrap();
        // Steiner: ∫ (L + 2πρ) φ(ρ) dρ
        let oracle = Rule::uniform(0.1, 3.0, 200, 16)
            .integrate(|r| (6.0 + 2.0 * std::f64::consts::PI * r) * t.depth.phi(r));
        assert!((q.volume() - oracle).abs() <= 1e-8 * oracle);
    }
}
