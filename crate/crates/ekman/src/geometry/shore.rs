//! Convex shore curves and the distance function ρ.

use std::f64::consts::PI;

use crate::calculus::quadrature::gauss_legendre;
use crate::calculus::scalar::{Scalar, Series};
use crate::error::{Error, Result};

/// Distance to the shore together with the moving frame at a point.
#[derive(Clone, Copy, Debug)]
pub struct ShoreFrame<T> {
    pub rho: T,
    /// `∇ρ`, the outward unit normal.
    pub grad: [T; 2],
    /// `Δρ = κ / (1 + ρκ)`.
    pub lap: T,
}

impl<T: Scalar> ShoreFrame<T> {
    /// `rotate90(∇ρ)`.
    pub fn grad_perp(&self) -> [T; 2] {
        [-self.grad[1], self.grad[0]]
    }
}

/// Closed, convex, unit-speed curve with curvature
/// `κ(ω) = (2π/L)(1 + A cos(mτ))`, `τ = 2πω/L`.
///
/// The tangent angle is `τ + (A/m) sin(mτ)`; for `m ≥ 2` the curve has an
/// `m`-fold rotational symmetry and closes exactly.
#[derive(Clone, Debug)]
pub struct FourierCurve {
    length: f64,
    amp: f64,
    mode: u32,
    /// `γ` at `ω_j = j L / n`.
    samples: Vec<[f64; 2]>,
    curvature: Vec<f64>,
}

const GL_ORDER: usize = 10;

impl FourierCurve {
    pub fn new(length: f64, amp: f64, mode: u32, n_samples: usize) -> Result<Self> {
        if !(length > 0.0) || !(0.0..1.0).contains(&amp) || mode < 2 || n_samples < 16 {
            return Err(Error::Config(format!(
                "curve needs L > 0, 0 <= A < 1, m >= 2 (got L={length}, A={amp}, m={mode})"
            )));
        }
        let mut c = FourierCurve {
            length,
            amp,
            mode,
            samples: Vec::with_capacity(n_samples),
            curvature: Vec::with_capacity(n_samples),
        };
        let h = length / n_samples as f64;
        let mut p = [0.0, 0.0];
        for j in 0..n_samples {
            let w = j as f64 * h;
            c.samples.push(p);
            c.curvature.push(c.kappa(w));
            let d = c.integrate_tangent(w, w + h);
            p = [p[0] + d[0], p[1] + d[1]];
        }
        let n = n_samples as f64;
        let mx = c.samples.iter().map(|s| s[0]).sum::<f64>() / n;
        let my = c.samples.iter().map(|s| s[1]).sum::<f64>() / n;
        for s in c.samples.iter_mut() {
            s[0] -= mx;
            s[1] -= my;
        }
        Ok(c)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn curvature_samples(&self) -> &[f64] {
        &self.curvature
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }

    fn tau<T: Scalar>(&self, w: T) -> T {
        w * (2.0 * PI / self.length)
    }

    fn angle<T: Scalar>(&self, w: T) -> T {
        let m = self.mode as f64;
        let tau = self.tau(w);
        tau + (tau * m).sin() * (self.amp / m)
    }

    pub fn kappa(&self, w: f64) -> f64 {
        let tau = self.tau(w);
        2.0 * PI / self.length * (1.0 + self.amp * (self.mode as f64 * tau).cos())
    }

    pub fn tangent(&self, w: f64) -> [f64; 2] {
        let th = self.angle(w);
        [th.cos(), th.sin()]
    }

    fn integrate_tangent(&self, a: f64, b: f64) -> [f64; 2] {
        let (x, wt) = gauss_legendre(GL_ORDER);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = [0.0, 0.0];
        for (xi, wi) in x.iter().zip(&wt) {
            let t = self.tangent(c + h * xi);
            s[0] += wi * h * t[0];
            s[1] += wi * h * t[1];
        }
        s
    }

    fn wrap(&self, w: f64) -> f64 {
        w.rem_euclid(self.length)
    }

    /// Position on the curve.
    pub fn gamma(&self, w: f64) -> [f64; 2] {
        let w = self.wrap(w);
        let n = self.samples.len();
        let h = self.length / n as f64;
        let j = ((w / h).floor() as usize).min(n - 1);
        let base = self.samples[j];
        let d = self.integrate_tangent(j as f64 * h, w);
        [base[0] + d[0], base[1] + d[1]]
    }

    /// Taylor series in ω of `(γ_x, γ_y, κ)` about `w`.
    fn series_at(&self, w: f64) -> ([Series; 2], Series) {
        let ws = Series::var(w);
        let th = self.angle(ws);
        let g = self.gamma(w);
        let gx = th.cos().integral(g[0]);
        let gy = th.sin().integral(g[1]);
        let tau = self.tau(ws);
        let kap = ((tau * self.mode as f64).cos() * self.amp + 1.0) * (2.0 * PI / self.length);
        ([gx, gy], kap)
    }

    /// Newton projection of `(x, y)` onto the curve; returns `ω*`.
    pub fn project(&self, x: f64, y: f64) -> Result<f64> {
        let (j, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, s)| (j, (s[0] - x).powi(2) + (s[1] - y).powi(2)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("curve has samples");
        let mut w = j as f64 * self.length / self.samples.len() as f64;
        let mut res = f64::INFINITY;
        for _ in 0..50 {
            let g = self.gamma(w);
            let t = self.tangent(w);
            let (dx, dy) = (x - g[0], y - g[1]);
            let f = dx * t[0] + dy * t[1];
            let rho = dx * t[1] - dy * t[0];
            let k = self.kappa(w);
            let step = f / (1.0 + k * rho.max(0.0));
            w += step;
            res = step.abs();
            if res < 1e-15 * self.length {
                return Ok(self.wrap(w));
            }
        }
        if res < 1e-12 * self.length {
            return Ok(self.wrap(w));
        }
        Err(Error::NonConvergence {
            what: "shore projection",
            iterations: 50,
            residual: res,
        })
    }
}

#[derive(Clone, Debug)]
pub enum ConvexShore {
    Disk { radius: f64 },
    Curve(FourierCurve),
}

impl ConvexShore {
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("disk radius must be positive, got {radius}")));
        }
        Ok(ConvexShore::Disk { radius })
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, ConvexShore::Disk { .. })
    }

    /// Perimeter of Γ.
    pub fn length(&self) -> f64 {
        match self {
            ConvexShore::Disk { radius } => 2.0 * PI * radius,
            ConvexShore::Curve(c) => c.length(),
        }
    }

    /// Curvature of Γ at arclength `w`.
    pub fn curvature(&self, w: f64) -> f64 {
        match self {
            ConvexShore::Disk { radius } => 1.0 / radius,
            ConvexShore::Curve(c) => c.kappa(w),
        }
    }

    /// The point at arclength `w` and distance `rho` from the shore.
    pub fn point(&self, w: f64, rho: f64) -> [f64; 2] {
        match self {
            ConvexShore::Disk { radius } => {
                let a = w / radius;
                let r = radius + rho;
                [r * a.cos(), r * a.sin()]
            }
            ConvexShore::Curve(c) => {
                let g = c.gamma(w);
                let t = c.tangent(w);
                [g[0] + rho * t[1], g[1] - rho * t[0]]
            }
        }
    }

    /// Distance, gradient and Laplacian of ρ at a point outside Γ.
    pub fn frame<T: Scalar>(&self, x: T, y: T) -> Result<ShoreFrame<T>> {
        match self {
            ConvexShore::Disk { radius } => {
                let r = (x * x + y * y).sqrt();
                if !(r.val() > *radius) {
                    return Err(Error::Domain(format!(
                        "point ({}, {}) is not outside the shore",
                        x.val(),
                        y.val()
                    )));
                }
                let ir = r.recip();
                Ok(ShoreFrame {
                    rho: r - *radius,
                    grad: [x * ir, y * ir],
                    lap: ir,
                })
            }
            ConvexShore::Curve(c) => {
                let w0 = c.project(x.val(), y.val())?;
                let ([gx, gy], kap) = c.series_at(w0);
                let tx_s = gx.deriv();
                let ty_s = gy.deriv();
                let eval = |w: T| {
                    let g = [w.compose(&gx.0), w.compose(&gy.0)];
                    let t = [w.compose(&tx_s.0), w.compose(&ty_s.0)];
                    (g, t, w.compose(&kap.0))
                };
                // Newton in the scalar type lifts the implicit derivatives of ω*.
                let mut w = T::cst(w0);
                for _ in 0..3 {
                    let (g, t, k) = eval(w);
                    let dx = x - g[0];
                    let dy = y - g[1];
                    let f = dx * t[0] + dy * t[1];
                    let rho = dx * t[1] - dy * t[0];
                    w = w + f / (rho * k + 1.0);
                }
                let (g, t, k) = eval(w);
                let grad = [t[1], -t[0]];
                let rho = (x - g[0]) * grad[0] + (y - g[1]) * grad[1];
                if !(rho.val() > 0.0) {
                    return Err(Error::Domain(format!(
                        "point ({}, {}) is not outside the shore",
                        x.val(),
                        y.val()
                    )));
                }
                Ok(ShoreFrame {
                    rho,
                    grad,
                    lap: k / (rho * k + 1.0),
                })
            }
        }
    }
}
