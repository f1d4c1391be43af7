//! Two technical identities behind the error estimates: the growth of
//! ρ-derivatives of cut-off amplitudes near the shore, and the structure of
//! the advection of one bottom-layer field by another.

use rand::Rng;

use super::checks::Check;
use super::fit::fit_loglog;
use super::sample;
use crate::calculus::ops;
use crate::calculus::scalar::{Jet, Scalar, Series};
use crate::calculus::smooth::chi;
use crate::error::{Error, Result};
use crate::geometry::Topography;
use crate::par;

/// `F_ε = e^{-tλ_φ}(1 - χ(φ/ε^{1-a})) Σ_j Q_j(ρ) φ^{-j}`.
#[derive(Clone, Debug)]
pub struct GrowthProbe {
    /// `Q_j(ρ) = c_j (1 + ½ cos(ρ + j))`; the length fixes `m₀`.
    pub coeffs: Vec<f64>,
}

impl GrowthProbe {
    pub fn degree(m0: usize) -> Self {
        let mut coeffs = vec![0.0; m0 + 1];
        coeffs[m0] = 1.0;
        if m0 > 0 {
            coeffs[0] = 0.5;
        }
        GrowthProbe { coeffs }
    }

    pub fn eval(&self, topo: &Topography, eps: f64, a: f64, t: f64, rho: f64) -> Result<Series> {
        let r = topo.radial(rho)?;
        let inv = r.phi.recip();
        let cut = -chi(r.phi / eps.powf(1.0 - a)) + 1.0;
        let mut q = Series::cst(0.0);
        let mut pw = Series::cst(1.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let qj = ((Series::var(rho) + j as f64).cos() * 0.5 + 1.0) * *c;
            q = q + qj * pw;
            pw = pw * inv;
        }
        Ok((r.lambda * -t).exp() * cut * q)
    }
}

/// `sup |∂_ρ^k F_ε|` over a geometric ρ-grid starting at the cut-off edge,
/// for each `k ≤ k_max`, and over the times `t ∈ {0, ½, 1, 2}/λ`.
pub fn growth_sup(
    topo: &Topography,
    probe: &GrowthProbe,
    eps: f64,
    a: f64,
    k_max: usize,
    rho_max: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let edge = topo
        .depth
        .rho_at_depth(0.5 * eps.powf(1.0 - a))
        .ok_or_else(|| Error::Config("cut-off edge outside the depth range".into()))?;
    let lam = topo.lambda_flat();
    let times = [0.0, 0.5 / lam, 1.0 / lam, 2.0 / lam];
    let span = rho_max - edge;
    let rhos: Vec<f64> = (0..n)
        .map(|i| edge + span * ((i as f64 + 0.5) / n as f64).powi(3))
        .collect();
    let per: Result<Vec<Vec<f64>>> = par::map(&rhos, |&rho| {
        let mut best = vec![0.0f64; k_max + 1];
        for &t in &times {
            let s = probe.eval(topo, eps, a, t, rho)?;
            for (k, b) in best.iter_mut().enumerate() {
                *b = b.max(s.derivative(k).abs());
            }
        }
        Ok(best)
    })
    .into_iter()
    .collect();
    let mut sup = vec![0.0f64; k_max + 1];
    for row in per? {
        for (s, v) in sup.iter_mut().zip(row) {
            *s = s.max(v);
        }
    }
    Ok(sup)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthExponent {
    pub k: usize,
    pub m0: usize,
    pub measured: f64,
    pub stderr: f64,
    pub bound: f64,
}

impl GrowthExponent {
    /// Blow-up no faster than `ε^{bound}` up to the slack.
    pub fn pass(&self, slack: f64) -> bool {
        self.measured >= self.bound - slack
    }
}

pub const GROWTH_EPSILONS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Fitted ε-exponents of `sup |∂_ρ^k F_ε|` for `k, m₀ ≤ 2`.
pub fn growth_exponents(topo: &Topography, a: f64, epsilons: &[f64]) -> Result<Vec<GrowthExponent>> {
    let rho_max = topo.depth.rho0 + 6.0 * topo.depth.ell;
    let mut out = Vec::new();
    for m0 in 0..=2 {
        let probe = GrowthProbe::degree(m0);
        let sups: Result<Vec<Vec<f64>>> = epsilons
            .iter()
            .map(|&e| growth_sup(topo, &probe, e, a, 2, rho_max, 6000))
            .collect();
        let sups = sups?;
        for k in 0..=2 {
            let y: Vec<f64> = sups.iter().map(|s| s[k]).collect();
            let fit = fit_loglog(epsilons, &y)?;
            out.push(GrowthExponent {
                k,
                m0,
                measured: fit.slope,
                stderr: fit.stderr,
                bound: -((k + m0) as f64) * (1.0 - a),
            });
        }
    }
    Ok(out)
}

pub fn check_growth(topo: &Topography, a: f64) -> Result<Check> {
    let exps = growth_exponents(topo, a, &GROWTH_EPSILONS)?;
    let worst = exps
        .iter()
        .map(|g| g.bound - g.measured)
        .fold(f64::MIN, f64::max);
    let mut c = Check::at_most("appendix_growth", worst, 0.1);
    for g in &exps {
        c = c.note(&format!("slope_k{}_m{}", g.k, g.m0), g.measured);
    }
    Ok(c)
}

/// One random profile `a(ρ, ζ₁, ζ₂)`: a radial wave times a decaying
/// oscillation in the layer variable times a slow modulation.
#[derive(Clone, Copy, Debug)]
pub struct LayerProfile {
    amp: f64,
    radial: [f64; 2],
    decay: f64,
    freq: f64,
    phase: f64,
    slow: [f64; 2],
}

impl LayerProfile {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        LayerProfile {
            amp: rng.gen_range(-1.0..1.0),
            radial: [rng.gen_range(0.2..2.0), rng.gen_range(0.0..6.3)],
            decay: rng.gen_range(0.5..1.5),
            freq: rng.gen_range(0.0..1.5),
            phase: rng.gen_range(0.0..6.3),
            slow: [rng.gen_range(-0.5..0.5), rng.gen_range(0.2..2.0)],
        }
    }

    /// `ζ₁ ≤ 0` is the stretched distance to the bottom.
    pub fn eval<T: Scalar>(&self, rho: T, z1: T, z2: T) -> T {
        let r = (rho * self.radial[0] + self.radial[1]).sin() + 1.5;
        let l = (z1 * self.decay).exp() * (z1 * self.freq + self.phase).cos();
        let s = (z2 * self.slow[1]).tanh() * self.slow[0] + 1.0;
        r * l * s * self.amp
    }
}

/// `(M^ρ, M^θ, N^ρ, N^θ, N^z)`.
#[derive(Clone, Copy, Debug)]
pub struct ProfileSet(pub [LayerProfile; 5]);

impl ProfileSet {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        ProfileSet(std::array::from_fn(|_| LayerProfile::random(rng)))
    }
}

/// Bottom-layer coordinates at a point, with their Cartesian jets.
struct LayerVars {
    rho: Jet,
    z1: Jet,
    z2: Jet,
    grad: [Jet; 2],
    dphi: Jet,
    lap: f64,
    /// `δ′/δ`.
    dlog_delta: f64,
}

fn layer_vars(topo: &Topography, eps: f64, a: f64, x: [f64; 3]) -> Result<LayerVars> {
    let f = topo.frame(Jet::var(0, x[0]), Jet::var(1, x[1]))?;
    let r = topo.radial(f.rho.v)?;
    let phi = f.rho.compose(&r.phi.0);
    let dphi = f.rho.compose(&r.dphi.0);
    let delta = f.rho.compose(&r.delta.0);
    let se = (2.0 * topo.beta).sqrt() * eps;
    let h = Jet::var(2, x[2]) + phi;
    Ok(LayerVars {
        rho: f.rho,
        z1: -h / (delta * se),
        z2: h / eps.powf(1.0 - a),
        grad: f.grad,
        dphi,
        lap: f.lap.v,
        dlog_delta: r.delta.derivative(1) / r.delta.val(),
    })
}

/// Relative mismatch between the direct advection `M_BL·∇N_BL` and the
/// reduced formula at one point.
pub fn advection_mismatch(topo: &Topography, eps: f64, a: f64, p: &ProfileSet, x: [f64; 3]) -> Result<f64> {
    mismatch_signed(topo, eps, a, p, x, 1.0)
}

fn mismatch_signed(
    topo: &Topography,
    eps: f64,
    a: f64,
    p: &ProfileSet,
    x: [f64; 3],
    curv_sign: f64,
) -> Result<f64> {
    let v = layer_vars(topo, eps, a, x)?;
    let ev = |i: usize| p.0[i].eval(v.rho, v.z1, v.z2);
    let [mr, mt, nr, nt, nz] = std::array::from_fn(|i| ev(i));
    let [g0, g1] = v.grad;
    // ∇⊥ρ = (-∂_yρ, ∂_xρ)
    let m = [mr * g0 - mt * g1, mr * g1 + mt * g0, -(v.dphi * mr)];
    let n = [nr * g0 - nt * g1, nr * g1 + nt * g0, nz];
    let lhs = ops::advect_by(&m, &n);

    let (rho, z1, z2) = (v.rho.v, v.z1.v, v.z2.v);
    let d = |i: usize| {
        let dr = p.0[i].eval(Series::var(rho), Series::cst(z1), Series::cst(z2)).derivative(1);
        let dz = p.0[i].eval(Series::cst(rho), Series::var(z1), Series::cst(z2)).derivative(1);
        (dr, dz)
    };
    let transport = |i: usize| {
        let (dr, dz) = d(i);
        mr.v * (dr - v.dlog_delta * z1 * dz)
    };
    let c_rho = transport(2) - mt.v * nt.v * v.lap;
    let c_theta = transport(3) + curv_sign * mt.v * nr.v * v.lap;
    let c_z = transport(4);
    let (gx, gy) = (g0.v, g1.v);
    let rhs = [c_rho * gx - c_theta * gy, c_rho * gy + c_theta * gx, c_z];

    let scale = (mr.v.abs() + mt.v.abs())
        * (2..5)
            .map(|i| {
                let (dr, dz) = d(i);
                dr.abs() + (v.dlog_delta * z1 * dz).abs()
            })
            .sum::<f64>()
        + mt.v.abs() * (nr.v.abs() + nt.v.abs()) * v.lap
        + ops::norm(lhs);
    let err = ops::norm([lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]]);
    Ok(err / scale.max(1e-300))
}

/// Worst relative mismatch over `n_profiles` random profile sets, each at
/// `n_points` random points in the bottom layer and the column above it.
pub fn advection_identity(
    topo: &Topography,
    eps: f64,
    a: f64,
    n_profiles: usize,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = sample::rng(seed);
    let rho0 = topo.depth.rho0;
    let layer = (2.0 * topo.beta).sqrt() * eps;
    let mut cases = Vec::with_capacity(n_profiles * n_points);
    for _ in 0..n_profiles {
        let p = ProfileSet::random(&mut rng);
        for i in 0..n_points {
            let rho = rho0 + 0.05 + rng.gen::<f64>() * 6.0;
            let xh = sample::horizontal(topo, rho, &mut rng);
            let phi = topo.phi(rho)?;
            let d = topo.delta(rho)?;
            let u: f64 = rng.gen();
            let up = if i % 2 == 0 { u * 6.0 * d * layer } else { u * phi };
            cases.push((p, [xh[0], xh[1], -phi + up.min(phi)]));
        }
    }
    let errs: Result<Vec<f64>> = par::map(&cases, |(p, x)| advection_mismatch(topo, eps, a, p, *x))
        .into_iter()
        .collect();
    Ok(errs?.into_iter().fold(0.0, f64::max))
}

pub fn check_advection_identity(topo: &Topography, eps: f64, a: f64, seed: u64) -> Result<Check> {
    let worst = advection_identity(topo, eps, a, 100, 1000, seed)?;
    Ok(Check::at_most("appendix_advection_identity", worst, 1e-8).seeded(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexShore, DepthFamily, DepthProfile, FourierCurve};

    fn topo() -> Topography {
        let depth = DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap();
        Topography::new(ConvexShore::disk(1.0).unwrap(), depth, 0.5).unwrap()
    }

    #[test]
    fn growth_series_matches_finite_differences() {
        let t = topo();
        let p = GrowthProbe::degree(2);
        let (eps, a, rho) = (0.05, 0.75, 0.3);
        let s = p.eval(&t, eps, a, 0.7, rho).unwrap();
        let h = 1e-4;
        let f = |r: f64| p.eval(&t, eps, a, 0.7, r).unwrap().val();
        let d2 = (f(rho + h) - 2.0 * f(rho) + f(rho - h)) / (h * h);
        assert!((s.derivative(2) - d2).abs() < 1e-4 * d2.abs().max(1.0));
    }

    #[test]
    fn plain_amplitude_does_not_blow_up() {
        let t = topo();
        let e = growth_exponents(&t, 0.75, &GROWTH_EPSILONS).unwrap();
        let g00 = e.iter().find(|g| g.k == 0 && g.m0 == 0).unwrap();
        assert!(g00.measured.abs() < 0.05, "{g00:?}");
        assert!(e.iter().all(|g| g.pass(0.1)), "{e:?}");
    }

    #[test]
    fn advection_identity_on_disk() {
        let worst = advection_identity(&topo(), 0.05, 0.75, 10, 100, 3).unwrap();
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn advection_identity_on_curve() {
        let depth = DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap();
        let shore = ConvexShore::Curve(FourierCurve::new(6.0, 0.3, 3, 512).unwrap());
        let t = Topography::new(shore, depth, 0.5).unwrap();
        let worst = advection_identity(&t, 0.1, 0.75, 5, 50, 4).unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn flipped_curvature_sign_is_detected() {
        let t = topo();
        let mut rng = sample::rng(9);
        let p = ProfileSet::random(&mut rng);
        let rho = (1.6f64.powi(2) + 0.09).sqrt() - 1.0;
        let x = [1.6, 0.3, -t.phi(rho).unwrap() + 0.03];
        assert!(mismatch_signed(&t, 0.05, 0.75, &p, x, 1.0).unwrap() < 1e-12);
        assert!(mismatch_signed(&t, 0.05, 0.75, &p, x, -1.0).unwrap() > 1e-3);
    }
}
