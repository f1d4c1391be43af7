//! Sampling check of the weighted trilinear bound
//! `|(δ·∇δ | w)| ≤ ‖∇δ‖² ‖√d_φ w‖_{L∞_h L²_v}` used in the energy-gap argument.

use rand::Rng;

use super::checks::Check;
use super::sample;
use crate::calculus::quadrature::Rule;
use crate::calculus::scalar::{Jet, Scalar};
use crate::error::Result;
use crate::geometry::Topography;
use crate::par;

/// `Σ a cos(k·x + p)` in three variables.
#[derive(Clone, Debug)]
struct Modes(Vec<[f64; 5]>);

impl Modes {
    fn random<R: Rng>(rng: &mut R, n: usize, kmax: f64) -> Self {
        Modes(
            (0..n)
                .map(|_| {
                    [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-kmax..kmax),
                        rng.gen_range(-kmax..kmax),
                        rng.gen_range(-kmax..kmax),
                        rng.gen_range(0.0..6.3),
                    ]
                })
                .collect(),
        )
    }

    fn eval<T: Scalar>(&self, x: [T; 3]) -> T {
        self.0.iter().fold(T::cst(0.0), |acc, m| {
            acc + (x[0] * m[1] + x[1] * m[2] + x[2] * m[3] + m[4]).cos() * m[0]
        })
    }
}

/// A divergence-free field `δ = curl(b² G)` supported on the columns
/// `ρ ∈ [ρ_a, ρ_b]`, where `b = z(φ+z)(ρ-ρ_a)(ρ_b-ρ)` vanishes on the
/// boundary of that sub-domain; and a bounded test field `w`.
#[derive(Clone, Debug)]
pub struct FieldPair {
    pub rho_a: f64,
    pub rho_b: f64,
    potential: [Modes; 3],
    w: [Modes; 3],
}

impl FieldPair {
    pub fn random<R: Rng>(rng: &mut R, rho_lo: f64, rho_hi: f64) -> Self {
        let a = rng.gen_range(rho_lo..rho_hi - 0.5);
        let b = rng.gen_range(a + 0.5..rho_hi);
        FieldPair {
            rho_a: a,
            rho_b: b,
            potential: std::array::from_fn(|_| Modes::random(rng, 3, 2.0)),
            w: std::array::from_fn(|_| Modes::random(rng, 3, 3.0)),
        }
    }

    /// `(δ, ∂_j δ_i)` at a point inside the sub-domain.
    fn delta(&self, topo: &Topography, x: [f64; 3]) -> Result<([f64; 3], [[f64; 3]; 3])> {
        let xj = [Jet::var(0, x[0]), Jet::var(1, x[1]), Jet::var(2, x[2])];
        let f = topo.frame(xj[0], xj[1])?;
        let r = topo.radial(f.rho.v)?;
        let phi = f.rho.compose(&r.phi.0);
        let b = xj[2] * (phi + xj[2]) * (f.rho - self.rho_a) * (-f.rho + self.rho_b);
        let b2 = b * b;
        let a: [Jet; 3] = std::array::from_fn(|i| b2 * self.potential[i].eval(xj));
        let curl = [(1, 2), (2, 0), (0, 1)];
        let mut d = [0.0; 3];
        let mut g = [[0.0; 3]; 3];
        for (i, &(p, q)) in curl.iter().enumerate() {
            // δ_i = ∂_p A_q - ∂_q A_p
            d[i] = a[q].g[p] - a[p].g[q];
            for (j, gij) in g[i].iter_mut().enumerate() {
                *gij = a[q].hess(p, j) - a[p].hess(q, j);
            }
        }
        Ok((d, g))
    }

    fn w(&self, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.w[i].eval(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrilinearSample {
    /// `|(δ·∇δ | w)|`.
    pub lhs: f64,
    pub grad_sq: f64,
    pub weighted: f64,
    /// `max |div δ|` relative to `max |∇δ|`.
    pub divergence: f64,
}

impl TrilinearSample {
    pub fn ratio(&self) -> f64 {
        self.lhs / (self.grad_sq * self.weighted)
    }
}

/// Quadrature over the columns `ρ ∈ [ρ_a, ρ_b]` in shore coordinates
/// `(ω, ρ, z)`, with area element `(1 + ρκ(ω)) dω dρ`.
pub fn evaluate(topo: &Topography, pair: &FieldPair, n_w: usize, n: usize) -> Result<TrilinearSample> {
    let length = topo.shore.length();
    let rr = Rule::uniform(pair.rho_a, pair.rho_b, 2, n);
    let mut lhs = 0.0;
    let mut grad_sq = 0.0;
    let mut weighted = 0.0f64;
    let mut div = 0.0f64;
    let mut gmax = 0.0f64;
    for iw in 0..n_w {
        let w = length * iw as f64 / n_w as f64;
        let kappa = topo.shore.curvature(w);
        for (&rho, &wr) in rr.nodes.iter().zip(&rr.weights) {
            let xh = topo.shore.point(w, rho);
            let phi = topo.phi(rho)?;
            let area = (length / n_w as f64) * wr * (1.0 + rho * kappa);
            let rz = Rule::composite(&[-phi, -0.5 * phi, 0.0], n);
            let mut column = 0.0;
            for (&z, &wz) in rz.nodes.iter().zip(&rz.weights) {
                let x = [xh[0], xh[1], z];
                let (d, g) = pair.delta(topo, x)?;
                let wv = pair.w(x);
                let mut tri = 0.0;
                for (j, wj) in wv.iter().enumerate() {
                    tri += (0..3).map(|k| d[k] * g[j][k]).sum::<f64>() * wj;
                }
                let gs: f64 = g.iter().flatten().map(|v| v * v).sum();
                lhs += area * wz * tri;
                grad_sq += area * wz * gs;
                let dist = (-z).min(phi + z);
                column += wz * dist * wv.iter().map(|v| v * v).sum::<f64>();
                div = div.max((g[0][0] + g[1][1] + g[2][2]).abs());
                gmax = gmax.max(gs.sqrt());
            }
            weighted = weighted.max(column.sqrt());
        }
    }
    Ok(TrilinearSample {
        lhs: lhs.abs(),
        grad_sq,
        weighted,
        divergence: div / gmax.max(1e-300),
    })
}

/// Worst ratio `lhs / rhs` over `n_samples` random pairs.
pub fn sample_ratios(topo: &Topography, n_samples: usize, seed: u64) -> Result<Vec<TrilinearSample>> {
    let mut rng = sample::rng(seed);
    let lo = topo.depth.rho0 + 0.1;
    let pairs: Vec<FieldPair> = (0..n_samples)
        .map(|_| FieldPair::random(&mut rng, lo, lo + 4.0))
        .collect();
    par::map(&pairs, |p| evaluate(topo, p, 48, 10)).into_iter().collect()
}

pub fn check_trilinear(topo: &Topography, n_samples: usize, seed: u64) -> Result<Check> {
    let s = sample_ratios(topo, n_samples, seed)?;
    let worst = s.iter().map(|x| x.ratio()).fold(0.0, f64::max);
    let held = s.iter().filter(|x| x.ratio() <= 1.0).count();
    let div = s.iter().map(|x| x.divergence).fold(0.0, f64::max);
    let mut c = Check::at_most("trilinear_bound", worst, 1.0)
        .seeded(seed)
        .note("held", held as f64)
        .note("samples", n_samples as f64)
        .note("max_relative_divergence", div);
    c.pass = c.pass && div < 1e-10;
    Ok(c)
}
