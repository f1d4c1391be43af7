//! Discrete divergence on the mapped grid and the pressure Poisson solves.
//!
//! In `(ρ, σ)` the volume-weighted divergence is a flux difference:
//! radial fluxes `2π r φ Δσ u_r` and σ-fluxes `2π r Δρ (u_z - σ φ′ ū_r)`,
//! where `ū_r` averages the four neighbouring radial-face values. The
//! discrete gradient is minus the adjoint of this operator in the
//! control-volume inner product, which makes the projection orthogonal.

use std::f64::consts::PI;

use super::band::{BandCholesky, SymBand};
use super::grid::Grid2D;
use crate::error::{Error, Result};

type Col = Vec<(u32, f64)>;

/// Columns of the flux-form divergence, one per velocity node.
#[derive(Clone, Debug)]
pub struct Divergence {
    cols_u: Vec<Col>,
    cols_w: Vec<Col>,
    n_c: usize,
}

impl Divergence {
    pub fn new(g: &Grid2D) -> Self {
        let (nr, nz) = (g.nr, g.nz);
        let dr: Vec<f64> = g.rho_f.windows(2).map(|w| w[1] - w[0]).collect();
        let ds: Vec<f64> = g.sig_f.windows(2).map(|w| w[1] - w[0]).collect();
        let mut cols_u = vec![Vec::with_capacity(6); g.n_u()];
        for i in 1..nr {
            for j in 0..nz {
                let col = &mut cols_u[g.u_idx(i, j)];
                let c = 2.0 * PI * g.r(g.rho_f[i]) * g.phi_f[i] * ds[j];
                col.push((g.c_idx(i - 1, j) as u32, c));
                col.push((g.c_idx(i, j) as u32, -c));
                for ci in [i - 1, i] {
                    for jf in [j, j + 1] {
                        if jf == 0 || jf == nz {
                            continue;
                        }
                        let s = -0.25 * 2.0 * PI * g.r(g.rho_c[ci]) * dr[ci] * g.sig_f[jf] * g.dphi_c[ci];
                        col.push((g.c_idx(ci, jf - 1) as u32, s));
                        col.push((g.c_idx(ci, jf) as u32, -s));
                    }
                }
            }
        }
        let mut cols_w = vec![Vec::with_capacity(2); g.n_w()];
        for i in 0..nr {
            let c = 2.0 * PI * g.r(g.rho_c[i]) * dr[i];
            for jf in 1..nz {
                let col = &mut cols_w[g.w_idx(i, jf)];
                col.push((g.c_idx(i, jf - 1) as u32, c));
                col.push((g.c_idx(i, jf) as u32, -c));
            }
        }
        Divergence {
            cols_u,
            cols_w,
            n_c: g.n_c(),
        }
    }

    /// Volume-weighted divergence per cell.
    pub fn apply(&self, ur: &[f64], uz: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_c];
        for (col, v) in self.cols_u.iter().zip(ur) {
            for &(c, a) in col {
                out[c as usize] += a * v;
            }
        }
        for (col, v) in self.cols_w.iter().zip(uz) {
            for &(c, a) in col {
                out[c as usize] += a * v;
            }
        }
        out
    }

    /// Adjoint of [`apply`](Self::apply).
    pub fn transpose(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dot = |col: &Col| col.iter().map(|&(c, a)| a * q[c as usize]).sum::<f64>();
        (
            crate::par::map(&self.cols_u, dot),
            crate::par::map(&self.cols_w, dot),
        )
    }

    /// `max |div u|` per unit volume.
    pub fn max_pointwise(&self, g: &Grid2D, ur: &[f64], uz: &[f64]) -> f64 {
        self.apply(ur, uz)
            .iter()
            .zip(&g.vol_c)
            .map(|(d, v)| (d / v).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PcgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// `D K M⁻¹ Dᵀ q = b` with `K = diag(k_u, 1)`; one cell is pinned.
#[derive(Clone, Debug)]
pub struct Poisson {
    k_u: f64,
    pin: f64,
    factor: BandCholesky,
}

const PCG_MAX_ITER: usize = 100;

impl Poisson {
    pub fn new(div: &Divergence, g: &Grid2D, k_u: f64) -> Result<Self> {
        let mut a = SymBand::zeros(g.n_c(), g.nz + 2);
        let mut add = |col: &Col, w: f64| {
            for &(p, x) in col {
                for &(q, y) in col {
                    a.add(p as usize, q as usize, w * x * y);
                }
            }
        };
        for (col, m) in div.cols_u.iter().zip(&g.mass_u) {
            add(col, k_u / m);
        }
        for (col, m) in div.cols_w.iter().zip(&g.mass_w) {
            add(col, 1.0 / m);
        }
        let pin = a.get(0, 0);
        a.add(0, 0, pin);
        Ok(Poisson {
            k_u,
            pin,
            factor: a.factor()?,
        })
    }

    fn apply(&self, div: &Divergence, g: &Grid2D, q: &[f64]) -> Vec<f64> {
        let (mut tu, mut tw) = div.transpose(q);
        for (t, m) in tu.iter_mut().zip(&g.mass_u) {
            *t *= self.k_u / m;
        }
        for (t, m) in tw.iter_mut().zip(&g.mass_w) {
            *t /= m;
        }
        let mut out = div.apply(&tu, &tw);
        out[0] += self.pin * q[0];
        out
    }

    /// Conjugate gradients preconditioned by the banded factor, to
    /// relative residual `tol`.
    pub fn solve(&self, div: &Divergence, g: &Grid2D, b: &[f64], tol: f64) -> Result<(Vec<f64>, PcgStats)> {
        let n = b.len();
        let bn = norm(b);
        let mut x = vec![0.0; n];
        if bn == 0.0 {
            return Ok((x, PcgStats::default()));
        }
        let mut r = b.to_vec();
        let mut z = r.clone();
        self.factor.solve(&mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for it in 1..=PCG_MAX_ITER {
            let ap = self.apply(div, g, &p);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rel = norm(&r) / bn;
            if rel <= tol {
                return Ok((
                    x,
                    PcgStats {
                        iterations: it,
                        rel_residual: rel,
                    },
                ));
            }
            z.copy_from_slice(&r);
            self.factor.solve(&mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::NonConvergence {
            what: "pressure PCG",
            iterations: PCG_MAX_ITER,
            residual: norm(&r) / bn,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Applies `v ← v + K M⁻¹ Dᵀ q` after solving for the `q` that makes `v`
/// divergence-free. Returns `q`.
pub fn project(
    div: &Divergence,
    g: &Grid2D,
    poisson: &Poisson,
    ur: &mut [f64],
    uz: &mut [f64],
    tol: f64,
) -> Result<(Vec<f64>, PcgStats)> {
    let rhs: Vec<f64> = div.apply(ur, uz).into_iter().map(|v| -v).collect();
    let (q, stats) = poisson.solve(div, g, &rhs, tol)?;
    let (tu, tw) = div.transpose(&q);
    for ((u, t), m) in ur.iter_mut().zip(&tu).zip(&g.mass_u) {
        *u += poisson.k_u * t / m;
    }
    for ((u, t), m) in uz.iter_mut().zip(&tw).zip(&g.mass_w) {
        *u += t / m;
    }
    Ok((q, stats))
}

#[cfg(test)]
mod tests {
    use super::super::grid::{tests::topo, GridSpec};
    use super::*;
    use crate::geometry::DepthFamily;
    use rand::Rng;

    fn grid() -> Grid2D {
        let spec = GridSpec {
            nr: 24,
            nz: 16,
            rho_min: 0.6,
            rho_out: 6.0,
            stretch: 2.0,
        };
        Grid2D::new(&topo(DepthFamily::Exp), &spec).unwrap()
    }

    fn random_field(g: &Grid2D, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = crate::verify::sample::rng(seed);
        (
            (0..g.n_u()).map(|_| rng.gen::<f64>() - 0.5).collect(),
            (0..g.n_w()).map(|_| rng.gen::<f64>() - 0.5).collect(),
        )
    }

    fn energy(g: &Grid2D, ur: &[f64], uz: &[f64]) -> f64 {
        ur.iter().zip(&g.mass_u).map(|(u, m)| m * u * u).sum::<f64>()
            + uz.iter().zip(&g.mass_w).map(|(u, m)| m * u * u).sum::<f64>()
    }

    #[test]
    fn divergence_sums_to_zero() {
        let g = grid();
        let d = Divergence::new(&g);
        let (ur, uz) = random_field(&g, 1);
        let s: f64 = d.apply(&ur, &uz).iter().sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn transpose_is_the_adjoint() {
        let g = grid();
        let d = Divergence::new(&g);
        let (ur, uz) = random_field(&g, 2);
        let q: Vec<f64> = (0..g.n_c()).map(|k| (k as f64 * 0.37).sin()).collect();
        let lhs = dot(&d.apply(&ur, &uz), &q);
        let (tu, tw) = d.transpose(&q);
        let rhs = dot(&tu, &ur) + dot(&tw, &uz);
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn projection_is_orthogonal_and_idempotent() {
        let g = grid();
        let d = Divergence::new(&g);
        let p = Poisson::new(&d, &g, 1.0).unwrap();
        let (mut ur, mut uz) = random_field(&g, 3);
        let e0 = energy(&g, &ur, &uz);
        let (_, st) = project(&d, &g, &p, &mut ur, &mut uz, 1e-12).unwrap();
        assert!(st.iterations <= 3);
        let vol_max = g.vol_c.iter().copied().fold(0.0, f64::max);
        assert!(d.max_pointwise(&g, &ur, &uz) * vol_max < 1e-10 * e0.sqrt());
        assert!(energy(&g, &ur, &uz) <= e0);
        let (u1, w1) = (ur.clone(), uz.clone());
        project(&d, &g, &p, &mut ur, &mut uz, 1e-12).unwrap();
        let change = ur.iter().zip(&u1).chain(uz.iter().zip(&w1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(change <= 1e-12, "{change}");
    }

    #[test]
    fn radial_pressure_leaves_no_vertical_gradient() {
        let g = grid();
        let d = Divergence::new(&g);
        let q: Vec<f64> = (0..g.n_c()).map(|k| (k / g.nz) as f64 * 0.1).collect();
        let (_, tw) = d.transpose(&q);
        assert!(tw.iter().all(|v| v.abs() < 1e-12));
    }
}
