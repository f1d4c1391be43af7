//! Time stepping: Strang splitting of the rotating projection and the
//! implicit diffusion, with an optional explicit advection substep.

use serde::{Deserialize, Serialize};

use super::advect::advection;
use super::band::{BandCholesky, SymBand};
use super::fem::Lattice;
use super::grid::Grid2D;
use super::projection::{project, Divergence, PcgStats, Poisson};
use crate::error::{Error, Result};
use crate::par;

/// Velocity and pressure on the staggered grid, in the cylindrical frame
/// (radial, azimuthal, vertical) which for the disk is `(∇ρ, ∇⊥ρ, e_z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub t: f64,
    pub ur: Vec<f64>,
    /// Azimuthal velocity, stored on the radial faces next to `ur`.
    pub ut: Vec<f64>,
    pub uz: Vec<f64>,
    pub p: Vec<f64>,
}

/// Energy bookkeeping of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub energy_before: f64,
    pub energy_after: f64,
    /// `εβ Δt ∫|∇u|²` spent by the diffusion substep.
    pub dissipation: f64,
    pub pcg: PcgStats,
}

impl StepReport {
    /// `(E₁ + D - E₀) / E₀`: positive values break the energy inequality.
    pub fn inequality_excess(&self) -> f64 {
        (self.energy_after + self.dissipation - self.energy_before) / self.energy_before.max(f64::MIN_POSITIVE)
    }
}

/// Pre-factored operators for a fixed grid, `ε` and `Δt`.
pub struct Stepper {
    pub grid: Grid2D,
    pub div: Divergence,
    pub lat_u: Lattice,
    pub lat_w: Lattice,
    /// Unit-coefficient stiffness (`∫|∇·|²` plus the `1/r²` term for `u_r`, `u_θ`).
    pub stiff_u: SymBand,
    pub stiff_w: SymBand,
    plain: Poisson,
    rotating: Poisson,
    diff_u: BandCholesky,
    diff_w: BandCholesky,
    pub eps: f64,
    pub nu: f64,
    pub dt: f64,
    pub nonlinear: bool,
    pub pcg_tol: f64,
}

impl Stepper {
    pub fn new(grid: Grid2D, eps: f64, beta: f64, dt: f64, nonlinear: bool, pcg_tol: f64) -> Result<Self> {
        if !(dt > 0.0) || !(eps > 0.0) {
            return Err(Error::Config(format!("need dt > 0 and eps > 0 (got {dt}, {eps})")));
        }
        let g = &grid;
        let mut su = vec![-1.0];
        su.extend(&g.sig_c);
        su.push(0.0);
        let lat_u = Lattice {
            rho: g.rho_f.clone(),
            sig: su,
            phi: g.phi_f.clone(),
            radius: g.radius,
        };
        let mut rw = vec![g.rho_f[0]];
        rw.extend(&g.rho_c);
        rw.push(g.rho_f[g.nr]);
        let mut pw = vec![g.phi_f[0]];
        pw.extend(&g.phi_c);
        pw.push(g.phi_f[g.nr]);
        let lat_w = Lattice {
            rho: rw,
            sig: g.sig_f.clone(),
            phi: pw,
            radius: g.radius,
        };
        let stiff_u = lat_u.stiffness(1.0);
        let stiff_w = lat_w.stiffness(0.0);
        let nu = eps * beta;
        let implicit = |s: &SymBand, m: &[f64]| -> Result<BandCholesky> {
            let mut a = SymBand::zeros(s.n(), s.bandwidth());
            for i in 0..s.n() {
                for j in i.saturating_sub(s.bandwidth())..=i {
                    a.add(i, j, dt * nu * s.get(i, j));
                }
                a.add(i, i, m[i]);
            }
            a.factor()
        };
        let div = Divergence::new(g);
        let theta = dt / (4.0 * eps);
        let plain = Poisson::new(&div, g, 1.0)?;
        let rotating = Poisson::new(&div, g, 1.0 / (1.0 + theta * theta))?;
        let diff_u = implicit(&stiff_u, &g.mass_u)?;
        let diff_w = implicit(&stiff_w, &g.mass_w)?;
        Ok(Stepper {
            div,
            lat_u,
            lat_w,
            stiff_u,
            stiff_w,
            plain,
            rotating,
            diff_u,
            diff_w,
            eps,
            nu,
            dt,
            nonlinear,
            pcg_tol,
            grid,
        })
    }

    /// `½ ∫ |u|²` in the control-volume inner product.
    pub fn energy(&self, s: &SolverState) -> f64 {
        let g = &self.grid;
        let eu: f64 = s
            .ur
            .iter()
            .zip(&s.ut)
            .zip(&g.mass_u)
            .map(|((a, b), m)| m * (a * a + b * b))
            .sum();
        let ew: f64 = s.uz.iter().zip(&g.mass_w).map(|(a, m)| m * a * a).sum();
        0.5 * (eu + ew)
    }

    /// `∫ |∇u|²` from the finite-element stiffness.
    pub fn grad_sq(&self, ur: &[f64], ut: &[f64], uz: &[f64]) -> f64 {
        quad_form(&self.stiff_u, ur) + quad_form(&self.stiff_u, ut) + quad_form(&self.stiff_w, uz)
    }

    /// Largest pointwise divergence.
    pub fn divergence(&self, s: &SolverState) -> f64 {
        self.div.max_pointwise(&self.grid, &s.ur, &s.uz)
    }

    /// Plain orthogonal projection; returns the potential.
    pub fn project(&self, s: &mut SolverState) -> Result<(Vec<f64>, PcgStats)> {
        project(&self.div, &self.grid, &self.plain, &mut s.ur, &mut s.uz, self.pcg_tol)
    }

    /// Pressure balancing the Coriolis force of a divergence-free state:
    /// `∇p = -(I - P)(e_z ∧ u)`.
    pub fn balanced_pressure(&self, s: &SolverState) -> Result<Vec<f64>> {
        let mut fr: Vec<f64> = s.ut.iter().map(|v| -v).collect();
        let mut fz = vec![0.0; s.uz.len()];
        let (q, _) = project(&self.div, &self.grid, &self.plain, &mut fr, &mut fz, self.pcg_tol)?;
        Ok(q.into_iter().map(|v| -v).collect())
    }

    /// Crank–Nicolson rotation by `τ/ε` coupled to the projection. Exact
    /// energy conservation for divergence-free input.
    /// The factored operator is built for `τ = Δt/2`.
    fn rotate(&self, s: &mut SolverState) -> Result<PcgStats> {
        let tau = 0.5 * self.dt;
        let th = tau / (2.0 * self.eps);
        let k = 1.0 / (1.0 + th * th);
        let ur0 = s.ur.clone();
        for (r, t) in s.ur.iter_mut().zip(&s.ut) {
            *r = k * ((1.0 - th * th) * *r + 2.0 * th * t);
        }
        let (q, stats) = project(&self.div, &self.grid, &self.rotating, &mut s.ur, &mut s.uz, self.pcg_tol)?;
        for ((t, r1), r0) in s.ut.iter_mut().zip(&s.ur).zip(&ur0) {
            *t -= th * (r1 + r0);
        }
        let scale = self.eps / tau;
        s.p = q.into_iter().map(|v| v * scale).collect();
        Ok(stats)
    }

    /// Backward Euler `(M + τνS) u⁺ = M u` per component; returns the
    /// dissipated `τν ⟨S u⁺, u⁺⟩`.
    fn diffuse(&self, s: &mut SolverState) -> f64 {
        let g = &self.grid;
        let solve_u = |v: &mut Vec<f64>| {
            for (x, m) in v.iter_mut().zip(&g.mass_u) {
                *x *= m;
            }
            self.diff_u.solve(v);
        };
        let (ur, ut, uz) = (&mut s.ur, &mut s.ut, &mut s.uz);
        par::join(
            || par::join(|| solve_u(ur), || solve_u(ut)),
            || {
                for (x, m) in uz.iter_mut().zip(&g.mass_w) {
                    *x *= m;
                }
                self.diff_w.solve(uz);
            },
        );
        self.dt * self.nu * self.grad_sq(&s.ur, &s.ut, &s.uz)
    }

    /// One step of length `dt`: `R(τ/2) ∘ D(τ) ∘ R(τ/2)` with each `R`
    /// preceded by a projection, after an optional advection substep.
    pub fn step(&self, s: &mut SolverState) -> Result<StepReport> {
        let e0 = self.energy(s);
        if self.nonlinear {
            let (ar, at, az) = advection(self, s);
            for (u, a) in s.ur.iter_mut().zip(&ar) {
                *u += self.dt * a;
            }
            for (u, a) in s.ut.iter_mut().zip(&at) {
                *u += self.dt * a;
            }
            for (u, a) in s.uz.iter_mut().zip(&az) {
                *u += self.dt * a;
            }
        }
        self.project(s)?;
        let mut pcg = self.rotate(s)?;
        let diss = self.diffuse(s);
        self.project(s)?;
        let st = self.rotate(s)?;
        pcg.iterations = pcg.iterations.max(st.iterations);
        pcg.rel_residual = pcg.rel_residual.max(st.rel_residual);
        s.t += self.dt;
        Ok(StepReport {
            energy_before: e0,
            energy_after: self.energy(s),
            dissipation: diss,
            pcg,
        })
    }
}

fn quad_form(s: &SymBand, x: &[f64]) -> f64 {
    s.mul(x).iter().zip(x).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::quadrature::Rule;
    use crate::geometry::DepthFamily;
    use crate::solver::grid::tests::topo;
    use crate::solver::grid::GridSpec;

    fn stepper(family: DepthFamily, nr: usize, nz: usize, eps: f64, dt: f64) -> Stepper {
        let spec = GridSpec {
            nr,
            nz,
            rho_min: 1.0,
            rho_out: 12.0,
            stretch: 2.0,
        };
        let g = Grid2D::new(&topo(family), &spec).unwrap();
        Stepper::new(g, eps, 0.5, dt, false, 1e-12).unwrap()
    }

    fn random_state(st: &Stepper, seed: u64) -> SolverState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = &st.grid;
        let mut v = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let mut s = SolverState {
            t: 0.0,
            ur: v(g.n_u()),
            ut: v(g.n_u()),
            uz: v(g.n_w()),
            p: vec![],
        };
        st.project(&mut s).unwrap();
        s
    }

    #[test]
    fn rotation_conserves_energy() {
        for dt_over_eps in [0.1, 1.0, 7.0] {
            let st = stepper(DepthFamily::Exp, 24, 16, 0.05, 0.05 * dt_over_eps);
            let mut s = random_state(&st, 1);
            let e0 = st.energy(&s);
            st.rotate(&mut s).unwrap();
            let e1 = st.energy(&s);
            assert!(((e1 - e0) / e0).abs() < 1e-12, "{dt_over_eps}: {e0} {e1}");
            assert!(st.divergence(&s) < 1e-10);
        }
    }

    #[test]
    fn rotation_turns_the_horizontal_velocity() {
        // a purely azimuthal balanced state is steady under rotation
        let st = stepper(DepthFamily::Exp, 24, 16, 0.05, 0.01);
        let g = &st.grid;
        let mut s = SolverState {
            t: 0.0,
            ur: vec![0.0; g.n_u()],
            ut: (0..g.n_u()).map(|k| (k / g.nz) as f64 * 0.1).collect(),
            uz: vec![0.0; g.n_w()],
            p: vec![],
        };
        let ut0 = s.ut.clone();
        st.rotate(&mut s).unwrap();
        let drift = s.ut.iter().zip(&ut0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-10, "{drift}");
        assert!(s.ur.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn diffusion_decays_a_vertical_mode_at_the_heat_rate() {
        let (eps, beta) = (0.1, 0.5);
        let nu = eps * beta;
        let st = stepper(DepthFamily::FlatCap, 160, 64, eps, 1e-3);
        let g = &st.grid;
        let h = 4.0;
        let k = 2.0 * std::f64::consts::PI / h;
        let (a, b) = (3.0, 9.0);
        let bump = |rho: f64| {
            if rho <= a || rho >= b {
                0.0
            } else {
                (std::f64::consts::PI * (rho - a) / (b - a)).sin().powi(2)
            }
        };
        let mut ut = vec![0.0; g.n_u()];
        for i in 1..g.nr {
            for j in 0..g.nz {
                let (rho, z) = g.u_pos(i, j);
                ut[g.u_idx(i, j)] = bump(rho) * (k * (z + h)).sin();
            }
        }
        let mut s = SolverState {
            t: 0.0,
            ur: vec![0.0; g.n_u()],
            ut,
            uz: vec![0.0; g.n_w()],
            p: vec![],
        };
        let e0 = st.energy(&s);
        st.diffuse(&mut s);
        let e1 = st.energy(&s);
        let measured = (e0 / e1).ln() / (2.0 * st.dt);

        // separable Rayleigh quotient: k² plus the radial part with 1/r²
        let rule = Rule::uniform(a, b, 16, 8);
        let r = |rho: f64| g.r(rho);
        let dbump = |rho: f64| {
            let x = std::f64::consts::PI * (rho - a) / (b - a);
            2.0 * x.sin() * x.cos() * std::f64::consts::PI / (b - a)
        };
        let num = rule.integrate(|rho| (dbump(rho).powi(2) + (bump(rho) / r(rho)).powi(2)) * r(rho));
        let den = rule.integrate(|rho| bump(rho).powi(2) * r(rho));
        let expected = nu * (k * k + num / den);
        assert!(((measured - expected) / expected).abs() < 0.01, "{measured} vs {expected}");
    }

    #[test]
    fn steps_satisfy_the_energy_inequality() {
        let st = stepper(DepthFamily::Exp, 24, 24, 0.1, 0.01);
        let mut s = random_state(&st, 2);
        for _ in 0..20 {
            let rep = st.step(&mut s).unwrap();
            assert!(rep.inequality_excess() <= 1e-8, "{rep:?}");
            assert!(st.divergence(&s) < 1e-9);
        }
    }
}
