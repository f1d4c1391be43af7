//! Differential operators on jets and the derived residual fields.

use super::scalar::Jet;
use crate::error::Result;
use crate::profiles::{Ansatz, Column, Layer, Term, TermSet};

pub type Vec3 = [f64; 3];

/// Value, Cartesian derivatives, Laplacian and time derivative of a vector
/// field at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameJet {
    /// Components in the frame `(∇ρ, ∇⊥ρ, e_z)`.
    pub frame_value: Vec3,
    /// Cartesian components.
    pub value: Vec3,
    /// `d_space[i][j] = ∂_j U_i`.
    pub d_space: [Vec3; 3],
    /// `ΔU_i`.
    pub d2_trace: Vec3,
    /// `∂_t U_i`.
    pub d_t: Vec3,
}

impl FrameJet {
    pub fn from_jets(frame_value: Vec3, u: &[Jet; 3], d_t: Vec3) -> Self {
        FrameJet {
            frame_value,
            value: [u[0].v, u[1].v, u[2].v],
            d_space: [u[0].g, u[1].g, u[2].g],
            d2_trace: laplacian(u),
            d_t,
        }
    }

    pub fn divergence(&self) -> f64 {
        self.d_space[0][0] + self.d_space[1][1] + self.d_space[2][2]
    }
}

pub fn divergence(u: &[Jet; 3]) -> f64 {
    u[0].g[0] + u[1].g[1] + u[2].g[2]
}

pub fn laplacian(u: &[Jet; 3]) -> Vec3 {
    [u[0].laplacian(), u[1].laplacian(), u[2].laplacian()]
}

/// `e_z ∧ v`.
pub fn coriolis(v: Vec3) -> Vec3 {
    [-v[1], v[0], 0.0]
}

/// `(U·∇)U` from the jets of the Cartesian components.
pub fn advect(u: &[Jet; 3]) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|j| u[j].v * u[i].g[j]).sum();
    }
    out
}

/// `(M·∇)N` from the jets of two fields.
pub fn advect_by(m: &[Jet; 3], n: &[Jet; 3]) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|j| m[j].v * n[i].g[j]).sum();
    }
    out
}

pub fn gradient(p: &Jet) -> Vec3 {
    p.g
}

pub fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn norm2(v: Vec3) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

fn jet_point(x: Vec3) -> [Jet; 3] {
    [Jet::var(0, x[0]), Jet::var(1, x[1]), Jet::var(2, x[2])]
}

/// Jet of a single unweighted term, or of a weighted assembly when `term`
/// is `None`.
pub fn jet_of(ansatz: &Ansatz, term: Option<Term>, t: f64, x: Vec3) -> Result<FrameJet> {
    let [xj, yj, zj] = jet_point(x);
    let col = ansatz.column(t, xj, yj, None)?;
    col.check_height(x[2])?;
    let layer = col.layer(zj);
    let (fv, fv_t) = match term {
        Some(tm) => (
            col.terms(&layer, &col.amp)[tm.index()],
            col.terms(&layer, &col.amp_t)[tm.index()],
        ),
        None => (
            col.frame_velocity(&layer, TermSet::all(), false),
            col.frame_velocity(&layer, TermSet::all(), true),
        ),
    };
    let u = col.to_cartesian(fv);
    let ut = col.to_cartesian(fv_t);
    Ok(FrameJet::from_jets(
        [fv[0].v, fv[1].v, fv[2].v],
        &u,
        [ut[0].v, ut[1].v, ut[2].v],
    ))
}

/// `∂_t U − εβΔU + ε⁻¹ e_z ∧ U + ε⁻¹ ∇P` at one height of a jet column.
pub fn residual_in_column(col: &Column<'_, Jet>, layer: &Layer<Jet>, set: TermSet) -> Vec3 {
    let p = col.params();
    let eps = p.eps;
    let u = col.velocity(layer, set, false);
    let ut = col.velocity(layer, set, true);
    let pr = col.pressure(layer, set, false);
    let lap = laplacian(&u);
    let cor = coriolis([u[0].v, u[1].v, u[2].v]);
    let gp = gradient(&pr);
    let mut r = [0.0; 3];
    for i in 0..3 {
        r[i] = ut[i].v - eps * p.topo.beta * lap[i] + (cor[i] + gp[i]) / eps;
    }
    r
}

/// `U·∇U + (ū^θ)² Δρ ∇ρ` at one height of a jet column.
pub fn nonlinear_in_column(col: &Column<'_, Jet>, layer: &Layer<Jet>, set: TermSet) -> Vec3 {
    let u = col.velocity(layer, set, false);
    let mut r = advect(&u);
    let ub = col.ubar.v;
    let n = col.frame.grad;
    let lap = col.frame.lap.v;
    r[0] += ub * ub * lap * n[0].v;
    r[1] += ub * ub * lap * n[1].v;
    r
}

/// Residual of the linear Stokes–Coriolis operator applied to the assembly.
pub fn stokes_coriolis_residual(ansatz: &Ansatz, t: f64, x: Vec3, set: TermSet) -> Result<Vec3> {
    let [xj, yj, zj] = jet_point(x);
    let col = ansatz.column(t, xj, yj, None)?;
    col.check_height(x[2])?;
    let layer = col.layer(zj);
    Ok(residual_in_column(&col, &layer, set))
}

pub fn nonlinear_structure_error(ansatz: &Ansatz, t: f64, x: Vec3, set: TermSet) -> Result<Vec3> {
    let [xj, yj, zj] = jet_point(x);
    let col = ansatz.column(t, xj, yj, Some((0.0, 0.0)))?;
    col.check_height(x[2])?;
    let layer = col.layer(zj);
    Ok(nonlinear_in_column(&col, &layer, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexShore, DepthFamily, DepthProfile, Topography};
    use crate::profiles::{AnsatzParams, InitialSwirl, SwirlFamily};

    fn ansatz(eps: f64, family: DepthFamily) -> Ansatz {
        let topo = Topography::new(
            ConvexShore::disk(1.0).unwrap(),
            DepthProfile::new(family, 0.1, 4.0, 2.0).unwrap(),
            0.5,
        )
        .unwrap();
        let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
        Ansatz::new(AnsatzParams::new(topo, eps, 0.75, data).unwrap()).unwrap()
    }

    #[test]
    fn coriolis_of_unit_x() {
        assert_eq!(coriolis([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn interior_order0_is_divergence_free() {
        let an = ansatz(0.1, DepthFamily::Exp);
        for &x in &[[3.0, 1.0, -0.5], [-2.0, 4.0, -1.3], [6.0, -1.0, -2.0]] {
            let j = jet_of(&an, Some(Term::Int0), 0.3, x).unwrap();
            assert!(j.divergence().abs() < 1e-12);
        }
    }

    #[test]
    fn interior_advection_is_centripetal() {
        let an = ansatz(0.1, DepthFamily::Exp);
        let x = [3.0, 2.0, -0.7];
        let [xj, yj, zj] = jet_point(x);
        let col = an.column(0.2, xj, yj, Some((0.0, 0.0))).unwrap();
        let l = col.layer(zj);
        let u = col.velocity(&l, TermSet::of(&[Term::Int0]), false);
        let adv = advect(&u);
        let uu = col.amp.u.v;
        let lap = col.frame.lap.v;
        for i in 0..2 {
            let expect = -uu * uu * lap * col.frame.grad[i].v;
            assert!((adv[i] - expect).abs() < 1e-9);
        }
        assert!(adv[2].abs() < 1e-12);
    }

    #[test]
    fn geostrophic_balance_of_interior() {
        let an = ansatz(0.1, DepthFamily::Tanh);
        let x = [3.5, -1.0, -0.4];
        let [xj, yj, zj] = jet_point(x);
        let col = an.column(0.5, xj, yj, None).unwrap();
        let l = col.layer(zj);
        let set = TermSet::of(&[Term::Int0]);
        let u = col.velocity(&l, set, false);
        let p = col.pressure(&l, set, false);
        let c = coriolis([u[0].v, u[1].v, u[2].v]);
        let g = gradient(&p);
        for i in 0..3 {
            assert!((c[i] + g[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn interior_pair_residual_is_viscous_plus_drift() {
        let an = ansatz(0.1, DepthFamily::Exp);
        let eps = 0.1;
        let x = [4.0, 0.5, -1.1];
        let set = TermSet::interior();
        let r = stokes_coriolis_residual(&an, 0.3, x, set).unwrap();
        let j0 = jet_of(&an, Some(Term::Int0), 0.3, x).unwrap();
        let j1 = jet_of(&an, Some(Term::Int1), 0.3, x).unwrap();
        for i in 0..3 {
            let lap = j0.d2_trace[i] + eps * j1.d2_trace[i];
            let expect = -eps * 0.5 * lap + eps * j1.d_t[i];
            assert!((r[i] - expect).abs() < 1e-9, "{i}: {} vs {expect}", r[i]);
        }
    }

    #[test]
    fn surface_layer_balances_rotation() {
        let an = ansatz(0.05, DepthFamily::FlatCap);
        // Flat plateau: the surface layer alone satisfies the layer ODE.
        let x = [6.0, 0.0, -0.03];
        let [xj, yj, zj] = jet_point(x);
        let col = an.column(0.0, xj, yj, Some((0.0, 0.0))).unwrap();
        let l = col.layer(zj);
        let u = col.velocity(&l, TermSet::of(&[Term::Surf0]), false);
        let e = an.params.ekman();
        let eps = an.params.eps;
        let beta = an.params.topo.beta;
        let c = coriolis([u[0].v, u[1].v, u[2].v]);
        let scale = col.amp.u.v / eps;
        for i in 0..2 {
            // only the vertical part of the Laplacian is of order 1/ε
            let dzz = u[i].hess(2, 2);
            let bal = -eps * beta * dzz + c[i] / eps;
            assert!(bal.abs() < 1e-10 * scale, "{i}: {bal}");
            let _ = e;
        }
    }

    #[test]
    fn bottom_layer_residual_stays_bounded() {
        // Without P₁ the residual in the layer is of order 1/ε; with it, O(1).
        let mut norms = Vec::new();
        for &eps in &[0.01, 0.0025] {
            let an = ansatz(eps, DepthFamily::Exp);
            let rho = 2.0;
            let phi = an.params.topo.phi(rho).unwrap();
            let d = an.params.topo.delta(rho).unwrap();
            let x = [1.0 + rho, 0.0, -phi + d * an.params.layer()];
            let all = stokes_coriolis_residual(&an, 0.2, x, TermSet::all()).unwrap();
            let o0 = stokes_coriolis_residual(&an, 0.2, x, TermSet::order0()).unwrap();
            norms.push((norm(all), norm(o0)));
        }
        assert!(norms[1].0 < 1.2 * norms[0].0);
        assert!(norms[1].1 > 3.0 * norms[0].1);
    }
}
