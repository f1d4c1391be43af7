//! Explicit advection `-(u·∇)u` with the cylindrical curvature terms,
//! second-order upwind in the mapped coordinates.

use super::step::{SolverState, Stepper};

/// Derivative at `x[k]` of the quadratic through three neighbouring nodes
/// on the upwind side (first order next to the lattice edge).
fn upwind(x: &[f64], f: &dyn Fn(usize) -> f64, k: usize, vel: f64) -> f64 {
    let n = x.len();
    let pts: Vec<usize> = if vel >= 0.0 {
        if k >= 2 {
            vec![k, k - 1, k - 2]
        } else {
            vec![k, k - 1]
        }
    } else if k + 2 < n {
        vec![k, k + 1, k + 2]
    } else {
        vec![k, k + 1]
    };
    if pts.len() == 2 {
        return (f(pts[1]) - f(pts[0])) / (x[pts[1]] - x[pts[0]]);
    }
    let (x0, x1, x2) = (x[pts[0]], x[pts[1]], x[pts[2]]);
    // Lagrange basis derivatives at x0
    let l0 = 1.0 / (x0 - x1) + 1.0 / (x0 - x2);
    let l1 = (x0 - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x0 - x1) / ((x2 - x0) * (x2 - x1));
    l0 * f(pts[0]) + l1 * f(pts[1]) + l2 * f(pts[2])
}

/// Tendencies `(a_r, a_θ, a_z)`.
pub fn advection(st: &Stepper, s: &SolverState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let g = &st.grid;
    let (nr, nz) = (g.nr, g.nz);
    // lattice-indexed readers with zero Dirichlet rims
    let ur_at = |a: usize, b: usize| -> f64 {
        if a == 0 || a == nr || b == 0 || b == nz + 1 {
            0.0
        } else {
            s.ur[g.u_idx(a, b - 1)]
        }
    };
    let ut_at = |a: usize, b: usize| -> f64 {
        if a == 0 || a == nr || b == 0 || b == nz + 1 {
            0.0
        } else {
            s.ut[g.u_idx(a, b - 1)]
        }
    };
    let uz_at = |a: usize, b: usize| -> f64 {
        if a == 0 || a == nr + 1 || b == 0 || b == nz {
            0.0
        } else {
            s.uz[g.w_idx(a - 1, b)]
        }
    };
    let lu = &st.lat_u;
    let lw = &st.lat_w;
    let mut ar = vec![0.0; g.n_u()];
    let mut at = vec![0.0; g.n_u()];
    for i in 1..nr {
        for j in 0..nz {
            let (a, b) = (i, j + 1);
            let k = g.u_idx(i, j);
            let (vr, vt) = (s.ur[k], s.ut[k]);
            // vertical velocity from the four surrounding σ-faces
            let vz = 0.25 * (uz_at(i, j) + uz_at(i, j + 1) + uz_at(i + 1, j) + uz_at(i + 1, j + 1));
            let om = (vz - g.sig_c[j] * g.dphi_f[i] * vr) / g.phi_f[i];
            let adv = |f: &dyn Fn(usize, usize) -> f64| {
                vr * upwind(&lu.rho, &|p| f(p, b), a, vr) + om * upwind(&lu.sig, &|q| f(a, q), b, om)
            };
            let r = g.r(g.rho_f[i]);
            ar[k] = -adv(&ur_at) + vt * vt / r;
            at[k] = -adv(&ut_at) - vr * vt / r;
        }
    }
    let mut az = vec![0.0; g.n_w()];
    for i in 0..nr {
        for jf in 1..nz {
            let (a, b) = (i + 1, jf);
            let k = g.w_idx(i, jf);
            let vz = s.uz[k];
            let vr = 0.25 * (ur_at(i, jf) + ur_at(i, jf + 1) + ur_at(i + 1, jf) + ur_at(i + 1, jf + 1));
            let om = (vz - g.sig_f[jf] * g.dphi_c[i] * vr) / g.phi_c[i];
            az[k] = -(vr * upwind(&lw.rho, &|p| uz_at(p, b), a, vr) + om * upwind(&lw.sig, &|q| uz_at(a, q), b, om));
        }
    }
    (ar, at, az)
}
