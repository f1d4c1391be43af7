//! Sensitivity of the solver to its numerical choices: resolution, time
//! step and the position of the inner wall.

use ekman::geometry::{ConvexShore, DepthFamily, DepthProfile, Topography};
use ekman::profiles::{AnsatzParams, InitialSwirl, SwirlFamily};
use ekman::solver::{Run, SolverConfig, Trajectory};

fn params(eps: f64) -> AnsatzParams {
    let depth = DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap();
    let topo = Topography::new(ConvexShore::disk(1.0).unwrap(), depth, 0.5).unwrap();
    let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
    AnsatzParams::new(topo, eps, 0.75, data).unwrap()
}

fn run(eps: f64, cfg: SolverConfig) -> (Run, Trajectory) {
    let r = Run::new(&params(eps), &cfg).unwrap();
    let t = r.run(false).unwrap();
    (r, t)
}

fn base() -> SolverConfig {
    SolverConfig {
        nr: 64,
        nz: 64,
        tmax: 2.0,
        n_out: 8,
        ..Default::default()
    }
}

/// Depth-integrated `u_θ` of `b` interpolated onto the faces of `a`, zero
/// outside `b`'s domain.
fn interpolate(a: &Trajectory, b: &Trajectory) -> Vec<f64> {
    let mb = &b.samples.last().unwrap().column_means;
    a.rho_faces
        .iter()
        .map(|&rho| {
            let f = &b.rho_faces;
            if rho < f[0] || rho > f[f.len() - 1] {
                return 0.0;
            }
            let k = f.partition_point(|x| *x <= rho).clamp(1, f.len() - 1);
            let w = (rho - f[k - 1]) / (f[k] - f[k - 1]);
            (1.0 - w) * mb[k - 1] + w * mb[k]
        })
        .collect()
}

/// Relative L² distance of the final depth means over the faces of `a`
/// with `ρ ≥ from`.
fn relative_l2(ra: &Run, a: &Trajectory, b: &Trajectory, from: f64) -> f64 {
    let w = ra.face_weights();
    let ma = &a.samples.last().unwrap().column_means;
    let mb = interpolate(a, b);
    let (mut d, mut n) = (0.0, 0.0);
    for k in (0..ma.len()).filter(|&k| a.rho_faces[k] >= from) {
        d += w[k] * (ma[k] - mb[k]).powi(2);
        n += w[k] * ma[k].powi(2);
    }
    (d / n).sqrt()
}

#[test]
fn refinement_changes_final_errors_little() {
    let (_, coarse) = run(0.1, base());
    let (_, fine) = run(0.1, SolverConfig {
        nr: 128,
        nz: 128,
        dt: Some(0.005),
        ..base()
    });
    let (a, b) = (coarse.samples.last().unwrap(), fine.samples.last().unwrap());
    let lim = (a.err_vs_limit - b.err_vs_limit).abs() / b.err_vs_limit;
    let app = (a.err_vs_ansatz - b.err_vs_ansatz).abs() / b.err_vs_ansatz;
    assert!(lim < 0.1, "err vs limit {} -> {}", a.err_vs_limit, b.err_vs_limit);
    assert!(app < 0.1, "err vs ansatz {} -> {}", a.err_vs_ansatz, b.err_vs_ansatz);
}

#[test]
fn inner_wall_position_barely_matters() {
    // at ε = 0.1 the band between the two walls still carries a tenth of
    // the peak swirl and the distance is about 4%
    let (r2, near) = run(0.05, base());
    let (_, far) = run(0.05, SolverConfig {
        wall_factor: 4.0,
        ..base()
    });
    let d = relative_l2(&r2, &near, &far, 0.0);
    assert!(d < 0.02, "{d}");
    assert_eq!(near.inequality_violations + far.inequality_violations, 0);
}
