//! The pass/fail gates: the exactness suite, the thresholds applied to the
//! ε-studies and the solver physics checks.

use serde::{Deserialize, Serialize};

use super::appendix::{check_advection_identity, check_growth};
use super::checks::{check_boundary, check_divergence, cutoff_moments, euler_identity, frame_identities, Check};
use super::fit::StudyTable;
use super::lemma::check_trilinear;
use super::studies::{fit_extra, run_study, StudyConfig, StudyKind};
use crate::error::Result;
use crate::geometry::{delta_of, lambda_of, DepthFamily, Topography};
use crate::profiles::{AnsatzParams, Mutation, SwirlFamily};
use crate::solver::{compare, is_monotone_decreasing, Run, SolverConfig, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// ε values of the boundary and divergence checks.
    pub epsilons: Vec<f64>,
    pub n_points: usize,
    pub seed: u64,
    pub lemma_samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            epsilons: vec![0.1, 0.05],
            n_points: 2000,
            seed: 20240901,
            lemma_samples: 100,
        }
    }
}

/// Exact values of `δ` and `λ_φ` at a few points.
pub fn coefficient_sanity(topo: &Topography) -> Check {
    let flat = lambda_of(topo.depth.h, 0.0, topo.beta);
    let e_flat = (flat - topo.lambda_flat()).abs();
    let e0 = (delta_of(0.0) - 1.0).abs();
    let e1 = (delta_of(1.0) - 2f64.powf(0.75)).abs();
    let e2 = (lambda_of(1.0, 3f64.sqrt(), 0.5) - 0.5 * (1.0 + 2f64.sqrt())).abs();
    let mut c = Check::at_most("coefficient_sanity", e1.max(e2), 1e-12)
        .note("flat_lambda", e_flat)
        .note("delta_at_0", e0);
    c.pass = c.pass && e_flat == 0.0 && e0 == 0.0;
    c
}

/// A check that passes when the given check fails.
fn detected(name: &str, c: &Check) -> Check {
    let mut d = Check::at_least(name, c.value, c.threshold);
    d.pass = !c.pass;
    d.seed = c.seed;
    d
}

/// Runs every pointwise check. With a mutation set in `base` the boundary
/// and divergence checks are expected to fail.
pub fn verify_suite(base: &AnsatzParams, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &eps in &cfg.epsilons {
        let p = base.with_eps(eps);
        for mut c in [
            check_boundary(&p, cfg.n_points, cfg.seed)?,
            check_divergence(&p, cfg.n_points, cfg.seed)?,
        ] {
            c.name = format!("{}_eps_{eps}", c.name);
            out.push(c);
        }
    }
    let eps = cfg.epsilons.first().copied().unwrap_or(base.eps);
    for (m, name) in [
        (Mutation::SignFlip, "mutation_sign_flip_detected"),
        (Mutation::CutoffVariable, "mutation_cutoff_variable_detected"),
    ] {
        let mut p = base.with_eps(eps);
        p.mutation = m;
        let b = check_boundary(&p, cfg.n_points, cfg.seed)?;
        let d = check_divergence(&p, cfg.n_points, cfg.seed)?;
        let mut c = detected(name, &b);
        c.pass = !b.pass || !d.pass;
        out.push(c.note("divergence", d.value));
    }
    let topo = &base.topo;
    out.push(frame_identities(topo, cfg.n_points / 4, cfg.seed)?);
    out.push(euler_identity(topo, cfg.n_points / 4, cfg.seed)?);
    out.push(cutoff_moments());
    out.push(coefficient_sanity(topo));
    out.push(check_growth(topo, base.a)?);
    out.push(check_advection_identity(topo, eps, base.a, cfg.seed)?);
    out.push(check_trilinear(topo, cfg.lemma_samples, cfg.seed)?);
    Ok(out)
}

/// Thresholds for one study table. Slopes are judged by `slope - 2 stderr`.
pub fn study_checks(kind: StudyKind, table: &StudyTable, a: f64) -> Result<Vec<Check>> {
    let f = &table.fit;
    let note = |c: Check| c.note("slope", f.slope).note("stderr", f.stderr);
    Ok(match kind {
        StudyKind::Convergence => {
            let inner = fit_extra(table, "interior")?;
            vec![
                note(Check::at_least("convergence_slope", f.lower(), 0.1)),
                Check::at_least("interior_slope", inner.lower(), (1.0 - a) / 2.0 - 0.05)
                    .note("slope", inner.slope)
                    .note("stderr", inner.stderr),
            ]
        }
        StudyKind::Residual => vec![
            note(Check::at_least("residual_slope", f.slope, 0.2)),
            note(Check::at_least("residual_slope_lower", f.lower(), f64::MIN_POSITIVE)),
        ],
        StudyKind::Nonlinear => {
            let ss = fit_extra(table, "surface_self")?;
            vec![
                note(Check::at_least("nonlinear_slope_lower", f.lower(), f64::MIN_POSITIVE)),
                Check::at_least("surface_self_slope", ss.slope, a - 0.5 - 0.05).note("stderr", ss.stderr),
            ]
        }
        StudyKind::Gradient => vec![Check::at_most("gradient_budget_spread", table.spread(), 2.0)],
    })
}

/// The gradient budget for data that do not vanish at the shore must grow
/// at least like `ε^{-(1-a)/2}` across the ε range.
pub fn gradient_negative_control(base: &AnsatzParams, cfg: &StudyConfig) -> Result<(StudyTable, Check)> {
    let mut p = base.clone();
    p.data.family = SwirlFamily::ShoreConstant;
    let t = run_study(StudyKind::Gradient, &p, cfg)?;
    let v = t.values();
    let e = t.epsilons();
    let growth = v[v.len() - 1] / v[0];
    let need = (e[0] / e[e.len() - 1]).powf((1.0 - base.a) / 2.0);
    let c = Check::at_least("gradient_negative_control_growth", growth, need);
    Ok((t, c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub solver: SolverConfig,
    /// ε of the flat-cap and sloped decay runs.
    pub eps: f64,
    /// ε set of the comparison, strictly decreasing and ending at `eps`.
    pub compare_epsilons: Vec<f64>,
    /// Horizon of the flat-cap run.
    pub flat_tmax: f64,
    /// Fit window of the decay rates.
    pub window: (f64, f64),
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            solver: SolverConfig {
                tmax: 4.0,
                ..Default::default()
            },
            eps: 0.05,
            compare_epsilons: vec![0.2, 0.1, 0.05],
            flat_tmax: 3.0,
            window: DECAY_WINDOW,
        }
    }
}

/// Fit window of the decay rates: late enough for the initial layer to
/// have formed, early enough for the signal to dominate.
pub const DECAY_WINDOW: (f64, f64) = (0.3, 1.5);

/// Radial band over which the plateau decay is averaged on a flat cap:
/// the bulk of the initial swirl.
pub fn plateau_band(p: &AnsatzParams) -> (f64, f64) {
    let lo = (p.data.center - 0.5 * p.data.width).max(p.topo.depth.rho0 + p.topo.depth.ell);
    (lo, p.data.center + p.data.width)
}

/// Plateau decay rate of a flat-cap run against `√(2β)/H`, within 10%.
pub fn flat_decay_check(p: &AnsatzParams, traj: &Trajectory, weights: &[f64], window: (f64, f64)) -> Check {
    let (a, b) = plateau_band(p);
    let lam = p.topo.lambda_flat();
    let rate = traj.band_decay(a, b, weights, window.0, window.1).unwrap_or(f64::NAN);
    Check::at_most("flat_cap_decay", (rate / lam - 1.0).abs(), 0.10)
        .note("rate", rate)
        .note("lambda", lam)
        .note("band_lo", a)
        .note("band_hi", b)
}

/// Local decay rate at half the maximal depth against `λ_φ`, within 15%.
pub fn mid_decay_check(topo: &Topography, traj: &Trajectory, window: (f64, f64)) -> Result<Check> {
    let rho = topo.depth.rho_at_depth(0.5 * topo.depth.h).unwrap_or(topo.depth.rho0);
    let lam = topo.lambda_phi(rho)?;
    let rate = traj.local_decay(rho, window.0, window.1).unwrap_or(f64::NAN);
    Ok(Check::at_most("sloped_mid_depth_decay", (rate / lam - 1.0).abs(), 0.15)
        .note("rate", rate)
        .note("lambda_phi", lam)
        .note("rho", rho))
}

/// Monotone decrease of the sup-in-time error along ε, and its size at the
/// smallest ε.
pub fn compare_checks(table: &StudyTable) -> Vec<Check> {
    let mono = is_monotone_decreasing(table);
    let mut c = Check::at_most("compare_monotone", if mono { 0.0 } else { 1.0 }, 0.0);
    for r in &table.rows {
        c = c.note(&format!("err_eps_{}", r.epsilon), r.value);
    }
    let last = table.rows.last().map(|r| r.value).unwrap_or(f64::NAN);
    vec![c, Check::at_most("compare_error_at_smallest_eps", last, 0.15)]
}

/// No step of any run may gain more energy than it dissipates.
pub fn energy_check(trajs: &[&Trajectory]) -> Check {
    let v: usize = trajs.iter().map(|t| t.inequality_violations).sum();
    let worst = trajs.iter().map(|t| t.worst_inequality_excess).fold(f64::MIN, f64::max);
    let steps: usize = trajs.iter().map(|t| t.steps).sum();
    Check::at_most("energy_inequality_violations", v as f64, 0.0)
        .note("worst_excess", worst)
        .note("steps", steps as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsReport {
    pub checks: Vec<Check>,
    pub table: StudyTable,
    pub flat: Trajectory,
    pub sloped: Vec<Trajectory>,
}

/// Decay rates on the flat cap and at mid-slope, and the ε-comparison
/// against the limit profile. `base` carries the sloped depth profile.
pub fn solver_physics(base: &AnsatzParams, cfg: &PhysicsConfig) -> Result<PhysicsReport> {
    let mut flat_p = base.with_eps(cfg.eps);
    flat_p.topo.depth.family = DepthFamily::FlatCap;
    let flat_run = Run::new(
        &flat_p,
        &SolverConfig {
            tmax: cfg.flat_tmax,
            ..cfg.solver.clone()
        },
    )?;
    let flat = flat_run.run(false)?;
    let mut checks = vec![flat_decay_check(&flat_p, &flat, &flat_run.face_weights(), cfg.window)];

    let (table, sloped) = compare(base, &cfg.compare_epsilons, &cfg.solver)?;
    let last = sloped.last().expect("at least one epsilon");
    checks.push(mid_decay_check(&base.topo, last, cfg.window)?);
    checks.extend(compare_checks(&table));
    let mut refs: Vec<&Trajectory> = sloped.iter().collect();
    refs.push(&flat);
    checks.push(energy_check(&refs));
    Ok(PhysicsReport {
        checks,
        table,
        flat,
        sloped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexShore, DepthProfile};
    use crate::profiles::InitialSwirl;

    fn params() -> AnsatzParams {
        let depth = DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap();
        let topo = Topography::new(ConvexShore::disk(1.0).unwrap(), depth, 0.5).unwrap();
        let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
        AnsatzParams::new(topo, 0.1, 0.75, data).unwrap()
    }

    #[test]
    fn coefficients_are_exact() {
        assert!(coefficient_sanity(&params().topo).pass);
    }

    #[test]
    fn mutated_base_fails_the_suite() {
        let mut p = params();
        p.mutation = Mutation::SignFlip;
        let cfg = SuiteConfig {
            epsilons: vec![0.1],
            n_points: 300,
            lemma_samples: 4,
            ..Default::default()
        };
        let checks = verify_suite(&p, &cfg).unwrap();
        let failing: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert!(failing.contains(&"boundary_trace_eps_0.1"), "{failing:?}");
        assert!(checks.iter().find(|c| c.name == "mutation_sign_flip_detected").unwrap().pass);
    }

    #[test]
    fn gates_read_the_fit() {
        use crate::verify::fit::StudyRow;
        let rows = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&e: &f64| StudyRow {
                epsilon: e,
                value: e.powf(0.3),
                stderr: 0.0,
                extra: vec![],
            })
            .collect();
        let t = StudyTable::new("residual", rows, vec![]).unwrap();
        let c = study_checks(StudyKind::Residual, &t, 0.75).unwrap();
        assert!(c.iter().all(|c| c.pass), "{c:?}");
        assert_eq!(study_checks(StudyKind::Gradient, &t, 0.75).unwrap()[0].pass, true);
    }
}
