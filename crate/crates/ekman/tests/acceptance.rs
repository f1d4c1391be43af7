//! Acceptance criteria, one line per criterion.
//!
//! Runs without the test harness so the report is always printed; exits
//! nonzero when any criterion fails. Criterion 8 runs the full-resolution
//! solver and dominates the wall time (about ten minutes on one core).

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;

use ekman::geometry::{delta_of, lambda_of, ConvexShore, DepthFamily, DepthProfile, Topography};
use ekman::profiles::{AnsatzParams, InitialSwirl, Mutation, SwirlFamily};
use ekman::solver::{compare, SolverConfig};
use ekman::verify::appendix::{check_advection_identity, check_growth};
use ekman::verify::checks::{check_boundary, check_divergence};
use ekman::verify::lemma::check_trilinear;
use ekman::verify::suite::{energy_check, gradient_negative_control};
use ekman::verify::{run_study, solver_physics, study_checks, Check, PhysicsConfig, StudyConfig, StudyKind};

const SEED: u64 = 20240901;
const POINTS: usize = 2000;

fn params(a: f64) -> AnsatzParams {
    let depth = DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap();
    let topo = Topography::new(ConvexShore::disk(1.0).unwrap(), depth, 0.5).unwrap();
    let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
    AnsatzParams::new(topo, 0.1, a, data).unwrap()
}

struct Outcome {
    checks: Vec<Check>,
    /// Serialized results, compared byte for byte by the reproducibility run.
    bytes: Vec<u8>,
}

fn outcome(checks: Vec<Check>) -> Outcome {
    let bytes = serde_json::to_vec(&checks).unwrap();
    Outcome { checks, bytes }
}

fn with_tables(checks: Vec<Check>, tables: &[&ekman::verify::StudyTable]) -> Outcome {
    let mut o = outcome(checks);
    for t in tables {
        o.bytes.extend(serde_json::to_vec(t).unwrap());
    }
    o
}

fn exactness() -> Outcome {
    let started = Instant::now();
    let base = params(0.75);
    let mut checks = Vec::new();
    for eps in [0.1, 0.05] {
        let p = base.with_eps(eps);
        checks.push(check_boundary(&p, POINTS, SEED).unwrap());
        checks.push(check_divergence(&p, POINTS, SEED).unwrap());
    }
    for m in [Mutation::SignFlip, Mutation::CutoffVariable] {
        let mut p = base.clone();
        p.mutation = m;
        let b = check_boundary(&p, POINTS, SEED).unwrap();
        let d = check_divergence(&p, POINTS, SEED).unwrap();
        let mut c = Check::at_least(&format!("{m:?} fixture fails"), b.value, b.threshold);
        c.pass = !b.pass && !d.pass;
        checks.push(c);
    }
    let secs = started.elapsed().as_secs_f64();
    checks.push(Check::at_most("exactness wall time [s]", secs, 60.0));
    // the timing is not reproducible, keep it out of the compared bytes
    let bytes = serde_json::to_vec(&checks[..checks.len() - 1]).unwrap();
    Outcome { checks, bytes }
}

/// `⌊x^{1/n} · 10^digits⌋` for a positive integer `x`, as a decimal string
/// with the point inserted.
fn root_digits(x: u32, n: u32, digits: u32) -> f64 {
    let scaled = BigUint::from(x) * BigUint::from(10u32).pow(n * digits);
    let r = scaled.nth_root(n).to_string();
    let (int, frac) = r.split_at(r.len() - digits as usize);
    format!("{int}.{frac}").parse().unwrap()
}

fn coefficients() -> Outcome {
    let mut checks = Vec::new();
    let mut flat_exact = true;
    for (h, beta) in [(4.0, 0.5), (1.0, 0.5), (2.5, 0.125), (7.0, 3.0), (0.3, 1e-3)] {
        flat_exact &= lambda_of(h, 0.0, beta) == (2.0f64 * beta).sqrt() / h;
    }
    checks.push(Check::at_most("lambda_phi at phi' = 0 equals sqrt(2 beta)/H", if flat_exact { 0.0 } else { 1.0 }, 0.0));
    checks.push(Check::at_most("delta(0) = 1", (delta_of(0.0f64) - 1.0).abs(), 0.0));
    // 2^{3/4} = 8^{1/4}; (1 + √2)/2 from √2 = 2^{1/2}
    let d1 = root_digits(8, 4, 40);
    checks.push(Check::at_most("delta(1) = 2^(3/4)", (delta_of(1.0f64) - d1).abs(), 1e-12));
    let target = 0.5 * (1.0 + root_digits(2, 2, 40));
    let got = lambda_of(1.0f64, 3f64.sqrt(), 0.5);
    checks.push(Check::at_most("lambda_phi(1, sqrt 3, 1/2) = (1 + sqrt 2)/2", (got - target).abs(), 1e-12));
    outcome(checks)
}

fn study(kind: StudyKind, a: f64) -> Outcome {
    let p = params(a);
    let t = run_study(kind, &p, &StudyConfig::default()).unwrap();
    let checks = study_checks(kind, &t, a).unwrap();
    with_tables(checks, &[&t])
}

fn appendix() -> Outcome {
    let p = params(0.75);
    outcome(vec![
        check_advection_identity(&p.topo, 0.1, 0.75, SEED).unwrap(),
        check_growth(&p.topo, 0.75).unwrap(),
    ])
}

fn inequalities() -> Outcome {
    let p = params(0.75);
    let lemma = check_trilinear(&p.topo, 100, SEED).unwrap();
    let held = lemma.notes.iter().find(|n| n.0 == "held").map(|n| n.1).unwrap_or(0.0);
    let all = Check::at_least("trilinear bound held on 100/100 pairs", held, 100.0);
    // The discrete energy inequality is also checked on every solver run of
    // criterion 8; here on a reduced run over three values of ε.
    let (_, trajs) = compare(&p, &[0.2, 0.1, 0.05], &small_solver()).unwrap();
    let energy = energy_check(&trajs.iter().collect::<Vec<_>>());
    outcome(vec![lemma, all, energy])
}

fn small_solver() -> SolverConfig {
    SolverConfig {
        nr: 48,
        nz: 64,
        tmax: 0.5,
        n_out: 10,
        ..Default::default()
    }
}

fn physics() -> Outcome {
    let r = solver_physics(&params(0.75), &PhysicsConfig::default()).unwrap();
    with_tables(r.checks, &[&r.table])
}

fn gradient() -> Outcome {
    let p = params(0.75);
    let sc = StudyConfig::default();
    let t = run_study(StudyKind::Gradient, &p, &sc).unwrap();
    let mut checks = study_checks(StudyKind::Gradient, &t, 0.75).unwrap();
    let (ctl, c) = gradient_negative_control(&p, &sc).unwrap();
    checks.push(c);
    with_tables(checks, &[&t, &ctl])
}

/// Criteria whose results are compared by the reproducibility check.
fn cheap_suite() -> Vec<Outcome> {
    vec![exactness(), coefficients(), study(StudyKind::Convergence, 0.75), appendix(), inequalities(), gradient()]
}

fn line(n: usize, title: &str, o: &Outcome, secs: f64) -> bool {
    let pass = o.checks.iter().all(|c| c.pass);
    println!("{} criterion {n:>2}: {title} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
    for c in &o.checks {
        let notes: Vec<String> = c.notes.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
        println!(
            "       {} {} value={:.6e} threshold={:.6e} {}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            notes.join(" ")
        );
    }
    pass
}

fn main() -> ExitCode {
    let filter: Option<usize> = std::env::args()
        .skip(1)
        .find(|a| !a.starts_with('-'))
        .and_then(|a| a.parse().ok());
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("exactness suite", exactness),
        ("coefficient sanity", coefficients),
        ("ansatz convergence", || study(StudyKind::Convergence, 0.75)),
        ("residual decay", || study(StudyKind::Residual, 0.75)),
        ("nonlinear structure at a = 0.85", || study(StudyKind::Nonlinear, 0.85)),
        ("appendix identities", appendix),
        ("inequality sampling", inequalities),
        ("solver physics", physics),
        ("gradient budget", gradient),
    ];
    let mut all = true;
    for (i, (title, f)) in criteria.iter().enumerate() {
        if filter.is_some_and(|n| n != i + 1) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        all &= line(i + 1, title, &o, t.elapsed().as_secs_f64());
    }
    if filter.is_none_or(|n| n == 10) {
        let t = Instant::now();
        let first: Vec<Vec<u8>> = cheap_suite().into_iter().map(|o| o.bytes).collect();
        let second: Vec<Vec<u8>> = cheap_suite().into_iter().map(|o| o.bytes).collect();
        let differing = first.iter().zip(&second).filter(|(a, b)| a != b).count();
        let bytes: usize = first.iter().map(|b| b.len()).sum();
        let o = outcome(vec![Check::at_most("runs with differing output", differing as f64, 0.0)
            .note("compared_bytes", bytes as f64)]);
        all &= line(10, "reproducibility", &o, t.elapsed().as_secs_f64());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
