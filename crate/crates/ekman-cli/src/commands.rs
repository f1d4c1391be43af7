//! The subcommands. Each returns an [`Outcome`]; the caller writes the
//! manifest and turns `pass` into the exit status.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use ekman::solver::{compare, Run, Trajectory};
use ekman::verify::studies::{run_study, StudyKind};
use ekman::verify::suite::{
    compare_checks, energy_check, flat_decay_check, gradient_negative_control, mid_decay_check, DECAY_WINDOW,
};
use ekman::verify::{study_checks, verify_suite, Check, StudyTable};
use ekman::geometry::DepthFamily;

use crate::config::RunConfig;
use crate::error::{io, CliError};
use crate::output::{in_dir, num, read_csv, series_csv, write_json, write_trajectory, Csv};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

impl From<&Check> for CheckLine {
    fn from(c: &Check) -> Self {
        CheckLine {
            name: c.name.clone(),
            pass: c.pass,
            value: c.value,
            threshold: c.threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub name: String,
    pub slope: f64,
    pub stderr: f64,
}

/// Everything needed to recompute a command's numbers, plus its verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub digest: String,
    pub config: BTreeMap<String, String>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub checks: Vec<CheckLine>,
    pub slopes: Vec<Slope>,
}

pub struct Outcome {
    pub tag: String,
    pub checks: Vec<Check>,
    pub slopes: Vec<Slope>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn manifest(&self, cfg: &RunConfig, threads: usize, started: Instant) -> RunManifest {
        RunManifest {
            command: self.tag.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            digest: cfg.digest(),
            config: cfg.resolved.clone(),
            threads,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            checks: self.checks.iter().map(CheckLine::from).collect(),
            slopes: self.slopes.clone(),
        }
    }
}

fn slope_of(name: &str, t: &StudyTable) -> Slope {
    Slope {
        name: name.to_string(),
        slope: t.fit.slope,
        stderr: t.fit.stderr,
    }
}

#[derive(Serialize)]
struct CheckReport<'a> {
    digest: String,
    seed: u64,
    pass: bool,
    checks: &'a [Check],
}

fn write_checks(cfg: &RunConfig, name: &str, checks: &[Check]) -> Result<(), CliError> {
    let report = CheckReport {
        digest: cfg.digest(),
        seed: cfg.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    write_json(&in_dir(&cfg.output, &format!("{name}.json"))?, &report)?;
    let mut csv = String::from("check,value,threshold,pass\n");
    for c in checks {
        let _ = writeln!(csv, "{},{},{},{}", c.name, num(c.value), num(c.threshold), c.pass);
    }
    let p = cfg.output.join(format!("{name}.csv"));
    std::fs::write(&p, csv).map_err(io(&p))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.require_valid_ansatz()?;
    let checks = verify_suite(&cfg.params, &cfg.suite())?;
    write_checks(cfg, "verify", &checks)?;
    Ok(Outcome {
        tag: "verify".into(),
        checks,
        slopes: vec![],
    })
}

/// One study's entry in `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub slope: f64,
    pub slope_stderr: f64,
    pub pass: bool,
    pub digest: String,
    pub checks: Vec<Check>,
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Named extra measurements per ε, in row order.
    pub extra: Vec<Vec<(String, f64)>>,
}

fn study_csv(t: &StudyTable) -> Csv {
    let mut csv = Csv::new(&["epsilon", "value", "stderr"]);
    for r in &t.rows {
        csv.row(&[r.epsilon, r.value, r.stderr]);
    }
    csv
}

fn summarize(t: &StudyTable, checks: Vec<Check>) -> StudySummary {
    StudySummary {
        slope: t.fit.slope,
        slope_stderr: t.fit.stderr,
        pass: checks.iter().all(|c| c.pass),
        digest: t.digest.clone().unwrap_or_default(),
        checks,
        epsilons: t.epsilons(),
        values: t.values(),
        t_grid: t.t_grid.clone(),
        extra: t.rows.iter().map(|r| r.extra.clone()).collect(),
    }
}

/// Merges entries into `summary.json`, keyed by study name.
fn merge_summary(dir: &Path, entries: Vec<(String, StudySummary)>) -> Result<(), CliError> {
    let path = in_dir(dir, "summary.json")?;
    // Kept as raw JSON: non-finite numbers are written as null.
    let mut all: BTreeMap<String, serde_json::Value> = match std::fs::read_to_string(&path) {
        Ok(s) => serde_json::from_str(&s).map_err(|e| CliError::Malformed {
            path: path.clone(),
            msg: e.to_string(),
        })?,
        Err(_) => BTreeMap::new(),
    };
    for (k, v) in entries {
        all.insert(k, serde_json::to_value(v)?);
    }
    write_json(&path, &all)
}

pub fn study(cfg: &RunConfig, kind: StudyKind) -> Result<Outcome, CliError> {
    cfg.require_slope_grid()?;
    cfg.require_valid_ansatz()?;
    let sc = cfg.study();
    let mut table = run_study(kind, &cfg.params, &sc)?;
    table.digest = Some(cfg.digest());
    let checks = study_checks(kind, &table, cfg.params.a)?;
    study_csv(&table).write(&in_dir(&cfg.output, &format!("study_{}.csv", kind.name()))?)?;
    let mut slopes = vec![slope_of(kind.name(), &table)];
    let mut all_checks = checks.clone();
    let mut entries = vec![(kind.name().to_string(), summarize(&table, checks))];
    if kind == StudyKind::Gradient {
        let (mut ctl, c) = gradient_negative_control(&cfg.params, &sc)?;
        ctl.digest = Some(cfg.digest());
        study_csv(&ctl).write(&cfg.output.join("study_gradient_control.csv"))?;
        slopes.push(slope_of("gradient_control", &ctl));
        all_checks.push(c.clone());
        entries.push(("gradient_control".to_string(), summarize(&ctl, vec![c])));
    }
    merge_summary(&cfg.output, entries)?;
    Ok(Outcome {
        tag: format!("study_{}", kind.name()),
        checks: all_checks,
        slopes,
    })
}

#[derive(Serialize)]
struct RunSummary<'a> {
    digest: String,
    eps: f64,
    dt: f64,
    steps: usize,
    max_pcg_iterations: usize,
    norm_u0: f64,
    sup_err_vs_limit: f64,
    sup_err_vs_ansatz: f64,
    pass: bool,
    checks: &'a [Check],
}

fn physics_checks(cfg: &RunConfig, eps: f64, run: &Run, traj: &Trajectory) -> Result<Vec<Check>, CliError> {
    let mut checks = vec![energy_check(&[traj])];
    if cfg.solver.tmax < DECAY_WINDOW.1 {
        eprintln!(
            "note: solver.tmax = {} ends before the decay fit window [{}, {}]; decay rate not checked",
            cfg.solver.tmax, DECAY_WINDOW.0, DECAY_WINDOW.1
        );
        return Ok(checks);
    }
    let p = cfg.params.with_eps(eps);
    checks.push(match p.topo.depth.family {
        DepthFamily::FlatCap => flat_decay_check(&p, traj, &run.face_weights(), DECAY_WINDOW),
        _ => mid_decay_check(&p.topo, traj, DECAY_WINDOW)?,
    });
    Ok(checks)
}

/// One run at the smallest configured ε.
pub fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eps = cfg.eps_min();
    let run = Run::new(&cfg.params.with_eps(eps), &cfg.solver)?;
    let traj = run.run(true)?;
    let out = &cfg.output;
    write_trajectory(&out.join("trajectory"), &run, &traj)?;
    series_csv(&traj).write(&in_dir(out, "solver_compare.csv")?)?;
    let checks = physics_checks(cfg, eps, &run, &traj)?;
    write_json(
        &out.join("solve.json"),
        &RunSummary {
            digest: cfg.digest(),
            eps,
            dt: traj.dt,
            steps: traj.steps,
            max_pcg_iterations: traj.max_pcg_iterations,
            norm_u0: traj.norm_u0,
            sup_err_vs_limit: traj.sup_err_vs_limit(0.0),
            sup_err_vs_ansatz: traj.sup_err_vs_ansatz(0.0),
            pass: checks.iter().all(|c| c.pass),
            checks: &checks,
        },
    )?;
    Ok(Outcome {
        tag: "solve".into(),
        checks,
        slopes: vec![],
    })
}

/// One run per configured ε and the sup-in-time error table.
pub fn compare_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (mut table, trajs) = compare(&cfg.params, &cfg.epsilons, &cfg.solver)?;
    table.digest = Some(cfg.digest());
    let out = &cfg.output;
    let extra = |r: &ekman::verify::StudyRow, k: &str| r.extra.iter().find(|e| e.0 == k).map(|e| e.1).unwrap_or(f64::NAN);
    let mut csv = Csv::new(&[
        "epsilon",
        "sup_err_vs_limit",
        "sup_err_vs_ansatz",
        "late_err_vs_limit",
        "late_err_vs_ansatz",
    ]);
    for r in &table.rows {
        csv.row(&[
            r.epsilon,
            r.value,
            extra(r, "err_vs_ansatz"),
            extra(r, "err_vs_limit_late"),
            extra(r, "err_vs_ansatz_late"),
        ]);
    }
    csv.write(&in_dir(out, "compare.csv")?)?;
    for t in &trajs {
        series_csv(t).write(&out.join(format!("compare_series_eps_{}.csv", t.eps)))?;
    }
    let mut checks = compare_checks(&table);
    checks.push(energy_check(&trajs.iter().collect::<Vec<_>>()));
    let last = trajs.last().expect("nonempty epsilon list");
    if cfg.solver.tmax >= DECAY_WINDOW.1 && last.eps == cfg.eps_min() {
        let p = cfg.params.with_eps(last.eps);
        if p.topo.depth.family != DepthFamily::FlatCap {
            checks.push(mid_decay_check(&p.topo, last, DECAY_WINDOW)?);
        }
    }
    #[derive(Serialize)]
    struct CompareSummary<'a> {
        digest: String,
        pass: bool,
        table: &'a StudyTable,
        checks: &'a [Check],
    }
    write_json(
        &out.join("compare.json"),
        &CompareSummary {
            digest: cfg.digest(),
            pass: checks.iter().all(|c| c.pass),
            table: &table,
            checks: &checks,
        },
    )?;
    Ok(Outcome {
        tag: "compare".into(),
        checks,
        slopes: vec![slope_of("compare", &table)],
    })
}

/// Re-reads a study CSV; used by the report and the round-trip tests.
pub fn read_study(path: &Path) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let (h, rows) = read_csv(path)?;
    if h != ["epsilon", "value", "stderr"] {
        return Err(CliError::Malformed {
            path: path.to_path_buf(),
            msg: format!("unexpected header {h:?}"),
        });
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1], r[2])).collect())
}
