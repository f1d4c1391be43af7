use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ekman::verify::studies::StudyKind;
use ekman_cli::commands::{self, Outcome};
use ekman_cli::output::{in_dir, write_json};
use ekman_cli::{report, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "ekman", version, about = "Ekman boundary-layer ansatz: checks, studies and solver runs")]
struct Cli {
    /// Run configuration (flat `section.key = value` text).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise exactness checks, identities and sampled inequalities.
    Verify,
    /// One ε-study with its log-log slope.
    Study {
        #[arg(value_parser = ["convergence", "residual", "nonlinear", "gradient"])]
        which: String,
    },
    /// One solver run at the smallest configured ε.
    Solve,
    /// Solver runs over every configured ε against the limit profile.
    Compare,
    /// SVG plots of the results in a directory.
    Report {
        /// Results directory (default: `--output`).
        dir: Option<PathBuf>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(o) = &cli.output {
        cfg.set_output(o.clone());
    }
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    let ratio = cfg.amplitude_ratio();
    if ratio > cfg.smallness_ratio {
        eprintln!(
            "warning: sup|u0| / beta = {ratio:.3} exceeds data.smallness_ratio = {}; the small-data regime may not apply",
            cfg.smallness_ratio
        );
    }
    Ok(cfg)
}

fn execute(cli: &Cli, threads: usize) -> Result<bool, CliError> {
    let started = Instant::now();
    if let Command::Report { dir } = &cli.command {
        let dir = dir
            .clone()
            .or_else(|| cli.output.clone())
            .ok_or_else(|| CliError::Config("report needs a results directory".into()))?;
        for p in report::report(&dir)? {
            println!("wrote {}", p.display());
        }
        return Ok(true);
    }
    let cfg = load(cli)?;
    let outcome: Outcome = match &cli.command {
        Command::Verify => commands::verify(&cfg)?,
        Command::Study { which } => commands::study(&cfg, which.parse::<StudyKind>()?)?,
        Command::Solve => commands::solve(&cfg)?,
        Command::Compare => commands::compare_cmd(&cfg)?,
        Command::Report { .. } => unreachable!(),
    };
    let manifest = outcome.manifest(&cfg, threads, started);
    write_json(&in_dir(&cfg.output, &format!("manifest_{}.json", outcome.tag))?, &manifest)?;
    for c in &outcome.checks {
        println!("{} {} value={:e} threshold={:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    for s in &outcome.slopes {
        println!("slope {} = {:.6} +/- {:.6}", s.name, s.slope, s.stderr);
    }
    let failing: Vec<&str> = outcome.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if !failing.is_empty() {
        eprintln!("failing checks: {}", failing.join(", "));
    }
    Ok(outcome.pass())
}

#[cfg(feature = "parallel")]
fn with_pool(n: Option<usize>, f: impl FnOnce(usize) -> Result<bool, CliError> + Send) -> Result<bool, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    pool.install(|| f(rayon::current_num_threads()))
}

#[cfg(not(feature = "parallel"))]
fn with_pool(n: Option<usize>, f: impl FnOnce(usize) -> Result<bool, CliError> + Send) -> Result<bool, CliError> {
    if n.is_some_and(|n| n > 1) {
        eprintln!("warning: built without the parallel feature; running on one thread");
    }
    f(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    match with_pool(cli.threads, |n| execute(&cli, n)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
