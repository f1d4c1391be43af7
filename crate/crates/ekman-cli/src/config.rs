//! Flat `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored, booleans are `true`/`false` and
//! lists are comma-separated. Every key must be known; the geometry and
//! physics keys have no defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use ekman::calculus::norms::QuadConfig;
use ekman::geometry::{ConvexShore, DepthFamily, DepthProfile, FourierCurve, Topography};
use ekman::profiles::{AnsatzParams, InitialSwirl, Mutation, SwirlFamily};
use ekman::solver::SolverConfig;
use ekman::verify::studies::StudyConfig;
use ekman::verify::SuiteConfig;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Bool,
    Text,
    FloatList,
}

/// `(key, kind, default)`; a `None` default marks a required key.
const KEYS: &[(&str, Kind, Option<&str>)] = &[
    ("geometry.kind", Kind::Text, None),
    ("geometry.R", Kind::Float, None),
    ("geometry.rho0", Kind::Float, None),
    ("geometry.amp", Kind::Float, Some("0.3")),
    ("geometry.mode", Kind::Int, Some("3")),
    ("depth.family", Kind::Text, None),
    ("depth.H", Kind::Float, None),
    ("depth.ell", Kind::Float, None),
    ("physics.beta", Kind::Float, None),
    ("ansatz.a", Kind::Float, Some("0.75")),
    ("ansatz.epsilons", Kind::FloatList, Some("0.2, 0.1, 0.05, 0.025")),
    ("ansatz.mutation", Kind::Text, Some("none")),
    ("data.family", Kind::Text, Some("gaussian")),
    ("data.amplitude", Kind::Float, Some("0.25")),
    ("data.center", Kind::Float, Some("4")),
    ("data.width", Kind::Float, Some("2")),
    ("data.smallness_ratio", Kind::Float, Some("2")),
    ("quad.n_rho", Kind::Int, Some("192")),
    ("quad.n_z_interior", Kind::Int, Some("32")),
    ("quad.n_z_layer", Kind::Int, Some("6")),
    ("quad.t_star_factor", Kind::Float, Some("8")),
    ("solver.nr", Kind::Int, Some("192")),
    ("solver.nz", Kind::Int, Some("160")),
    ("solver.dt", Kind::Text, Some("auto")),
    ("solver.tmax", Kind::Float, Some("4")),
    ("solver.nonlinear", Kind::Bool, Some("false")),
    ("solver.rout", Kind::Text, Some("auto")),
    ("solver.n_out", Kind::Int, Some("80")),
    ("output.dir", Kind::Text, Some("results")),
    ("seed", Kind::Int, Some("20240901")),
    ("study.t_grid", Kind::Int, Some("24")),
    ("study.n_sample_points", Kind::Int, Some("2000")),
    ("study.refine", Kind::Bool, Some("false")),
];

/// Keys that do not change any computed number and stay out of the digest.
const UNDIGESTED: &[&str] = &["output.dir"];

/// A parsed and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Canonical value of every key, defaults included.
    pub resolved: BTreeMap<String, String>,
    pub params: AnsatzParams,
    pub epsilons: Vec<f64>,
    pub quad: QuadConfig,
    pub solver: SolverConfig,
    pub output: PathBuf,
    pub seed: u64,
    pub n_t: usize,
    pub n_points: usize,
    pub refine: bool,
    pub smallness_ratio: f64,
}

struct Raw<'a> {
    source: &'a str,
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw<'_> {
    fn err(&self, key: &str, msg: String) -> CliError {
        let line = self.entries.get(key).map(|e| e.0).unwrap_or(0);
        CliError::Parse {
            file: self.source.to_string(),
            line,
            key: key.to_string(),
            msg,
        }
    }

    fn text(&self, key: &str) -> Result<String, CliError> {
        if let Some((_, v)) = self.entries.get(key) {
            return Ok(v.clone());
        }
        match KEYS.iter().find(|k| k.0 == key).and_then(|k| k.2) {
            Some(d) => Ok(d.to_string()),
            None => Err(self.err(key, "required key is missing".into())),
        }
    }

    fn float(&self, key: &str) -> Result<f64, CliError> {
        let s = self.text(key)?;
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(key, format!("expected a finite number, got '{s}'")))
    }

    fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.float(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(key, format!("must be positive, got {v}")))
        }
    }

    fn int(&self, key: &str) -> Result<u64, CliError> {
        let s = self.text(key)?;
        s.parse::<u64>()
            .map_err(|_| self.err(key, format!("expected a non-negative integer, got '{s}'")))
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        match self.int(key)? {
            0 => Err(self.err(key, "must be at least 1".into())),
            n => Ok(n as usize),
        }
    }

    fn boolean(&self, key: &str) -> Result<bool, CliError> {
        match self.text(key)?.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            s => Err(self.err(key, format!("expected true or false, got '{s}'"))),
        }
    }

    fn floats(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let s = self.text(key)?;
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(key, format!("bad list entry '{}'", t.trim())))
            })
            .collect()
    }

    fn auto(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.text(key)? == "auto" {
            Ok(None)
        } else {
            self.positive(key).map(Some)
        }
    }

    fn lib<T>(&self, key: &str, r: ekman::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| self.err(key, e.to_string()))
    }
}

fn canonical(kind: Kind, raw: &str) -> String {
    match kind {
        Kind::Float => raw.parse::<f64>().map(|v| v.to_string()).unwrap_or_else(|_| raw.to_string()),
        Kind::FloatList => raw
            .split(',')
            .map(|t| t.trim().parse::<f64>().map(|v| v.to_string()).unwrap_or_else(|_| t.trim().to_string()))
            .collect::<Vec<_>>()
            .join(","),
        _ => raw.trim().to_string(),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses configuration text; `source` names it in diagnostics.
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fail = |key: &str, msg: String| CliError::Parse {
                file: source.to_string(),
                line: n,
                key: key.to_string(),
                msg,
            };
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| fail("", format!("expected 'section.key = value', got '{body}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.iter().any(|e| e.0 == k) {
                return Err(fail(k, "unknown key".into()));
            }
            if v.is_empty() {
                return Err(fail(k, "empty value".into()));
            }
            if let Some((first, _)) = entries.insert(k.to_string(), (n, v.to_string())) {
                return Err(fail(k, format!("duplicate key, first set on line {first}")));
            }
        }
        Self::resolve(Raw { source, entries })
    }

    fn resolve(raw: Raw) -> Result<Self, CliError> {
        // Required keys first, so a missing one is reported before any
        // inconsistency between the others.
        for (k, _, d) in KEYS {
            if d.is_none() {
                raw.text(k)?;
            }
        }
        let r = raw.positive("geometry.R")?;
        let shore = match raw.text("geometry.kind")?.as_str() {
            "disk" => raw.lib("geometry.R", ConvexShore::disk(r))?,
            "curve" => {
                let mode = raw.int("geometry.mode")? as u32;
                let c = FourierCurve::new(2.0 * std::f64::consts::PI * r, raw.float("geometry.amp")?, mode, 512);
                ConvexShore::Curve(raw.lib("geometry.amp", c)?)
            }
            s => return Err(raw.err("geometry.kind", format!("expected disk or curve, got '{s}'"))),
        };
        let family: DepthFamily = raw.lib("depth.family", raw.text("depth.family")?.parse())?;
        let depth = raw.lib(
            "depth.H",
            DepthProfile::new(
                family,
                raw.positive("geometry.rho0")?,
                raw.positive("depth.H")?,
                raw.positive("depth.ell")?,
            ),
        )?;
        let topo = raw.lib("physics.beta", Topography::new(shore, depth, raw.positive("physics.beta")?))?;
        let data_family: SwirlFamily = raw.lib("data.family", raw.text("data.family")?.parse())?;
        let data = raw.lib(
            "data.amplitude",
            InitialSwirl::new(
                data_family,
                raw.positive("data.amplitude")?,
                raw.float("data.center")?,
                raw.positive("data.width")?,
            ),
        )?;

        let epsilons = raw.floats("ansatz.epsilons")?;
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(raw.err("ansatz.epsilons", "must be strictly decreasing".into()));
        }
        let a = raw.float("ansatz.a")?;
        let mut params = raw.lib("ansatz.a", AnsatzParams::new(topo, epsilons[0], a, data))?;
        params.mutation = raw.lib::<Mutation>("ansatz.mutation", raw.text("ansatz.mutation")?.parse())?;

        let quad = QuadConfig {
            n_rho: raw.count("quad.n_rho")?,
            n_z_interior: raw.count("quad.n_z_interior")?,
            n_z_layer: raw.count("quad.n_z_layer")?,
            t_star_factor: raw.positive("quad.t_star_factor")?,
            ..QuadConfig::default()
        };
        let solver = SolverConfig {
            nr: raw.count("solver.nr")?,
            nz: raw.count("solver.nz")?,
            dt: raw.auto("solver.dt")?,
            tmax: raw.positive("solver.tmax")?,
            nonlinear: raw.boolean("solver.nonlinear")?,
            rout: raw.auto("solver.rout")?,
            n_out: raw.count("solver.n_out")?,
            ..SolverConfig::default()
        };

        let mut resolved = BTreeMap::new();
        for (k, kind, _) in KEYS {
            resolved.insert(k.to_string(), canonical(*kind, &raw.text(k)?));
        }
        Ok(RunConfig {
            resolved,
            params,
            epsilons,
            quad,
            solver,
            output: PathBuf::from(raw.text("output.dir")?),
            seed: raw.int("seed")?,
            n_t: raw.count("study.t_grid")?,
            n_points: raw.count("study.n_sample_points")?,
            refine: raw.boolean("study.refine")?,
            smallness_ratio: raw.positive("data.smallness_ratio")?,
        })
    }

    pub fn set_output(&mut self, dir: PathBuf) {
        self.resolved.insert("output.dir".into(), dir.display().to_string());
        self.output = dir;
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.resolved.insert("seed".into(), seed.to_string());
        self.seed = seed;
    }

    /// SHA-256 of the sorted canonical `key=value` lines.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.resolved {
            if !UNDIGESTED.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Slope studies need at least four values of ε.
    pub fn require_slope_grid(&self) -> Result<(), CliError> {
        if self.epsilons.len() < 4 {
            return Err(CliError::Config(format!(
                "ansatz.epsilons: slope studies need at least 4 values, got {}",
                self.epsilons.len()
            )));
        }
        Ok(())
    }

    /// Checks that the boundary layers fit inside the cut-off at every ε.
    /// Needed wherever the ansatz is evaluated on its whole domain; the
    /// solver has its own resolution guard.
    pub fn require_valid_ansatz(&self) -> Result<(), CliError> {
        for &e in &self.epsilons {
            self.params
                .with_eps(e)
                .validate()
                .map_err(|err| CliError::Config(format!("ansatz.epsilons: eps = {e}: {err}")))?;
        }
        Ok(())
    }

    /// Smallest configured ε.
    pub fn eps_min(&self) -> f64 {
        *self.epsilons.last().expect("nonempty list")
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            epsilons: self.epsilons.clone(),
            quad: self.quad.clone(),
            n_t: self.n_t,
            refine: self.refine,
        }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            epsilons: self.epsilons.clone(),
            n_points: self.n_points,
            seed: self.seed,
            ..SuiteConfig::default()
        }
    }

    /// `sup u₀ / β`, for the smallness warning.
    pub fn amplitude_ratio(&self) -> f64 {
        let p = &self.params;
        let rho0 = p.topo.depth.rho0;
        let end = p.data.support_end(rho0);
        (0..=2000)
            .map(|i| {
                let rho = rho0 + (end - rho0) * i as f64 / 2000.0;
                let phi = p.topo.phi(rho).unwrap_or(0.0);
                p.data.u0(rho, phi, rho0).abs()
            })
            .fold(0.0, f64::max)
            / p.topo.beta
    }
}
