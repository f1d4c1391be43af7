//! CSV, JSON and binary snapshot files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ekman::solver::{Run, Trajectory};

use crate::error::{io, CliError};

/// 17 significant digits: every double survives a write/read cycle.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub struct Csv {
    header: Vec<String>,
    body: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            body: String::new(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.header.len(), "row width");
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        let _ = writeln!(self.body, "{}", cells.join(","));
    }

    pub fn to_text(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_text()).map_err(io(path))
    }
}

/// Header and numeric rows of a CSV file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    let bad = |msg: String| CliError::Malformed {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: Vec<f64> = l
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad(format!("line {}: bad number '{c}'", i + 2))))
            .collect::<Result<_, _>>()?;
        if row.len() != header.len() {
            return Err(bad(format!("line {}: {} cells for {} columns", i + 2, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).map_err(io(path))
}

/// Creates `dir` and returns `dir/name`.
pub fn in_dir(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    Ok(dir.join(name))
}

/// Time series of one run, one row per diagnostic sample.
pub fn series_csv(traj: &Trajectory) -> Csv {
    let mut csv = Csv::new(&["t", "err_vs_limit", "err_vs_ansatz", "energy", "dissipation"]);
    for s in &traj.samples {
        csv.row(&[s.t, s.err_vs_limit, s.err_vs_ansatz, s.energy, s.dissipation]);
    }
    csv
}

#[derive(Serialize)]
struct SnapshotHeader<'a> {
    format: &'static str,
    fields: [&'static str; 3],
    /// Radial index outermost: `u_r` and `u_θ` live on the interior radial
    /// faces `1..nr` at every level, `u_z` on every column at the interior
    /// σ-faces.
    shape_u: [usize; 2],
    shape_w: [usize; 2],
    eps: f64,
    dt: f64,
    rho_faces: &'a [f64],
    rho_centers: &'a [f64],
    sigma_faces: &'a [f64],
    sigma_centers: &'a [f64],
    times: Vec<f64>,
    files: Vec<String>,
}

/// Snapshots as little-endian `f64` arrays (`u_r`, `u_θ`, `u_z` in that
/// order) plus `header.json` describing the layout.
pub fn write_trajectory(dir: &Path, run: &Run, traj: &Trajectory) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let g = &run.stepper.grid;
    let mut files = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:04}.bin");
        let mut bytes = Vec::with_capacity(8 * (s.ur.len() + s.ut.len() + s.uz.len()));
        for v in s.ur.iter().chain(&s.ut).chain(&s.uz) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let path = dir.join(&name);
        std::fs::write(&path, bytes).map_err(io(&path))?;
        files.push(name);
    }
    let header = SnapshotHeader {
        format: "f64-le",
        fields: ["u_r", "u_theta", "u_z"],
        shape_u: [g.nr - 1, g.nz],
        shape_w: [g.nr, g.nz - 1],
        eps: traj.eps,
        dt: traj.dt,
        rho_faces: &g.rho_f,
        rho_centers: &g.rho_c,
        sigma_faces: &g.sig_f,
        sigma_centers: &g.sig_c,
        times: traj.snapshots.iter().map(|s| s.t).collect(),
        files,
    };
    write_json(&dir.join("header.json"), &header)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-300, -7.123456789012345e12, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("x.csv");
        let mut c = Csv::new(&["epsilon", "value", "stderr"]);
        c.row(&[0.2, 0.123456789, 0.0]);
        c.row(&[0.1, std::f64::consts::PI, 1e-17]);
        c.write(&p).unwrap();
        let (h, rows) = read_csv(&p).unwrap();
        assert_eq!(h, ["epsilon", "value", "stderr"]);
        assert_eq!(rows, vec![vec![0.2, 0.123456789, 0.0], vec![0.1, std::f64::consts::PI, 1e-17]]);
    }
}
