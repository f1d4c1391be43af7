//! SVG plots of whatever results a directory holds.

use std::path::{Path, PathBuf};

use ekman::verify::fit_loglog;

use crate::commands::read_study;
use crate::error::{io, CliError};
use crate::output::read_csv;
use crate::svg::{Line, Plot, Scale};

fn study_caption(which: &str) -> Vec<String> {
    let lines: &[&str] = match which {
        "convergence" => &[
            "sup over t of the L2 distance between the approximate solution U_app",
            "and the limit profile u-bar, against the Rossby number eps.",
        ],
        "residual" => &[
            "L1-in-time L2 norm of the momentum residual R_app of the approximate",
            "solution, against eps.",
        ],
        "nonlinear" => &[
            "L1-in-time L2 norm of the nonlinear transport of the approximate solution",
            "by itself, against eps.",
        ],
        "gradient" => &[
            "L1-in-time sup norm of the interior velocity gradient of the approximate",
            "solution, against eps; bounded when the data vanish at the shore like the depth.",
        ],
        "gradient_control" => &[
            "Gradient budget for data that stay nonzero at the shore (negative control):",
            "it must grow as eps decreases.",
        ],
        _ => &["Measured norm against eps."],
    };
    lines.iter().map(|s| s.to_string()).collect()
}

fn study_plot(which: &str, rows: &[(f64, f64, f64)]) -> Plot {
    let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut lines = vec![Line {
        label: format!("{which} norm"),
        points: rows.iter().map(|r| (r.0, r.1)).collect(),
        dashed: false,
        markers: true,
    }];
    let mut annotation = None;
    if let Ok(f) = fit_loglog(&x, &y) {
        let fit = |e: f64| (f.intercept + f.slope * e.ln()).exp();
        lines.push(Line {
            label: "log-log fit".into(),
            points: x.iter().map(|&e| (e, fit(e))).collect(),
            dashed: true,
            markers: false,
        });
        annotation = Some(format!("fitted slope {:.4} +/- {:.4}", f.slope, f.stderr));
    }
    Plot {
        title: format!("Study: {which}"),
        caption: study_caption(which),
        x_label: "eps".into(),
        y_label: "norm".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        lines,
        annotation,
    }
}

fn series_plot(title: &str, caption: Vec<String>, lines: Vec<Line>) -> Plot {
    Plot {
        title: title.to_string(),
        caption,
        x_label: "t".into(),
        y_label: "value".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        lines,
        annotation: None,
    }
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Option<Vec<f64>> {
    let i = header.iter().position(|h| h == name)?;
    Some(rows.iter().map(|r| r[i]).collect())
}

fn line(label: &str, t: &[f64], v: &[f64], dashed: bool) -> Line {
    Line {
        label: label.to_string(),
        points: t.iter().copied().zip(v.iter().copied()).collect(),
        dashed,
        markers: false,
    }
}

fn solver_series(path: &Path) -> Result<Plot, CliError> {
    let (h, rows) = read_csv(path)?;
    let need = |n: &str| {
        column(&h, &rows, n).ok_or_else(|| CliError::Malformed {
            path: path.to_path_buf(),
            msg: format!("missing column {n}"),
        })
    };
    let t = need("t")?;
    let e = need("energy")?;
    let e0 = e.first().copied().unwrap_or(1.0);
    let rel: Vec<f64> = e.iter().map(|v| v / e0).collect();
    Ok(series_plot(
        "Solver run: errors and energy",
        vec![
            "Relative L2 error of the computed velocity against the limit profile u-bar and".into(),
            "against U_app, with the kinetic energy E(t)/E(0), which decays under Ekman pumping.".into(),
        ],
        vec![
            line("error vs limit", &t, &need("err_vs_limit")?, false),
            line("error vs ansatz", &t, &need("err_vs_ansatz")?, true),
            line("E(t)/E(0)", &t, &rel, false),
        ],
    ))
}

fn compare_table(path: &Path) -> Result<Plot, CliError> {
    let (h, rows) = read_csv(path)?;
    let get = |n: &str| {
        column(&h, &rows, n).ok_or_else(|| CliError::Malformed {
            path: path.to_path_buf(),
            msg: format!("missing column {n}"),
        })
    };
    let e = get("epsilon")?;
    let pts = |v: Vec<f64>| e.iter().copied().zip(v).collect();
    Ok(Plot {
        title: "Solver against eps".into(),
        caption: vec![
            "sup over t of the relative L2 error of the computed velocity against u-bar".into(),
            "and against U_app, for each eps of the comparison.".into(),
        ],
        x_label: "eps".into(),
        y_label: "relative error".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        lines: vec![
            Line {
                label: "vs limit".into(),
                points: pts(get("sup_err_vs_limit")?),
                dashed: false,
                markers: true,
            },
            Line {
                label: "vs ansatz".into(),
                points: pts(get("sup_err_vs_ansatz")?),
                dashed: true,
                markers: true,
            },
        ],
        annotation: None,
    })
}

fn compare_series(paths: &[(f64, PathBuf)]) -> Result<Plot, CliError> {
    let mut lines = Vec::new();
    for (eps, p) in paths {
        let (h, rows) = read_csv(p)?;
        if let (Some(t), Some(v)) = (column(&h, &rows, "t"), column(&h, &rows, "err_vs_limit")) {
            lines.push(line(&format!("eps = {eps}"), &t, &v, false));
        }
    }
    Ok(series_plot(
        "Error against the limit over time",
        vec!["Relative L2 error of the computed velocity against u-bar, one curve per eps.".into()],
        lines,
    ))
}

/// Writes one SVG per recognised result file; returns the files written.
pub fn report(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    let mut plots: Vec<(String, Plot)> = Vec::new();
    let mut series = Vec::new();
    for n in &names {
        let p = dir.join(n);
        if let Some(which) = n.strip_prefix("study_").and_then(|s| s.strip_suffix(".csv")) {
            plots.push((format!("study_{which}.svg"), study_plot(which, &read_study(&p)?)));
        } else if n == "solver_compare.csv" {
            plots.push(("solver_compare.svg".into(), solver_series(&p)?));
        } else if n == "compare.csv" {
            plots.push(("compare.svg".into(), compare_table(&p)?));
        } else if let Some(e) = n.strip_prefix("compare_series_eps_").and_then(|s| s.strip_suffix(".csv")) {
            if let Ok(eps) = e.parse::<f64>() {
                series.push((eps, p));
            }
        }
    }
    if !series.is_empty() {
        series.sort_by(|a, b| b.0.total_cmp(&a.0));
        plots.push(("compare_series.svg".into(), compare_series(&series)?));
    }
    if plots.is_empty() {
        return Err(CliError::NoResults(dir.to_path_buf()));
    }
    let mut written = Vec::new();
    for (name, plot) in plots {
        let p = dir.join(name);
        std::fs::write(&p, plot.render()).map_err(io(&p))?;
        written.push(p);
    }
    Ok(written)
}
