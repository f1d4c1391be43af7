//! Least-squares slopes on log-log data and the study tables built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted `log v = c + slope · log ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for an exact two-point fit).
    pub stderr: f64,
}

impl LogLogFit {
    /// Pessimistic slope used by the acceptance thresholds.
    pub fn lower(&self) -> f64 {
        self.slope - 2.0 * self.stderr
    }
}

pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Config("a slope fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Config(
            "log-log fit of non-positive or non-finite data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("slope fit with a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if lx.len() > 2 {
        let rss: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LogLogFit {
        slope,
        intercept,
        stderr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub epsilon: f64,
    pub value: f64,
    /// Size of the quadrature change under refinement, when measured.
    pub stderr: f64,
    /// Extra named numbers (tail bounds, sub-norms).
    pub extra: Vec<(String, f64)>,
}

/// Measured quantity against ε, with its log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub name: String,
    pub rows: Vec<StudyRow>,
    pub fit: LogLogFit,
    pub t_grid: Vec<f64>,
    pub digest: Option<String>,
}

impl StudyTable {
    pub fn new(name: &str, rows: Vec<StudyRow>, t_grid: Vec<f64>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Config("a study needs at least two epsilons".into()));
        }
        if rows.windows(2).any(|w| !(w[1].epsilon < w[0].epsilon)) {
            return Err(Error::Config("study epsilons must be strictly decreasing".into()));
        }
        let x: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let fit = fit_loglog(&x, &y)?;
        Ok(StudyTable {
            name: name.to_string(),
            rows,
            fit,
            t_grid,
            digest: None,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.epsilon).collect()
    }

    /// `max / min` of the measured values.
    pub fn spread(&self) -> f64 {
        let v = self.values();
        let max = v.iter().copied().fold(f64::MIN, f64::max);
        let min = v.iter().copied().fold(f64::MAX, f64::min);
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [0.2, 0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powf(0.37)).collect();
        let f = fit_loglog(&x, &y).unwrap();
        assert!((f.slope - 0.37).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn stderr_reflects_scatter() {
        let x = [0.2, 0.1, 0.05, 0.025];
        let y = [1.0, 0.9, 0.5, 0.45];
        let f = fit_loglog(&x, &y).unwrap();
        assert!(f.stderr > 0.01);
    }

    #[test]
    fn rejects_unsorted_epsilons() {
        let row = |e| StudyRow {
            epsilon: e,
            value: 1.0,
            stderr: 0.0,
            extra: vec![],
        };
        assert!(StudyTable::new("x", vec![row(0.1), row(0.2)], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn slope_is_scale_invariant(s in -2.0f64..2.0, c in 0.01f64..100.0) {
            let x = [0.3, 0.1, 0.04, 0.02, 0.01];
            let y: Vec<f64> = x.iter().map(|e: &f64| e.powf(s)).collect();
            let yc: Vec<f64> = y.iter().map(|v| c * v).collect();
            let a = fit_loglog(&x, &y).unwrap();
            let b = fit_loglog(&x, &yc).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-9);
        }
    }
}
