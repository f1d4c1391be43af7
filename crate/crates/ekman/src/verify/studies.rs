//! ε-studies: convergence to the limit, residual decay, the nonlinear
//! structure term and the gradient budget.

use serde::{Deserialize, Serialize};

use super::fit::{fit_loglog, LogLogFit, StudyRow, StudyTable};
use crate::calculus::norms::{time_grid, time_l1, vertical, DomainQuadrature, LayerScales, QuadColumn, QuadConfig};
use crate::calculus::ops::{self, advect_by, nonlinear_in_column, residual_in_column, Vec3};
use crate::calculus::scalar::Jet;
use crate::error::Result;
use crate::par;
use crate::profiles::{Ansatz, AnsatzParams, Column, Term, TermSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub quad: QuadConfig,
    /// Points of the geometric time grid, `t = 0` included.
    pub n_t: usize,
    /// Repeat each ε with doubled node counts and report the change.
    pub refine: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            quad: QuadConfig::default(),
            n_t: 24,
            refine: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Convergence,
    Residual,
    Nonlinear,
    Gradient,
}

impl std::str::FromStr for StudyKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convergence" => Ok(StudyKind::Convergence),
            "residual" => Ok(StudyKind::Residual),
            "nonlinear" => Ok(StudyKind::Nonlinear),
            "gradient" => Ok(StudyKind::Gradient),
            _ => Err(crate::Error::Config(format!("unknown study '{s}'"))),
        }
    }
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Convergence => "convergence",
            StudyKind::Residual => "residual",
            StudyKind::Nonlinear => "nonlinear",
            StudyKind::Gradient => "gradient",
        }
    }
}

/// Quadrature, time grid and evaluator for one ε.
pub struct Setup {
    pub ansatz: Ansatz,
    pub quad: DomainQuadrature,
    pub times: Vec<f64>,
    /// Smallest pumping rate, used for the time tails.
    pub lambda: f64,
}

impl Setup {
    pub fn new(params: &AnsatzParams, qc: &QuadConfig, n_t: usize) -> Result<Self> {
        params.validate()?;
        let topo = &params.topo;
        let rho0 = topo.depth.rho0;
        let end = params.data.support_end(rho0);
        let kc = params.shore_factor * params.cutoff_scale();
        let extra: Vec<f64> = [0.5, 0.625, 0.75, 0.875, 1.0]
            .iter()
            .filter_map(|f| topo.depth.rho_at_depth(f * kc))
            .filter(|r| *r < end)
            .collect();
        let scales = LayerScales {
            layer: params.layer(),
            cutoff: params.cutoff_scale(),
        };
        let quad = DomainQuadrature::new(topo, scales, end, &extra, qc)?;
        let lambda = topo.lambda_flat();
        Ok(Setup {
            ansatz: Ansatz::new(params.clone())?,
            quad,
            times: time_grid(qc.t_star_factor / lambda, n_t),
            lambda,
        })
    }

    pub fn column_f64(&self, t: f64, c: &QuadColumn) -> Result<Column<'_, f64>> {
        self.ansatz.column(t, c.xh[0], c.xh[1], Some((0.0, 0.0)))
    }

    pub fn column_jet(&self, t: f64, c: &QuadColumn) -> Result<Column<'_, Jet>> {
        self.ansatz
            .column(t, Jet::var(0, c.xh[0]), Jet::var(1, c.xh[1]), Some((0.0, 0.0)))
    }

    /// For each time, per-column vectors of `k` vertical integrals.
    fn integrals<F>(&self, k: usize, f: F) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(f64, &QuadColumn) -> Result<Vec<f64>> + Sync + Send,
    {
        let mut out = Vec::with_capacity(self.times.len());
        for &t in &self.times {
            let cols = self.quad.map_columns(|c| f(t, c))?;
            let mut acc = vec![0.0; k];
            for (c, v) in self.quad.columns.iter().zip(&cols) {
                for i in 0..k {
                    acc[i] += c.weight * v[i];
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `‖·‖_{L²}(t)` of `k` fields whose squared norms `sq(col, layer)`
    /// returns at each node.
    pub fn l2_series<F>(&self, k: usize, jets: bool, sq: F) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(Either<'_>, f64) -> Vec<f64> + Sync + Send,
    {
        let raw = self.integrals(k, |t, c| {
            let mut acc = vec![0.0; k];
            if jets {
                let col = self.column_jet(t, c)?;
                for (&z, &w) in c.z.nodes.iter().zip(&c.z.weights) {
                    let v = sq(Either::Jet(&col), z);
                    for i in 0..k {
                        acc[i] += w * v[i];
                    }
                }
            } else {
                let col = self.column_f64(t, c)?;
                for (&z, &w) in c.z.nodes.iter().zip(&c.z.weights) {
                    let v = sq(Either::Plain(&col), z);
                    for i in 0..k {
                        acc[i] += w * v[i];
                    }
                }
            }
            Ok(acc)
        })?;
        Ok(raw
            .into_iter()
            .map(|v| v.into_iter().map(|s| s.max(0.0).sqrt()).collect())
            .collect())
    }
}

/// A column evaluated in plain or jet arithmetic.
pub enum Either<'a> {
    Plain(&'a Column<'a, f64>),
    Jet(&'a Column<'a, Jet>),
}

fn sup(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn column(series: &[Vec<f64>], i: usize) -> Vec<f64> {
    series.iter().map(|v| v[i]).collect()
}

fn norm2_f(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Late-time decay rate of a sampled norm, from the last third of the grid.
pub fn tail_rate(t: &[f64], v: &[f64]) -> Option<f64> {
    let n = t.len();
    let start = n - n / 3;
    let (ts, vs): (Vec<f64>, Vec<f64>) = t[start..]
        .iter()
        .zip(&v[start..])
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    if ts.len() < 2 {
        return None;
    }
    let m = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / m;
    let mv = vs.iter().sum::<f64>() / m;
    let sxx: f64 = ts.iter().map(|x| (x - mt).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(&vs).map(|(x, y)| (x - mt) * (y - mv)).sum();
    Some(-sxy / sxx)
}

/// Numbers measured for one ε: the primary value and named extras.
struct Measured {
    value: f64,
    extra: Vec<(String, f64)>,
}

fn measure(kind: StudyKind, params: &AnsatzParams, qc: &QuadConfig, n_t: usize) -> Result<Measured> {
    let s = Setup::new(params, qc, n_t)?;
    match kind {
        StudyKind::Convergence => {
            let all = TermSet::all();
            let interior = TermSet::interior();
            let series = s.l2_series(2, false, |col, z| {
                let Either::Plain(col) = col else { unreachable!() };
                let l = col.layer(z);
                let lim = col.limit(false);
                let u = col.velocity(&l, all, false);
                let ui = col.velocity(&l, interior, false);
                let d = |a: [f64; 3]| norm2_f([a[0] - lim[0], a[1] - lim[1], a[2] - lim[2]]);
                vec![d(u), d(ui)]
            })?;
            let full = column(&series, 0);
            let inner = column(&series, 1);
            // weighted layer norm: sup over columns, not an L² sum
            let weighted = weighted_layer_norm(&s)?;
            let mut extra = vec![
                ("interior".to_string(), sup(&inner)),
                ("weighted_layer".to_string(), weighted),
            ];
            if let Some(r) = tail_rate(&s.times, &full) {
                extra.push(("tail_rate".to_string(), r));
                extra.push(("lambda_flat".to_string(), s.lambda));
            }
            Ok(Measured {
                value: sup(&full),
                extra,
            })
        }
        StudyKind::Residual => {
            let series = s.l2_series(1, true, |col, z| {
                let Either::Jet(col) = col else { unreachable!() };
                let l = col.layer(Jet::var(2, z));
                vec![ops::norm2(residual_in_column(col, &l, TermSet::all()))]
            })?;
            let v = column(&series, 0);
            let tl = time_l1(&s.times, &v, s.lambda);
            let projected = residual_mod_gradients(&s)?;
            let tp = time_l1(&s.times, &projected, s.lambda);
            Ok(Measured {
                value: tl.value,
                extra: vec![
                    ("tail".to_string(), tl.tail),
                    ("mod_gradients".to_string(), tp.value),
                    ("mod_gradients_tail".to_string(), tp.tail),
                ],
            })
        }
        StudyKind::Nonlinear => {
            let all = TermSet::all();
            let not_int0 = all.without(&[Term::Int0]);
            let not_bl0 = all.without(&[Term::Surf0, Term::Bot0]);
            let surf0 = TermSet::of(&[Term::Surf0]);
            let series = s.l2_series(3, true, |col, z| {
                let Either::Jet(col) = col else { unreachable!() };
                let l = col.layer(Jet::var(2, z));
                let n = nonlinear_in_column(col, &l, all);
                let q2 = advect_by(&col.velocity(&l, not_int0, false), &col.velocity(&l, not_bl0, false));
                let us = col.velocity(&l, surf0, false);
                let ss = advect_by(&us, &us);
                vec![ops::norm2(n), ops::norm2(q2), ops::norm2(ss)]
            })?;
            let tl = |i| time_l1(&s.times, &column(&series, i), s.lambda);
            let main = tl(0);
            Ok(Measured {
                value: main.value,
                extra: vec![
                    ("tail".to_string(), main.tail),
                    ("q2".to_string(), tl(1).value),
                    ("surface_self".to_string(), tl(2).value),
                ],
            })
        }
        StudyKind::Gradient => {
            let interior = TermSet::interior();
            let per_t: Result<Vec<f64>> = s
                .times
                .iter()
                .map(|&t| {
                    let cols = s.quad.map_columns(|c| {
                        let col = s.column_jet(t, c)?;
                        let mut m = 0.0f64;
                        for &z in &c.z.nodes {
                            let l = col.layer(Jet::var(2, z));
                            let u = col.velocity(&l, interior, false);
                            m = m.max(grad_norm(&u));
                        }
                        Ok(m)
                    })?;
                    Ok(sup(&cols))
                })
                .collect();
            let v = per_t?;
            let tl = time_l1(&s.times, &v, s.lambda);
            Ok(Measured {
                value: tl.value,
                extra: vec![("tail".to_string(), tl.tail), ("sup_t".to_string(), sup(&v))],
            })
        }
    }
}

/// Frobenius norm of the Jacobian.
fn grad_norm(u: &[Jet; 3]) -> f64 {
    u.iter()
        .map(|c| c.g.iter().map(|g| g * g).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// `sup_t sup_{x_h} (∫ d_φ |U_BL|² dz)^{1/2}`.
fn weighted_layer_norm(s: &Setup) -> Result<f64> {
    let layers = TermSet::layers();
    let mut best = 0.0f64;
    for &t in &s.times {
        let v = s.quad.map_columns(|c| {
            let col = s.column_f64(t, c)?;
            vertical(c, |z| {
                let l = col.layer(z);
                let u = col.velocity(&l, layers, false);
                Ok((-z).min(c.phi + z).max(0.0) * norm2_f(u))
            })
        })?;
        best = best.max(sup(&v));
    }
    Ok(best.sqrt())
}

const MOD_DEG: usize = 8;

/// Legendre values and derivatives up to degree `MOD_DEG - 1`.
fn legendre(x: f64) -> ([f64; MOD_DEG], [f64; MOD_DEG]) {
    let mut p = [0.0; MOD_DEG];
    let mut d = [0.0; MOD_DEG];
    p[0] = 1.0;
    if MOD_DEG > 1 {
        p[1] = x;
        d[1] = 1.0;
    }
    for n in 1..MOD_DEG - 1 {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        d[n + 1] = d[n - 1] + (2.0 * nf + 1.0) * p[n];
    }
    (p, d)
}

/// `∇q` for the tensor Legendre basis in `(ρ, z)`, as Cartesian vectors.
fn basis_gradients(s: &Setup, c: &QuadColumn, z: f64) -> Vec<Vec3> {
    let (r0, r1) = s.quad.rho_range;
    let h = s.ansatz.params.topo.depth.h;
    let xi = 2.0 * (c.rho - r0) / (r1 - r0) - 1.0;
    let ze = 2.0 * z / h + 1.0;
    let (pr, dr) = legendre(xi);
    let (pz, dz) = legendre(ze);
    let n = s.ansatz.params.topo.frame(c.xh[0], c.xh[1]).map(|f| f.grad).unwrap_or([1.0, 0.0]);
    let mut out = Vec::with_capacity(MOD_DEG * MOD_DEG);
    for i in 0..MOD_DEG {
        for j in 0..MOD_DEG {
            let gr = dr[i] * 2.0 / (r1 - r0) * pz[j];
            let gz = pr[i] * dz[j] * 2.0 / h;
            out.push([gr * n[0], gr * n[1], gz]);
        }
    }
    out
}

fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = if i == j { s.max(1e-300).sqrt() } else { s / l[j * n + j] };
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// `min_q ‖E − ∇q‖_{L²}(t)` over the polynomial space in `(ρ, z)`.
fn residual_mod_gradients(s: &Setup) -> Result<Vec<f64>> {
    let nb = MOD_DEG * MOD_DEG;
    // Gram matrix, independent of t
    let grams = s.quad.map_columns(|c| {
        let mut g = vec![0.0; nb * nb];
        for (&z, &w) in c.z.nodes.iter().zip(&c.z.weights) {
            let b = basis_gradients(s, c, z);
            for i in 0..nb {
                for j in 0..=i {
                    g[i * nb + j] += c.weight * w * (b[i][0] * b[j][0] + b[i][1] * b[j][1] + b[i][2] * b[j][2]);
                }
            }
        }
        Ok(g)
    })?;
    let mut gram = vec![0.0; nb * nb];
    for g in &grams {
        for (a, b) in gram.iter_mut().zip(g) {
            *a += b;
        }
    }
    for i in 0..nb {
        for j in 0..i {
            gram[j * nb + i] = gram[i * nb + j];
        }
    }
    let ridge = 1e-12 * (0..nb).map(|i| gram[i * nb + i]).sum::<f64>() / nb as f64;
    for i in 0..nb {
        gram[i * nb + i] += ridge;
    }
    let mut out = Vec::with_capacity(s.times.len());
    for &t in &s.times {
        let fields = s.quad.map_columns(|c| {
            let col = s.column_jet(t, c)?;
            Ok(c.z
                .nodes
                .iter()
                .map(|&z| residual_in_column(&col, &col.layer(Jet::var(2, z)), TermSet::all()))
                .collect::<Vec<Vec3>>())
        })?;
        let rhs_parts = par::map_range(s.quad.columns.len(), |ci| {
            let c = &s.quad.columns[ci];
            let mut r = vec![0.0; nb];
            for (k, (&z, &w)) in c.z.nodes.iter().zip(&c.z.weights).enumerate() {
                let e = fields[ci][k];
                for (i, g) in basis_gradients(s, c, z).iter().enumerate() {
                    r[i] += c.weight * w * (e[0] * g[0] + e[1] * g[1] + e[2] * g[2]);
                }
            }
            r
        });
        let mut rhs = vec![0.0; nb];
        for r in &rhs_parts {
            for (a, b) in rhs.iter_mut().zip(r) {
                *a += b;
            }
        }
        let coef = cholesky_solve(&gram, &rhs, nb);
        let parts = par::map_range(s.quad.columns.len(), |ci| {
            let c = &s.quad.columns[ci];
            let mut acc = 0.0;
            for (k, (&z, &w)) in c.z.nodes.iter().zip(&c.z.weights).enumerate() {
                let mut e = fields[ci][k];
                for (cf, g) in coef.iter().zip(basis_gradients(s, c, z)) {
                    for d in 0..3 {
                        e[d] -= cf * g[d];
                    }
                }
                acc += w * norm2_f(e);
            }
            c.weight * acc
        });
        out.push(par::ordered_sum(&parts).max(0.0).sqrt());
    }
    Ok(out)
}

/// Runs one study over the configured epsilons.
pub fn run_study(kind: StudyKind, base: &AnsatzParams, cfg: &StudyConfig) -> Result<StudyTable> {
    let mut rows = Vec::with_capacity(cfg.epsilons.len());
    let mut t_grid = Vec::new();
    for &eps in &cfg.epsilons {
        let p = base.with_eps(eps);
        let m = measure(kind, &p, &cfg.quad, cfg.n_t)?;
        let mut extra = m.extra;
        let mut stderr = 0.0;
        if cfg.refine {
            let r = measure(kind, &p, &cfg.quad.refined(), cfg.n_t)?;
            stderr = (r.value - m.value).abs();
            extra.push(("quad_change".to_string(), stderr / m.value.abs().max(1e-300)));
        }
        if t_grid.is_empty() {
            let l = p.topo.lambda_flat();
            t_grid = time_grid(cfg.quad.t_star_factor / l, cfg.n_t);
        }
        rows.push(StudyRow {
            epsilon: eps,
            value: m.value,
            stderr,
            extra,
        });
    }
    StudyTable::new(kind.name(), rows, t_grid)
}

/// Log-log fit of a named extra column of a table.
pub fn fit_extra(table: &StudyTable, key: &str) -> Result<LogLogFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for r in &table.rows {
        if let Some((_, v)) = r.extra.iter().find(|(k, _)| k == key) {
            x.push(r.epsilon);
            y.push(*v);
        }
    }
    fit_loglog(&x, &y)
}

/// Extra value of one row.
pub fn extra(row: &StudyRow, key: &str) -> Option<f64> {
    row.extra.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexShore, DepthFamily, DepthProfile, Topography};
    use crate::profiles::{InitialSwirl, SwirlFamily};

    fn params() -> AnsatzParams {
        let topo = Topography::new(
            ConvexShore::disk(1.0).unwrap(),
            DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap(),
            0.5,
        )
        .unwrap();
        let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
        AnsatzParams::new(topo, 0.1, 0.75, data).unwrap()
    }

    #[test]
    fn legendre_derivatives_match_differences() {
        let x = 0.37;
        let (_, d) = legendre(x);
        let h = 1e-6;
        let (p1, _) = legendre(x + h);
        let (p0, _) = legendre(x - h);
        for n in 0..MOD_DEG {
            assert!(((p1[n] - p0[n]) / (2.0 * h) - d[n]).abs() < 1e-6);
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        let y = cholesky_solve(&a, &b, 3);
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_rate_of_exponential() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| 2.0 * (-0.3 * t).exp()).collect();
        assert!((tail_rate(&t, &v).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn limit_is_reached_at_t_zero_away_from_layers() {
        let s = Setup::new(&params(), &QuadConfig::default(), 4).unwrap();
        assert_eq!(s.times[0], 0.0);
        assert!(s.quad.columns.len() >= 192);
    }
}
