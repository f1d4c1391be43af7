//! Building, initialising and running the solver, with diagnostics
//! against the limit profile and the approximate solution.

use serde::{Deserialize, Serialize};

use super::grid::{Grid2D, GridSpec};
use super::step::{SolverState, Stepper};
use crate::error::{Error, Result};
use crate::par;
use crate::profiles::{Ansatz, AnsatzParams, TermSet};
use crate::verify::fit::{StudyRow, StudyTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nr: usize,
    pub nz: usize,
    /// Defaults to `0.1 ε`.
    pub dt: Option<f64>,
    pub tmax: f64,
    pub nonlinear: bool,
    /// Outer wall radius; defaults to the data support plus a margin.
    pub rout: Option<f64>,
    /// The inner wall stands where `φ = wall_factor · ε^{1-a}`.
    pub wall_factor: f64,
    pub stretch: f64,
    /// Number of diagnostic samples after `t = 0`.
    pub n_out: usize,
    pub pcg_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nr: 192,
            nz: 160,
            dt: None,
            tmax: 8.0,
            nonlinear: false,
            rout: None,
            wall_factor: 2.0,
            stretch: 2.0,
            n_out: 80,
            pcg_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn dt(&self, eps: f64) -> f64 {
        self.dt.unwrap_or(0.1 * eps)
    }

    pub fn grid_spec(&self, params: &AnsatzParams) -> Result<GridSpec> {
        let depth = &params.topo.depth;
        let target = self.wall_factor * params.cutoff_scale();
        let rho_min = depth.rho_at_depth(target).ok_or_else(|| {
            Error::Config(format!(
                "the depth never reaches {target} (wall_factor · eps^(1-a)); lower solver.wall_factor or eps"
            ))
        })?;
        let rho_out = match self.rout {
            Some(r) => r - params.topo.shore.length() / (2.0 * std::f64::consts::PI),
            None => {
                let d = &params.data;
                d.support_end(depth.rho0).min(d.center.max(depth.rho0) + 4.5 * d.width) + 1.0
            }
        };
        Ok(GridSpec {
            nr: self.nr,
            nz: self.nz,
            rho_min,
            rho_out,
            stretch: self.stretch,
        })
    }
}

/// Diagnostics at one sample time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub energy: f64,
    /// Cumulative `εβ ∫₀ᵗ ∫|∇u|²`.
    pub dissipation: f64,
    /// `‖u - ū‖ / ‖u₀‖`.
    pub err_vs_limit: f64,
    /// `‖u - U_app‖ / ‖u₀‖`.
    pub err_vs_ansatz: f64,
    /// `½‖u - U_app‖² + βε ∫₀ᵗ ‖∇(u - U_app)‖²`, trapezoidal in time.
    pub energy_gap: f64,
    pub divergence: f64,
    /// Volume-weighted column means of `u_θ` at the interior radial faces.
    pub column_means: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub eps: f64,
    pub dt: f64,
    pub grid: GridSpec,
    pub rho_faces: Vec<f64>,
    pub samples: Vec<Sample>,
    /// Steps whose energy change exceeded the dissipation by more than
    /// `1e-8` relative.
    pub inequality_violations: usize,
    pub worst_inequality_excess: f64,
    pub steps: usize,
    pub max_pcg_iterations: usize,
    pub norm_u0: f64,
    pub snapshots: Vec<SolverState>,
}

/// Reference fields sampled on the solver nodes.
struct Reference {
    ur: Vec<f64>,
    ut: Vec<f64>,
    uz: Vec<f64>,
    limit: Vec<f64>,
}

fn reference(st: &Stepper, an: &Ansatz, t: f64) -> Result<Reference> {
    let g = &st.grid;
    let all = TermSet::all();
    let faces: Vec<usize> = (1..g.nr).collect();
    let cols_u = par::map(&faces, |&i| -> Result<(Vec<[f64; 3]>, f64)> {
        let rho = g.rho_f[i];
        let col = an.column(t, g.r(rho), 0.0, Some((0.0, 0.0)))?;
        let v = (0..g.nz)
            .map(|j| col.frame_velocity(&col.layer(g.u_pos(i, j).1), all, false))
            .collect();
        Ok((v, an.limit_theta(t, rho)?))
    });
    let cells: Vec<usize> = (0..g.nr).collect();
    let cols_w = par::map(&cells, |&i| -> Result<Vec<f64>> {
        let col = an.column(t, g.r(g.rho_c[i]), 0.0, Some((0.0, 0.0)))?;
        Ok((1..g.nz)
            .map(|j| col.frame_velocity(&col.layer(g.w_pos(i, j).1), all, false)[2])
            .collect())
    });
    let mut r = Reference {
        ur: Vec::with_capacity(g.n_u()),
        ut: Vec::with_capacity(g.n_u()),
        uz: Vec::with_capacity(g.n_w()),
        limit: Vec::with_capacity(g.n_u()),
    };
    for c in cols_u {
        let (v, lim) = c?;
        for x in v {
            r.ur.push(x[0]);
            r.ut.push(x[1]);
            r.limit.push(lim);
        }
    }
    for c in cols_w {
        r.uz.extend(c?);
    }
    Ok(r)
}

/// Solver plus the evaluator it is compared against.
pub struct Run {
    pub stepper: Stepper,
    pub ansatz: Ansatz,
    pub config: SolverConfig,
}

impl Run {
    pub fn new(params: &AnsatzParams, cfg: &SolverConfig) -> Result<Self> {
        let spec = cfg.grid_spec(params)?;
        let grid = Grid2D::new(&params.topo, &spec)?;
        let need = params.layer() / 4.0;
        if grid.max_wall_spacing() > need {
            let d0 = grid.sig_f[1] - grid.sig_f[0];
            let hint = (cfg.nz as f64 * grid.max_wall_spacing() / need).ceil() as usize;
            return Err(Error::Config(format!(
                "Ekman layer under-resolved: wall cell {:.3e} > sqrt(E)/4 = {need:.3e} \
                 (sigma step {d0:.2e}); raise solver.nz to about {hint} or the stretch",
                grid.max_wall_spacing()
            )));
        }
        let stepper = Stepper::new(
            grid,
            params.eps,
            params.topo.beta,
            cfg.dt(params.eps),
            cfg.nonlinear,
            cfg.pcg_tol,
        )?;
        Ok(Run {
            stepper,
            ansatz: Ansatz::new(params.clone())?,
            config: cfg.clone(),
        })
    }

    /// Well-prepared data `u₀^θ ∇⊥ρ` with the balancing pressure.
    pub fn init(&self) -> Result<SolverState> {
        let g = &self.stepper.grid;
        let p = &self.ansatz.params;
        let mut ut = vec![0.0; g.n_u()];
        for i in 1..g.nr {
            let rho = g.rho_f[i];
            let u0 = p.data.u0(rho, g.phi_f[i], p.topo.depth.rho0);
            for j in 0..g.nz {
                ut[g.u_idx(i, j)] = u0;
            }
        }
        let mut s = SolverState {
            t: 0.0,
            ur: vec![0.0; g.n_u()],
            ut,
            uz: vec![0.0; g.n_w()],
            p: vec![],
        };
        s.p = self.stepper.balanced_pressure(&s)?;
        Ok(s)
    }

    fn column_means(&self, s: &SolverState) -> Vec<f64> {
        let g = &self.stepper.grid;
        (1..g.nr)
            .map(|i| {
                let (mut a, mut w) = (0.0, 0.0);
                for j in 0..g.nz {
                    let k = g.u_idx(i, j);
                    a += g.mass_u[k] * s.ut[k];
                    w += g.mass_u[k];
                }
                a / w
            })
            .collect()
    }

    /// Squared errors against the limit and the ansatz, and `‖∇(u - U_app)‖²`.
    fn errors(&self, s: &SolverState) -> Result<(f64, f64, f64)> {
        let st = &self.stepper;
        let g = &st.grid;
        let r = reference(st, &self.ansatz, s.t)?;
        let mut lim = 0.0;
        let mut app = 0.0;
        let dr: Vec<f64> = s.ur.iter().zip(&r.ur).map(|(a, b)| a - b).collect();
        let dt: Vec<f64> = s.ut.iter().zip(&r.ut).map(|(a, b)| a - b).collect();
        let dz: Vec<f64> = s.uz.iter().zip(&r.uz).map(|(a, b)| a - b).collect();
        for k in 0..g.n_u() {
            let m = g.mass_u[k];
            lim += m * (s.ur[k].powi(2) + (s.ut[k] - r.limit[k]).powi(2));
            app += m * (dr[k] * dr[k] + dt[k] * dt[k]);
        }
        for k in 0..g.n_w() {
            let m = g.mass_w[k];
            lim += m * s.uz[k].powi(2);
            app += m * dz[k] * dz[k];
        }
        Ok((lim, app, st.grad_sq(&dr, &dt, &dz)))
    }

    /// Steps to `tmax`, sampling diagnostics `n_out` times. With
    /// `keep_snapshots` the states at the sample times are retained.
    pub fn run(&self, keep_snapshots: bool) -> Result<Trajectory> {
        let st = &self.stepper;
        let cfg = &self.config;
        let n_steps = (cfg.tmax / st.dt).round().max(1.0) as usize;
        let every = (n_steps / cfg.n_out.max(1)).max(1);
        let mut s = self.init()?;
        let e0 = st.energy(&s);
        let norm_u0 = (2.0 * e0).sqrt();
        let mut traj = Trajectory {
            eps: st.eps,
            dt: st.dt,
            grid: cfg.grid_spec(&self.ansatz.params)?,
            rho_faces: st.grid.rho_f[1..st.grid.nr].to_vec(),
            samples: vec![],
            inequality_violations: 0,
            worst_inequality_excess: f64::NEG_INFINITY,
            steps: 0,
            max_pcg_iterations: 0,
            norm_u0,
            snapshots: vec![],
        };
        let mut dissipation = 0.0;
        let mut gap_integral = 0.0;
        let mut last_grad: Option<(f64, f64)> = None;
        let mut sample = |s: &SolverState, dissipation: f64, traj: &mut Trajectory| -> Result<()> {
            let (lim, app, grad) = self.errors(s)?;
            if let Some((t0, g0)) = last_grad {
                gap_integral += 0.5 * (s.t - t0) * (g0 + grad);
            }
            last_grad = Some((s.t, grad));
            traj.samples.push(Sample {
                t: s.t,
                energy: st.energy(s),
                dissipation,
                err_vs_limit: lim.sqrt() / norm_u0,
                err_vs_ansatz: app.sqrt() / norm_u0,
                energy_gap: 0.5 * app + st.nu * gap_integral,
                divergence: st.divergence(s),
                column_means: self.column_means(s),
            });
            if keep_snapshots {
                traj.snapshots.push(s.clone());
            }
            Ok(())
        };
        sample(&s, 0.0, &mut traj)?;
        for n in 1..=n_steps {
            let rep = st.step(&mut s)?;
            dissipation += rep.dissipation;
            let excess = rep.inequality_excess();
            traj.worst_inequality_excess = traj.worst_inequality_excess.max(excess);
            if excess > 1e-8 {
                traj.inequality_violations += 1;
            }
            let growth = (rep.energy_after - rep.energy_before) / rep.energy_before.max(f64::MIN_POSITIVE);
            if growth > 1e-6 {
                return Err(Error::Instability { step: n, growth });
            }
            traj.max_pcg_iterations = traj.max_pcg_iterations.max(rep.pcg.iterations);
            traj.steps = n;
            if n % every == 0 || n == n_steps {
                sample(&s, dissipation, &mut traj)?;
            }
        }
        Ok(traj)
    }
}

/// Least-squares decay rate of `v(t)` over `t ∈ [t0, t1]`.
pub fn decay_rate(t: &[f64], v: &[f64], t0: f64, t1: f64) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(v)
        .filter(|(t, v)| **t >= t0 && **t <= t1 && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    if x.len() < 3 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(-sxy / sxx)
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Decay rate of the column mean of `u_θ` at the face nearest `rho`.
    pub fn local_decay(&self, rho: f64, t0: f64, t1: f64) -> Option<f64> {
        let k = self
            .rho_faces
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - rho).abs().total_cmp(&(b.1 - rho).abs()))?
            .0;
        let v: Vec<f64> = self.samples.iter().map(|s| s.column_means[k]).collect();
        decay_rate(&self.times(), &v, t0, t1)
    }

    /// Decay rate of the mean of `u_θ` over faces with `ρ ∈ [a, b]`
    /// (uniform radial spacing, so a plain mean of column means weighted by
    /// radius and depth is the volume mean).
    pub fn band_decay(&self, rho_a: f64, rho_b: f64, weights: &[f64], t0: f64, t1: f64) -> Option<f64> {
        let idx: Vec<usize> = (0..self.rho_faces.len())
            .filter(|&k| self.rho_faces[k] >= rho_a && self.rho_faces[k] <= rho_b)
            .collect();
        if idx.is_empty() {
            return None;
        }
        let v: Vec<f64> = self
            .samples
            .iter()
            .map(|s| idx.iter().map(|&k| weights[k] * s.column_means[k]).sum::<f64>())
            .collect();
        decay_rate(&self.times(), &v, t0, t1)
    }

    pub fn sup_err_vs_limit(&self, t_from: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t >= t_from)
            .map(|s| s.err_vs_limit)
            .fold(0.0, f64::max)
    }

    pub fn sup_err_vs_ansatz(&self, t_from: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t >= t_from)
            .map(|s| s.err_vs_ansatz)
            .fold(0.0, f64::max)
    }
}

impl Run {
    /// Column weights `r φ` at the interior faces, for band means.
    pub fn face_weights(&self) -> Vec<f64> {
        let g = &self.stepper.grid;
        (1..g.nr).map(|i| g.r(g.rho_f[i]) * g.phi_f[i]).collect()
    }
}

/// Sup-in-time relative errors per ε, as a table against ε.
pub fn compare(base: &AnsatzParams, epsilons: &[f64], cfg: &SolverConfig) -> Result<(StudyTable, Vec<Trajectory>)> {
    let mut rows = Vec::new();
    let mut trajs = Vec::new();
    for &eps in epsilons {
        let p = base.with_eps(eps);
        let run = Run::new(&p, cfg)?;
        let traj = run.run(false)?;
        let early = 0.1 / p.topo.lambda_flat();
        rows.push(StudyRow {
            epsilon: eps,
            value: traj.sup_err_vs_limit(0.0),
            stderr: 0.0,
            extra: vec![
                ("err_vs_ansatz".to_string(), traj.sup_err_vs_ansatz(0.0)),
                ("err_vs_limit_late".to_string(), traj.sup_err_vs_limit(early)),
                ("err_vs_ansatz_late".to_string(), traj.sup_err_vs_ansatz(early)),
                ("inequality_violations".to_string(), traj.inequality_violations as f64),
            ],
        });
        trajs.push(traj);
    }
    let t_grid = trajs.first().map(|t| t.times()).unwrap_or_default();
    Ok((StudyTable::new("solver_compare", rows, t_grid)?, trajs))
}

/// True when the values decrease strictly along the table.
pub fn is_monotone_decreasing(table: &StudyTable) -> bool {
    table.rows.windows(2).all(|w| w[1].value < w[0].value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::norms::{DomainQuadrature, LayerScales, QuadConfig};
    use crate::geometry::{DepthFamily, Topography};
    use crate::profiles::{InitialSwirl, SwirlFamily};
    use crate::solver::grid::tests::topo;

    fn params(eps: f64) -> AnsatzParams {
        let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
        AnsatzParams::new(topo(DepthFamily::Exp), eps, 0.75, data).unwrap()
    }

    fn small(tmax: f64) -> SolverConfig {
        SolverConfig {
            nr: 48,
            nz: 64,
            tmax,
            n_out: 10,
            ..Default::default()
        }
    }

    fn calculus_energy(p: &AnsatzParams) -> f64 {
        let t: &Topography = &p.topo;
        let scales = LayerScales {
            layer: p.layer(),
            cutoff: p.cutoff_scale(),
        };
        let end = p.data.support_end(t.depth.rho0);
        let q = DomainQuadrature::new(t, scales, end, &[], &QuadConfig::default()).unwrap();
        let rho0 = t.depth.rho0;
        let n = q
            .norm_l2(|c, _| Ok(p.data.u0(c.rho, c.phi, rho0).powi(2)))
            .unwrap();
        0.5 * n * n
    }

    #[test]
    fn initial_energy_matches_the_quadrature_norm() {
        let p = params(0.1);
        let run = Run::new(&p, &SolverConfig { nr: 96, ..small(1.0) }).unwrap();
        let s = run.init().unwrap();
        let e = run.stepper.energy(&s);
        let reference = calculus_energy(&p);
        assert!(((e - reference) / reference).abs() < 0.005, "{e} vs {reference}");
        assert!(run.stepper.divergence(&s) <= 1e-10);
        assert!(s.ur.iter().chain(&s.uz).all(|v| *v == 0.0));
    }

    #[test]
    fn under_resolved_layer_is_rejected_with_a_hint() {
        let err = Run::new(&params(0.05), &SolverConfig { nz: 8, ..small(1.0) }).err().unwrap();
        assert!(matches!(err, Error::Config(ref m) if m.contains("solver.nz")), "{err}");
    }

    #[test]
    fn short_run_keeps_the_energy_inequality() {
        let run = Run::new(&params(0.1), &small(0.5)).unwrap();
        let tr = run.run(true).unwrap();
        assert_eq!(tr.inequality_violations, 0);
        assert!(tr.worst_inequality_excess <= 1e-8);
        assert!(tr.max_pcg_iterations <= 5);
        assert_eq!(tr.snapshots.len(), tr.samples.len());
        assert!(tr.samples.iter().all(|s| s.divergence < 1e-9));
        // the energy gap starts at the discretisation error of the data
        assert!(tr.samples[0].err_vs_limit < 0.05);
        let e: Vec<f64> = tr.samples.iter().map(|s| s.energy).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        let last = tr.samples.last().unwrap();
        assert!(last.energy + last.dissipation <= e[0] * (1.0 + 1e-8));
    }

    #[test]
    fn decay_rate_recovers_an_exponential() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        assert!((decay_rate(&t, &v, 0.0, 2.0).unwrap() - 0.7).abs() < 1e-12);
        assert!(decay_rate(&t, &v, 5.0, 6.0).is_none());
    }
}
