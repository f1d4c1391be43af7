//! Hot kernels on one thread and on the full pool.
//!
//! With the `parallel` feature every kernel is timed twice: inside a
//! single-thread rayon pool (the sequential path) and inside the default
//! pool. Without the feature only the sequential path exists.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ekman::calculus::norms::{DomainQuadrature, LayerScales, QuadConfig};
use ekman::geometry::{ConvexShore, DepthFamily, DepthProfile, Topography};
use ekman::profiles::{AnsatzParams, InitialSwirl, SwirlFamily};
use ekman::solver::{Run, SolverConfig};
use ekman::verify::checks;

fn params(eps: f64) -> AnsatzParams {
    let depth = DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap();
    let topo = Topography::new(ConvexShore::disk(1.0).unwrap(), depth, 0.5).unwrap();
    let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
    AnsatzParams::new(topo, eps, 0.75, data).unwrap()
}

/// `(label, runner)` pairs: the runner executes a closure on its path.
fn paths() -> Vec<(String, Box<dyn Fn(&mut (dyn FnMut() + Send))>)> {
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let all = rayon::ThreadPoolBuilder::new().build().unwrap();
        let n = all.current_num_threads();
        vec![
            ("sequential".to_string(), Box::new(move |f: &mut (dyn FnMut() + Send)| one.install(|| f()))),
            (format!("parallel-{n}"), Box::new(move |f: &mut (dyn FnMut() + Send)| all.install(|| f()))),
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![("sequential".to_string(), Box::new(|f: &mut (dyn FnMut() + Send)| f()))]
    }
}

fn divergence_check(c: &mut Criterion) {
    let p = params(0.05);
    let mut g = c.benchmark_group("check_divergence_2000");
    g.sample_size(10);
    for (label, run) in paths() {
        g.bench_function(BenchmarkId::from_parameter(&label), |b| {
            b.iter(|| run(&mut || {
                black_box(checks::check_divergence(&p, 2000, 7).unwrap());
            }))
        });
    }
    g.finish();
}

fn domain_norm(c: &mut Criterion) {
    let p = params(0.05);
    let scales = LayerScales {
        layer: p.layer(),
        cutoff: p.cutoff_scale(),
    };
    let q = DomainQuadrature::new(&p.topo, scales, 14.0, &[], &QuadConfig::default()).unwrap();
    let rho0 = p.topo.depth.rho0;
    let mut g = c.benchmark_group("initial_norm_quadrature");
    for (label, run) in paths() {
        g.bench_function(BenchmarkId::from_parameter(&label), |b| {
            b.iter(|| run(&mut || {
                black_box(
                    q.norm_l2(|col, _| Ok(p.data.u0(col.rho, col.phi, rho0).powi(2)))
                        .unwrap(),
                );
            }))
        });
    }
    g.finish();
}

fn solver_step(c: &mut Criterion) {
    let p = params(0.1);
    let cfg = SolverConfig {
        nr: 96,
        nz: 96,
        ..Default::default()
    };
    let r = Run::new(&p, &cfg).unwrap();
    let s0 = r.init().unwrap();
    let mut g = c.benchmark_group("solver_step_96x96");
    g.sample_size(20);
    for (label, run) in paths() {
        g.bench_function(BenchmarkId::from_parameter(&label), |b| {
            let mut s = s0.clone();
            b.iter(|| run(&mut || {
                black_box(r.stepper.step(&mut s).unwrap());
            }))
        });
    }
    g.finish();
}

criterion_group!(benches, divergence_check, domain_norm, solver_step);
criterion_main!(benches);
