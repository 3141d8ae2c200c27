//! Criterion benchmarks for the hot kernels: scheme construction, the dense
//! eigensolver, Nelder-Mead, SDC stepping, and the diagonalization solvers.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use parasdc::collocation::{radau_right_scheme, PrecondKind};
use parasdc::linalg::eigendecompose;
use parasdc::minimizer::{
    canonical_min_starts, landscape_scan, nelder_mead, penalized_objective, NM_DEFAULT_MAX_ITER,
    NM_DEFAULT_TOL,
};
use parasdc::problems::{HeatProblem, KppProblem, Problem};
use parasdc::solvers::{linear_direct_solve, newton_simplified, QDiagonalization};
use parasdc::study::{self, RatesConfig};
use parasdc::sweeper::{preconditioner_for, solve_step};
use parasdc::{NewtonConfig, NewtonVariant, SweepConfig};

fn bench_collocation(c: &mut Criterion) {
    let mut g = c.benchmark_group("collocation");
    for m in [3usize, 5, 9] {
        g.bench_function(format!("radau_scheme_m{m}"), |b| {
            b.iter(|| radau_right_scheme(black_box(m)).unwrap())
        });
    }
    let scheme = radau_right_scheme(5).unwrap();
    g.bench_function("eigendecompose_q_m5", |b| {
        b.iter(|| eigendecompose(black_box(scheme.q())).unwrap())
    });
    g.finish();
}

fn bench_minimizer(c: &mut Criterion) {
    let mut g = c.benchmark_group("minimizer");
    let scheme = radau_right_scheme(2).unwrap();
    let [start, _] = canonical_min_starts(2);
    g.bench_function("nelder_mead_m2", |b| {
        b.iter(|| {
            nelder_mead(
                |q| penalized_objective(&scheme, q),
                black_box(&start),
                NM_DEFAULT_TOL,
                NM_DEFAULT_MAX_ITER,
            )
        })
    });
    g.bench_function("landscape_scan_41x41", |b| {
        b.iter(|| landscape_scan(&scheme, (1e-3, 8.0), (1e-3, 13.0), (41, 41), 1))
    });
    g.finish();
}

fn bench_sweeper(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweeper");
    let scheme = radau_right_scheme(3).unwrap();
    let problem = HeatProblem::new(1.0, 63);
    let u0 = problem.initial();
    let config = SweepConfig::default();
    for kind in [PrecondKind::LU, PrecondKind::Min] {
        let precond = preconditioner_for(&scheme, kind).unwrap();
        g.bench_function(format!("sdc_step_heat_n63_{kind}"), |b| {
            b.iter(|| {
                solve_step(
                    black_box(&problem),
                    &scheme,
                    &precond,
                    0.0,
                    0.1,
                    &u0,
                    &config,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn bench_solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solvers");
    let scheme = radau_right_scheme(5).unwrap();
    let diag = QDiagonalization::from_scheme(&scheme).unwrap();

    let heat = HeatProblem::new(1.0, 63);
    let u0 = heat.initial();
    g.bench_function("direct_solve_heat_n63_m5", |b| {
        b.iter(|| linear_direct_solve(black_box(&heat), &scheme, &diag, 0.0, 0.1, &u0, 1).unwrap())
    });

    let kpp = KppProblem::new(5.0, 63, 1).unwrap();
    let k0 = kpp.initial();
    let config = NewtonConfig {
        variant: NewtonVariant::SimplifiedNewton,
        ..NewtonConfig::default()
    };
    g.bench_function("simplified_newton_kpp_n63_m5", |b| {
        b.iter(|| {
            newton_simplified(black_box(&kpp), &scheme, &diag, 0.0, 0.05, &k0, &config).unwrap()
        })
    });
    g.finish();
}

fn bench_study(c: &mut Criterion) {
    let mut g = c.benchmark_group("study");
    g.sample_size(10);
    let config = RatesConfig {
        n: 63,
        steps_list: vec![2, 4],
        ..RatesConfig::default()
    };
    g.bench_function("convergence_rates_n63", |b| {
        b.iter(|| study::convergence_rates(black_box(&config)).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_collocation,
    bench_minimizer,
    bench_sweeper,
    bench_solvers,
    bench_study
);
criterion_main!(benches);
