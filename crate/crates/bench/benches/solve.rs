use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpl_core::backtest::{selection_problem, SelectionOptions};
use fpl_core::synth::synthetic_pool;
use fpl_core::{solve, ForecastSpec, Method, Price, SelectionProblem};

fn synthetic(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_synthetic");
    for size in [22usize, 60, 200] {
        let problem = SelectionProblem::new(synthetic_pool(7, size, 10), Price(835));
        g.bench_with_input(BenchmarkId::from_parameter(size), &problem, |b, p| b.iter(|| solve(p)));
    }
    g.finish();
}

fn season(c: &mut Criterion) {
    let Some(panel) = fpl_bench::season_panel() else { return };
    let spec = ForecastSpec::new(Method::WeightedAvg);
    let (problem, _) = selection_problem(&panel, &spec, 27, Price(835), &SelectionOptions::default()).unwrap();
    c.bench_function("solve_gw27_weighted_avg", |b| b.iter(|| solve(&problem).unwrap()));
    let mut robust = problem.clone();
    robust.robust = true;
    c.bench_function("solve_gw27_robust", |b| b.iter(|| solve(&robust).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = synthetic, season
}
criterion_main!(benches);
