use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpl_core::{build_cost_vector, ForecastSpec, Method};

fn forecasts(c: &mut Criterion) {
    let Some(panel) = fpl_bench::season_panel() else { return };
    let mut g = c.benchmark_group("cost_vector_gw27");
    g.sample_size(10);
    let specs = [
        ForecastSpec::new(Method::SimpleAvg),
        ForecastSpec::new(Method::WeightedAvg),
        ForecastSpec::new(Method::MonteCarlo),
        ForecastSpec::arima(1, 0, 0),
        ForecastSpec::hybrid(0.5),
        ForecastSpec::new(Method::IctSurrogate),
    ];
    for spec in specs {
        g.bench_with_input(BenchmarkId::from_parameter(spec.key()), &spec, |b, s| {
            b.iter(|| build_cost_vector(&panel, s, 27).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, forecasts);
criterion_main!(benches);
