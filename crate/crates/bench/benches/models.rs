use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fuelcast_bench::fixture;
use fuelcast_core::lstm::{loss_and_gradient, window_pairs};
use fuelcast_core::tune::validation_mse;
use fuelcast_core::{
    fit_decomposable, fit_sarimax, walk_forward, DecomposableSpec, ExogTable, LstmParams, LstmSpec, SarimaxSpec,
    Scaler, SeasonalNaive, SplitIndex,
};

/// Deterministic small weights, spread by the golden ratio.
fn spread_weights(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i as f64 * 0.618_033_988_75).fract() - 0.5) * 0.4).collect()
}

fn sarimax(c: &mut Criterion) {
    let series = fixture(730);
    let sarima = SarimaxSpec::new(1, 0, 1).seasonal(1, 0, 1, 7);
    let sarimax = sarima.clone().with_exog(["schedule"]);
    c.bench_function("sarima_fit_730d", |b| b.iter(|| fit_sarimax(black_box(&series), &sarima).unwrap()));
    c.bench_function("sarimax_fit_730d", |b| b.iter(|| fit_sarimax(black_box(&series), &sarimax).unwrap()));
    let fit = fit_sarimax(&series, &sarima).unwrap();
    c.bench_function("sarima_forecast_30d", |b| b.iter(|| fit.forecast(30, &ExogTable::new(), 0.05).unwrap()));
}

fn decomposable(c: &mut Criterion) {
    let series = fixture(730);
    let spec = DecomposableSpec::default();
    c.bench_function("decomposable_fit_730d", |b| b.iter(|| fit_decomposable(black_box(&series), &spec).unwrap()));
}

fn lstm(c: &mut Criterion) {
    let series = fixture(400);
    let spec = LstmSpec::new(28, 16, 1, 30);
    let params = LstmParams::from_values(spec.shape(), spread_weights(spec.shape().n_params())).unwrap();
    let scaled = Scaler::fit(series.values()).unwrap().apply(series.values());
    let samples = window_pairs(&scaled, &[], spec.window, spec.horizon);
    let batch = &samples[..32];
    c.bench_function("lstm_gradient_batch32", |b| b.iter(|| loss_and_gradient(&params, black_box(batch)).unwrap()));
}

fn evaluation(c: &mut Criterion) {
    let series = fixture(730);
    let spec = SarimaxSpec::new(1, 0, 0).seasonal(1, 0, 0, 7);
    let split = SplitIndex::from_tail(series.len(), 90, 90).unwrap();
    c.bench_function("grid_cell_validation", |b| {
        b.iter(|| validation_mse(&spec, black_box(&series), split, 30, 0, 0.05).unwrap())
    });
    c.bench_function("walk_forward_naive_90d", |b| {
        b.iter(|| walk_forward(&SeasonalNaive::new(7), black_box(&series), 90, 30, 0, 0.05).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sarimax, decomposable, lstm, evaluation
}
criterion_main!(benches);
