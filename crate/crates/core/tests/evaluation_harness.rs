use fuelcast_core::backtest::Oracle;
use fuelcast_core::tune::{validation_mse, VALIDATION_HORIZON};
use fuelcast_core::{
    fit_sarimax, grid_search, walk_forward, DailySeries, ExogTable, FittedModel, ForecastResult, MetricSet,
    ModelSpec, Result, SarimaxSpec, SeasonalNaive, SplitIndex,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Forecasts the truth shifted by a constant, so its MSE is `offset^2`.
#[derive(Clone)]
struct Shifted {
    name: &'static str,
    offset: f64,
    truth: DailySeries,
}

impl FittedModel for Shifted {
    fn forecast(&self, history: &DailySeries, exog: &ExogTable, horizon: usize, alpha: f64) -> Result<ForecastResult> {
        let exact = Oracle { truth: self.truth.clone() }.forecast(history, exog, horizon, alpha)?;
        Ok(ForecastResult::point(exact.mean.iter().map(|v| v + self.offset).collect()))
    }
}

impl ModelSpec for Shifted {
    fn label(&self) -> String {
        self.name.into()
    }

    fn fit(&self, _train: &DailySeries, _seed: u64) -> Result<Box<dyn FittedModel>> {
        Ok(Box::new(self.clone()))
    }
}

fn wave(n: usize) -> DailySeries {
    DailySeries::from_values((0..n).map(|t| 20.0 + (t as f64 * 0.9).sin() * 3.0 + (t % 7) as f64).collect()).unwrap()
}

fn noisy_wave(n: usize) -> DailySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let w = wave(n);
    let noisy = w.values().iter().map(|v| v + rng.sample::<f64, _>(StandardNormal)).collect();
    w.with_values(noisy).unwrap()
}

fn shifted(name: &'static str, offset: f64, truth: &DailySeries) -> Shifted {
    Shifted { name, offset, truth: truth.clone() }
}

#[test]
fn lower_validation_mse_wins() {
    let s = wave(300);
    let split = SplitIndex::new(210, 300, 300).unwrap();
    let grid = [shifted("B", 2f64.sqrt(), &s), shifted("A", 1.0, &s)];
    let r = grid_search(&grid, &s, split, 0, 1, 0.05).unwrap();
    assert_eq!(r.cells[r.winner].label, "A");
    assert!((r.winner_mse() - 1.0).abs() < 1e-12);
    assert!((r.cells[0].outcome.clone().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn ties_go_to_the_earlier_configuration() {
    let s = wave(300);
    let split = SplitIndex::new(210, 300, 300).unwrap();
    let grid = [shifted("first", 1.0, &s), shifted("second", -1.0, &s)];
    let r = grid_search(&grid, &s, split, 0, 2, 0.05).unwrap();
    assert_eq!(r.winner, 0);
}

#[test]
fn invalid_cell_is_recorded_and_search_completes() {
    let s = wave(120);
    let split = SplitIndex::new(90, 120, 120).unwrap();
    let grid = [
        SarimaxSpec::new(3, 1, 3).seasonal(3, 1, 3, 7),
        SarimaxSpec::new(0, 0, 0).seasonal(0, 1, 0, 7),
    ];
    let r = grid_search(&grid, &s, split, 0, 1, 0.05).unwrap();
    assert_eq!(r.failures(), 1);
    assert!(r.cells[0].outcome.is_err());
    assert_eq!(r.winner, 1);
    assert!(r.table().lines().nth(1).unwrap().contains("needs at least"));
}

#[test]
fn all_failures_are_reported_together() {
    let s = wave(60);
    let split = SplitIndex::new(40, 60, 60).unwrap();
    let grid = [SarimaxSpec::new(3, 1, 3).seasonal(3, 1, 3, 7)];
    let err = grid_search(&grid, &s, split, 0, 1, 0.05).unwrap_err();
    assert!(err.to_string().contains("all 1 configurations failed"));
}

#[test]
fn parallel_and_serial_searches_agree() {
    let s = noisy_wave(300);
    let split = SplitIndex::new(210, 300, 300).unwrap();
    let grid: Vec<SarimaxSpec> = (0..=2).map(|p| SarimaxSpec::new(p, 0, 1).seasonal(1, 0, 0, 7)).collect();
    let a = grid_search(&grid, &s, split, 0, 1, 0.05).unwrap();
    let b = grid_search(&grid, &s, split, 0, 3, 0.05).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validation_rolls_thirty_day_blocks() {
    // The oracle scores zero only if every block is read at the right origin.
    let s = wave(300);
    let split = SplitIndex::new(205, 300, 300).unwrap();
    let mse = validation_mse(&Oracle { truth: s.clone() }, &s, split, VALIDATION_HORIZON, 0, 0.05).unwrap();
    assert_eq!(mse, 0.0);
}

#[test]
fn one_fold_equals_plain_holdout() {
    let s = noisy_wave(400);
    let spec = SarimaxSpec::new(1, 0, 0).seasonal(1, 0, 0, 7);
    let r = walk_forward(&spec, &s, 90, 90, 0, 0.05).unwrap();
    let train = s.slice(0, 310).unwrap();
    let f = fit_sarimax(&train, &spec).unwrap().forecast(90, &ExogTable::new(), 0.05).unwrap();
    let m = MetricSet::compute(&s.values()[310..], &f.mean).unwrap();
    assert_eq!(r.folds.len(), 1);
    assert_eq!(r.pooled, m);
    assert_eq!(r.folds[0].forecast, f);
}

#[test]
fn oracle_and_naive_protocol() {
    let s = wave(400);
    let r = walk_forward(&Oracle { truth: s.clone() }, &s, 90, 30, 0, 0.05).unwrap();
    assert_eq!(r.folds.len(), 3);
    assert_eq!(r.pooled, MetricSet { rmse: 0.0, mae: 0.0, smape: 0.0 });
    for w in r.folds.windows(2) {
        assert_eq!(w[0].start + 30, w[1].start);
    }
    let periodic = DailySeries::from_values((0..200).map(|t| [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0][t % 7]).collect()).unwrap();
    let n = walk_forward(&SeasonalNaive::new(7), &periodic, 90, 30, 0, 0.05).unwrap();
    assert_eq!(n.pooled.rmse, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn winner_is_invariant_to_grid_order(
        offsets in prop::collection::hash_set(1u32..1000, 2..8),
        rotate in 0usize..8,
    ) {
        let s = wave(260);
        let split = SplitIndex::new(200, 260, 260).unwrap();
        let offsets: Vec<f64> = offsets.into_iter().map(|o| o as f64 / 100.0).collect();
        let grid: Vec<Shifted> = offsets.iter().map(|o| shifted("cell", *o, &s)).collect();
        let mut turned = grid.clone();
        turned.rotate_left(rotate % grid.len());
        turned.reverse();
        let a = grid_search(&grid, &s, split, 0, 1, 0.05).unwrap();
        let b = grid_search(&turned, &s, split, 0, 1, 0.05).unwrap();
        prop_assert_eq!(grid[a.winner].offset, turned[b.winner].offset);
        prop_assert_eq!(a.winner_mse(), b.winner_mse());
    }
}
