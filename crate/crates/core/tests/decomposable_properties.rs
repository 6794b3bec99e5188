use std::f64::consts::PI;

use fuelcast_core::{fit_decomposable, DailySeries, DecomposableSpec, ExogTable, HolidayCalendar};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn noise(n: usize, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, sd).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

fn weekly_sine(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let truth: Vec<f64> = (0..n).map(|t| 5.0 * (2.0 * PI * t as f64 / 7.0).sin()).collect();
    let y = truth.iter().zip(noise(n, 0.1, seed)).map(|(a, e)| a + e).collect();
    (truth, y)
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[test]
fn weekly_component_matches_sine() {
    let (truth, y) = weekly_sine(700, 3);
    let series = DailySeries::from_values(y).unwrap();
    let spec = DecomposableSpec::default().with_prior_scales(0.05, 100.0);
    let fit = fit_decomposable(&series, &spec).unwrap();
    let comps = fit.training_components(&series).unwrap();
    assert!(rmse(&comps.weekly, &truth) < 0.05, "{}", rmse(&comps.weekly, &truth));

    let f = fit.forecast(28, &ExogTable::new(), &HolidayCalendar::new(), 0.05).unwrap();
    let cont: Vec<f64> = (700..728).map(|t| 5.0 * (2.0 * PI * t as f64 / 7.0).sin()).collect();
    assert!(rmse(&f.mean, &cont) < 0.1);
    for h in 0..21 {
        assert!((f.mean[h] - f.mean[h + 7]).abs() < 0.01);
    }
}

fn two_slope() -> DailySeries {
    // 376 points with 3 changepoints puts one exactly at t = 200.
    let y: Vec<f64> = (0..376)
        .map(|t| if t < 200 { t as f64 } else { 400.0 - t as f64 })
        .collect();
    DailySeries::from_values(y).unwrap()
}

#[test]
fn rate_change_detected_and_shrunk() {
    let base = DecomposableSpec {
        n_changepoints: 3,
        ..DecomposableSpec::default()
    };
    let loose = fit_decomposable(&two_slope(), &base.clone().with_prior_scales(1000.0, 10.0)).unwrap();
    assert_eq!(loose.changepoint_times, vec![100, 200, 300]);
    assert!((loose.delta[1] + 2.0).abs() < 1e-3, "{:?}", loose.delta);
    assert!(loose.delta[0].abs() < 1e-3 && loose.delta[2].abs() < 1e-3);

    let tight = fit_decomposable(&two_slope(), &base.with_prior_scales(1e-4, 10.0)).unwrap();
    let l1 = |d: &[f64]| d.iter().map(|x| x.abs()).sum::<f64>();
    assert!(l1(&tight.delta) < 0.1 * l1(&loose.delta), "{:?}", tight.delta);
}

#[test]
fn exact_regressor_recovered() {
    let x: Vec<f64> = (0..300).map(|t| 10.0 + ((t * 7919) % 23) as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 4.0 * v).collect();
    let series = DailySeries::from_values(y).unwrap().with_exog("flights", x).unwrap();
    let spec = DecomposableSpec::default()
        .with_prior_scales(0.05, 1e4)
        .with_regressors(["flights"]);
    let fit = fit_decomposable(&series, &spec).unwrap();
    assert!((fit.regressors[0].1 - 4.0).abs() < 1e-3, "{:?}", fit.regressors);
}

#[test]
fn zero_regressor_matches_univariate() {
    let (_, y) = weekly_sine(300, 11);
    let series = DailySeries::from_values(y).unwrap();
    let with_zero = series.clone().with_exog("z", vec![0.0; 300]).unwrap();
    let uni = fit_decomposable(&series, &DecomposableSpec::default()).unwrap();
    let multi = fit_decomposable(&with_zero, &DecomposableSpec::default().with_regressors(["z"])).unwrap();
    assert!(multi.regressors.is_empty());
    assert_eq!(uni.fitted, multi.fitted);
    let fut = ExogTable::new().with_column("z", vec![0.0; 10]);
    let a = uni.forecast(10, &ExogTable::new(), &HolidayCalendar::new(), 0.05).unwrap();
    let b = multi.forecast(10, &fut, &HolidayCalendar::new(), 0.05).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noisy_regressor_coefficient() {
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sched = Normal::new(50.0, 5.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| sched.sample(&mut rng)).collect();
    let e = noise(n, 1.0, 22);
    let y: Vec<f64> = (0..n).map(|t| 100.0 + 0.05 * t as f64 + 2.0 * x[t] + e[t]).collect();
    let series = DailySeries::from_values(y).unwrap().with_exog("schedule", x).unwrap();
    let fit = fit_decomposable(&series, &DecomposableSpec::default().with_regressors(["schedule"])).unwrap();
    assert!((fit.regressors[0].1 - 2.0).abs() < 0.1, "{:?}", fit.regressors);
}

#[test]
fn unpenalized_limit_is_least_squares() {
    let (_, mut y) = weekly_sine(400, 5);
    for (t, v) in y.iter_mut().enumerate() {
        *v += 20.0 + 0.03 * t as f64;
    }
    let series = DailySeries::from_values(y.clone()).unwrap();
    let spec = DecomposableSpec {
        n_changepoints: 0,
        seasonality_prior_scale: 1e8,
        ..DecomposableSpec::default()
    };
    let fit = fit_decomposable(&series, &spec).unwrap();

    // Oracle: least squares on [1, t, sin/cos(2 pi k d / 7)], d = days since 1970-01-01.
    let d0 = (series.start_date() - chrono::NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()).num_days() as f64;
    let x = DMatrix::from_fn(400, 8, |t, j| {
        let d = d0 + t as f64;
        match j {
            0 => 1.0,
            1 => t as f64,
            _ => {
                let k = ((j - 2) / 2 + 1) as f64;
                let a = 2.0 * PI * k * d / 7.0;
                if j % 2 == 0 { a.sin() } else { a.cos() }
            }
        }
    });
    let beta = x.clone().svd(true, true).solve(&DVector::from_vec(y), 1e-12).unwrap();
    let oracle = &x * beta;
    for t in 0..400 {
        assert!((fit.fitted[t] - oracle[t]).abs() < 1e-6, "t={t}");
    }
}

fn noisy_trend(seed: u64) -> DailySeries {
    let e = noise(500, 2.0, seed);
    let y: Vec<f64> = (0..500)
        .map(|t| {
            let t = t as f64;
            50.0 + 0.2 * t - 0.5 * (t - 180.0).max(0.0) + 0.4 * (t - 320.0).max(0.0)
                + 3.0 * (2.0 * PI * t / 7.0).cos()
                + e[t as usize]
        })
        .collect();
    DailySeries::from_values(y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn l1_of_delta_monotone_in_prior_scale(seed in 0u64..10_000) {
        let series = noisy_trend(seed);
        let mut prev = f64::INFINITY;
        for scale in [1.0, 0.05, 0.002] {
            let fit = fit_decomposable(&series, &DecomposableSpec::default().with_prior_scales(scale, 10.0)).unwrap();
            let l1: f64 = fit.delta.iter().map(|d| d.abs()).sum();
            prop_assert!(l1 <= prev + 1e-9, "scale {scale}: {l1} > {prev}");
            prev = l1;
        }
    }

    #[test]
    fn components_sum_to_fitted(seed in 0u64..10_000) {
        let series = noisy_trend(seed);
        let fit = fit_decomposable(&series, &DecomposableSpec::default()).unwrap();
        let total = fit.training_components(&series).unwrap().total();
        for (a, b) in total.iter().zip(&fit.fitted) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        prop_assert!(fit.residual_sigma > 0.0);
    }
}
