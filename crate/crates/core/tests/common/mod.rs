//! Generators shared by integration test targets.
#![allow(dead_code)]

use fuelcast_core::sarimax::simulate;
use fuelcast_core::{DailySeries, SarimaxCoefficients, SarimaxSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SPIKE_PERIOD: usize = 14;
pub const SPIKE_SIZE: f64 = 4.0;

/// Base spec of the stacked-model scenarios: AR(1) x seasonal AR(1), s = 7.
pub fn hybrid_base_spec() -> SarimaxSpec {
    SarimaxSpec::new(1, 0, 0).seasonal(1, 0, 0, 7)
}

/// Level-50 SARIMA(1,0,0)x(1,0,0,7) sample with unit innovations.
pub fn pure_sarima(n: usize, seed: u64) -> DailySeries {
    let spec = hybrid_base_spec();
    let coef = SarimaxCoefficients {
        phi: vec![0.5],
        seasonal_phi: vec![0.4],
        intercept: 50.0,
        ..SarimaxCoefficients::zeros(&spec)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate(&spec, &coef, n, 1.0, &[], &mut rng).unwrap().series
}

/// [`pure_sarima`] plus a spike of [`SPIKE_SIZE`] every [`SPIKE_PERIOD`] days,
/// a pattern the weekly base model cannot represent.
pub fn spiked_sarima(n: usize, seed: u64) -> DailySeries {
    let s = pure_sarima(n, seed);
    let values = s
        .values()
        .iter()
        .enumerate()
        .map(|(t, v)| if t % SPIKE_PERIOD == 0 { v + SPIKE_SIZE } else { *v })
        .collect();
    s.with_values(values).unwrap()
}
