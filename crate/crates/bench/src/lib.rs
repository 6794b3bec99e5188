//! Fixtures shared by the benchmarks.

use fuelcast_core::{generate, DailySeries, Profile, ScenarioSpec};

/// A seeded low-cost carrier scenario of `n_days` days.
pub fn fixture(n_days: usize) -> DailySeries {
    generate(&ScenarioSpec::new(Profile::LowCost, n_days, 17)).expect("valid scenario")
}
