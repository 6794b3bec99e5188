//! Synthetic daily demand scenarios with schedule columns of controllable
//! reliability.
//!
//! Each carrier's demand is a level (with occasional shifts) plus a linear
//! trend, weekly Fourier seasonality, AR(1) noise and white noise, optionally
//! multiplied down during a shock window. Its schedule column mixes the
//! standardized pre-shock demand with independent noise:
//! `w * z(demand) + sqrt(1 - w^2) * z(noise)`, rescaled to flight counts.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{ForecastError, Result};
use crate::series::{default_start, mean_std, DailySeries};

pub const MIN_DAYS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    FlagCarrier,
    LowCost,
    AirportAggregate,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::FlagCarrier, Profile::LowCost, Profile::AirportAggregate];

    pub fn default_reliability(self) -> f64 {
        match self {
            Profile::FlagCarrier => 0.2,
            Profile::LowCost => 0.9,
            Profile::AirportAggregate => 0.8,
        }
    }

    /// Exogenous column names produced for this profile.
    pub fn exog_names(self) -> Vec<String> {
        match self {
            Profile::FlagCarrier | Profile::LowCost => vec!["schedule".into()],
            Profile::AirportAggregate => vec!["schedule".into(), "customers".into(), "customer_volume".into()],
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::FlagCarrier => "flag_carrier",
            Profile::LowCost => "low_cost",
            Profile::AirportAggregate => "airport_aggregate",
        })
    }
}

impl FromStr for Profile {
    type Err = ForecastError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flag_carrier" => Ok(Profile::FlagCarrier),
            "low_cost" => Ok(Profile::LowCost),
            "airport_aggregate" => Ok(Profile::AirportAggregate),
            other => Err(ForecastError::Config(format!(
                "unknown profile '{other}' (expected flag_carrier, low_cost or airport_aggregate)"
            ))),
        }
    }
}

/// Demand collapse: multiplied by `1 - depth` on `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shock {
    pub start: usize,
    pub duration: usize,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub profile: Profile,
    pub n_days: usize,
    pub seed: u64,
    pub exog_reliability: f64,
    pub shock: Option<Shock>,
    pub start_date: NaiveDate,
}

impl ScenarioSpec {
    pub fn new(profile: Profile, n_days: usize, seed: u64) -> Self {
        Self {
            profile,
            n_days,
            seed,
            exog_reliability: profile.default_reliability(),
            shock: None,
            start_date: default_start(),
        }
    }

    pub fn with_reliability(mut self, r: f64) -> Self {
        self.exog_reliability = r;
        self
    }

    pub fn with_shock(mut self, shock: Shock) -> Self {
        self.shock = Some(shock);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_days < MIN_DAYS {
            return Err(ForecastError::Config(format!(
                "scenarios need at least {MIN_DAYS} days, got {}",
                self.n_days
            )));
        }
        if !(0.0..=1.0).contains(&self.exog_reliability) {
            return Err(ForecastError::Config(format!(
                "exog_reliability must lie in [0, 1], got {}",
                self.exog_reliability
            )));
        }
        if let Some(s) = self.shock {
            if !(s.depth > 0.0 && s.depth <= 1.0) {
                return Err(ForecastError::Config(format!("shock depth must lie in (0, 1], got {}", s.depth)));
            }
            if s.duration == 0 || s.start + s.duration > self.n_days {
                return Err(ForecastError::Config(format!(
                    "shock window [{}, {}) lies outside [0, {})",
                    s.start,
                    s.start + s.duration,
                    self.n_days
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Carrier {
    level: f64,
    slope: f64,
    weekly_amp: f64,
    ar_phi: f64,
    ar_sd: f64,
    noise_sd: f64,
    /// Expected level shifts per day and their relative size.
    shift_rate: f64,
    shift_size: f64,
    sched_mean: f64,
    sched_sd: f64,
}

const FLAG: Carrier = Carrier {
    level: 100.0,
    slope: 0.0,
    weekly_amp: 0.03,
    ar_phi: 0.3,
    ar_sd: 12.0,
    noise_sd: 12.0,
    shift_rate: 0.0,
    shift_size: 0.0,
    sched_mean: 12.0,
    sched_sd: 2.0,
};

const LOW_COST: Carrier = Carrier {
    level: 60.0,
    slope: 0.01,
    weekly_amp: 0.2,
    ar_phi: 0.5,
    ar_sd: 6.0,
    noise_sd: 6.0,
    shift_rate: 1.0 / 150.0,
    shift_size: 0.15,
    sched_mean: 40.0,
    sched_sd: 6.0,
};

/// Small customers of the aggregate: `(volume when operating, probability of operating)`.
const SMALL_CUSTOMERS: [(f64, f64); 6] = [(25.0, 0.6), (18.0, 0.4), (30.0, 0.3), (12.0, 0.7), (22.0, 0.5), (15.0, 0.35)];

struct CarrierDraw {
    demand: Vec<f64>,
    schedule: Vec<f64>,
}

fn standardize(x: &[f64]) -> Vec<f64> {
    let (m, s) = mean_std(x);
    let s = if s > 0.0 { s } else { 1.0 };
    x.iter().map(|v| (v - m) / s).collect()
}

fn draw_carrier(c: &Carrier, n: usize, reliability: f64, shock: Option<Shock>, rng: &mut ChaCha8Rng) -> CarrierDraw {
    let phase1 = rng.random_range(0.0..2.0 * PI);
    let phase2 = rng.random_range(0.0..2.0 * PI);
    let ar_innov = Normal::new(0.0, c.ar_sd * (1.0 - c.ar_phi * c.ar_phi).sqrt()).expect("valid sd");
    let white = Normal::new(0.0, c.noise_sd).expect("valid sd");
    let mut ar = c.ar_sd * Distribution::<f64>::sample(&StandardNormal, rng);
    let mut level = c.level;
    let mut demand = Vec::with_capacity(n);
    for t in 0..n {
        if c.shift_rate > 0.0 && rng.random::<f64>() < c.shift_rate {
            level *= 1.0 + c.shift_size * Distribution::<f64>::sample(&StandardNormal, rng);
            level = level.max(0.3 * c.level);
        }
        ar = c.ar_phi * ar + ar_innov.sample(rng);
        let tt = t as f64;
        let weekly = c.level
            * c.weekly_amp
            * ((2.0 * PI * tt / 7.0 + phase1).sin() + 0.5 * (4.0 * PI * tt / 7.0 + phase2).sin());
        demand.push((level + c.slope * tt + weekly + ar + white.sample(rng)).max(0.0));
    }
    let driver = standardize(&demand);
    let nuisance: Vec<f64> = (0..n).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect();
    let w = reliability;
    let schedule = driver
        .iter()
        .zip(&nuisance)
        .map(|(z, e)| c.sched_mean + c.sched_sd * (w * z + (1.0 - w * w).sqrt() * e))
        .collect();
    if let Some(s) = shock {
        for v in &mut demand[s.start..s.start + s.duration] {
            *v *= 1.0 - s.depth;
        }
    }
    CarrierDraw { demand, schedule }
}

/// A generated scenario and, for the aggregate, its component demand series.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub series: DailySeries,
    pub components: Vec<Vec<f64>>,
}

pub fn generate(spec: &ScenarioSpec) -> Result<DailySeries> {
    generate_scenario(spec).map(|s| s.series)
}

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let n = spec.n_days;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r = spec.exog_reliability;
    match spec.profile {
        Profile::FlagCarrier | Profile::LowCost => {
            let params = if spec.profile == Profile::FlagCarrier { FLAG } else { LOW_COST };
            let d = draw_carrier(&params, n, r, spec.shock, &mut rng);
            let series = DailySeries::new(spec.start_date, d.demand.clone())?.with_exog("schedule", d.schedule)?;
            Ok(Scenario { series, components: vec![d.demand] })
        }
        Profile::AirportAggregate => {
            let mut components = Vec::new();
            let mut schedule = vec![0.0; n];
            for carrier in [FLAG, LOW_COST] {
                let d = draw_carrier(&carrier, n, r, spec.shock, &mut rng);
                for (s, v) in schedule.iter_mut().zip(&d.schedule) {
                    *s += v;
                }
                components.push(d.demand);
            }
            let mut count = vec![0.0; n];
            let mut volume = vec![0.0; n];
            for (size, p) in SMALL_CUSTOMERS {
                let jitter = Normal::new(0.0, 0.1 * size).expect("valid sd");
                let mut demand = vec![0.0; n];
                for t in 0..n {
                    if rng.random::<f64>() < p {
                        demand[t] = (size + jitter.sample(&mut rng)).max(0.0);
                        count[t] += 1.0;
                        volume[t] += size;
                    }
                }
                if let Some(s) = spec.shock {
                    for v in &mut demand[s.start..s.start + s.duration] {
                        *v *= 1.0 - s.depth;
                    }
                }
                components.push(demand);
            }
            let total: Vec<f64> = (0..n).map(|t| components.iter().map(|c| c[t]).sum()).collect();
            let series = DailySeries::new(spec.start_date, total)?
                .with_exog("schedule", schedule)?
                .with_exog("customers", count)?
                .with_exog("customer_volume", volume)?;
            Ok(Scenario { series, components })
        }
    }
}

/// Share of variance explained by day-of-week means.
pub fn weekly_strength(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let total: f64 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut between = 0.0;
    for d in 0..7 {
        let group: Vec<f64> = values.iter().skip(d).step_by(7).copied().collect();
        let m = group.iter().sum::<f64>() / group.len() as f64;
        between += group.len() as f64 * (m - mean).powi(2);
    }
    if total > 0.0 {
        between / n / total
    } else {
        0.0
    }
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&ScenarioSpec::new(Profile::LowCost, 100, 1)).is_err());
        let s = ScenarioSpec::new(Profile::LowCost, 500, 1).with_shock(Shock { start: 480, duration: 60, depth: 0.5 });
        assert!(matches!(generate(&s), Err(ForecastError::Config(_))));
        let s = ScenarioSpec::new(Profile::LowCost, 500, 1).with_shock(Shock { start: 10, duration: 6, depth: 1.5 });
        assert!(generate(&s).is_err());
        assert!("nope".parse::<Profile>().is_err());
        assert_eq!("low_cost".parse::<Profile>().unwrap(), Profile::LowCost);
    }

    #[test]
    fn aggregate_is_sum_of_components() {
        let sc = generate_scenario(&ScenarioSpec::new(Profile::AirportAggregate, 300, 4)).unwrap();
        for t in 0..300 {
            let sum: f64 = sc.components.iter().map(|c| c[t]).sum();
            assert_eq!(sc.series.values()[t], sum);
        }
        assert_eq!(sc.series.exog_names(), Profile::AirportAggregate.exog_names());
    }
}
