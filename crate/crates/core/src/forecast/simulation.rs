use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::averages::{simple_average, uncertainty_margin};

pub const DEFAULT_RESAMPLES: u32 = 10_000;

/// Mixes a run seed with a player id so per-player streams do not depend on
/// scheduling.
pub fn player_seed(seed: u64, id: u32) -> u64 {
    let mut z = u64::from(id).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    seed ^ (z ^ (z >> 31))
}

fn check(series: &[f64], horizon: u32, resamples: u32) -> Result<()> {
    if series.is_empty() {
        return Err(Error::NoHistory);
    }
    if horizon == 0 || resamples == 0 {
        return Err(Error::invalid("horizon and resamples must be positive"));
    }
    Ok(())
}

fn summarize(horizon: u32, resamples: u32, mut draw: impl FnMut() -> f64) -> f64 {
    let mut total = 0.0;
    for _ in 0..resamples {
        let path: f64 = (0..horizon).map(|_| draw()).sum();
        total += path / f64::from(horizon);
    }
    total / f64::from(resamples)
}

/// Nonparametric bootstrap: `B` paths of length `H` drawn with replacement,
/// averaged within and then across paths.
pub fn bootstrap_estimate(series: &[f64], horizon: u32, resamples: u32, seed: u64) -> Result<f64> {
    check(series, horizon, resamples)?;
    if series.iter().all(|&p| p == series[0]) {
        return Ok(series[0]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = series.len();
    Ok(summarize(horizon, resamples, || series[rng.random_range(0..n)]))
}

/// Gaussian paths with the sample mean and standard deviation of the series.
pub fn monte_carlo_estimate(series: &[f64], horizon: u32, resamples: u32, seed: u64) -> Result<f64> {
    check(series, horizon, resamples)?;
    if series.iter().all(|&p| p == series[0]) {
        return Ok(series[0]);
    }
    let mean = simple_average(series)?;
    let sd = uncertainty_margin(series);
    if sd == 0.0 {
        return Ok(mean);
    }
    let normal = Normal::new(mean, sd).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(summarize(horizon, resamples, || normal.sample(&mut rng)))
}
