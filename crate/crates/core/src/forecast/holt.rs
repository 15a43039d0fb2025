//! Holt's linear (level + trend) exponential smoothing.

use crate::error::{Error, Result};

use super::averages::simple_average;

/// Grid resolution for the smoothing parameters.
const STEPS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltFit {
    pub alpha: f64,
    pub beta: f64,
    pub level: f64,
    pub trend: f64,
    pub sse: f64,
}

impl HoltFit {
    pub fn forecast(&self, h: u32) -> f64 {
        self.level + f64::from(h) * self.trend
    }
}

fn run(series: &[f64], alpha: f64, beta: f64) -> HoltFit {
    let mut level = series[0];
    let mut trend = series[1] - series[0];
    let mut sse = 0.0;
    for &p in &series[1..] {
        let f = level + trend;
        sse += (p - f) * (p - f);
        let prev = level;
        level = alpha * p + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev) + (1.0 - beta) * trend;
    }
    HoltFit { alpha, beta, level, trend, sse }
}

/// Fits α, β on a 0.01 grid over [0, 1]² by one-step squared error. Ties go to
/// the smaller α, then the smaller β.
pub fn holt_fit(series: &[f64]) -> Result<HoltFit> {
    if series.len() < 2 {
        return Err(Error::invalid("holt needs at least two observations"));
    }
    let mut best: Option<HoltFit> = None;
    for i in 0..=STEPS {
        let alpha = f64::from(i) / f64::from(STEPS);
        for j in 0..=STEPS {
            let beta = f64::from(j) / f64::from(STEPS);
            let fit = run(series, alpha, beta);
            if !fit.sse.is_finite() {
                continue;
            }
            if best.as_ref().map_or(true, |b| fit.sse < b.sse) {
                best = Some(fit);
            }
        }
    }
    best.ok_or_else(|| Error::invalid("holt fit produced no finite error"))
}

/// Mean of the 1..=H step forecasts. Shorter series fall back to the mean.
pub fn holt_forecast(series: &[f64], horizon: u32) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    if series.len() < 2 {
        log::warn!("holt: {} observation(s), using the simple average", series.len());
        return simple_average(series);
    }
    let fit = holt_fit(series)?;
    let sum: f64 = (1..=horizon).map(|h| fit.forecast(h)).sum();
    Ok(sum / f64::from(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_series_is_recovered() {
        let fit = holt_fit(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((fit.level - 4.0).abs() < 1e-12);
        assert!((fit.trend - 1.0).abs() < 1e-12);
        assert!((holt_forecast(&[1.0, 2.0, 3.0, 4.0], 2).unwrap() - 5.5).abs() < 1e-9);
    }

    #[test]
    fn constant_series() {
        for h in 1..5 {
            assert_eq!(holt_forecast(&[5.0; 4], h).unwrap(), 5.0);
        }
    }

    #[test]
    fn one_step() {
        let s = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let fit = holt_fit(&s).unwrap();
        assert_eq!(holt_forecast(&s, 1).unwrap(), fit.forecast(1));
    }

    #[test]
    fn short_series_falls_back() {
        assert_eq!(holt_forecast(&[7.0], 3).unwrap(), 7.0);
        assert!(holt_forecast(&[], 3).is_err());
    }
}
