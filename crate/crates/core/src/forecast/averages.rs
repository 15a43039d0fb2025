use crate::error::{Error, Result};

/// Arithmetic mean of the series.
pub fn simple_average(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::NoHistory);
    }
    Ok(series.iter().sum::<f64>() / series.len() as f64)
}

/// Recency-weighted mean with weights `t / Σi` over the series' own index.
pub fn weighted_average(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::NoHistory);
    }
    let n = series.len() as f64;
    let denom = n * (n + 1.0) / 2.0;
    let num: f64 = series.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
    Ok(num / denom)
}

/// Sample standard deviation (denominator n - 1); 0 for a single observation.
pub fn uncertainty_margin(series: &[f64]) -> f64 {
    if series.len() < 2 {
        return 0.0;
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let ss: f64 = series.iter().map(|p| (p - mean) * (p - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Least-squares line through `(week, value)` points, averaged over the
/// predictions for weeks `from..=to`. A single observation (or a degenerate
/// week design) returns the mean.
pub fn linear_trend(points: &[(f64, f64)], from: u8, to: u8) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::NoHistory);
    }
    if from > to {
        return Err(Error::invalid(format!("empty prediction window {from}..={to}")));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return Ok(my);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b1 = sxy / sxx;
    let b0 = my - b1 * mx;
    let mid = (f64::from(from) + f64::from(to)) / 2.0;
    Ok(b0 + b1 * mid)
}

/// Trend fit on week indices `1..=len`, predicting `tau+1..=n`.
pub fn linear_trend_estimate(series: &[f64], tau: u8, n: u8) -> Result<f64> {
    let points: Vec<(f64, f64)> = series.iter().enumerate().map(|(i, &p)| ((i + 1) as f64, p)).collect();
    linear_trend(&points, tau + 1, n)
}
