//! ARIMA(p, d, q) by conditional sum of squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::averages::simple_average;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: u8,
    pub d: u8,
    pub q: u8,
}

impl ArimaOrder {
    pub const fn new(p: u8, d: u8, q: u8) -> Self {
        ArimaOrder { p, d, q }
    }

    pub fn min_len(&self) -> usize {
        usize::from(self.p + self.d + self.q) + 2
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.p, self.d, self.q)
    }
}

impl std::str::FromStr for ArimaOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().trim_matches(|c| c == '(' || c == ')').split(',').collect();
        let bad = || Error::invalid(format!("arima order `{s}` is not p,d,q"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut v = [0u8; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.trim().parse().map_err(|_| bad())?;
            if *slot > 2 {
                return Err(Error::invalid(format!("arima order `{s}`: components must be <= 2")));
            }
        }
        Ok(ArimaOrder::new(v[0], v[1], v[2]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub css: f64,
    /// Differenced series and its in-sample residuals.
    w: Vec<f64>,
    resid: Vec<f64>,
    /// Tail of each differencing level, for integration.
    tails: Vec<f64>,
}

/// Result of [`arima_estimate`]; `fallback` marks a mean-substituted fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArimaEstimate {
    pub value: f64,
    pub fallback: bool,
}

fn difference(series: &[f64], d: u8) -> (Vec<f64>, Vec<f64>) {
    let mut w = series.to_vec();
    let mut tails = Vec::new();
    for _ in 0..d {
        tails.push(*w.last().expect("non-empty"));
        w = w.windows(2).map(|x| x[1] - x[0]).collect();
    }
    (w, tails)
}

fn residuals(w: &[f64], c: f64, ar: &[f64], ma: &[f64]) -> (Vec<f64>, f64) {
    let p = ar.len();
    let mut e = vec![0.0; w.len()];
    let mut css = 0.0;
    for t in p..w.len() {
        let mut pred = c;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        e[t] = w[t] - pred;
        css += e[t] * e[t];
    }
    (e, css)
}

/// Roots of `1 - Σ a_i z^i` (sign = -1) or `1 + Σ a_i z^i` (sign = +1) lie
/// outside the unit circle.
fn outside_unit_circle(coef: &[f64], sign: f64) -> bool {
    match coef {
        [] => true,
        [a] => a.abs() < 1.0,
        [a1, a2] => {
            // 1 - φ1 z - φ2 z² in canonical AR form
            let (p1, p2) = (-sign * a1, -sign * a2);
            p2.abs() < 1.0 && p1 + p2 < 1.0 && p2 - p1 < 1.0
        }
        _ => false,
    }
}

fn ols_ar(w: &[f64], p: usize, intercept: bool) -> Option<(f64, Vec<f64>)> {
    let rows = w.len().checked_sub(p)?;
    let k = p + usize::from(intercept);
    if k == 0 {
        return Some((0.0, Vec::new()));
    }
    if rows < k {
        return None;
    }
    let x = DMatrix::from_fn(rows, k, |r, c| {
        if intercept && c == 0 {
            1.0
        } else {
            let lag = c + 1 - usize::from(intercept);
            w[r + p - lag]
        }
    });
    let y = DVector::from_iterator(rows, w[p..].iter().copied());
    let beta = x.svd(true, true).solve(&y, 1e-12).ok()?;
    let c = if intercept { beta[0] } else { 0.0 };
    let ar = beta.iter().skip(usize::from(intercept)).copied().collect();
    Some((c, ar))
}

/// Minimizes `f` with the Nelder–Mead simplex method.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, max_iter: usize, tol: f64) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += if v[i].abs() > 1e-8 { step * v[i].abs().max(0.1) } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= tol * (1.0 + values[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = (0..n).map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k])).collect();
                    values[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("non-empty simplex");
    (simplex[best].clone(), values[best])
}

/// Fits ARIMA(p, d, q). The intercept is estimated only when `d = 0`.
pub fn arima_fit(series: &[f64], order: ArimaOrder) -> Result<ArimaFit> {
    if order.p > 2 || order.d > 2 || order.q > 2 {
        return Err(Error::invalid(format!("arima order ({order}) exceeds 2")));
    }
    if series.len() < order.min_len() {
        return Err(Error::invalid(format!("series of length {} too short for ({order})", series.len())));
    }
    let (w, tails) = difference(series, order.d);
    let p = usize::from(order.p);
    let q = usize::from(order.q);
    let with_c = order.d == 0;
    let (c0, ar0) = ols_ar(&w, p, with_c).ok_or_else(|| Error::invalid("singular AR design"))?;

    let (c, ar, ma) = if q == 0 {
        (c0, ar0, Vec::new())
    } else {
        let start: Vec<f64> = ar0
            .iter()
            .copied()
            .chain(std::iter::repeat(0.0).take(q))
            .chain(with_c.then_some(c0))
            .collect();
        let objective = |v: &[f64]| -> f64 {
            let (ar, rest) = v.split_at(p);
            let (ma, c) = rest.split_at(q);
            if !outside_unit_circle(ma, 1.0) || !outside_unit_circle(ar, -1.0) {
                return f64::INFINITY;
            }
            residuals(&w, c.first().copied().unwrap_or(0.0), ar, ma).1
        };
        let (best, _) = nelder_mead(&objective, &start, 0.1, 2000, 1e-10);
        let (ar, rest) = best.split_at(p);
        let (ma, c) = rest.split_at(q);
        (c.first().copied().unwrap_or(0.0), ar.to_vec(), ma.to_vec())
    };
    let (resid, css) = residuals(&w, c, &ar, &ma);
    if !c.is_finite() || ar.iter().chain(&ma).any(|v| !v.is_finite()) || !css.is_finite() {
        return Err(Error::invalid("non-finite arima fit"));
    }
    if !outside_unit_circle(&ar, -1.0) {
        return Err(Error::invalid("non-stationary arima fit"));
    }
    Ok(ArimaFit { order, intercept: c, ar, ma, css, w, resid, tails })
}

impl ArimaFit {
    /// Level forecasts for steps 1..=horizon.
    pub fn forecast(&self, horizon: u32) -> Vec<f64> {
        let mut w = self.w.clone();
        let mut e = self.resid.clone();
        let mut out = Vec::with_capacity(horizon as usize);
        for _ in 0..horizon {
            let t = w.len();
            let mut pred = self.intercept;
            for (i, phi) in self.ar.iter().enumerate() {
                pred += phi * w[t - 1 - i];
            }
            for (j, theta) in self.ma.iter().enumerate() {
                if t > j {
                    pred += theta * e[t - 1 - j];
                }
            }
            w.push(pred);
            e.push(0.0);
            out.push(pred);
        }
        // undo differencing, innermost level first
        for tail in self.tails.iter().rev() {
            let mut level = *tail;
            for v in out.iter_mut() {
                level += *v;
                *v = level;
            }
        }
        out
    }
}

/// Mean of the 1..=H step forecasts. Short series and failed fits fall back to
/// the series mean with `fallback` set.
pub fn arima_estimate(series: &[f64], order: ArimaOrder, horizon: u32) -> Result<ArimaEstimate> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    let mean = simple_average(series)?;
    let fallback = ArimaEstimate { value: mean, fallback: true };
    let Ok(fit) = arima_fit(series, order) else { return Ok(fallback) };
    let f = fit.forecast(horizon);
    let value = f.iter().sum::<f64>() / f64::from(horizon);
    if value.is_finite() {
        Ok(ArimaEstimate { value, fallback: false })
    } else {
        Ok(fallback)
    }
}
