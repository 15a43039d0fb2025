//! Ridge regression and the realized/predicted hybrid blend.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Closed form `(XᵀX + αI)⁻¹ Xᵀy` with no intercept and no scaling.
pub fn ridge_solve(x: &[Vec<f64>], y: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::invalid("ridge: design and target lengths differ or are empty"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!("ridge alpha {alpha} must be >= 0")));
    }
    let k = x[0].len();
    if x.iter().any(|r| r.len() != k) {
        return Err(Error::invalid("ridge: ragged design matrix"));
    }
    let xm = DMatrix::from_fn(x.len(), k, |r, c| x[r][c]);
    let yv = DVector::from_column_slice(y);
    let gram = xm.transpose() * &xm + DMatrix::identity(k, k) * alpha;
    let rhs = xm.transpose() * yv;
    let w = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::invalid("ridge: singular system"))?;
    Ok(w.iter().copied().collect())
}

/// Ridge fit on standardized features with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Weights on standardized features; 0 for dropped columns.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Columns with zero variance on the training rows.
    pub dropped: Vec<usize>,
}

impl RidgeModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], alpha: f64) -> Result<RidgeModel> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::invalid("ridge: design and target lengths differ or are empty"));
        }
        let n = x.len() as f64;
        let k = x[0].len();
        let means: Vec<f64> = (0..k).map(|c| x.iter().map(|r| r[c]).sum::<f64>() / n).collect();
        let scales: Vec<f64> = (0..k)
            .map(|c| (x.iter().map(|r| (r[c] - means[c]).powi(2)).sum::<f64>() / n).sqrt())
            .collect();
        let kept: Vec<usize> = (0..k).filter(|&c| scales[c] > 0.0).collect();
        let dropped: Vec<usize> = (0..k).filter(|&c| scales[c] <= 0.0).collect();
        let y_mean = y.iter().sum::<f64>() / n;
        let mut weights = vec![0.0; k];
        if !kept.is_empty() {
            let z: Vec<Vec<f64>> = x
                .iter()
                .map(|r| kept.iter().map(|&c| (r[c] - means[c]) / scales[c]).collect())
                .collect();
            let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
            let w = ridge_solve(&z, &yc, alpha)?;
            for (&c, wc) in kept.iter().zip(w) {
                weights[c] = wc;
            }
        }
        Ok(RidgeModel { means, scales, weights, intercept: y_mean, dropped })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut out = self.intercept;
        for c in 0..self.weights.len() {
            if self.scales[c] > 0.0 {
                out += self.weights[c] * (row[c] - self.means[c]) / self.scales[c];
            }
        }
        out
    }
}

/// `(1 - λ)·realized + λ·predicted`.
pub fn hybrid_score(realized_norm: f64, predicted_norm: f64, lambda: f64) -> f64 {
    (1.0 - lambda) * realized_norm + lambda * predicted_norm
}

/// Min–max normalization onto [0, 1]; a constant input maps to 0.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|v| if span > 0.0 { ((v - lo) / span).clamp(0.0, 1.0) } else { 0.0 })
        .collect()
}
