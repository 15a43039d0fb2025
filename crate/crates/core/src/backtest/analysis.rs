//! Leaderboard, rank similarity and uplift over weekly score series.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::StrategyRun;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub label: String,
    pub total: i32,
}

/// Sorted by final total, descending; equal totals share a rank and are listed
/// by label.
pub fn leaderboard(runs: &[StrategyRun]) -> Vec<LeaderboardRow> {
    let mut rows: Vec<(String, i32)> = runs.iter().map(|r| (r.label.clone(), r.total())).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut out: Vec<LeaderboardRow> = Vec::with_capacity(rows.len());
    for (k, (label, total)) in rows.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.total == total => prev.rank,
            _ => k + 1,
        };
        out.push(LeaderboardRow { rank, label, total });
    }
    out
}

/// Ranks 1..n with ties given their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Spearman's ρ; `None` when either series is constant or they differ in length.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    /// `|ρ|`, row-major; `None` where ρ is undefined.
    pub values: Vec<Vec<Option<f64>>>,
}

/// Pairwise `|ρ|` between weekly score series.
pub fn similarity_matrix(runs: &[StrategyRun]) -> Result<SimilarityMatrix> {
    if runs.len() < 2 {
        return Err(Error::invalid("similarity needs at least two runs"));
    }
    let weeks: Vec<u8> = runs[0].weekly_points.keys().copied().collect();
    let series: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| {
            if r.weekly_points.keys().copied().ne(weeks.iter().copied()) {
                return Err(Error::invalid(format!("run `{}` covers different weeks", r.label)));
            }
            Ok(r.weekly_points.values().map(|&p| f64::from(p)).collect())
        })
        .collect::<Result<_>>()?;
    let n = runs.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = spearman(&series[i], &series[j]).map(f64::abs);
            let v = if i == j { v.map(|_| 1.0) } else { v };
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    Ok(SimilarityMatrix { labels: runs.iter().map(|r| r.label.clone()).collect(), values })
}

/// `run − benchmark`, week by week.
pub fn weekly_uplift(run: &StrategyRun, benchmark: &StrategyRun) -> Result<Vec<(u8, i32)>> {
    if run.weekly_points.keys().ne(benchmark.weekly_points.keys()) {
        return Err(Error::invalid(format!("`{}` and `{}` cover different weeks", run.label, benchmark.label)));
    }
    Ok(run.weekly_points.iter().zip(benchmark.weekly_points.values()).map(|((gw, a), b)| (*gw, a - b)).collect())
}

pub fn median(values: &[i32]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { f64::from(v[m]) } else { (f64::from(v[m - 1]) + f64::from(v[m])) / 2.0 })
}

/// The `k` labels with the largest median weekly uplift (ties by label).
pub fn top_by_median_uplift(uplift: &BTreeMap<String, Vec<i32>>, k: usize) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> =
        uplift.iter().filter_map(|(label, d)| median(d).map(|m| (label.clone(), m))).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}
