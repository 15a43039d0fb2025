//! Per-player expected-points estimators and cost vectors.

mod arima;
mod averages;
mod holt;
mod ridge;
mod simulation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Panel, PlayerId, Position};

pub use arima::{arima_estimate, arima_fit, nelder_mead, ArimaEstimate, ArimaFit, ArimaOrder};
pub use averages::{linear_trend, linear_trend_estimate, simple_average, uncertainty_margin, weighted_average};
pub use holt::{holt_fit, holt_forecast, HoltFit};
pub use ridge::{hybrid_score, min_max, ridge_solve, RidgeModel};
pub use simulation::{bootstrap_estimate, monte_carlo_estimate, player_seed, DEFAULT_RESAMPLES};

pub const DEFAULT_SEED: u64 = 20_240_227;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SimpleAvg,
    WeightedAvg,
    ExpSmooth,
    Bootstrap,
    MonteCarlo,
    Arima,
    LinearTrend,
    HybridRidge,
    IctSurrogate,
    RobustIctSurrogate,
    InvolvementSurrogate,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::SimpleAvg,
        Method::WeightedAvg,
        Method::ExpSmooth,
        Method::Bootstrap,
        Method::MonteCarlo,
        Method::Arima,
        Method::LinearTrend,
        Method::HybridRidge,
        Method::IctSurrogate,
        Method::RobustIctSurrogate,
        Method::InvolvementSurrogate,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Method::SimpleAvg => "simple_avg",
            Method::WeightedAvg => "weighted_avg",
            Method::ExpSmooth => "exp_smooth",
            Method::Bootstrap => "bootstrap",
            Method::MonteCarlo => "monte_carlo",
            Method::Arima => "arima",
            Method::LinearTrend => "linear_trend",
            Method::HybridRidge => "hybrid_ridge",
            Method::IctSurrogate => "ict",
            Method::RobustIctSurrogate => "robust_ict",
            Method::InvolvementSurrogate => "involvement",
        }
    }

    /// Whether the score comes from the points history alone.
    pub fn is_history_only(self) -> bool {
        !matches!(
            self,
            Method::HybridRidge | Method::IctSurrogate | Method::RobustIctSurrogate | Method::InvolvementSurrogate
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match s.as_str() {
            "exponential_smoothing" | "holt" => "exp_smooth",
            "mc" => "monte_carlo",
            "hybrid" => "hybrid_ridge",
            "linear_regression" | "trend" => "linear_trend",
            "ict_surrogate" => "ict",
            "robust_ict_surrogate" => "robust_ict",
            "involvement_surrogate" | "egi_egc" => "involvement",
            other => other,
        };
        Method::ALL
            .into_iter()
            .find(|m| m.key() == alias)
            .ok_or_else(|| Error::invalid(format!("unknown forecast method `{s}`")))
    }
}

/// Estimator choice and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSpec {
    pub method: Method,
    pub arima_order: ArimaOrder,
    /// Forecast horizon; `None` means the remaining weeks of the season.
    pub horizon: Option<u32>,
    pub resamples: u32,
    pub seed: u64,
    pub ridge_alpha: f64,
    pub hybrid_lambda: f64,
    /// Realized component of the hybrid.
    pub hybrid_base: Method,
}

impl Default for ForecastSpec {
    fn default() -> Self {
        ForecastSpec {
            method: Method::SimpleAvg,
            arima_order: ArimaOrder::new(1, 0, 0),
            horizon: None,
            resamples: DEFAULT_RESAMPLES,
            seed: DEFAULT_SEED,
            ridge_alpha: 1.0,
            hybrid_lambda: 2.0 / 3.0,
            hybrid_base: Method::SimpleAvg,
        }
    }
}

impl ForecastSpec {
    pub fn new(method: Method) -> Self {
        ForecastSpec { method, ..ForecastSpec::default() }
    }

    pub fn arima(p: u8, d: u8, q: u8) -> Self {
        ForecastSpec { method: Method::Arima, arima_order: ArimaOrder::new(p, d, q), ..ForecastSpec::default() }
    }

    pub fn hybrid(lambda: f64) -> Self {
        ForecastSpec { method: Method::HybridRidge, hybrid_lambda: lambda, ..ForecastSpec::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.method, Method::Bootstrap | Method::MonteCarlo) && self.resamples == 0 {
            return Err(Error::invalid("resamples must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.hybrid_lambda) {
            return Err(Error::invalid(format!("hybrid lambda {} outside [0, 1]", self.hybrid_lambda)));
        }
        if !(self.ridge_alpha >= 0.0) {
            return Err(Error::invalid(format!("ridge alpha {} must be >= 0", self.ridge_alpha)));
        }
        if !self.hybrid_base.is_history_only() {
            return Err(Error::invalid("hybrid base must be a points-history method"));
        }
        if self.horizon == Some(0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        let o = self.arima_order;
        if o.p > 2 || o.d > 2 || o.q > 2 {
            return Err(Error::invalid(format!("arima order ({o}) exceeds 2")));
        }
        Ok(())
    }

    /// Machine key, e.g. `arima(1,0,0)` or `hybrid_ridge(1:2)`. Parses back
    /// with [`FromStr`].
    pub fn key(&self) -> String {
        match self.method {
            Method::Arima => format!("arima({})", self.arima_order),
            Method::HybridRidge => match ratio_label(self.hybrid_lambda) {
                r if r.contains(':') => format!("hybrid_ridge({r})"),
                _ => format!("hybrid_ridge({})", self.hybrid_lambda),
            },
            m => m.key().to_string(),
        }
    }

    /// Display label used in reports.
    pub fn label(&self) -> String {
        match self.method {
            Method::SimpleAvg => "Simple Average".into(),
            Method::WeightedAvg => "Weighted Average".into(),
            Method::ExpSmooth => "Exponential Smoothing".into(),
            Method::Bootstrap => "Bootstrap".into(),
            Method::MonteCarlo => "Monte Carlo".into(),
            Method::Arima => {
                let o = self.arima_order;
                format!("ARIMA ({},{},{})", o.p, o.d, o.q)
            }
            Method::LinearTrend => "Linear Regression".into(),
            Method::HybridRidge => {
                let base = match self.hybrid_base {
                    Method::SimpleAvg => "Simple Avg".to_string(),
                    Method::WeightedAvg => "Weighted Avg".to_string(),
                    other => ForecastSpec { method: other, ..self.clone() }.label(),
                };
                format!("Hybrid {base} {}", ratio_label(self.hybrid_lambda))
            }
            Method::IctSurrogate => "ICT".into(),
            Method::RobustIctSurrogate => "Robust ICT".into(),
            Method::InvolvementSurrogate => "EGI-EGC".into(),
        }
    }

    /// The history-only spec used for bench coefficients.
    pub fn bench_spec(&self) -> ForecastSpec {
        if self.method.is_history_only() {
            self.clone()
        } else if self.method == Method::HybridRidge {
            ForecastSpec { method: self.hybrid_base, ..self.clone() }
        } else {
            ForecastSpec { method: Method::SimpleAvg, ..self.clone() }
        }
    }
}

/// Parses a method key with an optional parameter: `weighted_avg`,
/// `arima(1,0,0)`, `hybrid_ridge(0.5)`, `hybrid_ridge(1:2)`.
impl FromStr for ForecastSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.find('(') {
            Some(k) if s.ends_with(')') => (&s[..k], Some(&s[k + 1..s.len() - 1])),
            Some(_) => return Err(Error::invalid(format!("unbalanced parentheses in `{s}`"))),
            None => (s, None),
        };
        let method: Method = name.parse()?;
        let mut spec = ForecastSpec::new(method);
        match (method, arg) {
            (_, None) => {}
            (Method::Arima, Some(a)) => spec.arima_order = a.parse()?,
            (Method::HybridRidge, Some(a)) => {
                spec.hybrid_lambda = match a.trim() {
                    "1:2" => 2.0 / 3.0,
                    "2:1" => 1.0 / 3.0,
                    v => v.parse().map_err(|_| Error::invalid(format!("hybrid lambda `{a}` is not a number")))?,
                };
            }
            (m, Some(_)) => return Err(Error::invalid(format!("{m} takes no parameter"))),
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `λ = 2/3` is "1:2" (realized : predicted), `λ = 1/3` is "2:1".
fn ratio_label(lambda: f64) -> String {
    if (lambda - 2.0 / 3.0).abs() < 1e-9 {
        "1:2".into()
    } else if (lambda - 1.0 / 3.0).abs() < 1e-9 {
        "2:1".into()
    } else {
        format!("λ={lambda:.4}")
    }
}

/// Per-player coefficients for one as-of week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostVector {
    pub spec: ForecastSpec,
    pub as_of_week: u8,
    pub scores: BTreeMap<PlayerId, f64>,
    pub margins: BTreeMap<PlayerId, f64>,
    /// Players whose score is a fallback (mean substitution).
    pub fallbacks: BTreeSet<PlayerId>,
}

/// Surrogate objective family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateKind {
    Ict,
    RobustIct,
    Involvement,
}

/// Training aggregates needed by the surrogate objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateInput {
    pub ict: Vec<f64>,
    pub xgi: Vec<f64>,
    pub xgc: Vec<f64>,
}

/// Returns (score, margin) for one player, `None` when a feature is missing.
pub fn surrogate_score(input: &SurrogateInput, kind: SurrogateKind) -> Option<(f64, f64)> {
    match kind {
        SurrogateKind::Ict => Some((simple_average(&input.ict).ok()?, 0.0)),
        SurrogateKind::RobustIct => {
            let m = simple_average(&input.ict).ok()?;
            let sd = uncertainty_margin(&input.ict);
            Some((m - sd, sd))
        }
        SurrogateKind::Involvement => {
            Some((simple_average(&input.xgi).ok()? - simple_average(&input.xgc).ok()?, 0.0))
        }
    }
}

/// Estimates one history-only method on a points series.
pub fn estimate_series(
    spec: &ForecastSpec,
    method: Method,
    series: &[f64],
    weeks: &[f64],
    window: (u8, u8),
    player: PlayerId,
) -> Result<(f64, bool)> {
    let h = u32::from(window.1 - window.0) + 1;
    let seed = player_seed(spec.seed, player.0);
    Ok(match method {
        Method::SimpleAvg => (simple_average(series)?, false),
        Method::WeightedAvg => (weighted_average(series)?, false),
        Method::ExpSmooth => (holt_forecast(series, h)?, series.len() < 2),
        Method::Bootstrap => (bootstrap_estimate(series, h, spec.resamples, seed)?, false),
        Method::MonteCarlo => (monte_carlo_estimate(series, h, spec.resamples, seed)?, false),
        Method::Arima => {
            let e = arima_estimate(series, spec.arima_order, h)?;
            (e.value, e.fallback)
        }
        Method::LinearTrend => {
            let pts: Vec<(f64, f64)> = weeks.iter().copied().zip(series.iter().copied()).collect();
            (linear_trend(&pts, window.0, window.1)?, series.len() < 2)
        }
        other => return Err(Error::invalid(format!("{other} is not a points-history method"))),
    })
}

/// Builds the cost vector from weeks `1..as_of_week` only.
pub fn build_cost_vector(panel: &Panel, spec: &ForecastSpec, as_of_week: u8) -> Result<CostVector> {
    spec.validate()?;
    let n = panel.season_length();
    if as_of_week < 2 || as_of_week > n {
        return Err(Error::invalid(format!("as-of week {as_of_week} outside 2..={n}")));
    }
    let through = as_of_week - 1;
    let last = match spec.horizon {
        Some(h) => (u32::from(as_of_week) + h - 1).min(255) as u8,
        None => n,
    };
    let window = (as_of_week, last);

    struct Hist {
        id: PlayerId,
        position: Position,
        points: Vec<f64>,
        weeks: Vec<f64>,
        features: Vec<[f64; 7]>,
    }
    let view = panel.feature_view(through);
    let players: Vec<PlayerId> = panel.players().collect();
    let hists: Vec<Hist> = players
        .par_iter()
        .filter_map(|&id| {
            let rows = panel.history(id, through).ok()?;
            let latest = rows.last()?;
            Some(Hist {
                id,
                position: latest.position,
                points: rows.iter().map(|r| f64::from(r.total_points)).collect(),
                weeks: rows.iter().map(|r| f64::from(r.gw)).collect(),
                features: view.rows(id),
            })
        })
        .collect();
    if hists.is_empty() {
        return Err(Error::NoHistory);
    }

    let margins: BTreeMap<PlayerId, f64> = hists
        .iter()
        .map(|h| {
            let m = if spec.method == Method::RobustIctSurrogate {
                uncertainty_margin(&h.features.iter().map(|f| f[0]).collect::<Vec<_>>())
            } else {
                uncertainty_margin(&h.points)
            };
            (h.id, m)
        })
        .collect();

    let mut scores = BTreeMap::new();
    let mut fallbacks = BTreeSet::new();
    match spec.method {
        m if m.is_history_only() => {
            let out: Vec<(PlayerId, Result<(f64, bool)>)> = hists
                .par_iter()
                .map(|h| (h.id, estimate_series(spec, m, &h.points, &h.weeks, window, h.id)))
                .collect();
            for (id, r) in out {
                match r {
                    Ok((v, fb)) if v.is_finite() => {
                        scores.insert(id, v);
                        if fb {
                            fallbacks.insert(id);
                        }
                    }
                    Ok(_) => log::warn!("player {id}: non-finite score dropped"),
                    Err(Error::NoHistory) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Method::IctSurrogate | Method::RobustIctSurrogate | Method::InvolvementSurrogate => {
            let kind = match spec.method {
                Method::IctSurrogate => SurrogateKind::Ict,
                Method::RobustIctSurrogate => SurrogateKind::RobustIct,
                _ => SurrogateKind::Involvement,
            };
            for h in &hists {
                let input = SurrogateInput {
                    ict: h.features.iter().map(|f| f[0]).collect(),
                    xgi: h.features.iter().map(|f| f[3]).collect(),
                    xgc: h.features.iter().map(|f| f[4]).collect(),
                };
                if let Some((s, _)) = surrogate_score(&input, kind) {
                    scores.insert(h.id, s);
                }
            }
        }
        Method::HybridRidge => {
            let mut realized = Vec::with_capacity(hists.len());
            for h in &hists {
                let (v, fb) = estimate_series(spec, spec.hybrid_base, &h.points, &h.weeks, window, h.id)?;
                if fb {
                    fallbacks.insert(h.id);
                }
                realized.push(v);
            }
            let means: Vec<[f64; 7]> = hists
                .iter()
                .map(|h| {
                    let k = h.features.len() as f64;
                    std::array::from_fn(|c| h.features.iter().map(|f| f[c]).sum::<f64>() / k)
                })
                .collect();
            let target: Vec<f64> = hists.iter().map(|h| h.points.iter().sum::<f64>() / h.points.len() as f64).collect();
            let mut predicted = vec![0.0; hists.len()];
            for pos in Position::ALL {
                let idx: Vec<usize> = (0..hists.len()).filter(|&i| hists[i].position == pos).collect();
                if idx.is_empty() {
                    continue;
                }
                let x: Vec<Vec<f64>> = idx.iter().map(|&i| means[i].to_vec()).collect();
                let y: Vec<f64> = idx.iter().map(|&i| target[i]).collect();
                let model = RidgeModel::fit(&x, &y, spec.ridge_alpha)?;
                if !model.dropped.is_empty() {
                    log::info!("{pos}: dropped constant feature columns {:?}", model.dropped);
                }
                for &i in &idx {
                    predicted[i] = model.predict(&means[i]);
                }
            }
            let r = min_max(&realized);
            let p = min_max(&predicted);
            for (i, h) in hists.iter().enumerate() {
                scores.insert(h.id, hybrid_score(r[i], p[i], spec.hybrid_lambda));
            }
        }
        _ => unreachable!(),
    }
    if scores.is_empty() {
        return Err(Error::NoHistory);
    }
    let margins = margins.into_iter().filter(|(id, _)| scores.contains_key(id)).collect();
    if !fallbacks.is_empty() {
        log::info!("{}: {} player(s) fell back to the mean", spec.key(), fallbacks.len());
    }
    Ok(CostVector { spec: spec.clone(), as_of_week, scores, margins, fallbacks })
}

#[derive(Serialize, Deserialize)]
struct CostRow {
    player_id: u32,
    method: String,
    as_of_week: u8,
    score: f64,
    margin: f64,
    fallback_flag: u8,
    seed: u64,
}

impl CostVector {
    /// Writes `player_id,method,as_of_week,score,margin,fallback_flag,seed`,
    /// scores and margins to four decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["player_id", "method", "as_of_week", "score", "margin", "fallback_flag", "seed"])?;
        let key = self.spec.key();
        for (id, score) in &self.scores {
            w.write_record([
                id.0.to_string(),
                key.clone(),
                self.as_of_week.to_string(),
                format!("{score:.4}"),
                format!("{:.4}", self.margins.get(id).copied().unwrap_or(0.0)),
                u8::from(self.fallbacks.contains(id)).to_string(),
                self.spec.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the columnar format back; the spec is only partially recoverable
    /// from the file so the caller supplies it.
    pub fn read_csv<R: Read>(reader: R, spec: ForecastSpec) -> Result<CostVector> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut cv = CostVector {
            spec,
            as_of_week: 0,
            scores: BTreeMap::new(),
            margins: BTreeMap::new(),
            fallbacks: BTreeSet::new(),
        };
        for row in rdr.deserialize() {
            let row: CostRow = row?;
            let id = PlayerId(row.player_id);
            cv.as_of_week = row.as_of_week;
            cv.scores.insert(id, row.score);
            cv.margins.insert(id, row.margin);
            if row.fallback_flag != 0 {
                cv.fallbacks.insert(id);
            }
        }
        Ok(cv)
    }
}
