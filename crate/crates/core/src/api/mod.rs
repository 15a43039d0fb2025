//! Run configuration and the operations shared by the command line and the
//! HTTP service.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backtest::{self, BacktestReport, SelectionOptions, StrategyRun};
use crate::error::{Error, Result};
use crate::forecast::{build_cost_vector, ForecastSpec};
use crate::optimize::{validate, BenchBudget};
use crate::panel::{Panel, PlayerId, Position, Price};

pub use config::{parse_budget, Job, RunConfig, OUTPUT_DIR_ENV};

/// Body of `POST /optimize`. Unset fields take the engine's configured values;
/// locks and excludes are always taken from the request.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeRequest {
    /// Method key, e.g. `weighted_avg` or `arima(1,0,0)`.
    pub method: Option<String>,
    /// £m.
    pub budget: Option<f64>,
    #[serde(default)]
    pub locks: Vec<u32>,
    #[serde(default)]
    pub excludes: Vec<u32>,
    pub target_gw: Option<u8>,
    pub robust: Option<bool>,
    pub bench_budget: Option<BenchBudget>,
    pub time_limit_ms: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerLine {
    /// `captain`, `starter` or `bench`.
    pub slot: String,
    pub id: u32,
    pub name: String,
    pub club: String,
    pub position: Position,
    /// £m, one decimal.
    pub price: String,
    /// Objective coefficient used for this slot, four decimals.
    pub score: String,
    pub margin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResponse {
    pub target_gw: u8,
    pub method: String,
    pub label: String,
    pub budget: String,
    pub robust: bool,
    pub optimal: bool,
    pub formation: String,
    pub captain: u32,
    pub objective: String,
    pub bench_objective: String,
    pub xi_cost: String,
    pub bench_cost: String,
    pub total_spend: String,
    pub nodes: u64,
    /// Starters by position and id, then the bench.
    pub players: Vec<PlayerLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRow {
    pub id: u32,
    pub name: String,
    pub club: String,
    pub position: Position,
    pub price: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub id: u32,
    pub score: String,
    pub margin: String,
    pub fallback: bool,
}

impl OptimizeResponse {
    /// `# key: value` header lines, then one CSV row per player.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# gw: {}\n# method: {}\n# budget: {}\n# robust: {}\n# optimal: {}\n# formation: {}\n# objective: {}\n# bench_objective: {}\n# spend: {} + {} = {}\n",
            self.target_gw,
            self.label,
            self.budget,
            self.robust,
            self.optimal,
            self.formation,
            self.objective,
            self.bench_objective,
            self.xi_cost,
            self.bench_cost,
            self.total_spend,
        );
        out.push_str("slot,id,name,club,position,price,score\n");
        for p in &self.players {
            let name = if p.name.contains(',') { format!("\"{}\"", p.name) } else { p.name.clone() };
            out.push_str(&format!("{},{},{},{},{},{},{}\n", p.slot, p.id, name, p.club, p.position, p.price, p.score));
        }
        out
    }
}

/// An immutable panel plus the configured defaults.
#[derive(Debug, Clone)]
pub struct Engine {
    panel: Arc<Panel>,
    config: RunConfig,
}

impl Engine {
    pub fn new(panel: Panel, config: RunConfig) -> Self {
        Engine { panel: Arc::new(panel), config }
    }

    /// Loads and splits the configured panel.
    pub fn load(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let panel = Panel::load(&config.panel_path, config.season_length)?.with_split_week(config.split_week)?;
        Ok(Engine::new(panel, config))
    }

    pub fn panel(&self) -> &Panel {
        &self.panel
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn check_gw(&self, gw: u8) -> Result<u8> {
        let n = self.panel.season_length();
        if gw < 2 || gw > n {
            return Err(Error::invalid(format!("target_gw {gw} outside 2..={n}")));
        }
        Ok(gw)
    }

    /// Players pooled for `gw` with their latest prices before it.
    pub fn players(&self, gw: u8) -> Result<Vec<PlayerRow>> {
        let gw = self.check_gw(gw)?;
        let mut rows: Vec<PlayerRow> = self
            .panel
            .players()
            .filter_map(|id| self.panel.latest_before(id, gw))
            .map(|r| PlayerRow {
                id: r.player_id.0,
                name: r.name.clone(),
                club: r.team.clone(),
                position: r.position,
                price: r.value.to_string(),
            })
            .collect();
        rows.sort_by_key(|r| r.id);
        Ok(rows)
    }

    pub fn forecast_spec(&self, method: Option<&str>, seed: Option<u64>) -> Result<ForecastSpec> {
        let mut spec = self.config.forecast.clone();
        if let Some(m) = method {
            let parsed: ForecastSpec = m.parse()?;
            spec.method = parsed.method;
            if m.contains('(') {
                spec.arima_order = parsed.arima_order;
                spec.hybrid_lambda = parsed.hybrid_lambda;
            }
        }
        if let Some(s) = seed {
            spec.seed = s;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn forecasts(&self, method: Option<&str>, gw: u8) -> Result<Vec<ForecastRow>> {
        let spec = self.forecast_spec(method, None)?;
        let cv = build_cost_vector(&self.panel, &spec, self.check_gw(gw)?)?;
        Ok(cv
            .scores
            .iter()
            .map(|(id, s)| ForecastRow {
                id: id.0,
                score: format!("{s:.4}"),
                margin: format!("{:.4}", cv.margins.get(id).copied().unwrap_or(0.0)),
                fallback: cv.fallbacks.contains(id),
            })
            .collect())
    }

    fn options(&self, req: &OptimizeRequest) -> Result<SelectionOptions> {
        let mut opts = self.config.selection_options();
        let locks: BTreeSet<PlayerId> = req.locks.iter().copied().map(PlayerId).collect();
        let excludes: BTreeSet<PlayerId> = req.excludes.iter().copied().map(PlayerId).collect();
        if locks.len() > 11 {
            return Err(Error::invalid(format!("locks: {} players exceed the 11 starting places", locks.len())));
        }
        if let Some(id) = locks.intersection(&excludes).next() {
            return Err(Error::invalid(format!("locks/excludes: player {id} is in both")));
        }
        for id in locks.iter().chain(&excludes) {
            if !self.panel.contains(*id) {
                return Err(Error::UnknownPlayer(*id));
            }
        }
        opts.locks = locks;
        opts.excludes = excludes;
        if let Some(r) = req.robust {
            opts.robust = r;
        }
        if let Some(b) = req.bench_budget {
            opts.bench_budget = b;
        }
        if let Some(ms) = req.time_limit_ms {
            if ms == 0 {
                return Err(Error::invalid("time_limit_ms must be positive"));
            }
            opts.time_limit = Duration::from_millis(ms);
        }
        Ok(opts)
    }

    /// Solves one what-if. The squad is re-checked by the validator before it
    /// is returned.
    pub fn optimize(&self, req: &OptimizeRequest) -> Result<OptimizeResponse> {
        let spec = self.forecast_spec(req.method.as_deref(), req.seed)?;
        let budget = match req.budget {
            Some(b) => {
                if !(b > 0.0) {
                    return Err(Error::invalid(format!("budget: {b} must be positive")));
                }
                Price::from_millions(b).map_err(|_| Error::invalid(format!("budget: {b} is not a multiple of 0.1")))?
            }
            None => self.config.budget,
        };
        let gw = self.check_gw(req.target_gw.unwrap_or(self.config.target_gw))?;
        let opts = self.options(req)?;
        let (problem, cv) = backtest::selection_problem(&self.panel, &spec, gw, budget, &opts)?;
        problem.check()?;
        let sol = crate::optimize::solve(&problem)?;
        let violations = validate(&problem, &sol);
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidSquad(text.join("; ")));
        }
        let players = crate::optimize::ordered_rows(&problem, &sol)
            .into_iter()
            .map(|(slot, e)| PlayerLine {
                slot: slot.to_string(),
                id: e.player_id.0,
                name: e.name.clone(),
                club: e.team.clone(),
                position: e.position,
                price: e.price.to_string(),
                score: format!(
                    "{:.4}",
                    if slot == "bench" { e.bench_score } else { problem.xi_coefficient(e) }
                ),
                margin: format!("{:.4}", cv.margins.get(&e.player_id).copied().unwrap_or(0.0)),
            })
            .collect();
        Ok(OptimizeResponse {
            target_gw: gw,
            method: spec.key(),
            label: spec.label(),
            budget: budget.to_string(),
            robust: problem.robust,
            optimal: sol.optimal,
            formation: sol.formation_label(),
            captain: sol.captain.0,
            objective: format!("{:.4}", sol.objective),
            bench_objective: format!("{:.4}", sol.bench_objective),
            xi_cost: sol.xi_cost.to_string(),
            bench_cost: sol.bench_cost.to_string(),
            total_spend: Price(sol.xi_cost.0 + sol.bench_cost.0).to_string(),
            nodes: sol.stats.nodes,
            players,
        })
    }

    /// The configured strategy plus every extra job, with the config embedded.
    pub fn backtest(&self, config: &RunConfig) -> Result<BacktestReport> {
        let mut jobs = vec![(config.forecast.clone(), config.budget, config.mode)];
        jobs.extend(config.jobs.iter().map(|j| (j.resolve(&config.forecast), j.budget, j.mode)));
        let runs = backtest::run_all(&self.panel, &jobs, &config.selection_options())?;
        let benchmark = config.benchmark_label.clone();
        report(runs, benchmark.as_deref(), false, config)
    }

    /// A budget sweep of the configured strategy; the benchmark defaults to the
    /// default-budget run.
    pub fn sweep(&self, config: &RunConfig) -> Result<BacktestReport> {
        let sweep =
            backtest::budget_sweep(&self.panel, &config.forecast, &config.budgets, config.mode, &config.selection_options())?;
        let base = backtest::run_label(&config.forecast, config.mode, crate::optimize::DEFAULT_BUDGET);
        let benchmark = config.benchmark_label.clone().unwrap_or(base);
        report(sweep.runs, Some(&benchmark), true, config)
    }
}

fn report(runs: Vec<StrategyRun>, benchmark: Option<&str>, sweep: bool, config: &RunConfig) -> Result<BacktestReport> {
    let meta: BTreeMap<String, String> = config.metadata();
    BacktestReport::assemble(runs, benchmark, sweep, meta)
}

#[cfg(test)]
mod tests;
