//! Replays the test weeks: static and rolling strategies, budget sweeps and
//! the analyses built on their weekly score series.

pub mod analysis;
pub mod report;
mod scoring;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{build_cost_vector, CostVector, ForecastSpec};
use crate::optimize::{
    solve, validate, BenchBudget, FormationLimits, SelectionProblem, SquadSolution, DEFAULT_BUDGET, DEFAULT_TIME_LIMIT,
};
use crate::panel::{build_pool, DoubleGameweek, Panel, PlayerId, PoolEntry, Price};

pub use analysis::{
    leaderboard, median, similarity_matrix, spearman, top_by_median_uplift, weekly_uplift, LeaderboardRow,
    SimilarityMatrix,
};
pub use report::BacktestReport;
pub use scoring::{score_week, Substitution, WeekScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One squad picked before the first test week and kept.
    #[default]
    Static,
    /// Re-forecast and re-solve before every test week.
    Rolling,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Static => "static",
            Mode::Rolling => "rolling",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "static" => Ok(Mode::Static),
            "rolling" => Ok(Mode::Rolling),
            o => Err(Error::invalid(format!("mode `{o}` is not static|rolling"))),
        }
    }
}

/// Everything about a selection except the pool, the scores and the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOptions {
    pub limits: FormationLimits,
    pub club_quota: u8,
    pub robust: bool,
    pub locks: BTreeSet<PlayerId>,
    pub excludes: BTreeSet<PlayerId>,
    pub bench_budget: BenchBudget,
    pub time_limit: Duration,
    /// How a double gameweek is scored.
    pub scoring: DoubleGameweek,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            limits: FormationLimits::default(),
            club_quota: 3,
            robust: false,
            locks: BTreeSet::new(),
            excludes: BTreeSet::new(),
            bench_budget: BenchBudget::default(),
            time_limit: DEFAULT_TIME_LIMIT,
            scoring: DoubleGameweek::default(),
        }
    }
}

/// Forecasts from weeks before `gw` and builds the week-`gw` problem. The
/// bench coefficients come from [`ForecastSpec::bench_spec`].
pub fn selection_problem(
    panel: &Panel,
    spec: &ForecastSpec,
    gw: u8,
    budget: Price,
    opts: &SelectionOptions,
) -> Result<(SelectionProblem, CostVector)> {
    let cv = build_cost_vector(panel, spec, gw)?;
    let mut pool = build_pool(panel, gw, &cv.scores, &cv.margins)?;
    let bench_spec = spec.bench_spec();
    if bench_spec != *spec {
        let bench = build_cost_vector(panel, &bench_spec, gw)?;
        pool.set_bench_scores(&bench.scores);
    }
    let problem = SelectionProblem {
        pool,
        budget,
        limits: opts.limits.clone(),
        club_quota: opts.club_quota,
        robust: opts.robust,
        locks: opts.locks.clone(),
        excludes: opts.excludes.clone(),
        bench_budget: opts.bench_budget,
        squad_budget: crate::optimize::SQUAD_BUDGET,
        time_limit: opts.time_limit,
    };
    Ok((problem, cv))
}

/// A squad together with the pool rows of its fifteen players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekSelection {
    pub solution: SquadSolution,
    /// XI in id order, then the bench.
    pub roster: Vec<PoolEntry>,
    /// Set when this week's solve failed and an earlier squad was kept.
    pub reused: bool,
}

impl WeekSelection {
    pub fn entry(&self, id: PlayerId) -> Option<&PoolEntry> {
        self.roster.iter().find(|e| e.player_id == id)
    }
}

/// Solves a problem and re-checks the squad with the validator.
pub fn select(problem: &SelectionProblem) -> Result<WeekSelection> {
    let solution = solve(problem)?;
    let violations = validate(problem, &solution);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidSquad(text.join("; ")));
    }
    let roster = solution.squad().filter_map(|id| problem.pool.get(id).cloned()).collect();
    Ok(WeekSelection { solution, roster, reused: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub label: String,
    pub spec: ForecastSpec,
    pub budget: Price,
    pub mode: Mode,
    pub weekly_points: BTreeMap<u8, i32>,
    pub cumulative: BTreeMap<u8, i32>,
    /// Empty for runs read back from a report bundle.
    pub squads: BTreeMap<u8, WeekSelection>,
    pub scores: BTreeMap<u8, WeekScore>,
}

impl StrategyRun {
    pub fn total(&self) -> i32 {
        self.cumulative.values().next_back().copied().unwrap_or(0)
    }

    /// Builds a run from weekly points alone.
    pub fn from_weekly(label: String, spec: ForecastSpec, budget: Price, mode: Mode, weekly: BTreeMap<u8, i32>) -> Self {
        let mut run = StrategyRun {
            label,
            spec,
            budget,
            mode,
            weekly_points: weekly,
            cumulative: BTreeMap::new(),
            squads: BTreeMap::new(),
            scores: BTreeMap::new(),
        };
        run.accumulate();
        run
    }

    fn accumulate(&mut self) {
        let mut sum = 0;
        self.cumulative = self
            .weekly_points
            .iter()
            .map(|(gw, p)| {
                sum += p;
                (*gw, sum)
            })
            .collect();
    }
}

/// `Weighted Average`, `ARIMA (1,0,0) Rolling (Budget = 70)`, ...
pub fn run_label(spec: &ForecastSpec, mode: Mode, budget: Price) -> String {
    let mut label = spec.label();
    if mode == Mode::Rolling {
        label.push_str(" Rolling");
    }
    if budget != DEFAULT_BUDGET {
        label.push_str(&format!(" (Budget = {})", budget_text(budget)));
    }
    label
}

/// `70` for whole millions, `83.5` otherwise.
pub fn budget_text(budget: Price) -> String {
    if budget.0 % 10 == 0 {
        (budget.0 / 10).to_string()
    } else {
        budget.to_string()
    }
}

fn scored_run(panel: &Panel, spec: &ForecastSpec, budget: Price, mode: Mode, squads: BTreeMap<u8, WeekSelection>, opts: &SelectionOptions) -> StrategyRun {
    let scores: BTreeMap<u8, WeekScore> = squads
        .iter()
        .map(|(gw, sel)| (*gw, score_week(&sel.solution, &sel.roster, panel, *gw, &opts.limits, opts.scoring)))
        .collect();
    let weekly = scores.iter().map(|(gw, s)| (*gw, s.points)).collect();
    let mut run = StrategyRun::from_weekly(run_label(spec, mode, budget), spec.clone(), budget, mode, weekly);
    run.squads = squads;
    run.scores = scores;
    run
}

/// One squad chosen from the training weeks, scored on every test week.
pub fn run_static(panel: &Panel, spec: &ForecastSpec, budget: Price, opts: &SelectionOptions) -> Result<StrategyRun> {
    let first = *panel.test_weeks().start();
    let (problem, _) = selection_problem(panel, spec, first, budget, opts)?;
    let selection = select(&problem)?;
    let squads = panel.test_weeks().map(|gw| (gw, selection.clone())).collect();
    Ok(scored_run(panel, spec, budget, Mode::Static, squads, opts))
}

/// Before each test week `t`, forecasts from weeks `1..t` and re-solves at
/// week-`t` prices. A failed week keeps the previous squad.
pub fn run_rolling(panel: &Panel, spec: &ForecastSpec, budget: Price, opts: &SelectionOptions) -> Result<StrategyRun> {
    let mut squads: BTreeMap<u8, WeekSelection> = BTreeMap::new();
    let mut previous: Option<WeekSelection> = None;
    for gw in panel.test_weeks() {
        let chosen = selection_problem(panel, spec, gw, budget, opts).and_then(|(p, _)| select(&p));
        let selection = match (chosen, &previous) {
            (Ok(s), _) => s,
            (Err(e), Some(prev)) => {
                log::warn!("gameweek {gw}: selection failed ({e}); keeping the previous squad");
                WeekSelection { reused: true, ..prev.clone() }
            }
            (Err(e), None) => return Err(e),
        };
        previous = Some(selection.clone());
        squads.insert(gw, selection);
    }
    Ok(scored_run(panel, spec, budget, Mode::Rolling, squads, opts))
}

pub fn run(panel: &Panel, spec: &ForecastSpec, budget: Price, mode: Mode, opts: &SelectionOptions) -> Result<StrategyRun> {
    match mode {
        Mode::Static => run_static(panel, spec, budget, opts),
        Mode::Rolling => run_rolling(panel, spec, budget, opts),
    }
}

/// Runs every (spec, budget, mode) job concurrently; results keep job order.
pub fn run_all(panel: &Panel, jobs: &[(ForecastSpec, Price, Mode)], opts: &SelectionOptions) -> Result<Vec<StrategyRun>> {
    jobs.par_iter().map(|(spec, budget, mode)| run(panel, spec, *budget, *mode, opts)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Ascending budget.
    pub runs: Vec<StrategyRun>,
    pub winner_strip: BTreeMap<u8, String>,
}

impl Sweep {
    /// Weekly wins per label.
    pub fn win_counts(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> = self.runs.iter().map(|r| (r.label.clone(), 0)).collect();
        for label in self.winner_strip.values() {
            *counts.entry(label.clone()).or_default() += 1;
        }
        counts
    }
}

/// One run per budget; the default budget is always included.
pub fn budget_sweep(
    panel: &Panel,
    spec: &ForecastSpec,
    budgets: &[Price],
    mode: Mode,
    opts: &SelectionOptions,
) -> Result<Sweep> {
    if budgets.is_empty() {
        return Err(Error::invalid("a sweep needs at least one budget"));
    }
    let mut all: Vec<Price> = budgets.to_vec();
    all.push(DEFAULT_BUDGET);
    all.sort_unstable();
    all.dedup();
    let jobs: Vec<_> = all.iter().map(|b| (spec.clone(), *b, mode)).collect();
    let runs = run_all(panel, &jobs, opts)?;
    let winner_strip = winner_strip(&runs);
    Ok(Sweep { runs, winner_strip })
}

/// The weekly top scorer; ties go to the lower budget.
pub fn winner_strip(runs: &[StrategyRun]) -> BTreeMap<u8, String> {
    let mut order: Vec<&StrategyRun> = runs.iter().collect();
    order.sort_by_key(|r| r.budget);
    let weeks: BTreeSet<u8> = runs.iter().flat_map(|r| r.weekly_points.keys().copied()).collect();
    weeks
        .into_iter()
        .filter_map(|gw| {
            let mut best: Option<(&StrategyRun, i32)> = None;
            for r in &order {
                if let Some(&p) = r.weekly_points.get(&gw) {
                    if best.map_or(true, |(_, b)| p > b) {
                        best = Some((r, p));
                    }
                }
            }
            best.map(|(r, _)| (gw, r.label.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests;
