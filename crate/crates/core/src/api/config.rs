//! Flat `key = value` run configuration. See `docs/config.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::backtest::{Mode, SelectionOptions};
use crate::error::{Error, Result};
use crate::forecast::{ArimaOrder, ForecastSpec, Method};
use crate::optimize::{BenchBudget, DEFAULT_BUDGET};
use crate::panel::{DoubleGameweek, PlayerId, Price, SPLIT_WEEK};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "FPL_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "out";
pub const DEFAULT_PANEL: &str = "data/merged_gw_2023_24.csv";

/// An extra strategy in a backtest: `method[@budget][/mode]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    /// Method and its explicit parameter only; see [`Job::resolve`].
    pub method: ForecastSpec,
    pub explicit: bool,
    pub budget: Price,
    pub mode: Mode,
}

impl Job {
    pub fn parse(text: &str) -> Result<Job> {
        let (rest, mode) = match text.rsplit_once('/') {
            Some((r, m)) => (r, m.parse()?),
            None => (text, Mode::Static),
        };
        let (method, budget) = match rest.rsplit_once('@') {
            Some((m, b)) => (m, parse_budget(b)?),
            None => (rest, DEFAULT_BUDGET),
        };
        Ok(Job { method: method.parse()?, explicit: method.contains('('), budget, mode })
    }

    /// The job's spec: its method (and parameter, when given) on top of `base`.
    pub fn resolve(&self, base: &ForecastSpec) -> ForecastSpec {
        let mut spec = ForecastSpec { method: self.method.method, ..base.clone() };
        if self.explicit {
            spec.arima_order = self.method.arima_order;
            spec.hybrid_lambda = self.method.hybrid_lambda;
        }
        spec
    }

    pub fn text(&self) -> String {
        let method = if self.explicit { self.method.key() } else { self.method.method.key().to_string() };
        format!("{method}@{}/{}", self.budget, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub panel_path: PathBuf,
    pub season_length: u8,
    pub split_week: u8,
    pub forecast: ForecastSpec,
    pub budget: Price,
    pub mode: Mode,
    /// Sweep budgets; the default budget is always added.
    pub budgets: Vec<Price>,
    /// Extra strategies for `backtest`.
    pub jobs: Vec<Job>,
    pub benchmark_label: Option<String>,
    pub output_dir: PathBuf,
    pub target_gw: u8,
    pub locks: BTreeSet<PlayerId>,
    pub excludes: BTreeSet<PlayerId>,
    pub club_quota: u8,
    pub robust: bool,
    pub bench_budget: BenchBudget,
    pub time_limit: Duration,
    pub double_gameweek: DoubleGameweek,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            panel_path: PathBuf::from(DEFAULT_PANEL),
            season_length: 38,
            split_week: SPLIT_WEEK,
            forecast: ForecastSpec::default(),
            budget: DEFAULT_BUDGET,
            mode: Mode::Static,
            budgets: [550, 600, 650, 700, 750, 800].map(Price).to_vec(),
            jobs: Vec::new(),
            benchmark_label: None,
            output_dir: std::env::var_os(OUTPUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            target_gw: SPLIT_WEEK + 1,
            locks: BTreeSet::new(),
            excludes: BTreeSet::new(),
            club_quota: 3,
            robust: false,
            bench_budget: BenchBudget::Remaining,
            time_limit: crate::optimize::DEFAULT_TIME_LIMIT,
            double_gameweek: DoubleGameweek::First,
        }
    }
}

/// `83.5` → `Price(835)`.
pub fn parse_budget(text: &str) -> Result<Price> {
    let m: f64 = text.trim().parse().map_err(|_| Error::invalid(format!("budget `{text}` is not a number")))?;
    if m <= 0.0 {
        return Err(Error::invalid(format!("budget {m} must be positive")));
    }
    Price::from_millions(m)
}

pub fn parse_ids(text: &str) -> Result<BTreeSet<PlayerId>> {
    text.split([',', ' ']).filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().map_err(|_| Error::invalid(format!("`{t}` is not a player id")))).collect()
}

fn parse_bool(text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        o => Err(Error::invalid(format!("`{o}` is not a boolean"))),
    }
}

fn parse_num<T: FromStr>(key: &str, text: &str) -> Result<T> {
    text.trim().parse().map_err(|_| Error::invalid(format!("{key}: `{text}` is not a valid number")))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

impl RunConfig {
    pub const KEYS: [&'static str; 27] = [
        "panel_path",
        "season_length",
        "split_week",
        "method",
        "arima_order",
        "horizon",
        "resamples",
        "seed",
        "ridge_alpha",
        "hybrid_lambda",
        "hybrid_base",
        "budget",
        "mode",
        "budgets",
        "jobs",
        "benchmark_label",
        "output_dir",
        "target_gw",
        "locks",
        "excludes",
        "club_quota",
        "robust",
        "bench_budget",
        "time_limit_ms",
        "double_gameweek",
        "squad_budget",
        "format_version",
    ];

    /// Sets one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "panel_path" => self.panel_path = PathBuf::from(v),
            "season_length" => self.season_length = parse_num(key, v)?,
            "split_week" => self.split_week = parse_num(key, v)?,
            "method" => {
                let parsed: ForecastSpec = v.parse()?;
                self.forecast.method = parsed.method;
                if v.contains('(') {
                    self.forecast.arima_order = parsed.arima_order;
                    self.forecast.hybrid_lambda = parsed.hybrid_lambda;
                }
            }
            "arima_order" => self.forecast.arima_order = v.parse::<ArimaOrder>()?,
            "horizon" => self.forecast.horizon = if v.is_empty() { None } else { Some(parse_num(key, v)?) },
            "resamples" => self.forecast.resamples = parse_num(key, v)?,
            "seed" => self.forecast.seed = parse_num(key, v)?,
            "ridge_alpha" => self.forecast.ridge_alpha = parse_num(key, v)?,
            "hybrid_lambda" => {
                self.forecast.hybrid_lambda = match v {
                    "1:2" => 2.0 / 3.0,
                    "2:1" => 1.0 / 3.0,
                    _ => parse_num(key, v)?,
                }
            }
            "hybrid_base" => self.forecast.hybrid_base = v.parse::<Method>()?,
            "budget" => self.budget = parse_budget(v)?,
            "mode" => self.mode = v.parse()?,
            "budgets" => {
                self.budgets = v.split(',').filter(|t| !t.trim().is_empty()).map(parse_budget).collect::<Result<_>>()?
            }
            "jobs" => {
                self.jobs = v
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| Job::parse(t.trim()))
                    .collect::<Result<_>>()?
            }
            "benchmark_label" => self.benchmark_label = if v.is_empty() { None } else { Some(v.to_string()) },
            "output_dir" => self.output_dir = PathBuf::from(v),
            "target_gw" => self.target_gw = parse_num(key, v)?,
            "locks" => self.locks = parse_ids(v)?,
            "excludes" => self.excludes = parse_ids(v)?,
            "club_quota" => self.club_quota = parse_num(key, v)?,
            "robust" => self.robust = parse_bool(v)?,
            "bench_budget" => self.bench_budget = v.parse()?,
            "time_limit_ms" => self.time_limit = Duration::from_millis(parse_num(key, v)?),
            "double_gameweek" => {
                self.double_gameweek = match v {
                    "first" => DoubleGameweek::First,
                    "sum" => DoubleGameweek::Sum,
                    o => return Err(Error::invalid(format!("double_gameweek `{o}` is not first|sum"))),
                }
            }
            "squad_budget" => {
                if parse_budget(v)? != crate::optimize::SQUAD_BUDGET {
                    return Err(Error::invalid("squad_budget is fixed at 100.0"));
                }
            }
            "format_version" => {
                if v != "1" {
                    return Err(Error::invalid(format!("unsupported format_version {v}")));
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses the text format on top of the defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", k + 1)))?;
            cfg.set(key, value).map_err(|e| Error::Config(format!("line {}: {e}", k + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.forecast.validate()?;
        if self.split_week == 0 || self.split_week >= self.season_length {
            return Err(Error::invalid(format!("split_week {} outside 1..{}", self.split_week, self.season_length)));
        }
        if self.target_gw < 2 || self.target_gw > self.season_length {
            return Err(Error::invalid(format!("target_gw {} outside 2..={}", self.target_gw, self.season_length)));
        }
        if self.locks.len() > 11 {
            return Err(Error::invalid(format!("{} locks exceed the 11 starting places", self.locks.len())));
        }
        if let Some(id) = self.locks.intersection(&self.excludes).next() {
            return Err(Error::invalid(format!("player {id} is both locked and excluded")));
        }
        Ok(())
    }

    /// Every key with its value, in [`RunConfig::KEYS`] order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let f = &self.forecast;
        let values = [
            self.panel_path.display().to_string(),
            self.season_length.to_string(),
            self.split_week.to_string(),
            f.method.key().to_string(),
            f.arima_order.to_string(),
            f.horizon.map(|h| h.to_string()).unwrap_or_default(),
            f.resamples.to_string(),
            f.seed.to_string(),
            f.ridge_alpha.to_string(),
            f.hybrid_lambda.to_string(),
            f.hybrid_base.key().to_string(),
            self.budget.to_string(),
            self.mode.to_string(),
            join(&self.budgets, ","),
            join(self.jobs.iter().map(Job::text), ";"),
            self.benchmark_label.clone().unwrap_or_default(),
            self.output_dir.display().to_string(),
            self.target_gw.to_string(),
            join(&self.locks, ","),
            join(&self.excludes, ","),
            self.club_quota.to_string(),
            self.robust.to_string(),
            match self.bench_budget {
                BenchBudget::Remaining => "remaining".into(),
                BenchBudget::Fixed => "fixed".into(),
            },
            self.time_limit.as_millis().to_string(),
            match self.double_gameweek {
                DoubleGameweek::First => "first".into(),
                DoubleGameweek::Sum => "sum".into(),
            },
            crate::optimize::SQUAD_BUDGET.to_string(),
            "1".into(),
        ];
        Self::KEYS.into_iter().zip(values).collect()
    }

    /// The text format; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Config pairs embedded in persisted artifacts. `output_dir` is left out
    /// so the same run written to two places is byte-identical.
    pub fn metadata(&self) -> BTreeMap<String, String> {
        self.pairs().into_iter().filter(|(k, _)| *k != "output_dir").map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn selection_options(&self) -> SelectionOptions {
        SelectionOptions {
            club_quota: self.club_quota,
            robust: self.robust,
            locks: self.locks.clone(),
            excludes: self.excludes.clone(),
            bench_budget: self.bench_budget,
            time_limit: self.time_limit,
            scoring: self.double_gameweek,
            ..SelectionOptions::default()
        }
    }
}
