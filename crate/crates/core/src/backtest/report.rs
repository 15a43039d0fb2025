//! The report bundle: diffable CSV tables plus `summary.json`.
//!
//! | file | columns |
//! |------|---------|
//! | `runs.csv` | label, mode, budget, gw, points, cumulative |
//! | `squads.csv` | label, gw, slot, id, name, club, position, price, score, reused |
//! | `substitutions.csv` | label, gw, out, in, captain |
//! | `leaderboard.csv` | rank, label, total |
//! | `similarity.csv` | label, then one column per run |
//! | `uplift.csv` | label, gw, delta |
//! | `winner_strip.csv` | gw, one points column per budget, winner |
//!
//! Tables derived from weekly points (`leaderboard`, `similarity`, `uplift`,
//! `winner_strip`, `summary.json`) can be rebuilt from `runs.csv` and
//! `summary.json` alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::ForecastSpec;
use crate::panel::Price;

use super::analysis::{leaderboard, similarity_matrix, top_by_median_uplift, weekly_uplift, LeaderboardRow, SimilarityMatrix};
use super::{winner_strip, Mode, StrategyRun};

/// How many labels `summary.json` lists by median uplift.
pub const TOP_UPLIFT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    /// Run configuration and seed, as flat key/value pairs.
    pub metadata: BTreeMap<String, String>,
    pub runs: Vec<StrategyRun>,
    pub leaderboard: Vec<LeaderboardRow>,
    /// Whether the runs form a budget sweep (one spec and mode).
    pub sweep: bool,
    /// Empty unless `sweep`.
    pub winner_strip: BTreeMap<u8, String>,
    /// `None` with fewer than two runs.
    pub similarity: Option<SimilarityMatrix>,
    pub benchmark: Option<String>,
    /// Weekly deltas against `benchmark`, per label.
    pub uplift: BTreeMap<String, Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunSummary {
    label: String,
    spec: ForecastSpec,
    mode: Mode,
    budget: Price,
    total: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Summary {
    metadata: BTreeMap<String, String>,
    sweep: bool,
    benchmark: Option<String>,
    runs: Vec<RunSummary>,
    leaderboard: Vec<LeaderboardRow>,
    winner_counts: BTreeMap<String, usize>,
    top_uplift: Vec<(String, f64)>,
}

impl BacktestReport {
    pub fn assemble(
        runs: Vec<StrategyRun>,
        benchmark: Option<&str>,
        sweep: bool,
        metadata: BTreeMap<String, String>,
    ) -> Result<BacktestReport> {
        let mut labels: Vec<&str> = runs.iter().map(|r| r.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(dup) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("run label `{}` appears twice", dup[0])));
        }
        let mut uplift = BTreeMap::new();
        if let Some(b) = benchmark {
            let base = runs
                .iter()
                .find(|r| r.label == b)
                .ok_or_else(|| Error::invalid(format!("benchmark `{b}` is not among the runs")))?;
            for r in &runs {
                let d = weekly_uplift(r, base)?;
                uplift.insert(r.label.clone(), d.into_iter().map(|(_, v)| v).collect());
            }
        }
        Ok(BacktestReport {
            metadata,
            leaderboard: leaderboard(&runs),
            winner_strip: if sweep { winner_strip(&runs) } else { BTreeMap::new() },
            similarity: if runs.len() >= 2 { Some(similarity_matrix(&runs)?) } else { None },
            sweep,
            benchmark: benchmark.map(str::to_string),
            uplift,
            runs,
        })
    }

    pub fn winner_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        if self.sweep {
            for r in &self.runs {
                counts.insert(r.label.clone(), 0);
            }
            for l in self.winner_strip.values() {
                *counts.entry(l.clone()).or_default() += 1;
            }
        }
        counts
    }

    fn summary(&self) -> Summary {
        Summary {
            metadata: self.metadata.clone(),
            sweep: self.sweep,
            benchmark: self.benchmark.clone(),
            runs: self
                .runs
                .iter()
                .map(|r| RunSummary {
                    label: r.label.clone(),
                    spec: r.spec.clone(),
                    mode: r.mode,
                    budget: r.budget,
                    total: r.total(),
                })
                .collect(),
            leaderboard: self.leaderboard.clone(),
            winner_counts: self.winner_counts(),
            top_uplift: top_by_median_uplift(&self.uplift, TOP_UPLIFT),
        }
    }

    /// Writes every table and `summary.json` into `dir`.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_runs(dir)?;
        self.write_squads(dir)?;
        self.write_tables(dir)
    }

    /// Writes the tables derived from weekly points.
    pub fn write_tables(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("leaderboard.csv"))?;
        w.write_record(["rank", "label", "total"])?;
        for row in &self.leaderboard {
            w.write_record([row.rank.to_string(), row.label.clone(), row.total.to_string()])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("similarity.csv"))?;
        if let Some(sim) = &self.similarity {
            let mut header = vec!["label".to_string()];
            header.extend(sim.labels.iter().cloned());
            w.write_record(&header)?;
            for (label, row) in sim.labels.iter().zip(&sim.values) {
                let mut rec = vec![label.clone()];
                rec.extend(row.iter().map(|v| v.map(|x| format!("{x:.4}")).unwrap_or_default()));
                w.write_record(&rec)?;
            }
        } else {
            w.write_record(["label"])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("uplift.csv"))?;
        w.write_record(["label", "gw", "delta"])?;
        if !self.uplift.is_empty() {
            let weeks: Vec<u8> = self.runs[0].weekly_points.keys().copied().collect();
            for r in &self.runs {
                for (gw, d) in weeks.iter().zip(&self.uplift[&r.label]) {
                    w.write_record([r.label.clone(), gw.to_string(), d.to_string()])?;
                }
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("winner_strip.csv"))?;
        if self.sweep {
            let mut order: Vec<&StrategyRun> = self.runs.iter().collect();
            order.sort_by_key(|r| r.budget);
            let mut header = vec!["gw".to_string()];
            header.extend(order.iter().map(|r| r.budget.to_string()));
            header.push("winner".into());
            w.write_record(&header)?;
            for (gw, winner) in &self.winner_strip {
                let mut rec = vec![gw.to_string()];
                rec.extend(order.iter().map(|r| r.weekly_points.get(gw).map(|p| p.to_string()).unwrap_or_default()));
                rec.push(winner.clone());
                w.write_record(&rec)?;
            }
        } else {
            w.write_record(["gw", "winner"])?;
        }
        w.flush()?;

        let mut text = serde_json::to_string_pretty(&self.summary())?;
        text.push('\n');
        fs::write(dir.join("summary.json"), text)?;
        Ok(())
    }

    fn write_runs(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
        w.write_record(["label", "mode", "budget", "gw", "points", "cumulative"])?;
        for r in &self.runs {
            for (gw, p) in &r.weekly_points {
                w.write_record([
                    r.label.clone(),
                    r.mode.to_string(),
                    r.budget.to_string(),
                    gw.to_string(),
                    p.to_string(),
                    r.cumulative[gw].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    fn write_squads(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join("squads.csv"))?;
        w.write_record(["label", "gw", "slot", "id", "name", "club", "position", "price", "score", "reused"])?;
        for r in &self.runs {
            for (gw, sel) in &r.squads {
                let sol = &sel.solution;
                for e in &sel.roster {
                    let slot = if e.player_id == sol.captain {
                        "captain"
                    } else if sol.xi.contains(&e.player_id) {
                        "starter"
                    } else {
                        "bench"
                    };
                    let score = if slot == "bench" { e.bench_score } else { e.expected_points };
                    w.write_record([
                        r.label.clone(),
                        gw.to_string(),
                        slot.to_string(),
                        e.player_id.to_string(),
                        e.name.clone(),
                        e.team.clone(),
                        e.position.to_string(),
                        e.price.to_string(),
                        format!("{score:.4}"),
                        sel.reused.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("substitutions.csv"))?;
        w.write_record(["label", "gw", "out", "in", "captain"])?;
        for r in &self.runs {
            for (gw, s) in &r.scores {
                let captain = s.captain.map(|c| c.to_string()).unwrap_or_default();
                for sub in &s.substitutions {
                    w.write_record([
                        r.label.clone(),
                        gw.to_string(),
                        sub.out.to_string(),
                        sub.replacement.map(|i| i.to_string()).unwrap_or_default(),
                        captain.clone(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuilds a report from `summary.json` and `runs.csv`. The squads are not
    /// restored.
    pub fn read_bundle(dir: &Path) -> Result<BacktestReport> {
        let summary: Summary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
        let mut weekly: BTreeMap<String, BTreeMap<u8, i32>> = BTreeMap::new();
        let mut rd = csv::Reader::from_path(dir.join("runs.csv"))?;
        for (k, rec) in rd.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Row { line: k as u64 + 2, message: format!("runs.csv: bad {what}") };
            let label = rec.get(0).ok_or_else(|| bad("label"))?.to_string();
            let gw: u8 = rec.get(3).and_then(|v| v.parse().ok()).ok_or_else(|| bad("gw"))?;
            let points: i32 = rec.get(4).and_then(|v| v.parse().ok()).ok_or_else(|| bad("points"))?;
            weekly.entry(label).or_default().insert(gw, points);
        }
        let runs = summary
            .runs
            .into_iter()
            .map(|s| {
                let w = weekly
                    .remove(&s.label)
                    .ok_or_else(|| Error::Config(format!("runs.csv has no rows for `{}`", s.label)))?;
                Ok(StrategyRun::from_weekly(s.label, s.spec, s.budget, s.mode, w))
            })
            .collect::<Result<Vec<_>>>()?;
        BacktestReport::assemble(runs, summary.benchmark.as_deref(), summary.sweep, summary.metadata)
    }
}
