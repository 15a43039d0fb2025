//! Player–gameweek panel: ingestion, leakage policy, train/test split and
//! per-gameweek player pools.
//!
//! The input is the public merged player–gameweek export (one row per player
//! per fixture). Rows are typed on load; outcome columns that are only known
//! after the deadline (bonus, cards, goals, team scores, fixture identifiers,
//! ...) are kept in a separate [`OutcomeTable`] so that nothing reading
//! model features through [`FeatureView`] can see them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default season length (gameweeks).
pub const SEASON_LENGTH: u8 = 38;
/// Default last training gameweek.
pub const SPLIT_WEEK: u8 = 26;

/// Columns every panel file must carry.
pub const REQUIRED_COLUMNS: [&str; 15] = [
    "element",
    "name",
    "team",
    "position",
    "GW",
    "total_points",
    "value",
    "minutes",
    "ict_index",
    "expected_goals",
    "expected_assists",
    "expected_goal_involvements",
    "expected_goals_conceded",
    "selected",
    "starts",
];

/// Contemporaneous outcomes, referee events and schedule identifiers. They are
/// retained for scoring and snapshots but are never model features.
pub const LEAKAGE_COLUMNS: [&str; 20] = [
    "goals_scored",
    "clean_sheets",
    "goals_conceded",
    "penalties_missed",
    "saves",
    "penalties_saved",
    "own_goals",
    "yellow_cards",
    "red_cards",
    "assists",
    "team_h_score",
    "team_a_score",
    "bps",
    "bonus",
    "opponent_team",
    "round",
    "kickoff_time",
    "fixture",
    "was_home",
    "minutes",
];

/// The only columns a model may consume, in model order.
pub const FEATURE_COLUMNS: [&str; 7] = [
    "ict_index",
    "expected_goals",
    "expected_assists",
    "expected_goal_involvements",
    "expected_goals_conceded",
    "selected",
    "starts",
];

/// Stable player identity (the dataset's element code).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub u32);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for PlayerId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.trim().parse().map(PlayerId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Position {
    #[serde(rename = "GK")]
    Gk,
    #[serde(rename = "DEF")]
    Def,
    #[serde(rename = "MID")]
    Mid,
    #[serde(rename = "FWD")]
    Fwd,
}

impl Position {
    pub const ALL: [Position; 4] = [Position::Gk, Position::Def, Position::Mid, Position::Fwd];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Gk => "GK",
            Position::Def => "DEF",
            Position::Mid => "MID",
            Position::Fwd => "FWD",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GK" | "GKP" => Ok(Position::Gk),
            "DEF" => Ok(Position::Def),
            "MID" => Ok(Position::Mid),
            "FWD" => Ok(Position::Fwd),
            other => Err(Error::invalid(format!("unknown position `{other}`"))),
        }
    }
}

/// Price in tenths of a million. Budget arithmetic is done in this unit so that
/// comparisons against the budget are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Price(pub u32);

impl Price {
    pub fn millions(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    /// Converts a budget in £m, rejecting values that are not a whole number of tenths.
    pub fn from_millions(m: f64) -> Result<Price> {
        let tenths = m * 10.0;
        let rounded = tenths.round();
        if !m.is_finite() || m < 0.0 || (tenths - rounded).abs() > 1e-6 {
            return Err(Error::invalid(format!("budget {m} is not a multiple of 0.1")));
        }
        Ok(Price(rounded as u32))
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

/// One player × fixture observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerWeekRecord {
    pub player_id: PlayerId,
    pub name: String,
    pub team: String,
    pub position: Position,
    pub gw: u8,
    /// FPL points; negative values are legal.
    pub total_points: i32,
    pub value: Price,
    pub minutes: u32,
    pub ict_index: f64,
    pub xg: f64,
    pub xa: f64,
    pub xgi: f64,
    pub xgc: f64,
    pub selected: f64,
    pub starts: u8,
}

impl PlayerWeekRecord {
    pub fn value_m(&self) -> f64 {
        self.value.millions()
    }

    fn feature(&self, column: usize) -> f64 {
        match column {
            0 => self.ict_index,
            1 => self.xg,
            2 => self.xa,
            3 => self.xgi,
            4 => self.xgc,
            5 => self.selected,
            6 => f64::from(self.starts),
            _ => unreachable!("feature column {column}"),
        }
    }
}

/// Outcome and schedule columns, row-aligned with the panel records. Values are
/// kept as the exact source text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl OutcomeTable {
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn get(&self, row: usize, column: &str) -> Option<&str> {
        let c = self.columns.iter().position(|c| c == column)?;
        self.rows.get(row).map(|r| r[c].as_str())
    }
}

/// How a player's realized score for a double gameweek is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleGameweek {
    /// First fixture row of the week (the deduplicated panel view).
    #[default]
    First,
    /// Sum of every fixture row in the week.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Availability {
    Available,
    Unavailable,
}

impl Availability {
    pub fn is_available(self) -> bool {
        self == Availability::Available
    }
}

/// Counters collected while loading a panel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub rows_read: usize,
    pub duplicates_dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    records: Vec<PlayerWeekRecord>,
    outcomes: OutcomeTable,
    /// Per-row (kickoff text, fixture text) used for ordering within a week.
    order_keys: Vec<(String, String)>,
    season_length: u8,
    split_week: u8,
    /// Record indices per player in (gw, kickoff, file order) order.
    by_player: BTreeMap<PlayerId, Vec<usize>>,
    stats: LoadStats,
}

impl Panel {
    /// Loads a panel CSV from disk.
    pub fn load(path: impl AsRef<Path>, season_length: u8) -> Result<Panel> {
        let file = std::fs::File::open(path.as_ref())?;
        Panel::from_reader(std::io::BufReader::new(file), season_length)
    }

    pub fn from_reader<R: Read>(reader: R, season_length: u8) -> Result<Panel> {
        if season_length == 0 {
            return Err(Error::invalid("season length must be positive"));
        }
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let mut idx = [0usize; REQUIRED_COLUMNS.len()];
        for (slot, name) in idx.iter_mut().zip(REQUIRED_COLUMNS) {
            *slot = col(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        }
        let outcome_cols: Vec<(String, usize)> = LEAKAGE_COLUMNS
            .iter()
            .filter(|c| **c != "minutes")
            .filter_map(|c| col(c).map(|i| (c.to_string(), i)))
            .collect();
        let kickoff_col = col("kickoff_time");
        let fixture_col = col("fixture");

        let mut records = Vec::new();
        let mut outcome_rows = Vec::new();
        let mut order_keys = Vec::new();
        let mut seen = HashSet::new();
        let mut stats = LoadStats::default();

        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            // header is line 1
            let line = row.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
            stats.rows_read += 1;
            let field = |k: usize| row.get(idx[k]).unwrap_or("").trim();
            let rec = parse_record(&field, season_length).map_err(|message| Error::Row { line, message })?;
            let kickoff = kickoff_col.and_then(|c| row.get(c)).unwrap_or("").trim().to_string();
            let fixture = fixture_col.and_then(|c| row.get(c)).unwrap_or("").trim().to_string();
            let key = (rec.player_id, rec.gw, fixture.clone(), if fixture.is_empty() { kickoff.clone() } else { String::new() });
            if !seen.insert(key) {
                stats.duplicates_dropped += 1;
                continue;
            }
            outcome_rows.push(outcome_cols.iter().map(|(_, c)| row.get(*c).unwrap_or("").trim().to_string()).collect());
            order_keys.push((kickoff, fixture));
            records.push(rec);
        }
        if stats.duplicates_dropped > 0 {
            log::warn!("dropped {} duplicate player-fixture rows", stats.duplicates_dropped);
        }

        let outcomes = OutcomeTable { columns: outcome_cols.into_iter().map(|(c, _)| c).collect(), rows: outcome_rows };
        Ok(Panel::assemble(records, outcomes, order_keys, season_length, stats))
    }

    fn assemble(
        records: Vec<PlayerWeekRecord>,
        outcomes: OutcomeTable,
        order_keys: Vec<(String, String)>,
        season_length: u8,
        stats: LoadStats,
    ) -> Panel {
        let mut by_player: BTreeMap<PlayerId, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            by_player.entry(r.player_id).or_default().push(i);
        }
        for rows in by_player.values_mut() {
            rows.sort_by(|&a, &b| {
                (records[a].gw, &order_keys[a].0, a).cmp(&(records[b].gw, &order_keys[b].0, b))
            });
        }
        let split_week = SPLIT_WEEK.min(season_length.saturating_sub(1)).max(1);
        Panel { records, outcomes, order_keys, season_length, split_week, by_player, stats }
    }

    /// Builds a panel from typed records (fixture identifiers default to row order).
    pub fn from_records(records: Vec<PlayerWeekRecord>, season_length: u8) -> Result<Panel> {
        for r in &records {
            if r.gw == 0 || r.gw > season_length {
                return Err(Error::invalid(format!("gameweek {} outside 1..={season_length}", r.gw)));
            }
        }
        let order_keys = (0..records.len()).map(|i| (String::new(), i.to_string())).collect();
        let outcomes = OutcomeTable { columns: Vec::new(), rows: vec![Vec::new(); records.len()] };
        let stats = LoadStats { rows_read: records.len(), duplicates_dropped: 0 };
        Ok(Panel::assemble(records, outcomes, order_keys, season_length, stats))
    }

    pub fn with_split_week(mut self, split_week: u8) -> Result<Panel> {
        if split_week == 0 || split_week >= self.season_length {
            return Err(Error::invalid(format!(
                "split week {split_week} must lie in 1..{}",
                self.season_length
            )));
        }
        self.split_week = split_week;
        Ok(self)
    }

    pub fn season_length(&self) -> u8 {
        self.season_length
    }

    pub fn split_week(&self) -> u8 {
        self.split_week
    }

    /// Test weeks τ+1..=N.
    pub fn test_weeks(&self) -> std::ops::RangeInclusive<u8> {
        self.split_week + 1..=self.season_length
    }

    pub fn records(&self) -> &[PlayerWeekRecord] {
        &self.records
    }

    pub fn outcomes(&self) -> &OutcomeTable {
        &self.outcomes
    }

    pub fn load_stats(&self) -> LoadStats {
        self.stats
    }

    pub fn train_records(&self) -> impl Iterator<Item = &PlayerWeekRecord> {
        let tau = self.split_week;
        self.records.iter().filter(move |r| r.gw <= tau)
    }

    pub fn test_records(&self) -> impl Iterator<Item = &PlayerWeekRecord> {
        let tau = self.split_week;
        self.records.iter().filter(move |r| r.gw > tau)
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.by_player.keys().copied()
    }

    pub fn clubs(&self) -> Vec<&str> {
        let mut clubs: Vec<&str> = self.records.iter().map(|r| r.team.as_str()).collect();
        clubs.sort_unstable();
        clubs.dedup();
        clubs
    }

    pub fn contains(&self, id: PlayerId) -> bool {
        self.by_player.contains_key(&id)
    }

    /// A player's records with `gw <= through_week`, in week order.
    pub fn history(&self, id: PlayerId, through_week: u8) -> Result<Vec<&PlayerWeekRecord>> {
        let rows = self.by_player.get(&id).ok_or(Error::UnknownPlayer(id))?;
        Ok(rows.iter().map(|&i| &self.records[i]).take_while(|r| r.gw <= through_week).collect())
    }

    /// Points observations for weeks 1..=through_week. Weeks without a record
    /// are omitted; a double gameweek contributes one observation per fixture.
    pub fn points_series(&self, id: PlayerId, through_week: u8) -> Result<Vec<i32>> {
        if through_week > self.season_length {
            return Err(Error::invalid(format!("through_week {through_week} beyond season")));
        }
        Ok(self.history(id, through_week)?.into_iter().map(|r| r.total_points).collect())
    }

    pub fn availability(&self, id: PlayerId, gw: u8) -> Availability {
        match self.week_rows(id, gw).next() {
            Some(_) => Availability::Available,
            None => Availability::Unavailable,
        }
    }

    fn week_rows(&self, id: PlayerId, gw: u8) -> impl Iterator<Item = &PlayerWeekRecord> {
        self.by_player
            .get(&id)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
            .filter(move |r| r.gw == gw)
    }

    /// Realized points for a week, `None` when the player has no record.
    pub fn week_points(&self, id: PlayerId, gw: u8, policy: DoubleGameweek) -> Option<i32> {
        let mut rows = self.week_rows(id, gw);
        let first = rows.next()?.total_points;
        Some(match policy {
            DoubleGameweek::First => first,
            DoubleGameweek::Sum => first + rows.map(|r| r.total_points).sum::<i32>(),
        })
    }

    /// Latest record strictly before `gw`.
    pub fn latest_before(&self, id: PlayerId, gw: u8) -> Option<&PlayerWeekRecord> {
        self.by_player.get(&id)?.iter().map(|&i| &self.records[i]).take_while(|r| r.gw < gw).last()
    }

    /// Model-feature view over records with `gw <= through_week`.
    pub fn feature_view(&self, through_week: u8) -> FeatureView<'_> {
        FeatureView { panel: self, through_week }
    }

    /// Writes the normalized snapshot (see `docs/schema.md`).
    pub fn write_snapshot<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
        if !self.order_keys.iter().all(|(k, _)| k.is_empty()) && !self.outcomes.columns.iter().any(|c| c == "kickoff_time") {
            header.push("kickoff_time");
        }
        header.extend(self.outcomes.columns.iter().map(String::as_str));
        w.write_record(&header)?;
        let write_kickoff = header.len() > REQUIRED_COLUMNS.len() + self.outcomes.columns.len();
        for (i, r) in self.records.iter().enumerate() {
            let mut row = vec![
                r.player_id.to_string(),
                r.name.clone(),
                r.team.clone(),
                r.position.to_string(),
                r.gw.to_string(),
                r.total_points.to_string(),
                r.value.0.to_string(),
                r.minutes.to_string(),
                r.ict_index.to_string(),
                r.xg.to_string(),
                r.xa.to_string(),
                r.xgi.to_string(),
                r.xgc.to_string(),
                r.selected.to_string(),
                r.starts.to_string(),
            ];
            if write_kickoff {
                row.push(self.order_keys[i].0.clone());
            }
            row.extend(self.outcomes.rows[i].iter().cloned());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn parse_record<'a>(field: &dyn Fn(usize) -> &'a str, season_length: u8) -> std::result::Result<PlayerWeekRecord, String> {
    fn num<T: FromStr>(s: &str, col: &str) -> std::result::Result<T, String> {
        s.parse::<T>().map_err(|_| format!("column `{col}`: cannot parse `{s}`"))
    }
    let real = |k: usize| -> std::result::Result<f64, String> {
        let v: f64 = num(field(k), REQUIRED_COLUMNS[k])?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("column `{}`: non-finite value", REQUIRED_COLUMNS[k]))
        }
    };
    let player_id = PlayerId(num(field(0), "element")?);
    let name = field(1).to_string();
    let team = field(2).to_string();
    if team.is_empty() {
        return Err("column `team`: empty".into());
    }
    let position = field(3).parse::<Position>().map_err(|e| e.to_string())?;
    let gw: u8 = num(field(4), "GW")?;
    if gw == 0 || gw > season_length {
        return Err(format!("gameweek {gw} outside 1..={season_length}"));
    }
    let total_points = num(field(5), "total_points")?;
    let raw_value: f64 = num(field(6), "value")?;
    if !(raw_value > 0.0) || raw_value.fract() != 0.0 {
        return Err(format!("column `value`: expected a positive integer number of tenths, got `{}`", field(6)));
    }
    let minutes = num(field(7), "minutes")?;
    let starts: u8 = match field(14) {
        "True" | "true" => 1,
        "False" | "false" => 0,
        s => num(s, "starts")?,
    };
    Ok(PlayerWeekRecord {
        player_id,
        name,
        team,
        position,
        gw,
        total_points,
        value: Price(raw_value as u32),
        minutes,
        ict_index: real(8)?,
        xg: real(9)?,
        xa: real(10)?,
        xgi: real(11)?,
        xgc: real(12)?,
        selected: real(13)?,
        starts,
    })
}

/// Read-only access to the model features of the training window. This is the
/// only record access the feature-based models get.
#[derive(Clone, Copy)]
pub struct FeatureView<'a> {
    panel: &'a Panel,
    through_week: u8,
}

impl<'a> FeatureView<'a> {
    pub fn columns() -> &'static [&'static str] {
        &FEATURE_COLUMNS
    }

    pub fn through_week(&self) -> u8 {
        self.through_week
    }

    /// Per-fixture feature rows for a player, in week order.
    pub fn rows(&self, id: PlayerId) -> Vec<[f64; 7]> {
        self.panel
            .history(id, self.through_week)
            .map(|rows| rows.into_iter().map(|r| std::array::from_fn(|k| r.feature(k))).collect())
            .unwrap_or_default()
    }

    /// Mean of each feature over the player's rows, `None` without rows.
    pub fn means(&self, id: PlayerId) -> Option<[f64; 7]> {
        let rows = self.rows(id);
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        Some(std::array::from_fn(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n))
    }

    /// Values of one feature column over the player's rows.
    pub fn column(&self, id: PlayerId, name: &str) -> Option<Vec<f64>> {
        let k = FEATURE_COLUMNS.iter().position(|c| *c == name)?;
        Some(self.rows(id).into_iter().map(|r| r[k]).collect())
    }
}

/// One optimizer row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub player_id: PlayerId,
    pub name: String,
    pub team: String,
    pub position: Position,
    pub price: Price,
    /// Objective coefficient c_j.
    pub expected_points: f64,
    /// Box half-width d_j (>= 0).
    pub margin: f64,
    /// History-only expected points, used for bench selection and substitutions.
    pub bench_score: f64,
}

impl PoolEntry {
    pub fn value_m(&self) -> f64 {
        self.price.millions()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerPool {
    pub target_gw: u8,
    pub entries: Vec<PoolEntry>,
}

impl PlayerPool {
    pub fn get(&self, id: PlayerId) -> Option<&PoolEntry> {
        self.entries.iter().find(|e| e.player_id == id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Overrides the bench coefficients; players absent from the map keep their
    /// expected points.
    pub fn set_bench_scores(&mut self, scores: &BTreeMap<PlayerId, f64>) {
        for e in &mut self.entries {
            if let Some(s) = scores.get(&e.player_id) {
                e.bench_score = *s;
            }
        }
    }
}

/// Builds the optimizer's pool for `target_gw`.
///
/// Every player with a record before `target_gw` is pooled with the name, club,
/// position and price of their latest such record. Players without a score are
/// dropped (counted in the log); a missing margin means 0.
pub fn build_pool(
    panel: &Panel,
    target_gw: u8,
    scores: &BTreeMap<PlayerId, f64>,
    margins: &BTreeMap<PlayerId, f64>,
) -> Result<PlayerPool> {
    if target_gw < 2 || target_gw > panel.season_length() {
        return Err(Error::invalid(format!(
            "target gameweek {target_gw} outside 2..={}",
            panel.season_length()
        )));
    }
    let mut entries = Vec::new();
    let mut unscored = 0usize;
    for id in panel.players() {
        let Some(latest) = panel.latest_before(id, target_gw) else { continue };
        let Some(&score) = scores.get(&id) else {
            unscored += 1;
            continue;
        };
        let margin = margins.get(&id).copied().unwrap_or(0.0);
        if !(margin >= 0.0) {
            return Err(Error::invalid(format!("negative margin {margin} for player {id}")));
        }
        entries.push(PoolEntry {
            player_id: id,
            name: latest.name.clone(),
            team: latest.team.clone(),
            position: latest.position,
            price: latest.value,
            expected_points: score,
            margin,
            bench_score: score,
        });
    }
    if unscored > 0 {
        log::warn!("gameweek {target_gw}: {unscored} pooled players had no score and were dropped");
    }
    if entries.is_empty() {
        return Err(Error::EmptyPool(target_gw));
    }
    Ok(PlayerPool { target_gw, entries })
}
