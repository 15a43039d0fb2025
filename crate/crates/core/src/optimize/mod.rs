//! Exact squad selection: starting XI with captain, bench completion and the
//! box-robust variant.

mod bnb;
mod dominance;
mod lp;
mod oracle;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::forecast::CostVector;
use crate::panel::{PlayerId, PlayerPool, PoolEntry, Position, Price};

use bnb::{Candidate, Program, Row, Search};
use dominance::DomItem;
use lp::Sense;

pub use oracle::{brute_force_oracle, brute_force_oracle_reversed};
pub use validate::{validate, Violation};

pub const DEFAULT_BUDGET: Price = Price(835);
pub const SQUAD_BUDGET: Price = Price(1000);
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormationLimits {
    /// Indexed by [`Position::index`].
    pub min: [u8; 4],
    pub max: [u8; 4],
    pub squad: [u8; 4],
}

impl Default for FormationLimits {
    fn default() -> Self {
        FormationLimits { min: [1, 3, 2, 1], max: [1, 5, 5, 3], squad: [2, 5, 5, 3] }
    }
}

impl FormationLimits {
    pub fn validate(&self) -> Result<()> {
        let lo: u32 = self.min.iter().map(|&v| u32::from(v)).sum();
        let hi: u32 = self.max.iter().map(|&v| u32::from(v)).sum();
        let sq: u32 = self.squad.iter().map(|&v| u32::from(v)).sum();
        if lo > 11 || hi < 11 || sq != 15 {
            return Err(Error::invalid("formation limits must admit 11 starters in a 15-player squad"));
        }
        for k in 0..4 {
            if self.min[k] > self.max[k] || self.max[k] > self.squad[k] {
                return Err(Error::invalid("formation limits: min <= max <= squad total per position"));
            }
        }
        Ok(())
    }

    pub fn allows(&self, counts: [u8; 4]) -> bool {
        (0..4).all(|k| counts[k] >= self.min[k] && counts[k] <= self.max[k])
    }
}

/// How much money the bench may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchBudget {
    /// Whatever the XI left of the squad budget.
    #[default]
    Remaining,
    /// The squad budget minus the XI budget `b`.
    Fixed,
}

impl std::str::FromStr for BenchBudget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "remaining" => Ok(BenchBudget::Remaining),
            "fixed" => Ok(BenchBudget::Fixed),
            o => Err(Error::invalid(format!("bench budget policy `{o}` is not remaining|fixed"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionProblem {
    pub pool: PlayerPool,
    pub budget: Price,
    pub limits: FormationLimits,
    pub club_quota: u8,
    pub robust: bool,
    pub locks: BTreeSet<PlayerId>,
    pub excludes: BTreeSet<PlayerId>,
    pub bench_budget: BenchBudget,
    pub squad_budget: Price,
    pub time_limit: Duration,
}

impl SelectionProblem {
    pub fn new(pool: PlayerPool, budget: Price) -> Self {
        SelectionProblem {
            pool,
            budget,
            limits: FormationLimits::default(),
            club_quota: 3,
            robust: false,
            locks: BTreeSet::new(),
            excludes: BTreeSet::new(),
            bench_budget: BenchBudget::default(),
            squad_budget: SQUAD_BUDGET,
            time_limit: DEFAULT_TIME_LIMIT,
        }
    }

    pub fn check(&self) -> Result<()> {
        self.limits.validate()?;
        if self.budget.0 == 0 {
            return Err(Error::invalid("budget must be positive"));
        }
        if self.locks.len() > 11 {
            return Err(Error::invalid(format!("{} locks exceed the 11 starting places", self.locks.len())));
        }
        if let Some(id) = self.locks.intersection(&self.excludes).next() {
            return Err(Error::invalid(format!("player {id} is both locked and excluded")));
        }
        for id in &self.locks {
            if self.pool.get(*id).is_none() {
                return Err(Error::UnknownPlayer(*id));
            }
        }
        if self.pool.is_empty() {
            return Err(Error::EmptyPool(self.pool.target_gw));
        }
        Ok(())
    }

    /// Objective coefficient of a starter.
    pub fn xi_coefficient(&self, e: &PoolEntry) -> f64 {
        if self.robust {
            e.expected_points - e.margin
        } else {
            e.expected_points
        }
    }

    /// Bench allowance given the XI spend.
    pub fn bench_allowance(&self, xi_cost: Price) -> Price {
        match self.bench_budget {
            BenchBudget::Remaining => Price(self.squad_budget.0.saturating_sub(xi_cost.0)),
            BenchBudget::Fixed => Price(self.squad_budget.0.saturating_sub(self.budget.0)),
        }
    }
}

/// The first resource found exhausted when no legal selection exists.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("infeasible ({resource}): {message}")]
pub struct InfeasibilityReport {
    pub resource: String,
    pub message: String,
}

impl InfeasibilityReport {
    fn new(resource: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Infeasible(InfeasibilityReport { resource: resource.into(), message: message.into() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiSolution {
    /// Sorted by id.
    pub xi: Vec<PlayerId>,
    pub captain: PlayerId,
    pub objective: f64,
    pub cost: Price,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSolution {
    /// Sorted by id.
    pub bench: Vec<PlayerId>,
    pub objective: f64,
    pub cost: Price,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadSolution {
    pub xi: Vec<PlayerId>,
    pub captain: PlayerId,
    pub bench: Vec<PlayerId>,
    /// (DEF, MID, FWD) starters.
    pub formation: (u8, u8, u8),
    pub objective: f64,
    pub bench_objective: f64,
    pub xi_cost: Price,
    pub bench_cost: Price,
    pub optimal: bool,
    pub stats: SolveStats,
}

impl SquadSolution {
    pub fn formation_label(&self) -> String {
        format!("{}-{}-{}", self.formation.0, self.formation.1, self.formation.2)
    }

    pub fn squad(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.xi.iter().chain(&self.bench).copied()
    }
}

/// XI objective summed in ascending id order, plus the captain once more.
pub fn xi_objective(coef: &BTreeMap<PlayerId, f64>, xi: &[PlayerId], captain: PlayerId) -> f64 {
    let mut ids = xi.to_vec();
    ids.sort_unstable();
    let mut total = 0.0;
    for id in &ids {
        total += coef[id];
    }
    total + coef[&captain]
}

/// Bench objective summed in ascending id order.
pub fn bench_objective(coef: &BTreeMap<PlayerId, f64>, bench: &[PlayerId]) -> f64 {
    let mut ids = bench.to_vec();
    ids.sort_unstable();
    let mut total = 0.0;
    for id in &ids {
        total += coef[id];
    }
    total
}

/// `c̄_j − d_j`: the worst case of the box `[c̄ − d, c̄ + d]` for a maximization
/// with nonnegative selection variables.
pub fn robust_coefficients(scores: &CostVector) -> BTreeMap<PlayerId, f64> {
    scores
        .scores
        .iter()
        .map(|(id, c)| (*id, c - scores.margins.get(id).copied().unwrap_or(0.0)))
        .collect()
}

fn club_index(entries: &[&PoolEntry]) -> (Vec<String>, Vec<usize>) {
    let mut clubs: Vec<String> = entries.iter().map(|e| e.team.clone()).collect();
    clubs.sort();
    clubs.dedup();
    let idx = entries.iter().map(|e| clubs.binary_search(&e.team).expect("club present")).collect();
    (clubs, idx)
}

/// Greedy lower bound on the cost of filling `need[p]` slots (with `extra`
/// more from positions below `room[p]`).
fn cheapest(by_pos: &[Vec<u32>; 4], need: [usize; 4], room: [usize; 4], extra: usize) -> Option<u32> {
    let mut total = 0u32;
    let mut rest: Vec<u32> = Vec::new();
    for p in 0..4 {
        let prices = &by_pos[p];
        if prices.len() < need[p] {
            return None;
        }
        total += prices[..need[p]].iter().sum::<u32>();
        let more = room[p].saturating_sub(need[p]).min(prices.len() - need[p]);
        rest.extend_from_slice(&prices[need[p]..need[p] + more]);
    }
    rest.sort_unstable();
    if rest.len() < extra {
        return None;
    }
    Some(total + rest[..extra].iter().sum::<u32>())
}

fn probe_xi(problem: &SelectionProblem, cand: &[&PoolEntry]) -> Result<()> {
    let lim = &problem.limits;
    let locked: Vec<&PoolEntry> = cand.iter().copied().filter(|e| problem.locks.contains(&e.player_id)).collect();
    let mut lock_pos = [0usize; 4];
    let mut lock_clubs: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &locked {
        lock_pos[e.position.index()] += 1;
        *lock_clubs.entry(e.team.as_str()).or_default() += 1;
    }
    for p in Position::ALL {
        if lock_pos[p.index()] > usize::from(lim.max[p.index()]) {
            return Err(InfeasibilityReport::new(
                format!("formation:{p}"),
                format!("{} locked {p} exceed the maximum of {}", lock_pos[p.index()], lim.max[p.index()]),
            ));
        }
    }
    for (club, n) in &lock_clubs {
        if *n > usize::from(problem.club_quota) {
            return Err(InfeasibilityReport::new(
                format!("club:{club}"),
                format!("{n} locked players from {club} exceed the quota of {}", problem.club_quota),
            ));
        }
    }
    let lock_cost: u32 = locked.iter().map(|e| e.price.0).sum();
    if lock_cost > problem.budget.0 {
        return Err(InfeasibilityReport::new(
            "budget",
            format!("locked players cost £{} > budget £{}", Price(lock_cost), problem.budget),
        ));
    }
    let mut by_pos: [Vec<u32>; 4] = Default::default();
    for e in cand.iter().filter(|e| !problem.locks.contains(&e.player_id)) {
        by_pos[e.position.index()].push(e.price.0);
    }
    for v in by_pos.iter_mut() {
        v.sort_unstable();
    }
    let mut need = [0usize; 4];
    let mut room = [0usize; 4];
    for p in Position::ALL {
        let k = p.index();
        need[k] = usize::from(lim.min[k]).saturating_sub(lock_pos[k]);
        room[k] = usize::from(lim.max[k]) - lock_pos[k];
        if by_pos[k].len() < need[k] {
            return Err(InfeasibilityReport::new(
                format!("position:{p}"),
                format!("only {} selectable {p} for a minimum of {}", by_pos[k].len() + lock_pos[k], lim.min[k]),
            ));
        }
    }
    let extra = 11 - locked.len() - need.iter().sum::<usize>();
    let Some(cost) = cheapest(&by_pos, need, room, extra) else {
        return Err(InfeasibilityReport::new("squad_size", "not enough selectable players for eleven starters"));
    };
    if cost + lock_cost > problem.budget.0 {
        return Err(InfeasibilityReport::new(
            "budget",
            format!("the cheapest legal XI costs £{} > budget £{}", Price(cost + lock_cost), problem.budget),
        ));
    }
    Ok(())
}

/// Solves the XI + captain program exactly.
pub fn solve_xi(problem: &SelectionProblem) -> Result<XiSolution> {
    problem.check()?;
    let deadline = Instant::now() + problem.time_limit;
    let cand: Vec<&PoolEntry> =
        problem.pool.entries.iter().filter(|e| !problem.excludes.contains(&e.player_id)).collect();
    probe_xi(problem, &cand)?;
    let coef: Vec<f64> = cand.iter().map(|e| problem.xi_coefficient(e)).collect();
    let (clubs, club_of) = club_index(&cand);
    let quota = usize::from(problem.club_quota);

    let dom: Vec<DomItem> = cand
        .iter()
        .enumerate()
        .map(|(k, e)| DomItem {
            position: e.position.index(),
            club: club_of[k],
            obj: coef[k],
            cost: e.price.0,
            id: e.player_id.0,
            locked: problem.locks.contains(&e.player_id),
        })
        .collect();
    let pos_max = problem.limits.max.map(usize::from);
    let keep = dominance::reduce(&dom, &pos_max, 11, &vec![quota; clubs.len()]);
    let mut ranked: Vec<usize> = (0..cand.len()).filter(|&k| keep[k]).collect();
    ranked.sort_by(|&a, &b| coef[b].total_cmp(&coef[a]).then(cand[a].player_id.cmp(&cand[b].player_id)));
    log::debug!("xi: {} of {} candidates survive dominance", ranked.len(), cand.len());

    let coef_map: BTreeMap<PlayerId, f64> = cand.iter().zip(&coef).map(|(e, c)| (e.player_id, *c)).collect();
    let mut search = Search::default();
    let first_lock = ranked.iter().position(|&k| dom[k].locked);

    for (r, &j) in ranked.iter().enumerate() {
        if first_lock.is_some_and(|f| f < r) {
            break;
        }
        if let Some(best) = &search.best {
            let top: f64 = ranked[r + 1..].iter().take(10).map(|&k| coef[k]).sum();
            if 2.0 * coef[j] + top < best.objective - 1e-6 {
                break;
            }
        }
        let items: Vec<usize> = ranked[r..].to_vec();
        if items.len() < 11 {
            break;
        }
        let prog = xi_program(problem, &cand, &coef, &club_of, clubs.len(), &items, &dom);
        let score = |sel: &[usize]| -> Candidate {
            let mut ids: Vec<PlayerId> = sel.iter().map(|&s| cand[items[s]].player_id).collect();
            ids.sort_unstable();
            let cost: u32 = sel.iter().map(|&s| cand[items[s]].price.0).sum();
            let captain = cand[j].player_id;
            Candidate {
                objective: xi_objective(&coef_map, &ids, captain),
                cost,
                ids: ids.iter().map(|i| i.0).collect(),
                tag: captain.0,
            }
        };
        bnb::branch_and_bound(&prog, &mut search, Some(deadline), &score);
        if search.timed_out {
            log::warn!("xi search hit the {:?} time limit", problem.time_limit);
            break;
        }
    }
    let Some(best) = search.best else {
        if search.timed_out {
            return Err(InfeasibilityReport::new("time", "no XI found within the time limit"));
        }
        return Err(InfeasibilityReport::new(
            "club_quota",
            "no XI satisfies budget, formation and club quota together",
        ));
    };
    Ok(XiSolution {
        xi: best.ids.iter().map(|&i| PlayerId(i)).collect(),
        captain: PlayerId(best.tag),
        objective: best.objective,
        cost: Price(best.cost),
        optimal: !search.timed_out,
        nodes: search.nodes,
    })
}

fn xi_program(
    problem: &SelectionProblem,
    cand: &[&PoolEntry],
    coef: &[f64],
    club_of: &[usize],
    clubs: usize,
    items: &[usize],
    dom: &[DomItem],
) -> Program {
    let lim = &problem.limits;
    let mut rows = vec![
        Row { coef: vec![1; items.len()], sense: Sense::Eq, rhs: 11 },
        Row { coef: items.iter().map(|&k| i64::from(cand[k].price.0)).collect(), sense: Sense::Le, rhs: i64::from(problem.budget.0) },
    ];
    for p in Position::ALL {
        let col: Vec<i64> = items.iter().map(|&k| i64::from(cand[k].position == p)).collect();
        let count: i64 = col.iter().sum();
        let (lo, hi) = (i64::from(lim.min[p.index()]), i64::from(lim.max[p.index()]));
        if lo > 0 {
            rows.push(Row { coef: col.clone(), sense: Sense::Ge, rhs: lo });
        }
        if count > hi {
            rows.push(Row { coef: col, sense: Sense::Le, rhs: hi });
        }
    }
    for c in 0..clubs {
        let col: Vec<i64> = items.iter().map(|&k| i64::from(club_of[k] == c)).collect();
        if col.iter().sum::<i64>() > i64::from(problem.club_quota) {
            rows.push(Row { coef: col, sense: Sense::Le, rhs: i64::from(problem.club_quota) });
        }
    }
    let mut forced = vec![0];
    forced.extend((1..items.len()).filter(|&s| dom[items[s]].locked));
    Program {
        obj: items.iter().map(|&k| coef[k]).collect(),
        rows,
        forced,
        offset: coef[items[0]],
    }
}

/// Completes the 15-player squad around `xi`.
pub fn solve_bench(problem: &SelectionProblem, xi: &XiSolution) -> Result<BenchSolution> {
    let deadline = Instant::now() + problem.time_limit;
    let lim = &problem.limits;
    let in_xi: BTreeSet<PlayerId> = xi.xi.iter().copied().collect();
    let mut xi_pos = [0u8; 4];
    let mut xi_club: BTreeMap<&str, u8> = BTreeMap::new();
    for id in &xi.xi {
        let e = problem.pool.get(*id).ok_or(Error::UnknownPlayer(*id))?;
        xi_pos[e.position.index()] += 1;
        *xi_club.entry(e.team.as_str()).or_default() += 1;
    }
    let mut need = [0usize; 4];
    for k in 0..4 {
        need[k] = usize::from(lim.squad[k].checked_sub(xi_pos[k]).ok_or_else(|| {
            Error::invalid(format!("XI holds more {} than the squad allows", Position::ALL[k]))
        })?);
    }
    let allowance = problem.bench_allowance(xi.cost);
    let quota = problem.club_quota;
    let cand: Vec<&PoolEntry> = problem
        .pool
        .entries
        .iter()
        .filter(|e| !in_xi.contains(&e.player_id) && !problem.excludes.contains(&e.player_id))
        .filter(|e| need[e.position.index()] > 0)
        .filter(|e| xi_club.get(e.team.as_str()).copied().unwrap_or(0) < quota)
        .collect();

    let mut by_pos: [Vec<u32>; 4] = Default::default();
    for e in &cand {
        by_pos[e.position.index()].push(e.price.0);
    }
    for p in Position::ALL {
        let k = p.index();
        by_pos[k].sort_unstable();
        if by_pos[k].len() < need[k] {
            return Err(InfeasibilityReport::new(
                format!("bench_position:{p}"),
                format!("only {} eligible {p} for {} bench places", by_pos[k].len(), need[k]),
            ));
        }
    }
    let cheapest_cost = cheapest(&by_pos, need, need, 0).unwrap_or(u32::MAX);
    if cheapest_cost > allowance.0 {
        return Err(InfeasibilityReport::new(
            "bench_budget",
            format!(
                "bench budget £{allowance} cannot cover the cheapest legal bench (£{}); the default XI budget of 83.5 leaves a 0.5 buffer above a minimum-price bench for this reason",
                Price(cheapest_cost)
            ),
        ));
    }

    let coef: Vec<f64> = cand.iter().map(|e| e.bench_score).collect();
    let (clubs, club_of) = club_index(&cand);
    let caps: Vec<usize> =
        clubs.iter().map(|c| usize::from(quota - xi_club.get(c.as_str()).copied().unwrap_or(0))).collect();
    let dom: Vec<DomItem> = cand
        .iter()
        .enumerate()
        .map(|(k, e)| DomItem {
            position: e.position.index(),
            club: club_of[k],
            obj: coef[k],
            cost: e.price.0,
            id: e.player_id.0,
            locked: false,
        })
        .collect();
    let total: usize = need.iter().sum();
    let keep = dominance::reduce(&dom, &need, total, &caps);
    let items: Vec<usize> = (0..cand.len()).filter(|&k| keep[k]).collect();

    let mut rows = vec![Row {
        coef: items.iter().map(|&k| i64::from(cand[k].price.0)).collect(),
        sense: Sense::Le,
        rhs: i64::from(allowance.0),
    }];
    for p in Position::ALL {
        if need[p.index()] > 0 {
            rows.push(Row {
                coef: items.iter().map(|&k| i64::from(cand[k].position == p)).collect(),
                sense: Sense::Eq,
                rhs: need[p.index()] as i64,
            });
        }
    }
    for (c, &cap) in caps.iter().enumerate() {
        let col: Vec<i64> = items.iter().map(|&k| i64::from(club_of[k] == c)).collect();
        if col.iter().sum::<i64>() > cap as i64 {
            rows.push(Row { coef: col, sense: Sense::Le, rhs: cap as i64 });
        }
    }
    let prog = Program {
        obj: items.iter().map(|&k| coef[k]).collect(),
        rows,
        forced: Vec::new(),
        offset: 0.0,
    };
    let coef_map: BTreeMap<PlayerId, f64> = cand.iter().zip(&coef).map(|(e, c)| (e.player_id, *c)).collect();
    let score = |sel: &[usize]| -> Candidate {
        let mut ids: Vec<PlayerId> = sel.iter().map(|&s| cand[items[s]].player_id).collect();
        ids.sort_unstable();
        Candidate {
            objective: bench_objective(&coef_map, &ids),
            cost: sel.iter().map(|&s| cand[items[s]].price.0).sum(),
            ids: ids.iter().map(|i| i.0).collect(),
            tag: 0,
        }
    };
    let mut search = Search::default();
    if total > 0 {
        bnb::branch_and_bound(&prog, &mut search, Some(deadline), &score);
    } else {
        search.best = Some(Candidate { objective: 0.0, cost: 0, ids: Vec::new(), tag: 0 });
    }
    let Some(best) = search.best else {
        return Err(InfeasibilityReport::new(
            "bench_club_quota",
            format!("no bench fits the £{allowance} allowance and the club quota together"),
        ));
    };
    Ok(BenchSolution {
        bench: best.ids.iter().map(|&i| PlayerId(i)).collect(),
        objective: best.objective,
        cost: Price(best.cost),
        optimal: !search.timed_out,
        nodes: search.nodes,
    })
}

/// Solves the XI, then the bench.
pub fn solve(problem: &SelectionProblem) -> Result<SquadSolution> {
    let start = Instant::now();
    let xi = solve_xi(problem)?;
    let bench = solve_bench(problem, &xi)?;
    Ok(assemble(problem, xi, bench, start.elapsed()))
}

pub(crate) fn assemble(problem: &SelectionProblem, xi: XiSolution, bench: BenchSolution, wall: Duration) -> SquadSolution {
    let mut counts = [0u8; 4];
    for id in &xi.xi {
        if let Some(e) = problem.pool.get(*id) {
            counts[e.position.index()] += 1;
        }
    }
    SquadSolution {
        formation: (counts[1], counts[2], counts[3]),
        objective: xi.objective,
        bench_objective: bench.objective,
        xi_cost: xi.cost,
        bench_cost: bench.cost,
        optimal: xi.optimal && bench.optimal,
        stats: SolveStats { nodes: xi.nodes + bench.nodes, wall_ms: wall.as_millis() as u64 },
        xi: xi.xi,
        captain: xi.captain,
        bench: bench.bench,
    }
}

impl SelectionProblem {
    /// Writes the problem header block.
    fn header(&self) -> String {
        format!(
            "# gw: {}\n# budget: {}\n# bench_budget: {}\n# club_quota: {}\n# robust: {}\n# locks: {}\n# excludes: {}\n",
            self.pool.target_gw,
            self.budget,
            match self.bench_budget {
                BenchBudget::Remaining => "remaining",
                BenchBudget::Fixed => "fixed",
            },
            self.club_quota,
            self.robust,
            join_ids(&self.locks),
            join_ids(&self.excludes),
        )
    }
}

fn join_ids(ids: &BTreeSet<PlayerId>) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// Diffable text form: a header block, then one row per player
/// (`slot,id,name,club,position,price,score`), starters by position.
pub fn write_solution<W: Write>(mut out: W, problem: &SelectionProblem, sol: &SquadSolution) -> Result<()> {
    out.write_all(problem.header().as_bytes())?;
    writeln!(out, "# formation: {}", sol.formation_label())?;
    writeln!(out, "# objective: {:.4}", sol.objective)?;
    writeln!(out, "# bench_objective: {:.4}", sol.bench_objective)?;
    writeln!(out, "# xi_cost: {}", sol.xi_cost)?;
    writeln!(out, "# bench_cost: {}", sol.bench_cost)?;
    writeln!(out, "# optimal: {}", sol.optimal)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["slot", "id", "name", "club", "position", "price", "score"])?;
    for (slot, e) in ordered_rows(problem, sol) {
        let score = if slot == "bench" { e.bench_score } else { problem.xi_coefficient(e) };
        w.write_record([
            slot,
            &e.player_id.to_string(),
            &e.name,
            &e.team,
            e.position.as_str(),
            &e.price.to_string(),
            &format!("{score:.4}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Starters ordered GK, DEF, MID, FWD (then id), followed by the bench by id.
pub fn ordered_rows<'a>(problem: &'a SelectionProblem, sol: &SquadSolution) -> Vec<(&'static str, &'a PoolEntry)> {
    let mut xi: Vec<&PoolEntry> = sol.xi.iter().filter_map(|id| problem.pool.get(*id)).collect();
    xi.sort_by_key(|e| (e.position, e.player_id));
    let mut rows: Vec<(&'static str, &PoolEntry)> =
        xi.into_iter().map(|e| (if e.player_id == sol.captain { "captain" } else { "starter" }, e)).collect();
    let mut bench: Vec<&PoolEntry> = sol.bench.iter().filter_map(|id| problem.pool.get(*id)).collect();
    bench.sort_by_key(|e| (e.position, e.player_id));
    rows.extend(bench.into_iter().map(|e| ("bench", e)));
    rows
}

impl fmt::Display for SquadSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} captain {} objective {:.4} bench [{}]",
            self.formation_label(),
            self.captain,
            self.objective,
            self.bench.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        )
    }
}
