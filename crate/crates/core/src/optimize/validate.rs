use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::panel::{PoolEntry, Position};

use super::{BenchBudget, SelectionProblem, SquadSolution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Re-checks every squad rule against the raw pool rows. An empty result means
/// the squad is legal.
pub fn validate(problem: &SelectionProblem, sol: &SquadSolution) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |rule: &'static str, detail: String| out.push(Violation { rule, detail });
    let lookup = |ids: &[crate::panel::PlayerId]| -> Vec<Option<&PoolEntry>> {
        ids.iter().map(|id| problem.pool.entries.iter().find(|e| e.player_id == *id)).collect()
    };
    let xi = lookup(&sol.xi);
    let bench = lookup(&sol.bench);
    if xi.iter().chain(&bench).any(Option::is_none) {
        fail("pool", "a selected player is not in the pool".into());
        return out;
    }
    let xi: Vec<&PoolEntry> = xi.into_iter().flatten().collect();
    let bench: Vec<&PoolEntry> = bench.into_iter().flatten().collect();

    let xi_set: BTreeSet<_> = sol.xi.iter().collect();
    if sol.xi.len() != 11 || xi_set.len() != 11 {
        fail("starters", format!("{} distinct of {} starters", xi_set.len(), sol.xi.len()));
    }
    if !xi_set.contains(&sol.captain) {
        fail("captain", format!("captain {} is not a starter", sol.captain));
    }
    let bench_set: BTreeSet<_> = sol.bench.iter().collect();
    if sol.bench.len() != 4 || bench_set.len() != 4 {
        fail("bench_size", format!("{} distinct of {} bench players", bench_set.len(), sol.bench.len()));
    }
    if xi_set.intersection(&bench_set).next().is_some() {
        fail("disjoint", "a player is both starter and reserve".into());
    }
    let xi_cost: u32 = xi.iter().map(|e| e.price.0).sum();
    let bench_cost: u32 = bench.iter().map(|e| e.price.0).sum();
    if xi_cost > problem.budget.0 {
        fail("budget", format!("XI costs {xi_cost} tenths > {}", problem.budget.0));
    }
    match problem.bench_budget {
        BenchBudget::Fixed => {
            let cap = problem.squad_budget.0.saturating_sub(problem.budget.0);
            if bench_cost > cap {
                fail("bench_budget", format!("bench costs {bench_cost} tenths > {cap}"));
            }
        }
        BenchBudget::Remaining => {
            if xi_cost + bench_cost > problem.squad_budget.0 {
                fail("bench_budget", format!("squad costs {} tenths > {}", xi_cost + bench_cost, problem.squad_budget.0));
            }
        }
    }
    let mut clubs: BTreeMap<&str, u8> = BTreeMap::new();
    for e in xi.iter().chain(&bench) {
        *clubs.entry(e.team.as_str()).or_default() += 1;
    }
    for (club, n) in clubs {
        if n > problem.club_quota {
            fail("club_quota", format!("{n} players from {club}"));
        }
    }
    let count = |set: &[&PoolEntry], p: Position| set.iter().filter(|e| e.position == p).count() as u8;
    for p in Position::ALL {
        let k = p.index();
        let n = count(&xi, p);
        if n < problem.limits.min[k] || n > problem.limits.max[k] {
            fail("formation", format!("{n} {p} starters outside [{}, {}]", problem.limits.min[k], problem.limits.max[k]));
        }
        let total = n + count(&bench, p);
        if total != problem.limits.squad[k] {
            fail("squad_totals", format!("{total} {p} in squad, need {}", problem.limits.squad[k]));
        }
    }
    for l in &problem.locks {
        if !xi_set.contains(l) {
            fail("locks", format!("locked player {l} not starting"));
        }
    }
    for x in &problem.excludes {
        if xi_set.contains(x) || bench_set.contains(x) {
            fail("excludes", format!("excluded player {x} selected"));
        }
    }
    out
}
