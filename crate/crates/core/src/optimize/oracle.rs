use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::panel::{PlayerId, PoolEntry, Price};

use super::bnb::{compare, Candidate};
use super::{assemble, bench_objective, xi_objective, BenchSolution, InfeasibilityReport, SelectionProblem, XiSolution};

pub const ORACLE_MAX_POOL: usize = 22;

/// Exhaustive XI, captain and bench enumeration. Test use only; refuses pools
/// above 22 selectable players.
pub fn brute_force_oracle(problem: &SelectionProblem) -> Result<super::SquadSolution> {
    let start = Instant::now();
    let xi = oracle_xi(problem, false)?;
    let bench = oracle_bench(problem, &xi)?;
    Ok(assemble(problem, xi, bench, start.elapsed()))
}

/// Same enumeration visiting players in the opposite order.
pub fn brute_force_oracle_reversed(problem: &SelectionProblem) -> Result<super::SquadSolution> {
    let start = Instant::now();
    let xi = oracle_xi(problem, true)?;
    let bench = oracle_bench(problem, &xi)?;
    Ok(assemble(problem, xi, bench, start.elapsed()))
}

fn subsets(n: usize, k: usize, reverse: bool, visit: &mut dyn FnMut(&[usize])) {
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in from..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, k, i + 1, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    if reverse {
        rec(n, k, 0, &mut cur, &mut |s: &[usize]| {
            let r: Vec<usize> = s.iter().rev().map(|&i| n - 1 - i).collect();
            visit(&r)
        });
    } else {
        rec(n, k, 0, &mut cur, visit);
    }
}

fn better(best: &Option<Candidate>, cand: &Candidate) -> bool {
    match best {
        None => true,
        Some(b) => compare(cand, b) == Ordering::Greater,
    }
}

fn oracle_xi(problem: &SelectionProblem, reverse: bool) -> Result<XiSolution> {
    problem.check()?;
    let cand: Vec<&PoolEntry> =
        problem.pool.entries.iter().filter(|e| !problem.excludes.contains(&e.player_id)).collect();
    if cand.len() > ORACLE_MAX_POOL {
        return Err(Error::invalid(format!("oracle refuses pools above {ORACLE_MAX_POOL} players")));
    }
    let coef: BTreeMap<PlayerId, f64> = cand.iter().map(|e| (e.player_id, problem.xi_coefficient(e))).collect();
    let mut club_names: Vec<&str> = cand.iter().map(|e| e.team.as_str()).collect();
    club_names.sort_unstable();
    club_names.dedup();
    let club: Vec<usize> = cand.iter().map(|e| club_names.binary_search(&e.team.as_str()).unwrap()).collect();
    let locked: Vec<bool> = cand.iter().map(|e| problem.locks.contains(&e.player_id)).collect();
    let n_locked = locked.iter().filter(|&&l| l).count();
    let mut best: Option<Candidate> = None;
    let mut visited = 0u64;
    subsets(cand.len(), 11, reverse, &mut |s| {
        visited += 1;
        if s.iter().filter(|&&i| locked[i]).count() != n_locked {
            return;
        }
        let cost: u32 = s.iter().map(|&i| cand[i].price.0).sum();
        if cost > problem.budget.0 {
            return;
        }
        let mut counts = [0u8; 4];
        let mut clubs = [0u8; ORACLE_MAX_POOL];
        for &i in s {
            counts[cand[i].position.index()] += 1;
            clubs[club[i]] += 1;
        }
        if !problem.limits.allows(counts) || clubs.iter().any(|&c| c > problem.club_quota) {
            return;
        }
        let mut ids: Vec<PlayerId> = s.iter().map(|&i| cand[i].player_id).collect();
        ids.sort_unstable();
        for &captain in &ids {
            let c = Candidate {
                objective: xi_objective(&coef, &ids, captain),
                cost,
                ids: ids.iter().map(|i| i.0).collect(),
                tag: captain.0,
            };
            if better(&best, &c) {
                best = Some(c);
            }
        }
    });
    let best = best.ok_or_else(|| {
        Error::Infeasible(InfeasibilityReport { resource: "oracle".into(), message: "no legal XI".into() })
    })?;
    Ok(XiSolution {
        xi: best.ids.iter().map(|&i| PlayerId(i)).collect(),
        captain: PlayerId(best.tag),
        objective: best.objective,
        cost: Price(best.cost),
        optimal: true,
        nodes: visited,
    })
}

fn oracle_bench(problem: &SelectionProblem, xi: &XiSolution) -> Result<BenchSolution> {
    let rest: Vec<&PoolEntry> = problem
        .pool
        .entries
        .iter()
        .filter(|e| !xi.xi.contains(&e.player_id) && !problem.excludes.contains(&e.player_id))
        .collect();
    let xi_entries: Vec<&PoolEntry> = xi.xi.iter().filter_map(|id| problem.pool.get(*id)).collect();
    let allowance = problem.bench_allowance(xi.cost);
    let coef: BTreeMap<PlayerId, f64> = rest.iter().map(|e| (e.player_id, e.bench_score)).collect();
    let mut best: Option<Candidate> = None;
    subsets(rest.len(), 4, false, &mut |s| {
        let bench: Vec<&PoolEntry> = s.iter().map(|&i| rest[i]).collect();
        let cost: u32 = bench.iter().map(|e| e.price.0).sum();
        if cost > allowance.0 {
            return;
        }
        let mut counts = [0u8; 4];
        let mut clubs: BTreeMap<&str, u8> = BTreeMap::new();
        for e in bench.iter().chain(&xi_entries) {
            counts[e.position.index()] += 1;
            *clubs.entry(e.team.as_str()).or_default() += 1;
        }
        if counts != problem.limits.squad || clubs.values().any(|&c| c > problem.club_quota) {
            return;
        }
        let mut ids: Vec<PlayerId> = bench.iter().map(|e| e.player_id).collect();
        ids.sort_unstable();
        let c = Candidate {
            objective: bench_objective(&coef, &ids),
            cost,
            ids: ids.iter().map(|i| i.0).collect(),
            tag: 0,
        };
        if better(&best, &c) {
            best = Some(c);
        }
    });
    let best = best.ok_or_else(|| {
        Error::Infeasible(InfeasibilityReport { resource: "oracle".into(), message: "no legal bench".into() })
    })?;
    Ok(BenchSolution {
        bench: best.ids.iter().map(|&i| PlayerId(i)).collect(),
        objective: best.objective,
        cost: Price(best.cost),
        optimal: true,
        nodes: 0,
    })
}
