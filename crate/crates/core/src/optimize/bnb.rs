//! Depth-first branch-and-bound for small 0-1 programs with integer rows.

use std::cmp::Ordering;
use std::time::Instant;

use super::lp::{self, LpStatus, Sense};

/// Objective values closer than this are ties.
pub(crate) const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coef: Vec<i64>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub obj: Vec<f64>,
    pub rows: Vec<Row>,
    /// Items forced to 1.
    pub forced: Vec<usize>,
    /// Constant added to every solution's bound.
    pub offset: f64,
}

/// A complete candidate, already scored canonically by the caller.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidate {
    pub objective: f64,
    pub cost: u32,
    /// Sorted ids of the selected items.
    pub ids: Vec<u32>,
    pub tag: u32,
}

/// Objective first, then lower cost, then the lexicographically smaller id set.
pub(crate) fn compare(a: &Candidate, b: &Candidate) -> Ordering {
    if a.objective > b.objective + TIE_TOL {
        return Ordering::Greater;
    }
    if a.objective < b.objective - TIE_TOL {
        return Ordering::Less;
    }
    b.cost.cmp(&a.cost).then_with(|| b.ids.cmp(&a.ids)).then_with(|| b.tag.cmp(&a.tag))
}

#[derive(Debug, Default)]
pub(crate) struct Search {
    pub best: Option<Candidate>,
    pub nodes: u64,
    pub timed_out: bool,
}

impl Search {
    pub fn offer(&mut self, cand: Candidate) {
        let better = match &self.best {
            None => true,
            Some(b) => compare(&cand, b) == Ordering::Greater,
        };
        if better {
            self.best = Some(cand);
        }
    }

    fn prunes(&self, bound: f64) -> bool {
        match &self.best {
            Some(b) => bound < b.objective - 2.0 * TIE_TOL - 1e-9 * b.objective.abs(),
            None => false,
        }
    }
}

/// Explores `prog`, offering every improving feasible selection to `search`
/// via `score` (which maps a sorted selection to a candidate).
pub(crate) fn branch_and_bound(
    prog: &Program,
    search: &mut Search,
    deadline: Option<Instant>,
    score: &dyn Fn(&[usize]) -> Candidate,
) {
    let n = prog.obj.len();
    let mut fixed: Vec<i8> = vec![-1; n];
    for &f in &prog.forced {
        fixed[f] = 1;
    }
    node(prog, &mut fixed, search, deadline, score);
}

fn node(
    prog: &Program,
    fixed: &mut Vec<i8>,
    search: &mut Search,
    deadline: Option<Instant>,
    score: &dyn Fn(&[usize]) -> Candidate,
) {
    if search.timed_out {
        return;
    }
    search.nodes += 1;
    if search.nodes % 64 == 0 {
        if let Some(d) = deadline {
            if Instant::now() >= d {
                search.timed_out = true;
                return;
            }
        }
    }
    let mut rhs: Vec<i64> = prog.rows.iter().map(|r| r.rhs).collect();
    let mut constant = prog.offset;
    for (i, &f) in fixed.iter().enumerate() {
        if f == 1 {
            constant += prog.obj[i];
            for (r, row) in prog.rows.iter().enumerate() {
                rhs[r] -= row.coef[i];
            }
        }
    }
    // items that no longer fit a nonnegative capacity row are fixed to 0 here
    let mut zeroed = Vec::new();
    for (r, row) in prog.rows.iter().enumerate() {
        if row.sense == Sense::Ge {
            continue;
        }
        let nonneg = (0..fixed.len()).all(|i| fixed[i] >= 0 || row.coef[i] >= 0);
        if !nonneg {
            continue;
        }
        for i in 0..fixed.len() {
            if fixed[i] < 0 && row.coef[i] > rhs[r] {
                fixed[i] = 0;
                zeroed.push(i);
            }
        }
    }
    explore(prog, fixed, search, deadline, score, rhs, constant);
    for i in zeroed {
        fixed[i] = -1;
    }
}

#[allow(clippy::too_many_arguments)]
fn explore(
    prog: &Program,
    fixed: &mut Vec<i8>,
    search: &mut Search,
    deadline: Option<Instant>,
    score: &dyn Fn(&[usize]) -> Candidate,
    rhs: Vec<i64>,
    constant: f64,
) {
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i] < 0).collect();
    // rows that no free item touches must already hold
    let mut live_rows = Vec::new();
    for (r, row) in prog.rows.iter().enumerate() {
        let touched = free.iter().any(|&i| row.coef[i] != 0);
        if touched {
            live_rows.push(r);
        } else {
            let ok = match row.sense {
                Sense::Le => rhs[r] >= 0,
                Sense::Ge => rhs[r] <= 0,
                Sense::Eq => rhs[r] == 0,
            };
            if !ok {
                return;
            }
        }
    }
    if free.is_empty() {
        let sel: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i] == 1).collect();
        search.offer(score(&sel));
        return;
    }

    let nf = free.len();
    let c: Vec<f64> = free.iter().map(|&i| prog.obj[i]).collect();
    let mut a = Vec::with_capacity(live_rows.len() * nf);
    for &r in &live_rows {
        a.extend(free.iter().map(|&i| prog.rows[r].coef[i] as f64));
    }
    let sense: Vec<Sense> = live_rows.iter().map(|&r| prog.rows[r].sense).collect();
    let b: Vec<f64> = live_rows.iter().map(|&r| rhs[r] as f64).collect();
    let sol = lp::solve(nf, &c, &a, &sense, &b);
    if sol.status == LpStatus::Infeasible {
        return;
    }
    if sol.status == LpStatus::Optimal {
        let bound = constant + lp::dual_bound(nf, &c, &a, &sense, &b, &sol.duals);
        if search.prunes(bound) {
            return;
        }
    }

    // branch on the most valuable fractional item, else on a chosen item
    let frac = free
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let v = sol.x[*k];
            v > 1e-6 && v < 1.0 - 1e-6
        })
        .max_by(|(ka, ia), (kb, ib)| {
            prog.obj[**ia].total_cmp(&prog.obj[**ib]).then(sol.x[*ka].total_cmp(&sol.x[*kb]))
        })
        .map(|(_, &i)| i);
    let integral = frac.is_none() && sol.status == LpStatus::Optimal;
    if integral {
        let mut sel: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i] == 1).collect();
        sel.extend(free.iter().enumerate().filter(|(k, _)| sol.x[*k] > 0.5).map(|(_, &i)| i));
        sel.sort_unstable();
        if feasible(prog, &sel) {
            search.offer(score(&sel));
        }
    }
    let pick = frac.or_else(|| {
        // integral (or failed) relaxation: fix a selected item, keep exploring
        // alternatives so equal-objective ties are resolved exactly
        free.iter()
            .enumerate()
            .filter(|(k, _)| sol.x[*k] > 0.5)
            .map(|(_, &i)| i)
            .next()
            .or_else(|| free.first().copied())
    });
    let Some(j) = pick else { return };
    for v in [1i8, 0] {
        fixed[j] = v;
        node(prog, fixed, search, deadline, score);
        fixed[j] = -1;
        if search.timed_out {
            return;
        }
    }
}

pub(crate) fn feasible(prog: &Program, sel: &[usize]) -> bool {
    prog.rows.iter().all(|row| {
        let lhs: i64 = sel.iter().map(|&i| row.coef[i]).sum();
        match row.sense {
            Sense::Le => lhs <= row.rhs,
            Sense::Ge => lhs >= row.rhs,
            Sense::Eq => lhs == row.rhs,
        }
    })
}
