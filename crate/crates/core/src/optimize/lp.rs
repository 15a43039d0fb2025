//! Dense bounded-variable primal simplex for the relaxations solved during
//! branch-and-bound. Structural variables live in [0, 1].

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    /// Iteration limit or numerical trouble; the caller must not prune on it.
    Failed,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row multipliers of the final basis.
    pub duals: Vec<f64>,
}

const EPS: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

/// maximize c·x  s.t.  rows (a_r · x  sense_r  rhs_r),  0 <= x <= 1.
/// `a` is row-major with `n` columns.
pub(crate) fn solve(n: usize, c: &[f64], a: &[f64], sense: &[Sense], rhs: &[f64]) -> LpSolution {
    let m = rhs.len();
    debug_assert_eq!(a.len(), m * n);
    // columns: structurals, one slack per row, one artificial per row
    let cols = n + 2 * m;
    let mut ub = vec![1.0; cols];
    let mut t = vec![0.0; m * cols];
    let mut beta = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut status = vec![Status::Lower; cols];
    let mut init_col = vec![0usize; m];
    let mut init_sign = vec![1.0; m];
    let mut is_art_basic = false;

    for r in 0..m {
        let row = &mut t[r * cols..(r + 1) * cols];
        row[..n].copy_from_slice(&a[r * n..(r + 1) * n]);
        let slack = n + r;
        let art = n + m + r;
        match sense[r] {
            Sense::Le => {
                row[slack] = 1.0;
                ub[slack] = f64::INFINITY;
            }
            Sense::Ge => {
                row[slack] = -1.0;
                ub[slack] = f64::INFINITY;
            }
            Sense::Eq => ub[slack] = 0.0,
        }
        let slack_ok = match sense[r] {
            Sense::Le => rhs[r] >= 0.0,
            Sense::Ge => rhs[r] <= 0.0,
            Sense::Eq => false,
        };
        let (col, sign) = if slack_ok {
            ub[art] = 0.0;
            (slack, row[slack])
        } else {
            let s = if rhs[r] >= 0.0 { 1.0 } else { -1.0 };
            row[art] = s;
            ub[art] = f64::INFINITY;
            is_art_basic = true;
            (art, s)
        };
        for v in row.iter_mut() {
            *v /= sign;
        }
        beta[r] = rhs[r] / sign;
        basis[r] = col;
        status[col] = Status::Basic;
        init_col[r] = col;
        init_sign[r] = sign;
    }

    let mut cost = vec![0.0; cols];
    let fail = |x: Vec<f64>, duals: Vec<f64>, status| LpSolution { status, x, duals };

    if is_art_basic {
        for r in 0..m {
            cost[n + m + r] = -1.0;
        }
        if !iterate(m, cols, &mut t, &mut beta, &mut basis, &mut status, &ub, &cost) {
            return fail(vec![0.0; n], vec![0.0; m], LpStatus::Failed);
        }
        let infeas: f64 = (0..m).filter(|&r| basis[r] >= n + m).map(|r| beta[r]).sum();
        let nonbasic_art = (n + m..cols).any(|j| status[j] == Status::Upper);
        if infeas > FEAS_TOL || nonbasic_art {
            return fail(vec![0.0; n], vec![0.0; m], LpStatus::Infeasible);
        }
        for j in n + m..cols {
            ub[j] = 0.0;
            cost[j] = 0.0;
        }
    }
    cost[..n].copy_from_slice(c);
    if !iterate(m, cols, &mut t, &mut beta, &mut basis, &mut status, &ub, &cost) {
        return fail(vec![0.0; n], vec![0.0; m], LpStatus::Failed);
    }

    let mut x = vec![0.0; n];
    for j in 0..n {
        if status[j] == Status::Upper {
            x[j] = ub[j];
        }
    }
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = beta[r].clamp(0.0, 1.0);
        }
    }
    let duals = (0..m)
        .map(|r| {
            let col = init_col[r];
            let v: f64 = (0..m).map(|k| cost[basis[k]] * t[k * cols + col]).sum();
            v / init_sign[r]
        })
        .collect();
    LpSolution { status: LpStatus::Optimal, x, duals }
}

#[allow(clippy::too_many_arguments)]
fn iterate(
    m: usize,
    cols: usize,
    t: &mut [f64],
    beta: &mut [f64],
    basis: &mut [usize],
    status: &mut [Status],
    ub: &[f64],
    cost: &[f64],
) -> bool {
    let max_iter = 50 * (m + cols) + 1000;
    let bland_after = 10 * (m + cols);
    let mut d = vec![0.0; cols];
    for iter in 0..max_iter {
        // reduced costs
        d.copy_from_slice(cost);
        for r in 0..m {
            let cb = cost[basis[r]];
            if cb != 0.0 {
                let row = &t[r * cols..(r + 1) * cols];
                for (dj, tj) in d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        let bland = iter >= bland_after;
        let mut enter = None;
        let mut best = EPS;
        for j in 0..cols {
            let score = match status[j] {
                Status::Basic => continue,
                Status::Lower if ub[j] > 0.0 => d[j],
                Status::Upper => -d[j],
                Status::Lower => continue,
            };
            if score > best {
                enter = Some(j);
                if bland {
                    break;
                }
                best = score;
            }
        }
        let Some(j) = enter else { return true };
        let dir = if status[j] == Status::Lower { 1.0 } else { -1.0 };

        // ratio test
        let mut step = ub[j];
        let mut leave: Option<(usize, bool)> = None;
        for r in 0..m {
            let alpha = dir * t[r * cols + j];
            let b = basis[r];
            if alpha > EPS {
                let lim = beta[r].max(0.0) / alpha;
                if lim < step - 1e-12 || (leave.is_some() && lim <= step && bland && b < basis[leave.unwrap().0]) {
                    step = lim;
                    leave = Some((r, false));
                }
            } else if alpha < -EPS && ub[b].is_finite() {
                let lim = (ub[b] - beta[r]).max(0.0) / -alpha;
                if lim < step - 1e-12 || (leave.is_some() && lim <= step && bland && b < basis[leave.unwrap().0]) {
                    step = lim;
                    leave = Some((r, true));
                }
            }
        }
        if !step.is_finite() {
            return false;
        }
        for r in 0..m {
            beta[r] -= dir * t[r * cols + j] * step;
        }
        match leave {
            None => {
                status[j] = if status[j] == Status::Lower { Status::Upper } else { Status::Lower };
            }
            Some((r, to_upper)) => {
                let old = basis[r];
                status[old] = if to_upper { Status::Upper } else { Status::Lower };
                let entering_value = if dir > 0.0 { step } else { ub[j] - step };
                let piv = t[r * cols + j];
                {
                    let row = &mut t[r * cols..(r + 1) * cols];
                    for v in row.iter_mut() {
                        *v /= piv;
                    }
                }
                let (before, rest) = t.split_at_mut(r * cols);
                let (prow, after) = rest.split_at_mut(cols);
                for (k, other) in before.chunks_mut(cols).chain(after.chunks_mut(cols)).enumerate() {
                    let _ = k;
                    let f = other[j];
                    if f != 0.0 {
                        for (o, p) in other.iter_mut().zip(prow.iter()) {
                            *o -= f * p;
                        }
                    }
                }
                basis[r] = j;
                status[j] = Status::Basic;
                beta[r] = entering_value;
            }
        }
    }
    false
}

/// Lagrangian upper bound `λ·rhs + Σ max(0, c_j − λ·a_j)`, valid for any
/// multipliers once their signs are projected onto the row senses.
pub(crate) fn dual_bound(n: usize, c: &[f64], a: &[f64], sense: &[Sense], rhs: &[f64], duals: &[f64]) -> f64 {
    let lam: Vec<f64> = duals
        .iter()
        .zip(sense)
        .map(|(&l, s)| match s {
            Sense::Le => l.max(0.0),
            Sense::Ge => l.min(0.0),
            Sense::Eq => l,
        })
        .collect();
    let mut bound: f64 = lam.iter().zip(rhs).map(|(l, b)| l * b).sum();
    for j in 0..n {
        let mut rc = c[j];
        for (r, l) in lam.iter().enumerate() {
            rc -= l * a[r * n + j];
        }
        if rc > 0.0 {
            bound += rc;
        }
    }
    bound
}
