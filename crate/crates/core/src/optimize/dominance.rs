//! Exact pool reduction. An item is dropped when every selection containing it
//! can be improved (under the tie-break order) by swapping in one of its
//! dominators: same position, objective at least as high, price no higher.

use super::bnb::TIE_TOL;

#[derive(Debug, Clone, Copy)]
pub(crate) struct DomItem {
    pub position: usize,
    pub club: usize,
    pub obj: f64,
    pub cost: u32,
    pub id: u32,
    pub locked: bool,
}

/// `d` is preferred to `i` whenever it replaces it.
fn dominates(d: &DomItem, i: &DomItem) -> bool {
    if d.position != i.position || d.obj < i.obj || d.cost > i.cost {
        return false;
    }
    d.cost < i.cost || d.id < i.id || d.obj > i.obj + 4.0 * TIE_TOL
}

/// Returns a keep-flag per item.
///
/// * `pos_max[p]` bounds how many items of position `p` a selection holds,
/// * `total` is the selection size,
/// * `club_cap[c]` is the remaining quota of club `c`.
pub(crate) fn reduce(items: &[DomItem], pos_max: &[usize; 4], total: usize, club_cap: &[usize]) -> Vec<bool> {
    let clubs = club_cap.len();
    items
        .iter()
        .enumerate()
        .map(|(k, it)| {
            if it.locked {
                return true;
            }
            let mut same = 0usize;
            let mut per_club = vec![0usize; clubs];
            for (j, d) in items.iter().enumerate() {
                if j != k && dominates(d, it) {
                    if d.club == it.club {
                        same += 1;
                    } else {
                        per_club[d.club] += 1;
                    }
                }
            }
            let Some(pos_budget) = pos_max[it.position].checked_sub(1 + same) else { return false };
            let Some(total_budget) = total.checked_sub(1 + same) else { return false };
            // A selection S ∋ i resists every swap iff each dominating club
            // either has all its dominators in S (uses d_C position slots) or
            // is full (uses cap_C slots). Find the cheapest such S.
            let mut dp = vec![usize::MAX; pos_budget + 1];
            dp[0] = 0;
            for c in 0..clubs {
                let d = per_club[c];
                if d == 0 {
                    continue;
                }
                let cap = club_cap[c];
                let mut next = vec![usize::MAX; pos_budget + 1];
                for (u, &t) in dp.iter().enumerate() {
                    if t == usize::MAX {
                        continue;
                    }
                    if u + d <= pos_budget {
                        next[u + d] = next[u + d].min(t + d);
                    }
                    next[u] = next[u].min(t + cap);
                }
                dp = next;
            }
            dp.iter().any(|&t| t <= total_budget)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(position: usize, club: usize, obj: f64, cost: u32, id: u32) -> DomItem {
        DomItem { position, club, obj, cost, id, locked: false }
    }

    #[test]
    fn single_goalkeeper_slot() {
        let items = [item(0, 0, 5.0, 50, 1), item(0, 0, 4.0, 50, 2), item(0, 0, 3.0, 60, 3)];
        let keep = reduce(&items, &[1, 5, 5, 3], 11, &[3]);
        assert_eq!(keep, vec![true, false, false]);
    }

    #[test]
    fn a_full_rival_club_can_block_the_swap() {
        // the dominator's club may hold three other starters
        let items = [item(0, 0, 5.0, 50, 1), item(0, 1, 4.0, 50, 2)];
        assert_eq!(reduce(&items, &[1, 5, 5, 3], 11, &[3, 3]), vec![true, true]);
        // four rival clubs cannot all be full in ten slots
        let items: Vec<DomItem> =
            (0..4).map(|c| item(0, c, 5.0, 50, c as u32 + 1)).chain([item(0, 4, 4.0, 50, 9)]).collect();
        assert_eq!(reduce(&items, &[1, 5, 5, 3], 11, &[3; 5])[4], false);
    }

    #[test]
    fn full_club_protects() {
        // one FWD slot left in a club with no quota: the dominator cannot enter
        let items = [item(3, 0, 9.0, 50, 1), item(3, 1, 4.0, 50, 2)];
        let keep = reduce(&items, &[1, 5, 5, 1], 1, &[0, 3]);
        assert_eq!(keep, vec![true, true]);
    }

    #[test]
    fn ties_keep_the_smaller_id() {
        let items = [item(0, 0, 5.0, 50, 2), item(0, 0, 5.0, 50, 1)];
        assert_eq!(reduce(&items, &[1, 5, 5, 3], 11, &[3]), vec![false, true]);
    }

    #[test]
    fn locked_items_stay() {
        let mut items = [item(0, 0, 5.0, 50, 1), item(0, 1, 4.0, 50, 2)];
        items[1].locked = true;
        assert_eq!(reduce(&items, &[1, 5, 5, 3], 11, &[3, 3]), vec![true, true]);
    }
}
