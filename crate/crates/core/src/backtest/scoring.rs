//! Weekly team scoring with captain doubling and bench substitution.

use serde::{Deserialize, Serialize};

use crate::optimize::{FormationLimits, SquadSolution};
use crate::panel::{DoubleGameweek, Panel, PlayerId, PoolEntry, Position};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub out: PlayerId,
    /// `None` when no bench player could legally fill the slot.
    pub replacement: Option<PlayerId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeekScore {
    pub gw: u8,
    pub points: i32,
    /// Starters that actually scored, in slot order.
    pub effective_xi: Vec<PlayerId>,
    /// The player whose points were doubled.
    pub captain: Option<PlayerId>,
    pub substitutions: Vec<Substitution>,
}

impl WeekScore {
    pub fn captain_transferred(&self, squad: &SquadSolution) -> bool {
        self.captain != Some(squad.captain)
    }
}

fn stored(roster: &[PoolEntry], id: PlayerId) -> f64 {
    roster.iter().find(|e| e.player_id == id).map_or(f64::NEG_INFINITY, |e| e.expected_points)
}

/// Higher stored expected points first, then the smaller id.
fn by_stored_score(roster: &[PoolEntry], ids: &mut [PlayerId]) {
    ids.sort_by(|a, b| stored(roster, *b).total_cmp(&stored(roster, *a)).then(a.cmp(b)));
}

/// Scores `squad` in week `gw`.
///
/// `roster` must contain a row for every squad member (the pool the squad was
/// picked from works). Absent starters are handled in descending stored score;
/// each takes the best-scored available reserve whose insertion keeps the
/// nominal lineup within `limits`, and a goalkeeper is only replaced by a
/// goalkeeper. An absent captain hands the doubling to the best-scored player
/// of the effective XI.
pub fn score_week(
    squad: &SquadSolution,
    roster: &[PoolEntry],
    panel: &Panel,
    gw: u8,
    limits: &FormationLimits,
    policy: DoubleGameweek,
) -> WeekScore {
    let position = |id: PlayerId| roster.iter().find(|e| e.player_id == id).map(|e| e.position);
    let available = |id: PlayerId| panel.week_points(id, gw, policy).is_some();

    let mut lineup = squad.xi.clone();
    let mut absent: Vec<PlayerId> = lineup.iter().copied().filter(|id| !available(*id)).collect();
    by_stored_score(roster, &mut absent);
    let mut reserves: Vec<PlayerId> = squad.bench.iter().copied().filter(|id| available(*id)).collect();
    by_stored_score(roster, &mut reserves);

    let mut substitutions = Vec::new();
    for out in absent {
        let slot = lineup.iter().position(|id| *id == out).expect("absent starter is in the lineup");
        let out_gk = position(out) == Some(Position::Gk);
        let pick = reserves.iter().position(|&r| {
            if (position(r) == Some(Position::Gk)) != out_gk {
                return false;
            }
            let mut counts = [0u8; 4];
            for (k, id) in lineup.iter().enumerate() {
                let p = if k == slot { position(r) } else { position(*id) };
                if let Some(p) = p {
                    counts[p.index()] += 1;
                }
            }
            limits.allows(counts)
        });
        let replacement = pick.map(|k| reserves.remove(k));
        if let Some(r) = replacement {
            lineup[slot] = r;
        }
        substitutions.push(Substitution { out, replacement });
    }

    let effective_xi: Vec<PlayerId> = lineup.into_iter().filter(|id| available(*id)).collect();
    let captain = if effective_xi.contains(&squad.captain) {
        Some(squad.captain)
    } else {
        let mut ids = effective_xi.clone();
        by_stored_score(roster, &mut ids);
        ids.first().copied()
    };
    let pts = |id: PlayerId| panel.week_points(id, gw, policy).unwrap_or(0);
    let mut points: i32 = effective_xi.iter().map(|id| pts(*id)).sum();
    if let Some(c) = captain {
        points += pts(c);
    }
    if effective_xi.is_empty() {
        log::info!("gameweek {gw}: no squad player featured");
    }
    WeekScore { gw, points, effective_xi, captain, substitutions }
}
