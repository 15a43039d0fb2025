//! Seeded synthetic pools for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::panel::{Panel, PlayerId, PlayerPool, PlayerWeekRecord, PoolEntry, Position, Price};

/// A pool of `size` players over `clubs` clubs. The first 16 players (three
/// goalkeepers, then 5-5-3) are cheap and spread over the clubs in turn, so
/// small pools usually admit a squad.
pub fn synthetic_pool(seed: u64, size: usize, clubs: usize) -> PlayerPool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skeleton = [
        Position::Gk,
        Position::Gk,
        Position::Gk,
        Position::Def,
        Position::Def,
        Position::Def,
        Position::Def,
        Position::Def,
        Position::Mid,
        Position::Mid,
        Position::Mid,
        Position::Mid,
        Position::Mid,
        Position::Fwd,
        Position::Fwd,
        Position::Fwd,
    ];
    let entries = (0..size)
        .map(|i| {
            let position = if i < skeleton.len() {
                skeleton[i]
            } else {
                match rng.random_range(0..10) {
                    0 => Position::Gk,
                    1..=3 => Position::Def,
                    4..=7 => Position::Mid,
                    _ => Position::Fwd,
                }
            };
            let expected_points = rng.random_range(0.0..8.0);
            PoolEntry {
                player_id: PlayerId(1 + i as u32 * 3 + rng.random_range(0..3)),
                name: format!("P{i}"),
                team: format!("C{}", if i < skeleton.len() { i % clubs.max(1) } else { rng.random_range(0..clubs.max(1)) }),
                position,
                price: Price(if i < skeleton.len() { rng.random_range(40..=50) } else { rng.random_range(45..=120) }),
                expected_points,
                margin: rng.random_range(0.0..3.0),
                bench_score: expected_points + rng.random_range(-1.0..1.0),
            }
        })
        .collect();
    PlayerPool { target_gw: 27, entries }
}

/// A season of records for `players` players over `clubs` clubs. Each player
/// has a fixed quality; a week is missing with probability 0.1.
pub fn synthetic_panel(seed: u64, players: usize, clubs: usize, season_length: u8) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = [Position::Gk, Position::Def, Position::Def, Position::Def, Position::Mid, Position::Mid, Position::Mid, Position::Fwd, Position::Fwd];
    let mut records = Vec::new();
    for i in 0..players {
        let position = layout[i % layout.len()];
        let quality: f64 = rng.random_range(0.0..6.0);
        let price = 36 + (quality * 7.0) as u32 + rng.random_range(0..5);
        let team = format!("C{}", i % clubs.max(1));
        for gw in 1..=season_length {
            if rng.random_bool(0.1) {
                continue;
            }
            let points = (quality + rng.random_range(-3.0..4.0)).round() as i32;
            let ict = (quality * 2.0 + rng.random_range(0.0..3.0)).max(0.0);
            records.push(PlayerWeekRecord {
                player_id: PlayerId(i as u32 + 1),
                name: format!("Player {}", i + 1),
                team: team.clone(),
                position,
                gw,
                total_points: points,
                value: Price(price),
                minutes: rng.random_range(0..=90),
                ict_index: (ict * 10.0).round() / 10.0,
                xg: rng.random_range(0.0..0.8),
                xa: rng.random_range(0.0..0.5),
                xgi: rng.random_range(0.0..1.2),
                xgc: rng.random_range(0.0..2.0),
                selected: f64::from(rng.random_range(100..100_000)),
                starts: rng.random_range(0..=1),
            });
        }
    }
    records.sort_by_key(|r| (r.gw, r.player_id));
    Panel::from_records(records, season_length).expect("synthetic records are in range")
}
