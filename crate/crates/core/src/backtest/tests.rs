use super::*;
use crate::forecast::Method;
use crate::optimize::SolveStats;
use crate::panel::{PlayerWeekRecord, Position};
use crate::synth::synthetic_panel;

use Position::*;

/// 15 players: ids 1..=11 start (GK, 4 DEF, 4 MID, 2 FWD), 12..=15 are the
/// bench (GK, DEF, MID, FWD). Stored scores fall with the id.
fn fixture() -> (SquadSolution, Vec<PoolEntry>) {
    let layout = [Gk, Def, Def, Def, Def, Mid, Mid, Mid, Mid, Fwd, Fwd, Gk, Def, Mid, Fwd];
    let roster: Vec<PoolEntry> = layout
        .iter()
        .enumerate()
        .map(|(i, &p)| PoolEntry {
            player_id: PlayerId(i as u32 + 1),
            name: format!("p{}", i + 1),
            team: format!("T{}", i % 7),
            position: p,
            price: Price(50),
            expected_points: 20.0 - i as f64,
            margin: 0.0,
            bench_score: 20.0 - i as f64,
        })
        .collect();
    let sol = SquadSolution {
        xi: (1..=11).map(PlayerId).collect(),
        captain: PlayerId(6),
        bench: (12..=15).map(PlayerId).collect(),
        formation: (4, 4, 2),
        objective: 0.0,
        bench_objective: 0.0,
        xi_cost: Price(550),
        bench_cost: Price(200),
        optimal: true,
        stats: SolveStats::default(),
    };
    (sol, roster)
}

/// Week 1 records for everyone except `missing`; player `i` scores `i` points.
fn week(roster: &[PoolEntry], missing: &[u32]) -> Panel {
    let records = roster
        .iter()
        .filter(|e| !missing.contains(&e.player_id.0))
        .map(|e| PlayerWeekRecord {
            player_id: e.player_id,
            name: e.name.clone(),
            team: e.team.clone(),
            position: e.position,
            gw: 1,
            total_points: e.player_id.0 as i32,
            value: e.price,
            minutes: 90,
            ict_index: 0.0,
            xg: 0.0,
            xa: 0.0,
            xgi: 0.0,
            xgc: 0.0,
            selected: 0.0,
            starts: 1,
        })
        .collect();
    Panel::from_records(records, 38).unwrap()
}

fn score(missing: &[u32]) -> WeekScore {
    let (sol, roster) = fixture();
    score_week(&sol, &roster, &week(&roster, missing), 1, &FormationLimits::default(), DoubleGameweek::First)
}

#[test]
fn captain_counts_twice() {
    let s = score(&[]);
    assert_eq!(s.points, (1..=11).sum::<i32>() + 6);
    assert!(s.substitutions.is_empty());
}

#[test]
fn absent_defender_takes_the_bench_defender() {
    // DEF 2 out: the best reserve is the GK (12, illegal), then DEF 13
    let s = score(&[2]);
    assert_eq!(s.substitutions, vec![Substitution { out: PlayerId(2), replacement: Some(PlayerId(13)) }]);
    assert_eq!(s.points, (1..=11).sum::<i32>() - 2 + 13 + 6);
}

#[test]
fn goalkeeper_only_for_goalkeeper() {
    let s = score(&[1]);
    assert_eq!(s.substitutions[0].replacement, Some(PlayerId(12)));
    let s = score(&[1, 12]);
    assert_eq!(s.substitutions[0].replacement, None);
    assert_eq!(s.effective_xi.len(), 10);
}

#[test]
fn formation_bounds_limit_substitutions() {
    // 2 -> 13 (DEF) and 3 -> 14 (MID) keep three nominal defenders; FWD 15
    // for DEF 4 would leave two, so 4 and 5 stay unfilled
    let s = score(&[2, 3, 4, 5]);
    let filled: Vec<_> = s.substitutions.iter().map(|x| x.replacement).collect();
    assert_eq!(filled, vec![Some(PlayerId(13)), Some(PlayerId(14)), None, None]);
    assert_eq!(s.effective_xi.len(), 9);
}

#[test]
fn absences_in_descending_stored_score() {
    // MID 7 and MID 6 out: 6 (stored 15) goes first and takes the best legal
    // reserve, DEF 13 (5-3-2); 7 then gets MID 14
    let s = score(&[7, 6]);
    assert_eq!(s.substitutions[0], Substitution { out: PlayerId(6), replacement: Some(PlayerId(13)) });
    assert_eq!(s.substitutions[1], Substitution { out: PlayerId(7), replacement: Some(PlayerId(14)) });
}

#[test]
fn absent_captain_hands_over_the_armband() {
    let s = score(&[6]);
    // the best-scored effective starter is the GK (id 1)
    assert_eq!(s.captain, Some(PlayerId(1)));
    let total: i32 = s.effective_xi.iter().map(|i| i.0 as i32).sum();
    assert_eq!(s.points, total + 1);
}

#[test]
fn absent_squad_scores_zero() {
    let s = score(&(1..=15).collect::<Vec<_>>());
    assert_eq!(s.points, 0);
    assert_eq!(s.captain, None);
}

fn run_of(label: &str, budget: u32, weekly: &[i32]) -> StrategyRun {
    StrategyRun::from_weekly(
        label.into(),
        ForecastSpec::default(),
        Price(budget),
        Mode::Static,
        weekly.iter().enumerate().map(|(k, p)| (27 + k as u8, *p)).collect(),
    )
}

#[test]
fn spearman_hand_example() {
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap() + 0.5).abs() < 1e-12);
    assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    // ties share their average rank
    assert!((spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap() - 0.9486832980505138).abs() < 1e-12);
}

#[test]
fn similarity_is_rank_invariant() {
    let a = run_of("a", 835, &[3, 9, 1, 4]);
    let b = run_of("b", 835, &[6, 18, 2, 8]);
    let c = run_of("c", 835, &[5, 5, 5, 5]);
    let m = similarity_matrix(&[a, b, c]).unwrap();
    assert_eq!(m.values[0][0], Some(1.0));
    assert!((m.values[0][1].unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(m.values[0][2], None);
    assert_eq!(m.values[2][2], None);
    assert_eq!(m.values[1][0], m.values[0][1]);
}

#[test]
fn uplift_telescopes() {
    let a = run_of("a", 835, &[3, 9, 1, 4]);
    let b = run_of("b", 835, &[5, 2, 7, 1]);
    assert!(weekly_uplift(&a, &a).unwrap().iter().all(|(_, d)| *d == 0));
    let d: i32 = weekly_uplift(&a, &b).unwrap().iter().map(|(_, d)| d).sum();
    assert_eq!(d, a.total() - b.total());
}

#[test]
fn leaderboard_is_descending() {
    let rows = leaderboard(&[run_of("a", 835, &[1, 1]), run_of("b", 835, &[5, 0]), run_of("c", 835, &[2, 0])]);
    let labels: Vec<_> = rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, ["b", "a", "c"]);
    assert_eq!(rows.iter().map(|r| r.rank).collect::<Vec<_>>(), [1, 2, 2]);
}

#[test]
fn winner_ties_go_to_the_lower_budget() {
    let lo = run_of("lo", 600, &[5, 1, 3]);
    let hi = run_of("hi", 800, &[5, 2, 1]);
    let strip = winner_strip(&[hi.clone(), lo.clone()]);
    assert_eq!(strip.values().cloned().collect::<Vec<_>>(), ["lo", "hi", "lo"]);
    let single = winner_strip(&[lo]);
    assert!(single.values().all(|l| l == "lo"));
}

#[test]
fn medians_and_top_uplift() {
    assert_eq!(median(&[3, 1, 2]), Some(2.0));
    assert_eq!(median(&[4, 1, 2, 3]), Some(2.5));
    assert_eq!(median(&[]), None);
    let uplift = BTreeMap::from([("a".to_string(), vec![1, 2, 3]), ("b".to_string(), vec![5, 5, -9])]);
    assert_eq!(top_by_median_uplift(&uplift, 1), vec![("b".to_string(), 5.0)]);
}

#[test]
fn labels() {
    let spec = ForecastSpec::arima(1, 0, 0);
    assert_eq!(run_label(&spec, Mode::Rolling, Price(700)), "ARIMA (1,0,0) Rolling (Budget = 70)");
    assert_eq!(run_label(&ForecastSpec::new(Method::WeightedAvg), Mode::Static, DEFAULT_BUDGET), "Weighted Average");
    assert_eq!(budget_text(Price(835)), "83.5");
    assert_eq!("rolling".parse::<Mode>().unwrap(), Mode::Rolling);
}

fn small_panel() -> Panel {
    synthetic_panel(11, 90, 12, 12).with_split_week(8).unwrap()
}

#[test]
fn static_run_keeps_one_squad() {
    let panel = small_panel();
    let run = run_static(&panel, &ForecastSpec::new(Method::SimpleAvg), Price(835), &SelectionOptions::default()).unwrap();
    assert_eq!(run.weekly_points.len(), 4);
    let first = &run.squads[&9].solution;
    assert!(run.squads.values().all(|s| s.solution.xi == first.xi && s.solution.bench == first.bench));
    assert_eq!(run.total(), run.weekly_points.values().sum::<i32>());
}

#[test]
fn rolling_run_is_causal() {
    let panel = small_panel();
    let spec = ForecastSpec::new(Method::WeightedAvg);
    let opts = SelectionOptions::default();
    let run = run_rolling(&panel, &spec, Price(800), &opts).unwrap();
    assert_eq!(run.squads.len(), 4);
    for t in panel.test_weeks() {
        // rewrite every record from week t on
        let records: Vec<PlayerWeekRecord> = panel
            .records()
            .iter()
            .cloned()
            .map(|mut r| {
                if r.gw >= t {
                    r.total_points = 30 - r.total_points;
                    r.ict_index += 5.0;
                    r.value = Price(r.value.0 + 7);
                }
                r
            })
            .collect();
        let mutated = Panel::from_records(records, 12).unwrap().with_split_week(8).unwrap();
        let (p, _) = selection_problem(&mutated, &spec, t, Price(800), &opts).unwrap();
        let sel = select(&p).unwrap();
        assert_eq!(sel.solution.xi, run.squads[&t].solution.xi, "week {t}");
        assert_eq!(sel.solution.bench, run.squads[&t].solution.bench, "week {t}");
    }
}

#[test]
fn report_round_trips() {
    let panel = small_panel();
    let opts = SelectionOptions::default();
    let sweep = budget_sweep(&panel, &ForecastSpec::new(Method::SimpleAvg), &[Price(700), Price(750)], Mode::Static, &opts).unwrap();
    assert_eq!(sweep.runs.len(), 3);
    assert_eq!(sweep.win_counts().values().sum::<usize>(), 4);
    let meta = BTreeMap::from([("seed".to_string(), "7".to_string())]);
    let base = sweep.runs[2].label.clone();
    let report = BacktestReport::assemble(sweep.runs, Some(&base), true, meta).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    report.write_bundle(a.path()).unwrap();
    let back = BacktestReport::read_bundle(a.path()).unwrap();
    back.write_tables(b.path()).unwrap();
    for f in ["leaderboard.csv", "similarity.csv", "uplift.csv", "winner_strip.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let strip = std::fs::read_to_string(a.path().join("winner_strip.csv")).unwrap();
    assert_eq!(strip.lines().next().unwrap(), "gw,70.0,75.0,83.5,winner");
}
