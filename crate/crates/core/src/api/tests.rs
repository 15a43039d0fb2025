use super::*;
use crate::backtest::Mode;
use crate::forecast::Method;
use crate::synth::synthetic_panel;

fn engine() -> Engine {
    let cfg = RunConfig { split_week: 8, season_length: 12, target_gw: 9, ..RunConfig::default() };
    Engine::new(synthetic_panel(11, 90, 12, 12).with_split_week(8).unwrap(), cfg)
}

#[test]
fn config_text_round_trips() {
    let mut cfg = RunConfig::default();
    cfg.set("method", "arima(0,0,1)").unwrap();
    cfg.set("budgets", "55,60.5").unwrap();
    cfg.set("jobs", "weighted_avg; arima(1,0,0)@70/rolling; hybrid_ridge(1:2)").unwrap();
    cfg.set("locks", "3, 9").unwrap();
    cfg.set("horizon", "4").unwrap();
    let text = cfg.to_text();
    let back = RunConfig::parse(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_text(), text);
    assert_eq!(cfg.jobs[1].budget, Price(700));
    assert_eq!(cfg.jobs[1].mode, Mode::Rolling);
    assert_eq!(cfg.jobs[2].resolve(&cfg.forecast).label(), "Hybrid Simple Avg 1:2");
    assert_eq!(cfg.jobs[0].resolve(&cfg.forecast).horizon, Some(4));
}

#[test]
fn config_errors_name_the_line() {
    let err = RunConfig::parse("budget = 83.5\nbogus = 1\n").unwrap_err().to_string();
    assert!(err.contains("line 2") && err.contains("bogus"), "{err}");
    assert!(RunConfig::parse("budget = 83.55").is_err());
    assert!(RunConfig::parse("mode = sideways").is_err());
    assert!(RunConfig::parse("split_week = 40").is_err());
}

#[test]
fn defaults() {
    let cfg = RunConfig::parse("# nothing\n").unwrap();
    assert_eq!((cfg.split_week, cfg.budget, cfg.club_quota), (26, Price(835), 3));
    assert_eq!(cfg.metadata()["seed"], crate::forecast::DEFAULT_SEED.to_string());
    assert!(!cfg.metadata().contains_key("output_dir"));
}

#[test]
fn spec_keys_parse_back() {
    for m in Method::ALL {
        let spec = ForecastSpec::new(m);
        assert_eq!(spec.key().parse::<ForecastSpec>().unwrap(), spec, "{m}");
    }
    for spec in [ForecastSpec::arima(1, 0, 1), ForecastSpec::hybrid(1.0 / 3.0), ForecastSpec::hybrid(0.25)] {
        assert_eq!(spec.key().parse::<ForecastSpec>().unwrap(), spec);
    }
    assert!("simple_avg(3)".parse::<ForecastSpec>().is_err());
    assert!("arima(3,0,0)".parse::<ForecastSpec>().is_err());
}

#[test]
fn optimize_excluding_the_captain_never_improves() {
    let e = engine();
    let base = e.optimize(&OptimizeRequest::default()).unwrap();
    assert_eq!(base.players.len(), 15);
    assert_eq!(base.players.iter().filter(|p| p.slot == "captain").count(), 1);
    let req = OptimizeRequest { excludes: vec![base.captain], ..Default::default() };
    let other = e.optimize(&req).unwrap();
    assert!(other.players.iter().all(|p| p.id != base.captain));
    assert!(other.objective.parse::<f64>().unwrap() <= base.objective.parse::<f64>().unwrap());
    // lock then unlock
    let lock = other.players.iter().find(|p| p.slot == "starter").unwrap().id;
    let locked = e.optimize(&OptimizeRequest { locks: vec![lock], ..Default::default() }).unwrap();
    assert!(locked.players.iter().any(|p| p.id == lock && p.slot != "bench"));
    assert_eq!(e.optimize(&OptimizeRequest::default()).unwrap(), base);
}

#[test]
fn optimize_rejects_bad_requests() {
    let e = engine();
    let twelve = OptimizeRequest { locks: (1..=12).collect(), ..Default::default() };
    assert!(matches!(e.optimize(&twelve), Err(Error::InvalidArgument(_))));
    let unknown = OptimizeRequest { excludes: vec![99_999], ..Default::default() };
    assert!(matches!(e.optimize(&unknown), Err(Error::UnknownPlayer(_))));
    let cheap = OptimizeRequest { budget: Some(10.0), ..Default::default() };
    assert!(matches!(e.optimize(&cheap), Err(Error::Infeasible(_))));
    let odd = OptimizeRequest { budget: Some(80.25), ..Default::default() };
    assert!(matches!(e.optimize(&odd), Err(Error::InvalidArgument(_))));
    let method = OptimizeRequest { method: Some("crystal_ball".into()), ..Default::default() };
    assert!(matches!(e.optimize(&method), Err(Error::InvalidArgument(_))));
}

#[test]
fn sweep_report_embeds_the_config() {
    let e = engine();
    let cfg = RunConfig { budgets: vec![Price(700), Price(750)], ..e.config().clone() };
    let report = e.sweep(&cfg).unwrap();
    assert_eq!(report.runs.len(), 3);
    assert_eq!(report.benchmark.as_deref(), Some("Simple Average"));
    assert_eq!(report.metadata["budgets"], "70.0,75.0");
    assert_eq!(report.winner_strip.len(), 4);
}
