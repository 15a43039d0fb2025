use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fpl_core::api::{Engine, OptimizeRequest, RunConfig};
use fpl_core::forecast::build_cost_vector;
use fpl_core::{BacktestReport, Error, Panel, Result};

#[derive(Debug, Parser)]
#[command(name = "fpl", version, about = "Fantasy Premier League forecasting, squad selection and backtests")]
pub struct Cli {
    /// Run-config file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Player-gameweek panel CSV.
    #[arg(long, global = true)]
    pub panel: Option<PathBuf>,
    /// Defaults to $FPL_OUTPUT_DIR, then `out`.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub split_week: Option<u8>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ForecastArgs {
    /// simple_avg, weighted_avg, exp_smooth, bootstrap, monte_carlo, arima,
    /// linear_trend, hybrid_ridge, ict, robust_ict, involvement; `arima(p,d,q)`
    /// and `hybrid_ridge(1:2)` set the parameter inline.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub arima_order: Option<String>,
    #[arg(long)]
    pub horizon: Option<u32>,
    #[arg(long)]
    pub resamples: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hybrid_lambda: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SelectArgs {
    /// XI budget in £m.
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long = "lock", value_delimiter = ',')]
    pub locks: Vec<u32>,
    #[arg(long = "exclude", value_delimiter = ',')]
    pub excludes: Vec<u32>,
    /// Optimize the worst case `c - d` of each starter.
    #[arg(long)]
    pub robust: bool,
    /// remaining | fixed
    #[arg(long)]
    pub bench_budget: Option<String>,
    #[arg(long)]
    pub club_quota: Option<u8>,
    #[arg(long)]
    pub time_limit_ms: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, check and normalize the panel.
    Ingest {
        /// Snapshot path; defaults to `<output-dir>/panel.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a cost vector.
    Forecast {
        #[command(flatten)]
        forecast: ForecastArgs,
        #[arg(long)]
        gw: Option<u8>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the XI, captain and bench for one gameweek.
    Optimize {
        #[command(flatten)]
        forecast: ForecastArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long)]
        gw: Option<u8>,
        /// Print the JSON response instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Replay the test weeks for one or more strategies.
    Backtest {
        #[command(flatten)]
        forecast: ForecastArgs,
        #[command(flatten)]
        select: SelectArgs,
        /// static | rolling
        #[arg(long)]
        mode: Option<String>,
        /// Extra strategy `method[@budget][/mode]`; repeatable.
        #[arg(long = "job")]
        jobs: Vec<String>,
        #[arg(long)]
        benchmark: Option<String>,
        /// Bundle directory; defaults to `<output-dir>/backtest`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Backtest one strategy over several budgets.
    Sweep {
        #[command(flatten)]
        forecast: ForecastArgs,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long)]
        mode: Option<String>,
        /// Comma-separated £m values; 83.5 is always added.
        #[arg(long)]
        budgets: Option<String>,
        #[arg(long)]
        benchmark: Option<String>,
        /// Bundle directory; defaults to `<output-dir>/sweep`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the derived tables of a saved bundle.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Concurrent backtest jobs.
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
}

fn set_opt<T: ToString>(cfg: &mut RunConfig, key: &str, value: &Option<T>) -> Result<()> {
    match value {
        Some(v) => cfg.set(key, &v.to_string()),
        None => Ok(()),
    }
}

fn apply_forecast(cfg: &mut RunConfig, a: &ForecastArgs) -> Result<()> {
    set_opt(cfg, "method", &a.method)?;
    set_opt(cfg, "arima_order", &a.arima_order)?;
    set_opt(cfg, "horizon", &a.horizon)?;
    set_opt(cfg, "resamples", &a.resamples)?;
    set_opt(cfg, "seed", &a.seed)?;
    set_opt(cfg, "hybrid_lambda", &a.hybrid_lambda)
}

fn apply_select(cfg: &mut RunConfig, a: &SelectArgs) -> Result<()> {
    set_opt(cfg, "budget", &a.budget)?;
    if !a.locks.is_empty() {
        cfg.set("locks", &join(&a.locks))?;
    }
    if !a.excludes.is_empty() {
        cfg.set("excludes", &join(&a.excludes))?;
    }
    if a.robust {
        cfg.robust = true;
    }
    set_opt(cfg, "bench_budget", &a.bench_budget)?;
    set_opt(cfg, "club_quota", &a.club_quota)?;
    set_opt(cfg, "time_limit_ms", &a.time_limit_ms)
}

fn join(ids: &[u32]) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// The config file (if any) with the global flags applied on top.
pub fn base_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.panel {
        cfg.panel_path = p.clone();
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    set_opt(&mut cfg, "split_week", &cli.split_week)?;
    Ok(cfg)
}

fn print_leaderboard(out: &mut impl Write, report: &BacktestReport, dir: &Path) -> Result<()> {
    for row in &report.leaderboard {
        writeln!(out, "{:>3}  {:>5}  {}", row.rank, row.total, row.label)?;
    }
    for (label, wins) in report.winner_counts() {
        writeln!(out, "wins  {wins:>2}  {label}")?;
    }
    writeln!(out, "bundle: {}", dir.display())?;
    Ok(())
}

fn write_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("run.conf"), cfg.to_text())?;
    Ok(())
}

/// Executes a parsed command, writing human output to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    let mut cfg = base_config(&cli)?;
    match cli.command {
        Command::Ingest { out: path } => {
            cfg.validate()?;
            let panel = Panel::load(&cfg.panel_path, cfg.season_length)?.with_split_week(cfg.split_week)?;
            let path = path.unwrap_or_else(|| cfg.output_dir.join("panel.csv"));
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            panel.write_snapshot(fs::File::create(&path)?)?;
            let stats = panel.load_stats();
            writeln!(
                out,
                "rows {} duplicates_dropped {} players {} clubs {} train_weeks 1-{} test_weeks {}-{}\nsnapshot: {}",
                stats.rows_read,
                stats.duplicates_dropped,
                panel.players().count(),
                panel.clubs().len(),
                panel.split_week(),
                panel.test_weeks().start(),
                panel.test_weeks().end(),
                path.display()
            )?;
        }
        Command::Forecast { forecast, gw, out: path } => {
            apply_forecast(&mut cfg, &forecast)?;
            set_opt(&mut cfg, "target_gw", &gw)?;
            let engine = Engine::load(cfg)?;
            let cv = build_cost_vector(engine.panel(), &engine.config().forecast, engine.config().target_gw)?;
            match path {
                Some(p) => {
                    if let Some(parent) = p.parent() {
                        fs::create_dir_all(parent)?;
                    }
                    cv.write_csv(fs::File::create(&p)?)?;
                    writeln!(out, "{} players scored; written to {}", cv.scores.len(), p.display())?;
                }
                None => cv.write_csv(&mut *out)?,
            }
        }
        Command::Optimize { forecast, select, gw, json } => {
            apply_forecast(&mut cfg, &forecast)?;
            apply_select(&mut cfg, &select)?;
            set_opt(&mut cfg, "target_gw", &gw)?;
            let request = OptimizeRequest {
                locks: cfg.locks.iter().map(|i| i.0).collect(),
                excludes: cfg.excludes.iter().map(|i| i.0).collect(),
                ..OptimizeRequest::default()
            };
            let engine = Engine::load(cfg)?;
            let response = engine.optimize(&request)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&response)?)?;
            } else {
                write!(out, "{}", response.to_text())?;
            }
        }
        Command::Backtest { forecast, select, mode, jobs, benchmark, out: dir } => {
            apply_forecast(&mut cfg, &forecast)?;
            apply_select(&mut cfg, &select)?;
            set_opt(&mut cfg, "mode", &mode)?;
            if !jobs.is_empty() {
                cfg.set("jobs", &jobs.join(";"))?;
            }
            set_opt(&mut cfg, "benchmark_label", &benchmark)?;
            let dir = dir.unwrap_or_else(|| cfg.output_dir.join("backtest"));
            let engine = Engine::load(cfg.clone())?;
            let report = engine.backtest(&cfg)?;
            report.write_bundle(&dir)?;
            write_config(&dir, &cfg)?;
            print_leaderboard(out, &report, &dir)?;
        }
        Command::Sweep { forecast, select, mode, budgets, benchmark, out: dir } => {
            apply_forecast(&mut cfg, &forecast)?;
            apply_select(&mut cfg, &select)?;
            set_opt(&mut cfg, "mode", &mode)?;
            set_opt(&mut cfg, "budgets", &budgets)?;
            set_opt(&mut cfg, "benchmark_label", &benchmark)?;
            let dir = dir.unwrap_or_else(|| cfg.output_dir.join("sweep"));
            let engine = Engine::load(cfg.clone())?;
            let report = engine.sweep(&cfg)?;
            report.write_bundle(&dir)?;
            write_config(&dir, &cfg)?;
            print_leaderboard(out, &report, &dir)?;
        }
        Command::Report { input, out: dir } => {
            let report = BacktestReport::read_bundle(&input)?;
            let dir = dir.unwrap_or(input);
            report.write_tables(&dir)?;
            print_leaderboard(out, &report, &dir)?;
        }
        Command::Serve { addr, workers } => {
            if workers == 0 {
                return Err(Error::InvalidArgument("workers must be at least 1".into()));
            }
            let engine = Engine::load(cfg)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::server::serve(engine, &addr, workers))?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit status:
/// 0 on success, 1 on a failed run, 2 on a usage error.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.kind());
            1
        }
    }
}
