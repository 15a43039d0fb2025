//! Fantasy Premier League decision engine: expected-points forecasting, exact
//! 0-1 squad selection and season backtesting.

pub mod api;
pub mod backtest;
pub mod error;
pub mod forecast;
pub mod optimize;
pub mod panel;
pub mod synth;

pub use backtest::{BacktestReport, Mode, SelectionOptions, StrategyRun};
pub use error::{Error, Result};
pub use forecast::{build_cost_vector, CostVector, ForecastSpec, Method};
pub use optimize::{
    solve, solve_bench, solve_xi, validate, BenchBudget, FormationLimits, InfeasibilityReport, SelectionProblem,
    SquadSolution,
};
pub use panel::{build_pool, Panel, PlayerId, PlayerPool, PlayerWeekRecord, PoolEntry, Position, Price};
