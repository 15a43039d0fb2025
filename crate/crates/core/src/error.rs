use thiserror::Error;

use crate::optimize::InfeasibilityReport;
use crate::panel::PlayerId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: missing required column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),

    #[error("no usable history")]
    NoHistory,

    #[error("empty player pool for gameweek {0}")]
    EmptyPool(u8),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("squad failed validation: {0}")]
    InvalidSquad(String),

    #[error(transparent)]
    Infeasible(#[from] InfeasibilityReport),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingColumn(_) => "schema",
            Error::Row { .. } => "row",
            Error::UnknownPlayer(_) => "unknown_player",
            Error::NoHistory => "no_history",
            Error::EmptyPool(_) => "empty_pool",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Config(_) => "config",
            Error::InvalidSquad(_) => "invalid_squad",
            Error::Infeasible(_) => "infeasible",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
