use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
}

impl ConfigError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record in {path} line {line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("log {0} has no samples")]
    Empty(PathBuf),
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} groups, got {got}")]
    TooFewGroups { needed: usize, got: usize },
    #[error("group `{label}` has n = {n}; need n >= 2")]
    GroupTooSmall { label: String, n: usize },
    #[error("no observations")]
    NoData,
    #[error("trial {trial} has {n} movements; need >= 2")]
    TrialTooShort { trial: usize, n: usize },
    #[error("trial {trial} movement indices are not strictly increasing")]
    UnorderedMovements { trial: usize },
    #[error("trial {trial} appears under more than one condition")]
    ConflictingCondition { trial: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid MCMC configuration: {0}")]
    BadMcmcConfig(String),
}
