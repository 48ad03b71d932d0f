//! File formats, configuration parsing, the threaded experiment runner, and
//! the command implementations behind the `npeb` binary.

// Negated comparisons are deliberate: `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod chart;
pub mod cli;
pub mod config;
pub mod formats;
pub mod manifest;
pub mod runner;
pub mod standardize;

use std::fmt;

/// Command-level errors, carrying the process exit code: 1 usage, 2 data,
/// 3 numeric.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        AppError::Data(msg.into())
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Data(m) => write!(f, "data error: {m}"),
            AppError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<npeb_core::Error> for AppError {
    fn from(e: npeb_core::Error) -> Self {
        match e {
            npeb_core::Error::NumericFailure(_) | npeb_core::Error::LassoNonConvergence { .. } => {
                AppError::Numeric(e.to_string())
            }
            other => AppError::Data(other.to_string()),
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
