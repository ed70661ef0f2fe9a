//! Command-line front end for `nextjump-core`: flat config files, CSV
//! tables with self-describing headers, and thread-count independent
//! Monte Carlo ensembles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod output;

use nextjump_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Core(CoreError::InvalidParameter { .. } | CoreError::EtaUndefined) => 2,
            _ => 1,
        }
    }
}
