use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CRITERION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("{0} criteria failed")]
    CriteriaFailed(usize),
    #[error(transparent)]
    Model(#[from] sqkd_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) | CliError::Csv(_) => EXIT_CONFIG,
            CliError::CriteriaFailed(_) => EXIT_CRITERION,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Model(e) => match e {
                sqkd_core::Error::NoAdmissibleLoss { .. } | sqkd_core::Error::EmptyGainWindow { .. } => EXIT_INFEASIBLE,
                _ => EXIT_CONFIG,
            },
        }
    }
}
