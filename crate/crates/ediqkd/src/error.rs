use std::io;

use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ediqkd_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<toml::de::Error> for AppError {
    fn from(e: toml::de::Error) -> Self {
        AppError::Config(e.to_string())
    }
}

impl AppError {
    /// 2 for bad input, 3 when the computation has no answer, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use ediqkd_core::Error as E;
        match self {
            AppError::Config(_) => 2,
            AppError::Core(E::OutOfRange { .. } | E::NotNormalized(_)) => 2,
            AppError::Core(E::NoSolution(_) | E::Aborted) => 3,
            _ => 1,
        }
    }
}
