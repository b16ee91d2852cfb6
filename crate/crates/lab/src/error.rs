use std::path::PathBuf;

use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_EXPECTATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] inls_core::Error),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("check failed: {0}")]
    Check(String),

    #[error("expectation not met: {0}")]
    Expectation(String),
}

pub type LabResult<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            LabError::Core(_) | LabError::Check(_) => EXIT_SOLVER,
            LabError::Invalid(_) | LabError::Io { .. } => EXIT_VALIDATION,
            LabError::Expectation(_) => EXIT_EXPECTATION,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "error": category(self.exit_code()),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
    }
}

/// Name of the failure class behind an exit code.
pub fn category(code: i32) -> &'static str {
    match code {
        EXIT_OK => "ok",
        EXIT_VALIDATION => "validation",
        EXIT_SOLVER => "solver",
        EXIT_EXPECTATION => "expectation",
        _ => "unknown",
    }
}
