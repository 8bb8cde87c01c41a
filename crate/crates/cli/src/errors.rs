//! Process-level error taxonomy. Every failure maps to a documented exit
//! code so scripted callers can branch on the outcome:
//!
//! - 0: success
//! - 2: configuration or argument validation failure
//! - 3: solver breakdown (blowup, vacuum contact, non-finite values)
//! - 4: a quantitative assertion failed (verify checks, degenerate fits)
//! - 1: unexpected crash

use qhdlab::Error as CoreError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{message}")]
    Breakdown { message: String, report: Option<serde_json::Value> },
    #[error("{0}")]
    Assertion(String),
    #[error("{0}")]
    Crash(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Breakdown { .. } => 3,
            CliError::Assertion(_) => 4,
            CliError::Crash(_) => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Breakdown { .. } => "breakdown",
            CliError::Assertion(_) => "assertion",
            CliError::Crash(_) => "crash",
        }
    }

    /// Core errors raised while checking a config are validation failures.
    pub fn validation_from(e: CoreError) -> Self {
        CliError::Validation(e.to_string())
    }

    /// Core errors raised mid-run: anything that describes the solution
    /// degenerating is a breakdown, fit failures are assertion failures,
    /// and the rest are crashes.
    pub fn runtime_from(e: CoreError) -> Self {
        match e {
            CoreError::Breakdown { .. } | CoreError::VacuumFloor { .. } | CoreError::NonFinite { .. } => {
                CliError::Breakdown { message: e.to_string(), report: None }
            }
            CoreError::Fit(_) => CliError::Assertion(e.to_string()),
            other => CliError::Crash(other.to_string()),
        }
    }
}

/// On-disk record of a failed run, written as `error.json` next to whatever
/// partial outputs exist.
#[derive(Debug, Serialize)]
pub struct ErrorRecord<'a> {
    pub kind: &'a str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<&'a serde_json::Value>,
}

impl CliError {
    pub fn to_record(&self) -> ErrorRecord<'_> {
        let breakdown = match self {
            CliError::Breakdown { report, .. } => report.as_ref(),
            _ => None,
        };
        ErrorRecord {
            kind: self.kind_name(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            breakdown,
        }
    }
}
