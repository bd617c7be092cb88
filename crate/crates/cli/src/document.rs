//! The JSON result document and its building blocks.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use stokes_core::error::CoreError;

pub const SCHEMA_VERSION: &str = "stokes-result/v1";

/// Complex numbers serialize as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    CheckFailed,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
            Status::Error => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub schema_version: &'static str,
    pub command: Value,
    pub config: Value,
    pub status: Status,
    pub payload: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Numerical,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_) | CoreError::Precondition(_) | CoreError::Domain { .. } => {
                CliError::usage(e.to_string())
            }
            _ => CliError::numerical(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// One pass/fail line of a verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: Value) -> Self {
        Self {
            name: name.into(),
            pass,
            detail,
        }
    }
}
