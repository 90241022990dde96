//! CLI error classification driving exit codes and the machine-readable
//! stderr report: 2 = config, 3 = I/O, 4 = numerical.

use serde::Serialize;

#[derive(Debug)]
pub enum ErrorKind {
    Config,
    Io,
    Numerical,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> CliError {
        CliError {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> CliError {
        CliError {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Io => 3,
            ErrorKind::Numerical => 4,
        }
    }

    pub fn to_stderr_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: Body<'a>,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: &'a str,
        }
        let kind = match self.kind {
            ErrorKind::Config => "config",
            ErrorKind::Io => "io",
            ErrorKind::Numerical => "numerical",
        };
        serde_json::to_string(&Report {
            error: Body {
                kind,
                message: &self.message,
            },
        })
        .unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{kind}\"}}}}"))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<qattr_core::datasets::DataError> for CliError {
    fn from(e: qattr_core::datasets::DataError) -> Self {
        match e {
            qattr_core::datasets::DataError::Io(_) => CliError::io(e.to_string()),
            qattr_core::datasets::DataError::BadMagic { .. }
            | qattr_core::datasets::DataError::Truncated
            | qattr_core::datasets::DataError::CountMismatch { .. } => {
                CliError::io(e.to_string())
            }
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<qattr_core::model::ModelError> for CliError {
    fn from(e: qattr_core::model::ModelError) -> Self {
        match e {
            qattr_core::model::ModelError::Io(_) => CliError::io(e.to_string()),
            qattr_core::model::ModelError::Format(_) => CliError::config(e.to_string()),
            _ => CliError::numerical(e.to_string()),
        }
    }
}

impl From<qattr_core::trainer::TrainError> for CliError {
    fn from(e: qattr_core::trainer::TrainError) -> Self {
        match e {
            qattr_core::trainer::TrainError::BadConfig(_) => CliError::config(e.to_string()),
            _ => CliError::numerical(e.to_string()),
        }
    }
}

impl From<qattr_core::attribution::AttributionError> for CliError {
    fn from(e: qattr_core::attribution::AttributionError) -> Self {
        CliError::numerical(e.to_string())
    }
}

impl From<qattr_core::gradient::GradientError> for CliError {
    fn from(e: qattr_core::gradient::GradientError) -> Self {
        CliError::numerical(e.to_string())
    }
}

impl From<qattr_core::encoding::EncodingError> for CliError {
    fn from(e: qattr_core::encoding::EncodingError) -> Self {
        CliError::numerical(e.to_string())
    }
}
