use std::fmt;

use serde::Serialize;

/// Runtime failure reported on stderr as one JSON object.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(path: &str, message: impl fmt::Display) -> Self {
        CliError {
            kind: "config",
            message: format!("{path}: {message}"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "error": self })).expect("serializable")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<bellsim::Error> for CliError {
    fn from(e: bellsim::Error) -> Self {
        let kind = match e {
            bellsim::Error::InvalidArgument(_) => "invalid_argument",
            bellsim::Error::UnsupportedGate { .. } => "unsupported_gate",
            bellsim::Error::Resource(_) => "resource",
            bellsim::Error::Parse { .. } => "parse",
            bellsim::Error::Unstable(_) => "unstable",
            bellsim::Error::Ambiguous(_) => "ambiguous",
            bellsim::Error::Io(_) => "io",
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            kind: "io",
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            kind: "parse",
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError {
            kind: "io",
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
