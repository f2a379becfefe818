use std::path::PathBuf;

use serde_json::{json, Value};
use tailrisk::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid setting `{key}`: {reason}")]
    Config { key: &'static str, reason: String },

    #[error("config file line {line}: {reason}")]
    ConfigLine { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] tailrisk::Error),
}

impl CliError {
    pub fn config(key: &'static str, reason: impl Into<String>) -> Self {
        CliError::Config { key, reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 validation, 2 computation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::ConfigLine { .. } => 1,
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Computation => 2,
            },
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        let kind = match self.exit_code() {
            1 => "validation",
            2 => "computation",
            _ => "io",
        };
        let mut e = json!({ "kind": kind, "exit_code": self.exit_code(), "message": self.to_string() });
        match self {
            CliError::Config { key, .. } => e["field"] = json!(key),
            CliError::ConfigLine { line, .. } => e["line"] = json!(line),
            CliError::Io { path, .. } => e["path"] = json!(path.display().to_string()),
            CliError::Core(tailrisk::Error::Parse { line, column, .. }) => {
                e["line"] = json!(line);
                e["column"] = json!(column);
            }
            CliError::Core(tailrisk::Error::InvalidConfig { field, .. }) => e["field"] = json!(field),
            CliError::Core(tailrisk::Error::LookupCell { model, tenor, bucket, .. }) => {
                e["cell"] = json!({ "model": model, "tenor": tenor, "bucket": bucket });
            }
            _ => {}
        }
        json!({ "schema_version": crate::SCHEMA_VERSION, "error": e })
    }
}
