use thiserror::Error;

/// Failures of a run, each mapped to an exit code and a machine-readable reason.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or unreadable configuration (exit code 3).
    #[error("config error at {}: {message}", pointer.as_deref().unwrap_or("<root>"))]
    Config {
        reason: &'static str,
        pointer: Option<String>,
        message: String,
    },

    /// A numerical procedure failed (exit code 2).
    #[error(transparent)]
    Numerical(chern_yamabe::Error),

    /// Writing artifacts failed (exit code 2).
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 3,
            CliError::Numerical(_) | CliError::Output { .. } => 2,
        }
    }

    pub fn reason(&self) -> &'static str {
        match self {
            CliError::Config { reason, .. } => reason,
            CliError::Numerical(e) => e.reason(),
            CliError::Output { .. } => "output_io",
        }
    }

    pub fn pointer(&self) -> Option<&str> {
        match self {
            CliError::Config { pointer, .. } => pointer.as_deref(),
            _ => None,
        }
    }

    /// Input-level problems surfaced by the core library count as configuration errors.
    pub fn from_core(e: chern_yamabe::Error) -> Self {
        use chern_yamabe::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidChart(_) | E::Sign(_) | E::Format(_) | E::ChartMismatch => {
                CliError::Config {
                    reason: e.reason(),
                    pointer: None,
                    message: e.to_string(),
                }
            }
            other => CliError::Numerical(other),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "reason": self.reason(),
            "pointer": self.pointer(),
            "message": self.to_string(),
        })
    }
}
