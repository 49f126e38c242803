use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] transduce::Error),

    /// The adapter did not answer in time, could not be reached, or went away.
    #[error("adapter failed after {after_ms} ms: {detail}")]
    AdapterTimeout { after_ms: u64, detail: String },

    #[error("protocol error: {message} (payload: {payload})")]
    Protocol { message: String, payload: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.kind(),
            HarnessError::AdapterTimeout { .. } => "AdapterTimeout",
            HarnessError::Protocol { .. } => "ProtocolError",
            HarnessError::Io { .. } => "IoError",
            HarnessError::Config(_) => "InvalidConfig",
        }
    }

    pub(crate) fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// `{"error": kind, "message": text}`, as printed on standard error.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() })
    }
}
