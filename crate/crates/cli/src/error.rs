use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("numerical error: {0}")]
    Numerical(#[from] geophase::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Schema(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }

    /// One-line JSON record describing the failure.
    pub fn record(&self) -> Value {
        let kind = match self {
            Self::Schema(_) => "schema",
            Self::Numerical(_) => "numerical",
            Self::Io(_) => "io",
        };
        let mut rec = json!({
            "status": "error",
            "kind": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let Self::Numerical(e) = self {
            rec["module_error"] = json!({ "kind": e.kind(), "message": e.to_string(), "detail": format!("{e:?}") });
        }
        rec
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
