use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type LabResult<T> = Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    /// A problem with one configuration key. `line` is `None` for flags.
    #[error("{}{key}: {msg}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    ConfigKey { key: String, line: Option<usize>, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv output {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(jmgt_core::Error),
    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::ConfigKey { .. } | LabError::Config(_) | LabError::Io { .. } | LabError::Csv { .. } => 1,
            LabError::Numerical(_) => 2,
            LabError::Acceptance { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}

impl From<jmgt_core::Error> for LabError {
    fn from(e: jmgt_core::Error) -> Self {
        match e {
            jmgt_core::Error::Config(msg) => LabError::Config(msg),
            other => LabError::Numerical(other),
        }
    }
}
