use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}{}: {key}: {msg}", at_line(*line))]
    Parse {
        file: String,
        line: usize,
        key: String,
        msg: String,
    },
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no result files in {0}")]
    NoResults(PathBuf),
    #[error("malformed result file {path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Lib(#[from] ekman::Error),
}

/// Line 0 stands for "not on any line" (a missing key).
fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(":{line}")
    }
}

impl CliError {
    /// 2 for anything the invocation got wrong, 1 for failures while computing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(ekman::Error::Config(_)) => 2,
            CliError::Lib(_) | CliError::Json(_) => 1,
            _ => 2,
        }
    }
}

pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
