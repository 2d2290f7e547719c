use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("field `{field}`{}: {message}", at_line(*.line))]
    Field {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("{0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    #[error("stage `{stage}`: {source}")]
    Model {
        stage: String,
        source: fracwave::Error,
    },

    #[error("series `{series}` not found in {dir}; available: {available}")]
    MissingSeries {
        series: String,
        dir: PathBuf,
        available: String,
    },

    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model {
                source:
                    fracwave::Error::Degenerate { .. }
                    | fracwave::Error::AmplitudeTooLarge { .. }
                    | fracwave::Error::NotConverged { .. }
                    | fracwave::Error::Quadrature { .. },
                ..
            } => 3,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a stage name to library errors.
pub(crate) trait Stage<T> {
    fn stage(self, name: &str) -> Result<T>;
}

impl<T> Stage<T> for fracwave::Result<T> {
    fn stage(self, name: &str) -> Result<T> {
        self.map_err(|source| CliError::Model {
            stage: name.to_string(),
            source,
        })
    }
}
