use std::path::{Path, PathBuf};

use cvqkd_gqi::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, bad flags or malformed input; exit code 2.
    #[error("{0}")]
    Validation(String),

    /// The multiplier search stopped short; exit code 3.
    #[error("multiplier search did not converge: residual Θ = {residual:e}")]
    NonConvergence { residual: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence { .. } => 3,
            CliError::Core(e) => match e {
                CoreError::Config(_)
                | CoreError::Usage(_)
                | CoreError::Precondition(_)
                | CoreError::NoInformation
                | CoreError::DegenerateWindow(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Other(e.to_string()),
            _ => CliError::Validation(format!("input: {e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation("m".into()).exit_code(), 2);
        assert_eq!(CliError::NonConvergence { residual: 0.1 }.exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::NoInformation).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::Domain("x".into())).exit_code(), 1);
        let io = CliError::io(Path::new("x"), std::io::Error::other("denied"));
        assert_eq!(io.exit_code(), 1);
    }
}
