use std::path::PathBuf;

use thiserror::Error;

/// MatrixMarket or manifest syntax error. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, reason: impl Into<String>) -> Self {
        Self {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("matrix of order {n} exceeds the dense limit {limit} (set PHMOR_DENSE_LIMIT to raise it)")]
    DenseLimitExceeded { n: usize, limit: usize },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] phmor::Error),
    #[error("bound equivalence check failed: relative deviation {deviation:e} > {tol:e}")]
    Prop1Violated { deviation: f64, tol: f64 },
    #[error("rigor check failed for {series}: effectivity {value} at t = {time}")]
    RigorViolated { series: String, value: f64, time: f64 },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<BenchError>,
    },
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 numerical or validation, 4 I/O or parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::InvalidParameter(_) | Self::Config(_) => 2,
            Self::Core(_) | Self::Prop1Violated { .. } | Self::RigorViolated { .. } => 3,
            Self::Parse { .. } | Self::DenseLimitExceeded { .. } | Self::Io { .. } => 4,
            Self::Stage { source, .. } => source.exit_code(),
        }
    }

    /// Name of the failing stage, if tagged.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Self::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, BenchError>;
}

impl<T, E: Into<BenchError>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, BenchError> {
        self.map_err(|e| BenchError::Stage {
            stage,
            source: Box::new(e.into()),
        })
    }
}
