use std::path::{Path, PathBuf};

/// Errors that stop a run before a certificate can be written.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("refinement limit reached after {0} halvings")]
    RefinementExhausted(u32),
    #[error("refusing to refine: {0}")]
    NotRefinable(String),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> PipelineError {
        PipelineError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, reason: impl Into<String>) -> PipelineError {
        PipelineError::Format { path: path.to_path_buf(), reason: reason.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => exit::CONFIG,
            PipelineError::Io { .. } => exit::IO,
            PipelineError::Format { .. } => exit::FORMAT,
            PipelineError::RefinementExhausted(_) => exit::NEGATIVE,
            PipelineError::NotRefinable(_) => exit::STAGE,
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const VERIFIED: i32 = 0;
    /// Negative or undecided verdict.
    pub const NEGATIVE: i32 = 10;
    pub const CONFIG: i32 = 20;
    /// A cube of some stage failed to evaluate or left its grid.
    pub const STAGE: i32 = 21;
    pub const IO: i32 = 22;
    pub const FORMAT: i32 = 23;
}
