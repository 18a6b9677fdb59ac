//! Configuration, map files, certificates and the certification pipeline
//! built on `shiftcert-core`.

pub mod certificate;
pub mod config;
pub mod error;
pub mod export;
pub mod mapfile;
pub mod pipeline;

pub use certificate::{ChaosCertificate, Status};
pub use config::RunConfig;
pub use error::PipelineError;
pub use pipeline::{apply_symmetry, certify, refine_and_retry, run_pipeline, RunOptions, RunResult};
