//! Pipeline runner, artifact snapshot and the read-only HTTP service.

pub mod api;
mod pipeline;
pub mod server;
mod snapshot;

use thiserror::Error;

pub use pipeline::{run_pipeline, PipelineConfig, PipelineSummary, StatsFile, TaggerChoice, ARTIFACTS};
pub use snapshot::Snapshot;

/// A failure, tagged with the pipeline stage it happened in.
#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {message}")]
pub struct AppError {
    pub stage: &'static str,
    pub message: String,
}

impl AppError {
    pub fn new(stage: &'static str, message: impl std::fmt::Display) -> Self {
        AppError {
            stage,
            message: message.to_string(),
        }
    }
}
