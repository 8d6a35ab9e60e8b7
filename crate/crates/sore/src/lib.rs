//! File formats, configuration and the staged command-line pipeline on top
//! of `sore-core`.

pub mod config;
pub mod error;
pub mod eval;
pub mod formats;
pub mod pipeline;
pub mod records;
pub mod report;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::{Pipeline, RunSummary};
