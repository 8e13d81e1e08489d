//! File formats, configuration and parallel orchestration around
//! `wristfuse-core`.

pub mod bundle;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;
pub mod runner;

pub use error::{AppError, Result};
