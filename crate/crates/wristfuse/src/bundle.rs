//! Versioned JSON model bundle: selected branch models, the gate and the
//! settings needed to run them on new data.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wristfuse_core::eval::{FusionKind, PipelineConfig, TrainedPipeline};
use wristfuse_core::fusion::KalmanConfig;
use wristfuse_core::preprocess::FilterBank;
use wristfuse_core::Problem;

use crate::error::{AppError, Result};

pub const FORMAT: &str = "wristfuse-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub version: u32,
    pub problem: Problem,
    pub delta: f64,
    pub fusion: FusionKind,
    pub kalman: KalmanConfig,
    pub filters: FilterBank,
    pub training_subjects: Vec<String>,
    pub pipeline: TrainedPipeline,
}

impl ModelBundle {
    pub fn new(pipeline: TrainedPipeline, cfg: &PipelineConfig, training_subjects: Vec<String>) -> Self {
        ModelBundle {
            format: FORMAT.into(),
            version: VERSION,
            problem: cfg.problem,
            delta: cfg.delta,
            fusion: cfg.fusion,
            kalman: cfg.kalman.clone(),
            filters: cfg.filters.clone(),
            training_subjects,
            pipeline,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("bundle serializes");
        fs::write(path, json + "\n").map_err(AppError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(AppError::io(path))?;
        let bad = |message: String| AppError::Format {
            path: path.into(),
            message,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if value.get("format").and_then(|f| f.as_str()) != Some(FORMAT) {
            return Err(bad("not a wristfuse model bundle".into()));
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == VERSION as u64 => {}
            v => return Err(bad(format!("unsupported bundle version {v:?}, expected {VERSION}"))),
        }
        let bundle: ModelBundle = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        if bundle.pipeline.problem != bundle.problem {
            return Err(bad("bundle problem does not match its pipeline".into()));
        }
        Ok(bundle)
    }

    /// Copies the bundle's stored settings over `cfg`.
    pub fn apply_to(&self, cfg: &mut PipelineConfig) {
        cfg.problem = self.problem;
        cfg.kalman = self.kalman.clone();
        cfg.filters = self.filters.clone();
    }
}
