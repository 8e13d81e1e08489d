//! Parallel orchestration over subjects and folds. Results come back in
//! subject order whatever the scheduling.

use rayon::prelude::*;
use wristfuse_core::eval::{
    evaluate_subject, loso_split, prepare_subject, summarize, train_pipeline, training_samples,
    FoldResult, NoAudit, PipelineConfig, PreparedSubject, Summary, TrainedPipeline,
};
use wristfuse_core::SubjectRecord;

use crate::error::Result;

pub fn prepare_all(records: &[SubjectRecord], cfg: &PipelineConfig) -> Result<Vec<PreparedSubject>> {
    records
        .par_iter()
        .map(|r| prepare_subject(r, &cfg.filters).map_err(Into::into))
        .collect()
}

fn ids(data: &[PreparedSubject]) -> Vec<&str> {
    data.iter().map(|s| s.subject_id.as_str()).collect()
}

/// Trains each fold once; folds run in parallel.
pub fn train_folds(data: &[PreparedSubject], cfg: &PipelineConfig) -> Result<Vec<(usize, TrainedPipeline)>> {
    cfg.validate()?;
    let folds = loso_split(&ids(data))?;
    folds
        .par_iter()
        .map(|fold| {
            let samples = training_samples(data, &fold.train, cfg.problem)?;
            let pipeline = train_pipeline(&samples, cfg, &mut NoAudit)?;
            let test = data.iter().position(|s| s.subject_id == fold.test).expect("fold subject");
            Ok((test, pipeline))
        })
        .collect()
}

pub fn evaluate_folds(
    data: &[PreparedSubject],
    trained: &[(usize, TrainedPipeline)],
    cfg: &PipelineConfig,
) -> Result<Vec<FoldResult>> {
    trained
        .par_iter()
        .map(|(test, pipeline)| evaluate_subject(pipeline, &data[*test], cfg).map_err(Into::into))
        .collect()
}

pub fn run_loso(data: &[PreparedSubject], cfg: &PipelineConfig) -> Result<Vec<FoldResult>> {
    let trained = train_folds(data, cfg)?;
    evaluate_folds(data, &trained, cfg)
}

/// One row per delta; each fold's models are trained once and reused.
pub fn sweep(data: &[PreparedSubject], cfg: &PipelineConfig, deltas: &[f64]) -> Result<Vec<(f64, Summary)>> {
    let trained = train_folds(data, cfg)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut c = cfg.clone();
        c.delta = delta;
        c.validate()?;
        let folds = evaluate_folds(data, &trained, &c)?;
        rows.push((delta, summarize(&folds, cfg.problem.class_count())?));
    }
    Ok(rows)
}

/// Trains on every subject, for deployment.
pub fn train_all(data: &[PreparedSubject], cfg: &PipelineConfig) -> Result<TrainedPipeline> {
    cfg.validate()?;
    let all: Vec<String> = data.iter().map(|s| s.subject_id.clone()).collect();
    let samples = training_samples(data, &all, cfg.problem)?;
    Ok(train_pipeline(&samples, cfg, &mut NoAudit)?)
}
