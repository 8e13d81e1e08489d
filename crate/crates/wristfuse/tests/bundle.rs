use std::fs;

use wristfuse::bundle::ModelBundle;
use wristfuse::runner;
use wristfuse::AppError;
use wristfuse_core::eval::{evaluate_subject, PipelineConfig};
use wristfuse_core::synthetic::{generate_synthetic, ClassProfile};
use wristfuse_core::Problem;

#[test]
fn bundle_round_trip_predicts_identically() {
    let cfg = PipelineConfig::for_problem(Problem::TwoClass);
    let records = generate_synthetic(3, 240.0, 8, &ClassProfile::separable()).unwrap();
    let data = runner::prepare_all(&records, &cfg).unwrap();
    let pipeline = runner::train_all(&data[..2], &cfg).unwrap();
    let bundle = ModelBundle::new(pipeline, &cfg, vec!["S1".into(), "S2".into()]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    bundle.save(&path).unwrap();
    let back = ModelBundle::load(&path).unwrap();
    assert_eq!(back, bundle);

    let a = evaluate_subject(&bundle.pipeline, &data[2], &cfg).unwrap();
    let b = evaluate_subject(&back.pipeline, &data[2], &cfg).unwrap();
    assert_eq!(a.windows, b.windows);
}

#[test]
fn foreign_or_future_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    for text in [r#"{"format":"other","version":1}"#, r#"{"format":"wristfuse-model","version":2}"#, "not json"] {
        fs::write(&path, text).unwrap();
        assert!(matches!(ModelBundle::load(&path), Err(AppError::Format { .. })), "{text}");
    }
}

#[test]
fn parallel_loso_matches_sequential() {
    let cfg = PipelineConfig::for_problem(Problem::ThreeClass);
    let records = generate_synthetic(3, 240.0, 2, &ClassProfile::eda_only()).unwrap();
    let data = runner::prepare_all(&records, &cfg).unwrap();
    let par = runner::run_loso(&data, &cfg).unwrap();
    let seq = wristfuse_core::eval::run_loso(&data, &cfg, &mut wristfuse_core::eval::NoAudit).unwrap();
    assert_eq!(par, seq);
}
