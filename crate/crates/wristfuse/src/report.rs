//! CSV outputs and the printed summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use wristfuse_core::eval::{FoldResult, Summary};
use wristfuse_core::gating::BranchId;

use crate::error::{AppError, Result};

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(AppError::io(path))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn fail(path: &Path) -> impl Fn(csv::Error) -> AppError + '_ {
    move |e| AppError::Format {
        path: path.into(),
        message: e.to_string(),
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(fail(path))?;
    for row in rows {
        w.write_record(&row).map_err(fail(path))?;
    }
    w.flush().map_err(AppError::io(path))
}

/// One row per evaluated window.
pub fn write_results(path: &Path, folds: &[FoldResult]) -> Result<()> {
    let rows = folds.iter().flat_map(|f| f.windows.iter()).map(|w| {
        vec![
            w.subject_id.clone(),
            w.index.to_string(),
            w.start_time.to_string(),
            w.truth.to_string(),
            w.predicted.to_string(),
            join(&w.selected),
            join(&w.gate_probs),
            w.cost.to_string(),
            w.baseline_cost.to_string(),
        ]
    });
    write_rows(
        path,
        &["subject", "window", "start_time", "truth", "predicted", "selected", "gate_probs", "cost", "baseline_cost"],
        rows,
    )
}

const SUMMARY_HEADER: [&str; 10] = [
    "scope",
    "subject",
    "windows",
    "excluded",
    "accuracy",
    "macro_f1",
    "energy",
    "baseline_energy",
    "relative_energy",
    "branches",
];

/// Per-fold rows followed by pooled (`micro`) and fold-averaged (`mean`) rows.
pub fn write_summary(path: &Path, folds: &[FoldResult], summary: &Summary) -> Result<()> {
    let mut rows: Vec<Vec<String>> = folds
        .iter()
        .map(|f| {
            let (e, b) = (f.energy.total(), f.baseline.total());
            vec![
                "fold".into(),
                f.test_subject.clone(),
                f.windows.len().to_string(),
                f.excluded.to_string(),
                f.accuracy.to_string(),
                f.macro_f1.to_string(),
                e.to_string(),
                b.to_string(),
                (e / b).to_string(),
                join(&f.branches),
            ]
        })
        .collect();
    let all = |scope: &str, acc: f64, f1: f64| {
        vec![
            scope.into(),
            String::new(),
            summary.windows.to_string(),
            summary.excluded.to_string(),
            acc.to_string(),
            f1.to_string(),
            summary.energy_total.to_string(),
            summary.baseline_total.to_string(),
            summary.relative_energy().to_string(),
            String::new(),
        ]
    };
    rows.push(all("micro", summary.micro_accuracy, summary.micro_macro_f1));
    rows.push(all("mean", summary.mean_accuracy, summary.mean_macro_f1));
    write_rows(path, &SUMMARY_HEADER, rows)
}

/// Per-fold energy with branch invocation counts.
pub fn write_energy(path: &Path, folds: &[FoldResult]) -> Result<()> {
    let mut header = vec!["subject", "windows", "energy", "baseline_energy", "mean_energy", "efficiency"];
    let names: Vec<String> = BranchId::ALL.iter().map(|b| format!("calls_{b}")).collect();
    header.extend(names.iter().map(String::as_str));
    let rows = folds.iter().map(|f| {
        let mut row = vec![
            f.test_subject.clone(),
            f.energy.window_count().to_string(),
            f.energy.total().to_string(),
            f.baseline.total().to_string(),
            f.energy.mean().to_string(),
            (f.baseline.total() / f.energy.total()).to_string(),
        ];
        let inv = f.energy.invocations();
        row.extend(BranchId::ALL.iter().map(|b| inv.get(b).copied().unwrap_or(0).to_string()));
        row
    });
    write_rows(path, &header, rows)
}

pub fn write_sweep(path: &Path, rows: &[(f64, Summary)]) -> Result<()> {
    let rows = rows.iter().map(|(delta, s)| {
        vec![
            delta.to_string(),
            s.windows.to_string(),
            s.micro_accuracy.to_string(),
            s.micro_macro_f1.to_string(),
            s.mean_accuracy.to_string(),
            s.mean_macro_f1.to_string(),
            s.energy_total.to_string(),
            s.baseline_total.to_string(),
            s.relative_energy().to_string(),
        ]
    });
    write_rows(
        path,
        &["delta", "windows", "accuracy", "macro_f1", "mean_accuracy", "mean_macro_f1", "energy", "baseline_energy", "relative_energy"],
        rows,
    )
}

pub fn fold_table(folds: &[FoldResult], summary: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:>7} {:>8} {:>8} {:>9}  branches", "subject", "windows", "accuracy", "macro_f1", "rel.energy");
    for f in folds {
        let _ = writeln!(
            out,
            "{:<8} {:>7} {:>8.4} {:>8.4} {:>9.4}  {}",
            f.test_subject,
            f.windows.len(),
            f.accuracy,
            f.macro_f1,
            f.energy.total() / f.baseline.total(),
            join(&f.branches)
        );
    }
    let _ = writeln!(
        out,
        "{:<8} {:>7} {:>8.4} {:>8.4} {:>9.4}",
        "micro", summary.windows, summary.micro_accuracy, summary.micro_macro_f1, summary.relative_energy()
    );
    let _ = writeln!(
        out,
        "{:<8} {:>7} {:>8.4} {:>8.4}",
        "mean", "", summary.mean_accuracy, summary.mean_macro_f1
    );
    if summary.excluded > 0 {
        let _ = writeln!(out, "excluded windows: {}", summary.excluded);
    }
    out
}

pub fn sweep_table(rows: &[(f64, Summary)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>6} {:>8} {:>8} {:>12} {:>10}", "delta", "accuracy", "macro_f1", "energy", "rel.energy");
    for (d, s) in rows {
        let _ = writeln!(
            out,
            "{:>6.3} {:>8.4} {:>8.4} {:>12.2} {:>10.4}",
            d, s.micro_accuracy, s.micro_macro_f1, s.energy_total, s.relative_energy()
        );
    }
    out
}
