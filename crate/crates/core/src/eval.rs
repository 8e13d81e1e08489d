//! Leave-one-subject-out evaluation: data preparation, per-fold training,
//! gated inference with late fusion, metrics and energy accounting.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::classifiers::{HyperParams, TrainedModel};
use crate::datamodel::{ClassLabel, Problem, SubjectRecord, SLIDE_SECONDS, WINDOW_SECONDS};
use crate::energy::{window_cost, CostModel, EnergyReport, WindowKey};
use crate::error::{Error, Result};
use crate::features::{BankView, FeatureBank, FeatureSource};
use crate::fusion::{fuse_hard, fuse_soft, run_kalman_sequence, BranchPrediction, KalmanConfig};
use crate::gating::{
    check_delta, gate, make_gate_labels, select_branches, train_gate, BranchId, BranchModel,
    BranchSpec, GateDecision, TrainingSample,
};
use crate::preprocess::{segment, FilterBank};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub test: String,
    pub train: Vec<String>,
}

/// One fold per subject, in input order.
pub fn loso_split<S: AsRef<str>>(subjects: &[S]) -> Result<Vec<Fold>> {
    if subjects.len() < 2 {
        return Err(Error::config("leave-one-subject-out needs at least 2 subjects"));
    }
    let ids: Vec<&str> = subjects.iter().map(|s| s.as_ref()).collect();
    for (i, id) in ids.iter().enumerate() {
        if ids[..i].contains(id) {
            return Err(Error::validation(format!("duplicate subject id {id}")));
        }
    }
    Ok(ids
        .iter()
        .map(|&test| Fold {
            test: test.to_string(),
            train: ids.iter().filter(|&&s| s != test).map(|s| s.to_string()).collect(),
        })
        .collect())
}

pub fn accuracy(truth: &[usize], preds: &[usize]) -> Result<f64> {
    check_pair(truth, preds)?;
    let correct = truth.iter().zip(preds).filter(|(t, p)| t == p).count();
    Ok(correct as f64 / truth.len() as f64)
}

fn check_pair(truth: &[usize], preds: &[usize]) -> Result<()> {
    if truth.len() != preds.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: preds.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::validation("no predictions to score"));
    }
    Ok(())
}

/// `confusion[t][p]` counts windows of true class `t` predicted as `p`.
pub fn confusion(truth: &[usize], preds: &[usize], class_count: usize) -> Result<Vec<Vec<usize>>> {
    check_pair(truth, preds)?;
    let mut m = vec![vec![0; class_count]; class_count];
    for (&t, &p) in truth.iter().zip(preds) {
        if t >= class_count || p >= class_count {
            return Err(Error::InvalidLabel(t.max(p) as i64));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Unweighted mean of per-class F1. Classes with no true or predicted
/// windows score 0 and still count in the mean.
pub fn macro_f1(truth: &[usize], preds: &[usize], class_count: usize) -> Result<f64> {
    let m = confusion(truth, preds, class_count)?;
    let mut total = 0.0;
    for c in 0..class_count {
        let tp = m[c][c] as f64;
        let predicted: usize = (0..class_count).map(|t| m[t][c]).sum();
        let actual: usize = m[c].iter().sum();
        let denom = (predicted + actual) as f64;
        if denom > 0.0 {
            total += 2.0 * tp / denom;
        }
    }
    Ok(total / class_count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FusionKind {
    Kalman,
    Soft,
    Hard,
    /// Only the gate's top branch, whatever `delta` allows.
    Single,
}

impl FusionKind {
    pub const ALL: [FusionKind; 4] = [FusionKind::Kalman, FusionKind::Soft, FusionKind::Hard, FusionKind::Single];

    pub const fn name(self) -> &'static str {
        match self {
            FusionKind::Kalman => "kalman",
            FusionKind::Soft => "soft",
            FusionKind::Hard => "hard",
            FusionKind::Single => "single",
        }
    }
}

impl fmt::Display for FusionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FusionKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown fusion '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub problem: Problem,
    pub delta: f64,
    pub fusion: FusionKind,
    pub kalman: KalmanConfig,
    pub costs: CostModel,
    /// Number of branches kept after the 25-way selection.
    pub k: usize,
    pub hp: HyperParams,
    pub filters: FilterBank,
}

impl PipelineConfig {
    pub fn for_problem(problem: Problem) -> Self {
        PipelineConfig {
            problem,
            delta: default_delta(problem),
            fusion: FusionKind::Kalman,
            kalman: KalmanConfig::for_problem(problem),
            costs: CostModel::default(),
            k: 3,
            hp: HyperParams::default(),
            filters: FilterBank::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        self.kalman.validate()?;
        if self.kalman.class_count() != self.problem.class_count() {
            return Err(Error::config(format!(
                "kalman config has {} classes, problem {} has {}",
                self.kalman.class_count(),
                self.problem,
                self.problem.class_count()
            )));
        }
        self.costs.validate()?;
        self.hp.validate()?;
        if !(1..=5).contains(&self.k) {
            return Err(Error::config(format!("k = {} outside 1..=5", self.k)));
        }
        Ok(())
    }
}

pub const fn default_delta(problem: Problem) -> f64 {
    match problem {
        Problem::ThreeClass => 0.4,
        Problem::TwoClass => 0.1,
    }
}

/// A segmented window reduced to its features.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedWindow {
    pub index: usize,
    pub start_time: f64,
    pub label: ClassLabel,
    pub features: FeatureBank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSubject {
    pub subject_id: String,
    pub windows: Vec<PreparedWindow>,
    /// Windows dropped because feature extraction failed.
    pub excluded: usize,
}

/// Filters, segments and extracts every window of a subject once.
pub fn prepare_subject(record: &SubjectRecord, filters: &FilterBank) -> Result<PreparedSubject> {
    let filtered = filters.apply(record)?;
    let mut windows = Vec::new();
    let mut excluded = 0;
    for w in segment(&filtered, WINDOW_SECONDS, SLIDE_SECONDS)? {
        match FeatureBank::extract(&w) {
            Ok(features) => windows.push(PreparedWindow {
                index: w.window_index(),
                start_time: w.start_time(),
                label: w.label(),
                features,
            }),
            Err(Error::FeatureExtraction { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(PreparedSubject {
        subject_id: record.subject_id().to_string(),
        windows,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingStage {
    BranchSelection,
    GateLabels,
    GateTraining,
}

/// Sees every sample set handed to a training step.
pub trait TrainingAudit {
    fn observe(&mut self, stage: TrainingStage, samples: &[TrainingSample]);
}

pub struct NoAudit;

impl TrainingAudit for NoAudit {
    fn observe(&mut self, _: TrainingStage, _: &[TrainingSample]) {}
}

/// Branch models and gate for one fold.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainedPipeline {
    pub problem: Problem,
    pub branches: Vec<BranchModel>,
    pub gate: TrainedModel,
}

impl TrainedPipeline {
    pub fn specs(&self) -> Vec<BranchSpec> {
        self.branches.iter().map(|b| b.spec).collect()
    }
}

/// Training samples for `subjects`, labels projected into `problem`.
pub fn training_samples(data: &[PreparedSubject], subjects: &[String], problem: Problem) -> Result<Vec<TrainingSample>> {
    let mut out = Vec::new();
    for s in data.iter().filter(|s| subjects.contains(&s.subject_id)) {
        for w in &s.windows {
            out.push(TrainingSample {
                subject_id: s.subject_id.clone(),
                window_index: w.index,
                label: problem.project(w.label)?.id(),
                features: w.features.clone(),
            });
        }
    }
    Ok(out)
}

pub fn train_pipeline(
    samples: &[TrainingSample],
    cfg: &PipelineConfig,
    audit: &mut dyn TrainingAudit,
) -> Result<TrainedPipeline> {
    let c = cfg.problem.class_count();
    audit.observe(TrainingStage::BranchSelection, samples);
    let branches = select_branches(samples, c, cfg.k, &cfg.hp)?;
    audit.observe(TrainingStage::GateLabels, samples);
    let labels = make_gate_labels(samples, &branches, &cfg.costs)?;
    audit.observe(TrainingStage::GateTraining, samples);
    let gate = train_gate(samples, &labels, branches.len(), &cfg.hp.tree)?;
    Ok(TrainedPipeline {
        problem: cfg.problem,
        branches,
        gate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub subject_id: String,
    pub index: usize,
    pub start_time: f64,
    pub truth: usize,
    pub predicted: usize,
    pub gate_probs: Vec<f64>,
    pub selected: Vec<BranchId>,
    pub cost: f64,
    pub baseline_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub test_subject: String,
    pub branches: Vec<BranchSpec>,
    pub windows: Vec<WindowResult>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub energy: EnergyReport,
    /// Ungated hard voting over all selected branches on the same windows.
    pub baseline: EnergyReport,
    pub excluded: usize,
}

impl FoldResult {
    pub fn truth(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.truth).collect()
    }

    pub fn predictions(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.predicted).collect()
    }

    pub fn branch_histogram(&self) -> &BTreeMap<BranchId, usize> {
        self.energy.invocations()
    }
}

/// Gated inference over one subject's windows in temporal order.
pub fn evaluate_subject(
    pipeline: &TrainedPipeline,
    subject: &PreparedSubject,
    cfg: &PipelineConfig,
) -> Result<FoldResult> {
    check_delta(cfg.delta)?;
    if pipeline.problem != cfg.problem {
        return Err(Error::config("pipeline was trained for another problem"));
    }
    if subject.windows.is_empty() {
        return Err(Error::validation(format!("subject {} has no usable windows", subject.subject_id)));
    }
    let specs = pipeline.specs();
    let baseline_cost = cfg.costs.baseline_cost(&specs)?;
    let mut order: Vec<&PreparedWindow> = subject.windows.iter().collect();
    order.sort_by(|a, b| a.start_time.total_cmp(&b.start_time).then(a.index.cmp(&b.index)));

    let mut decisions: Vec<GateDecision> = Vec::with_capacity(order.len());
    let mut preds: Vec<Vec<BranchPrediction>> = Vec::with_capacity(order.len());
    for w in &order {
        let mut view = BankView::new(&w.features);
        let delta = if cfg.fusion == FusionKind::Single { 0.0 } else { cfg.delta };
        let decision = gate(&mut view, &pipeline.gate, &specs, delta)?;
        debug_assert_eq!(view.touched().len(), 1);
        let mut p = Vec::with_capacity(decision.selected.len());
        for &i in &decision.selected {
            p.push(pipeline.branches[i].predict_from(&mut view)?);
        }
        decisions.push(decision);
        preds.push(p);
    }

    let labels: Vec<usize> = match cfg.fusion {
        FusionKind::Kalman => {
            let keys: Vec<(&str, usize)> = order.iter().map(|w| (subject.subject_id.as_str(), w.index)).collect();
            run_kalman_sequence(&keys, &preds, &cfg.kalman)?.labels
        }
        FusionKind::Soft => preds.iter().map(|p| fuse_soft(p)).collect::<Result<_>>()?,
        FusionKind::Hard | FusionKind::Single => preds.iter().map(|p| fuse_hard(p)).collect::<Result<_>>()?,
    };

    let mut energy = EnergyReport::new();
    let mut baseline = EnergyReport::new();
    let mut windows = Vec::with_capacity(order.len());
    for ((w, decision), predicted) in order.iter().zip(&decisions).zip(labels) {
        let key = WindowKey {
            subject: subject.subject_id.clone(),
            index: w.index,
        };
        let cost = window_cost(decision, &cfg.costs)?;
        let selected: Vec<BranchId> = decision.selected_ids().collect();
        energy.record(key.clone(), cost, selected.iter().copied());
        baseline.record(key, baseline_cost, specs.iter().map(|s| s.id));
        windows.push(WindowResult {
            subject_id: subject.subject_id.clone(),
            index: w.index,
            start_time: w.start_time,
            truth: cfg.problem.project(w.label)?.id(),
            predicted,
            gate_probs: decision.probs.clone(),
            selected,
            cost,
            baseline_cost,
        });
    }
    energy.set_baseline(&baseline)?;
    let truth: Vec<usize> = windows.iter().map(|w| w.truth).collect();
    let predicted: Vec<usize> = windows.iter().map(|w| w.predicted).collect();
    Ok(FoldResult {
        test_subject: subject.subject_id.clone(),
        branches: specs,
        accuracy: accuracy(&truth, &predicted)?,
        macro_f1: macro_f1(&truth, &predicted, cfg.problem.class_count())?,
        windows,
        energy,
        baseline,
        excluded: subject.excluded,
    })
}

/// Trains on the fold's training subjects and evaluates its test subject.
pub fn run_fold(
    fold: &Fold,
    data: &[PreparedSubject],
    cfg: &PipelineConfig,
    audit: &mut dyn TrainingAudit,
) -> Result<FoldResult> {
    cfg.validate()?;
    if fold.train.contains(&fold.test) {
        return Err(Error::validation(format!("subject {} is in its own training set", fold.test)));
    }
    let test = data
        .iter()
        .find(|s| s.subject_id == fold.test)
        .ok_or_else(|| Error::validation(format!("no data for subject {}", fold.test)))?;
    let samples = training_samples(data, &fold.train, cfg.problem)?;
    let pipeline = train_pipeline(&samples, cfg, audit)?;
    evaluate_subject(&pipeline, test, cfg)
}

/// Runs every fold sequentially in subject order.
pub fn run_loso(data: &[PreparedSubject], cfg: &PipelineConfig, audit: &mut dyn TrainingAudit) -> Result<Vec<FoldResult>> {
    let ids: Vec<&str> = data.iter().map(|s| s.subject_id.as_str()).collect();
    loso_split(&ids)?
        .iter()
        .map(|fold| run_fold(fold, data, cfg, audit))
        .collect()
}

/// Pooled (micro) and per-fold mean metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub windows: usize,
    pub excluded: usize,
    pub micro_accuracy: f64,
    pub micro_macro_f1: f64,
    pub mean_accuracy: f64,
    pub mean_macro_f1: f64,
    pub energy_total: f64,
    pub baseline_total: f64,
    /// `baseline_total / energy_total`.
    pub efficiency: f64,
    pub invocations: BTreeMap<BranchId, usize>,
}

impl Summary {
    /// Gated energy as a fraction of the baseline.
    pub fn relative_energy(&self) -> f64 {
        1.0 / self.efficiency
    }
}

pub fn summarize(folds: &[FoldResult], class_count: usize) -> Result<Summary> {
    if folds.is_empty() {
        return Err(Error::validation("no folds to summarize"));
    }
    let mut truth = Vec::new();
    let mut preds = Vec::new();
    let mut energy = EnergyReport::new();
    let mut baseline = EnergyReport::new();
    for f in folds {
        truth.extend(f.truth());
        preds.extend(f.predictions());
        energy.merge(&f.energy);
        baseline.merge(&f.baseline);
    }
    let n = folds.len() as f64;
    Ok(Summary {
        windows: truth.len(),
        excluded: folds.iter().map(|f| f.excluded).sum(),
        micro_accuracy: accuracy(&truth, &preds)?,
        micro_macro_f1: macro_f1(&truth, &preds, class_count)?,
        mean_accuracy: folds.iter().map(|f| f.accuracy).sum::<f64>() / n,
        mean_macro_f1: folds.iter().map(|f| f.macro_f1).sum::<f64>() / n,
        energy_total: energy.total(),
        baseline_total: baseline.total(),
        efficiency: crate::energy::compare(&energy, &baseline)?,
        invocations: energy.invocations().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loso_folds() {
        let folds = loso_split(&["S2", "S3"]).unwrap();
        assert_eq!(folds.len(), 2);
        assert_eq!(folds[0].train, vec!["S3".to_string()]);
        assert_eq!(folds[1].train, vec!["S2".to_string()]);
        let ids: Vec<String> = (1..=15).map(|i| format!("S{i}")).collect();
        let folds = loso_split(&ids).unwrap();
        assert_eq!(folds.len(), 15);
        for f in &folds {
            assert!(!f.train.contains(&f.test));
            assert_eq!(f.train.len(), 14);
        }
        assert!(loso_split(&["S1"]).is_err());
        assert!(loso_split(&["S1", "S1"]).is_err());
    }

    #[test]
    fn macro_f1_cases() {
        assert_eq!(macro_f1(&[0, 1, 2], &[0, 1, 2], 3).unwrap(), 1.0);
        assert!((macro_f1(&[0, 0, 1, 1], &[0, 1, 0, 1], 2).unwrap() - 0.5).abs() < 1e-12);
        let f = macro_f1(&[0, 0, 1, 1, 2, 2], &[0; 6], 3).unwrap();
        assert!((f - 0.5 / 3.0).abs() < 1e-12);
        assert!(macro_f1(&[], &[], 2).is_err());
        assert!(macro_f1(&[0], &[0, 1], 2).is_err());
    }

    #[test]
    fn absent_class_still_averaged() {
        assert_eq!(macro_f1(&[0, 1], &[0, 1], 3).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn fusion_names_round_trip() {
        for k in FusionKind::ALL {
            assert_eq!(k.name().parse::<FusionKind>().unwrap(), k);
        }
        assert!("vote".parse::<FusionKind>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = PipelineConfig::for_problem(Problem::TwoClass);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.delta, 0.1);
        cfg.delta = 1.2;
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::for_problem(Problem::TwoClass);
        cfg.kalman = KalmanConfig::for_problem(Problem::ThreeClass);
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::for_problem(Problem::ThreeClass);
        cfg.k = 6;
        assert!(cfg.validate().is_err());
    }
}
