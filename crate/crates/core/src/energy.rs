//! Relative energy accounting for gated inference.
//!
//! Costs are dimensionless weights. A gated window pays the gate (ACC
//! features plus gate inference), each additional modality needed by the
//! selected branches once, and each selected branch classifier once.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::classifiers::ClassifierKind;
use crate::datamodel::{Modality, ModalitySet};
use crate::error::{Error, Result};
use crate::gating::{BranchId, BranchSpec, GateDecision};

#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    /// Feature extraction cost per modality, [`Modality::ALL`] order.
    pub extraction: [f64; 4],
    /// Inference cost per branch classifier.
    pub classifier: BTreeMap<BranchSpec, f64>,
    /// ACC extraction plus gate inference.
    pub gate: f64,
}

/// Default relative inference weight per classifier kind.
pub fn default_classifier_cost(kind: ClassifierKind) -> f64 {
    match kind {
        ClassifierKind::DecisionTree => 0.05,
        ClassifierKind::RandomForest => 1.0,
        ClassifierKind::AdaBoost => 0.5,
        ClassifierKind::Lda => 0.05,
        ClassifierKind::Knn => 2.0,
    }
}

impl Default for CostModel {
    /// Extraction dominates; BVP (filtering + peak detection) is the most
    /// expensive modality, TEMP the cheapest.
    fn default() -> Self {
        let extraction = [2.0, 4.0, 2.0, 0.5];
        let classifier = BranchSpec::all_candidates()
            .map(|s| (s, default_classifier_cost(s.kind)))
            .collect();
        CostModel {
            extraction,
            classifier,
            gate: extraction[Modality::Acc.index()] + 0.05,
        }
    }
}

impl CostModel {
    /// Every extraction, classifier and the gate cost `cost`.
    pub fn uniform(cost: f64) -> Self {
        CostModel {
            extraction: [cost; 4],
            classifier: BranchSpec::all_candidates().map(|s| (s, cost)).collect(),
            gate: cost,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .extraction
            .iter()
            .chain(self.classifier.values())
            .chain(core::iter::once(&self.gate));
        for v in all {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::config(format!("cost {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    pub fn extraction_cost(&self, m: Modality) -> f64 {
        self.extraction[m.index()]
    }

    pub fn classifier_cost(&self, spec: BranchSpec) -> Result<f64> {
        self.classifier
            .get(&spec)
            .copied()
            .ok_or_else(|| Error::config(format!("cost model has no entry for {spec}")))
    }

    /// Marginal cost of running one branch after the gate.
    pub fn branch_cost(&self, spec: BranchSpec) -> Result<f64> {
        let extraction: f64 = spec
            .id
            .modalities()
            .iter()
            .filter(|&m| m != Modality::Acc)
            .map(|m| self.extraction_cost(m))
            .sum();
        Ok(extraction + self.classifier_cost(spec)?)
    }

    fn selection_cost(&self, specs: &[BranchSpec], skip: ModalitySet) -> Result<f64> {
        let mut needed = ModalitySet::EMPTY;
        let mut total = 0.0;
        for &spec in specs {
            needed = needed.union(spec.id.modalities());
            total += self.classifier_cost(spec)?;
        }
        total += needed
            .iter()
            .filter(|m| !skip.contains(*m))
            .map(|m| self.extraction_cost(m))
            .sum::<f64>();
        Ok(total)
    }

    /// Ungated late fusion over `specs`: every needed modality once, every
    /// classifier once, no gate.
    pub fn baseline_cost(&self, specs: &[BranchSpec]) -> Result<f64> {
        self.selection_cost(specs, ModalitySet::EMPTY)
    }
}

/// Cost of one gated window.
pub fn window_cost(decision: &GateDecision, model: &CostModel) -> Result<f64> {
    let specs: Vec<BranchSpec> = decision.selected_specs().collect();
    Ok(model.gate + model.selection_cost(&specs, ModalitySet::of(&[Modality::Acc]))?)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindowKey {
    pub subject: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyReport {
    windows: Vec<(WindowKey, f64)>,
    total: f64,
    invocations: BTreeMap<BranchId, usize>,
    baseline_ratio: Option<f64>,
}

impl EnergyReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, key: WindowKey, cost: f64, branches: impl IntoIterator<Item = BranchId>) {
        self.windows.push((key, cost));
        self.total += cost;
        for b in branches {
            *self.invocations.entry(b).or_default() += 1;
        }
    }

    /// Concatenates another report's windows.
    pub fn merge(&mut self, other: &EnergyReport) {
        self.windows.extend(other.windows.iter().cloned());
        self.total += other.total;
        for (b, n) in &other.invocations {
            *self.invocations.entry(*b).or_default() += n;
        }
        self.baseline_ratio = None;
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    pub fn mean(&self) -> f64 {
        if self.windows.is_empty() {
            0.0
        } else {
            self.total / self.windows.len() as f64
        }
    }

    pub fn windows(&self) -> &[(WindowKey, f64)] {
        &self.windows
    }

    pub fn invocations(&self) -> &BTreeMap<BranchId, usize> {
        &self.invocations
    }

    pub fn baseline_ratio(&self) -> Option<f64> {
        self.baseline_ratio
    }

    /// Compares against `baseline` and stores the efficiency ratio.
    pub fn set_baseline(&mut self, baseline: &EnergyReport) -> Result<f64> {
        let ratio = compare(self, baseline)?;
        self.baseline_ratio = Some(ratio);
        Ok(ratio)
    }
}

/// Efficiency of `candidate` relative to `baseline`: `total(baseline) /
/// total(candidate)`, so 2.0 means half the energy.
pub fn compare(candidate: &EnergyReport, baseline: &EnergyReport) -> Result<f64> {
    fn keys(r: &EnergyReport) -> Vec<&WindowKey> {
        let mut k: Vec<&WindowKey> = r.windows.iter().map(|(k, _)| k).collect();
        k.sort();
        k
    }
    if keys(candidate) != keys(baseline) {
        return Err(Error::validation("energy reports cover different windows"));
    }
    if candidate.total == baseline.total {
        return Ok(1.0);
    }
    Ok(baseline.total / candidate.total)
}
