//! Context identification: branch-classifier selection, gate labelling,
//! the ACC-only gate and the `delta` trade-off.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::classifiers::{
    train, training_loss, ClassifierKind, DecisionTree, FeatureMatrix, HyperParams, TrainedModel,
    TreeParams,
};
use crate::datamodel::{Modality, ModalitySet};
use crate::energy::CostModel;
use crate::error::{Error, Result};
use crate::features::{extract_for_branch, FeatureBank, FeatureSource};
use crate::fusion::BranchPrediction;
use crate::math::argmax;

/// Early-fusion modality combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BranchId {
    B1,
    B2,
    B3,
    B4,
    B5,
}

impl BranchId {
    pub const ALL: [BranchId; 5] = [BranchId::B1, BranchId::B2, BranchId::B3, BranchId::B4, BranchId::B5];

    pub const fn modalities(self) -> ModalitySet {
        use Modality::*;
        match self {
            BranchId::B1 => ModalitySet::of(&[Bvp, Eda, Temp]),
            BranchId::B2 => ModalitySet::of(&[Acc, Bvp, Eda]),
            BranchId::B3 => ModalitySet::of(&[Bvp, Eda]),
            BranchId::B4 => ModalitySet::of(&[Acc, Bvp]),
            BranchId::B5 => ModalitySet::of(&[Acc, Eda]),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            BranchId::B1 => "B1",
            BranchId::B2 => "B2",
            BranchId::B3 => "B3",
            BranchId::B4 => "B4",
            BranchId::B5 => "B5",
        }
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BranchId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BranchId::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown branch '{s}'")))
    }
}

/// A branch paired with a classifier kind, written `B3-RF`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchSpec {
    pub id: BranchId,
    pub kind: ClassifierKind,
}

impl BranchSpec {
    pub const fn new(id: BranchId, kind: ClassifierKind) -> Self {
        BranchSpec { id, kind }
    }

    pub const fn modalities(self) -> ModalitySet {
        self.id.modalities()
    }

    /// The 25 branch/classifier combinations in (branch, kind) order.
    pub fn all_candidates() -> impl Iterator<Item = BranchSpec> {
        BranchId::ALL
            .into_iter()
            .flat_map(|id| ClassifierKind::ALL.into_iter().map(move |k| BranchSpec::new(id, k)))
    }
}

impl fmt::Display for BranchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.id, self.kind)
    }
}

impl FromStr for BranchSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (id, kind) = s
            .split_once('-')
            .ok_or_else(|| Error::config(format!("branch spec '{s}' is not of the form B1-RF")))?;
        Ok(BranchSpec::new(id.parse()?, kind.parse()?))
    }
}

/// One training window reduced to its features and problem-space label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub subject_id: String,
    pub window_index: usize,
    pub label: usize,
    pub features: FeatureBank,
}

/// Design matrix and labels for a modality subset.
pub fn design_matrix(samples: &[TrainingSample], set: ModalitySet) -> Result<(FeatureMatrix, Vec<usize>)> {
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.values_for(set)).collect();
    let x = FeatureMatrix::from_rows(&rows)?;
    Ok((x, samples.iter().map(|s| s.label).collect()))
}

/// A trained branch classifier and its training loss.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchModel {
    pub spec: BranchSpec,
    pub model: TrainedModel,
    pub loss: f64,
}

impl BranchModel {
    pub fn predict_bank(&self, bank: &FeatureBank) -> Result<BranchPrediction> {
        let probs = self.model.predict_proba(&bank.values_for(self.spec.modalities()))?;
        Ok(BranchPrediction::new(self.spec.id, probs))
    }

    /// Pulls only this branch's modalities from the source.
    pub fn predict_from<S: FeatureSource + ?Sized>(&self, source: &mut S) -> Result<BranchPrediction> {
        let fv = extract_for_branch(source, self.spec.modalities())?;
        let probs = self.model.predict_proba(fv.values())?;
        Ok(BranchPrediction::new(self.spec.id, probs))
    }
}

/// Trains one combination and scores it on its own training data.
pub fn train_candidate(
    spec: BranchSpec,
    samples: &[TrainingSample],
    class_count: usize,
    hp: &HyperParams,
) -> Result<BranchModel> {
    let (x, y) = design_matrix(samples, spec.modalities())?;
    let model = train(spec.kind, &x, &y, class_count, hp)?;
    let loss = training_loss(&model, &x, &y)?;
    if !loss.is_finite() {
        return Err(Error::DegenerateTraining(format!("{spec} produced a non-finite loss")));
    }
    Ok(BranchModel { spec, model, loss })
}

/// Keeps each branch's lowest-loss kind, then the `k` lowest-loss branches.
/// Failed combinations are dropped. Ties go to the lower branch id, then the
/// earlier classifier kind. The result is sorted by branch id.
pub fn select_from_candidates(
    candidates: impl IntoIterator<Item = Result<BranchModel>>,
    k: usize,
) -> Result<Vec<BranchModel>> {
    if k == 0 {
        return Err(Error::config("k must be positive"));
    }
    let mut best: [Option<BranchModel>; 5] = Default::default();
    for m in candidates.into_iter().flatten() {
        let slot = &mut best[m.spec.id as usize];
        let better = match slot {
            None => true,
            Some(cur) => (m.loss, m.spec.kind) < (cur.loss, cur.spec.kind),
        };
        if better {
            *slot = Some(m);
        }
    }
    let mut survivors: Vec<BranchModel> = best.into_iter().flatten().collect();
    if survivors.len() < k {
        return Err(Error::DegenerateTraining(format!(
            "only {} branch(es) trained successfully, {k} requested",
            survivors.len()
        )));
    }
    survivors.sort_by(|a, b| a.loss.total_cmp(&b.loss).then(a.spec.id.cmp(&b.spec.id)));
    survivors.truncate(k);
    survivors.sort_by_key(|m| m.spec.id);
    Ok(survivors)
}

/// Trains all 25 combinations and keeps the `k` best branches.
pub fn select_branches(
    samples: &[TrainingSample],
    class_count: usize,
    k: usize,
    hp: &HyperParams,
) -> Result<Vec<BranchModel>> {
    let mut seen = alloc::vec![false; class_count];
    for s in samples {
        if s.label >= class_count {
            return Err(Error::InvalidLabel(s.label as i64));
        }
        seen[s.label] = true;
    }
    if seen.iter().filter(|&&b| b).count() < 2 {
        return Err(Error::DegenerateTraining("branch selection needs at least two classes".into()));
    }
    select_from_candidates(
        BranchSpec::all_candidates().map(|spec| train_candidate(spec, samples, class_count, hp)),
        k,
    )
}

/// Gate target per training window: the cheapest branch that classifies it
/// correctly, otherwise the branch most confident in the true class. Ties go
/// to the lowest index into `branches`.
pub fn make_gate_labels(
    samples: &[TrainingSample],
    branches: &[BranchModel],
    costs: &CostModel,
) -> Result<Vec<usize>> {
    if branches.is_empty() {
        return Err(Error::config("no branches to gate over"));
    }
    let branch_costs = branches
        .iter()
        .map(|b| costs.branch_cost(b.spec))
        .collect::<Result<Vec<f64>>>()?;
    let mut labels = Vec::with_capacity(samples.len());
    let mut true_probs = Vec::with_capacity(branches.len());
    for s in samples {
        true_probs.clear();
        let mut cheapest: Option<usize> = None;
        for (i, b) in branches.iter().enumerate() {
            let p = b.predict_bank(&s.features)?;
            let pt = p.probs.get(s.label).copied().ok_or(Error::InvalidLabel(s.label as i64))?;
            true_probs.push(pt);
            if p.argmax() == s.label && cheapest.is_none_or(|c| branch_costs[i] < branch_costs[c]) {
                cheapest = Some(i);
            }
        }
        labels.push(cheapest.unwrap_or_else(|| argmax(&true_probs)));
    }
    Ok(labels)
}

/// Fits the gate: a decision tree on the 12 ACC features predicting an index
/// into the selected branches. A single distinct label gives a one-leaf tree.
pub fn train_gate(
    samples: &[TrainingSample],
    labels: &[usize],
    branch_count: usize,
    params: &TreeParams,
) -> Result<TrainedModel> {
    if samples.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            actual: labels.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::DegenerateTraining("no gate training windows".into()));
    }
    let (x, _) = design_matrix(samples, ModalitySet::of(&[Modality::Acc]))?;
    crate::classifiers::validate_training(&x, labels, branch_count)?;
    Ok(TrainedModel::DecisionTree(DecisionTree::fit(&x, labels, None, branch_count, params)))
}

/// `{i : probs[i] > max - delta}` plus the argmax (lowest index on ties).
/// `delta >= 1` selects every index, including zero-probability ones.
pub fn select_by_delta(probs: &[f64], delta: f64) -> Vec<usize> {
    if probs.is_empty() {
        return Vec::new();
    }
    if delta >= 1.0 {
        return (0..probs.len()).collect();
    }
    let top = argmax(probs);
    let bar = probs[top] - delta;
    (0..probs.len()).filter(|&i| i == top || probs[i] > bar).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDecision {
    /// Gate probability per candidate.
    pub probs: Vec<f64>,
    pub candidates: Vec<BranchSpec>,
    /// Indices into `candidates`, ascending.
    pub selected: Vec<usize>,
    pub delta: f64,
}

impl GateDecision {
    pub fn new(probs: Vec<f64>, candidates: Vec<BranchSpec>, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if probs.len() != candidates.len() || probs.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: candidates.len(),
                actual: probs.len(),
            });
        }
        let selected = select_by_delta(&probs, delta);
        Ok(GateDecision {
            probs,
            candidates,
            selected,
            delta,
        })
    }

    pub fn selected_specs(&self) -> impl Iterator<Item = BranchSpec> + '_ {
        self.selected.iter().map(|&i| self.candidates[i])
    }

    pub fn selected_ids(&self) -> impl Iterator<Item = BranchId> + '_ {
        self.selected_specs().map(|s| s.id)
    }
}

pub fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::config(format!("delta {delta} outside [0, 1]")))
    }
}

/// Runs the gate on a window, reading only ACC features.
pub fn gate<S: FeatureSource + ?Sized>(
    source: &mut S,
    gate_model: &TrainedModel,
    candidates: &[BranchSpec],
    delta: f64,
) -> Result<GateDecision> {
    check_delta(delta)?;
    let acc = source.features(Modality::Acc)?;
    let probs = gate_model.predict_proba(acc.values())?;
    GateDecision::new(probs, candidates.to_vec(), delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn branch_modalities() {
        use Modality::*;
        assert_eq!(BranchId::B1.modalities(), ModalitySet::of(&[Bvp, Eda, Temp]));
        assert_eq!(BranchId::B5.modalities(), ModalitySet::of(&[Eda, Acc]));
        assert_eq!(BranchSpec::all_candidates().count(), 25);
        let s: BranchSpec = "b3-rf".parse().unwrap();
        assert_eq!(s, BranchSpec::new(BranchId::B3, ClassifierKind::RandomForest));
        assert_eq!(alloc::string::ToString::to_string(&s), "B3-RF");
        assert!("B6-RF".parse::<BranchSpec>().is_err());
    }

    #[test]
    fn delta_examples() {
        let p = [0.6, 0.3, 0.1];
        assert_eq!(select_by_delta(&p, 0.0), vec![0]);
        assert_eq!(select_by_delta(&p, 0.4), vec![0, 1]);
        assert_eq!(select_by_delta(&p, 1.0), vec![0, 1, 2]);
        assert_eq!(select_by_delta(&[1.0, 0.0], 1.0), vec![0, 1]);
        // Exactly at the boundary is excluded.
        assert_eq!(select_by_delta(&[0.5, 0.25, 0.25], 0.25), vec![0]);
        assert_eq!(select_by_delta(&[0.4, 0.4, 0.2], 0.0), vec![0]);
    }

    #[test]
    fn delta_out_of_range() {
        assert!(GateDecision::new(vec![1.0], vec![BranchSpec::new(BranchId::B1, ClassifierKind::Lda)], 1.5).is_err());
    }

    fn probs() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..6).prop_map(|v| {
            let s: f64 = v.iter().sum();
            if s > 0.0 {
                v.iter().map(|x| x / s).collect()
            } else {
                vec![1.0 / v.len() as f64; v.len()]
            }
        })
    }

    proptest! {
        #[test]
        fn delta_selection_properties(p in probs(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let a = select_by_delta(&p, lo);
            let b = select_by_delta(&p, hi);
            prop_assert!(a.contains(&argmax(&p)));
            prop_assert!(a.iter().all(|i| b.contains(i)));
            prop_assert_eq!(select_by_delta(&p, 0.0).len(), 1);
            prop_assert_eq!(select_by_delta(&p, 1.0).len(), p.len());
        }
    }

    fn filled(m: Modality, v: f64) -> crate::FeatureVector {
        let names = crate::features::feature_names(m);
        let values = (0..names.len()).map(|i| v + i as f64).collect();
        crate::FeatureVector::new(names.to_vec(), values, ModalitySet::of(&[m])).unwrap()
    }

    fn bank(acc0: f64, eda0: f64) -> FeatureBank {
        FeatureBank::from_parts([
            filled(Modality::Acc, acc0),
            filled(Modality::Bvp, 0.0),
            filled(Modality::Eda, eda0),
            filled(Modality::Temp, 0.0),
        ])
        .unwrap()
    }

    fn sample(label: usize, acc0: f64, eda0: f64) -> TrainingSample {
        TrainingSample {
            subject_id: "S1".into(),
            window_index: 0,
            label,
            features: bank(acc0, eda0),
        }
    }

    /// Branch model that always returns `probs`.
    fn fixed(id: BranchId, probs: &[f64]) -> BranchModel {
        let d = crate::features::feature_len(id.modalities());
        let tree = DecisionTree::constant(probs.to_vec(), d);
        BranchModel {
            spec: BranchSpec::new(id, ClassifierKind::DecisionTree),
            model: TrainedModel::DecisionTree(tree),
            loss: 0.0,
        }
    }

    #[test]
    fn gate_labels_follow_the_rule() {
        let mut costs = CostModel::uniform(1.0);
        costs
            .classifier
            .insert(BranchSpec::new(BranchId::B2, ClassifierKind::DecisionTree), 3.0);
        let s = [sample(1, 0.0, 0.0)];
        // Correct under B2 and B3 only; B3 is cheaper.
        let branches = [
            fixed(BranchId::B1, &[0.7, 0.2, 0.1]),
            fixed(BranchId::B2, &[0.1, 0.8, 0.1]),
            fixed(BranchId::B3, &[0.2, 0.6, 0.2]),
        ];
        assert!(costs.branch_cost(branches[2].spec).unwrap() < costs.branch_cost(branches[1].spec).unwrap());
        assert_eq!(make_gate_labels(&s, &branches, &costs).unwrap(), vec![2]);
        // None correct: highest true-class probability wins.
        let branches = [
            fixed(BranchId::B1, &[0.8, 0.2, 0.0]),
            fixed(BranchId::B2, &[0.7, 0.3, 0.0]),
            fixed(BranchId::B3, &[0.75, 0.25, 0.0]),
        ];
        assert_eq!(make_gate_labels(&s, &branches, &costs).unwrap(), vec![1]);
        // All correct at equal cost: lowest index.
        let branches = [fixed(BranchId::B1, &[0.0, 1.0, 0.0]), fixed(BranchId::B1, &[0.0, 1.0, 0.0])];
        assert_eq!(make_gate_labels(&s, &branches, &CostModel::uniform(1.0)).unwrap(), vec![0]);
    }

    #[test]
    fn constant_gate() {
        let s: Vec<TrainingSample> = (0..30).map(|i| sample(i % 3, i as f64, 0.0)).collect();
        let g = train_gate(&s, &vec![1; 30], 3, &TreeParams::default()).unwrap();
        assert_eq!(g.feature_count(), 12);
        for i in 0..5 {
            let p = g.predict_proba(bank(i as f64 * 7.0, 0.0).get(Modality::Acc).values()).unwrap();
            assert_eq!(p, vec![0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn eda_only_signal_selects_eda_branches() {
        let hp = HyperParams::default();
        let s: Vec<TrainingSample> = (0..90)
            .map(|i| {
                let label = i % 3;
                let noise = ((i * 7919) % 97) as f64 / 97.0;
                sample(label, noise, label as f64 * 10.0 + noise)
            })
            .collect();
        let mut s = s;
        for (i, t) in s.iter_mut().enumerate() {
            t.features = FeatureBank::from_parts([
                filled(Modality::Acc, ((i * 31) % 17) as f64),
                filled(Modality::Bvp, ((i * 13) % 11) as f64),
                t.features.get(Modality::Eda).clone(),
                filled(Modality::Temp, ((i * 5) % 7) as f64),
            ])
            .unwrap();
        }
        let chosen = select_branches(&s, 3, 3, &hp).unwrap();
        assert_eq!(chosen.len(), 3);
        for b in &chosen {
            assert!(b.spec.modalities().contains(Modality::Eda), "{}", b.spec);
        }
        let one = select_branches(&s, 3, 1, &hp).unwrap();
        let min = chosen.iter().map(|b| b.loss).fold(f64::INFINITY, f64::min);
        assert_eq!(one[0].loss, min);
    }

    #[test]
    fn too_few_survivors() {
        let err = select_from_candidates([Err(Error::config("x"))], 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateTraining(_)));
    }
}
