//! The five classical classifiers used for branches and for the gate:
//! decision tree, random forest, AdaBoost (SAMME), linear discriminant
//! analysis and k-nearest neighbours.
//!
//! Every model returns a full probability vector over `class_count` classes,
//! in the class order of [`crate::datamodel::Problem`].

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

mod boost;
mod forest;
mod knn;
mod lda;
mod tree;

pub use boost::{AdaBoost, BoostParams};
pub use forest::{bootstrap_indices, ForestParams, MaxFeatures, RandomForest};
pub use knn::{Knn, KnnParams};
pub use lda::{Lda, LdaParams};
pub use tree::{DecisionTree, Node, TreeParams};

/// Row-major dense feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Copy of the given rows, repeats allowed.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    AdaBoost,
    Lda,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::AdaBoost,
        ClassifierKind::Lda,
        ClassifierKind::Knn,
    ];

    pub const fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "DT",
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::AdaBoost => "AB",
            ClassifierKind::Lda => "LDA",
            ClassifierKind::Knn => "KNN",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown classifier '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Default)]
pub struct HyperParams {
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub boost: BoostParams,
    pub lda: LdaParams,
    pub knn: KnnParams,
    pub seed: u64,
}


impl HyperParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tree.min_samples_leaf", self.tree.min_samples_leaf),
            ("forest.n_trees", self.forest.n_trees),
            ("forest.min_samples_leaf", self.forest.min_samples_leaf),
            ("boost.rounds", self.boost.rounds),
            ("knn.k", self.knn.k),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.tree.max_depth == Some(0) {
            return Err(Error::config("tree.max_depth must be positive"));
        }
        if let MaxFeatures::Count(0) = self.forest.max_features {
            return Err(Error::config("forest.max_features must be positive"));
        }
        if !(self.lda.ridge >= 0.0 && self.lda.ridge.is_finite()) {
            return Err(Error::config("lda.ridge must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TrainedModel {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    AdaBoost(AdaBoost),
    Lda(Lda),
    Knn(Knn),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::DecisionTree(_) => ClassifierKind::DecisionTree,
            TrainedModel::RandomForest(_) => ClassifierKind::RandomForest,
            TrainedModel::AdaBoost(_) => ClassifierKind::AdaBoost,
            TrainedModel::Lda(_) => ClassifierKind::Lda,
            TrainedModel::Knn(_) => ClassifierKind::Knn,
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.class_count(),
            TrainedModel::RandomForest(m) => m.class_count(),
            TrainedModel::AdaBoost(m) => m.class_count(),
            TrainedModel::Lda(m) => m.class_count(),
            TrainedModel::Knn(m) => m.class_count(),
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.feature_count(),
            TrainedModel::RandomForest(m) => m.feature_count(),
            TrainedModel::AdaBoost(m) => m.feature_count(),
            TrainedModel::Lda(m) => m.feature_count(),
            TrainedModel::Knn(m) => m.feature_count(),
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count(),
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("input features must be finite"));
        }
        Ok(match self {
            TrainedModel::DecisionTree(m) => m.predict_proba(x),
            TrainedModel::RandomForest(m) => m.predict_proba(x),
            TrainedModel::AdaBoost(m) => m.predict_proba(x),
            TrainedModel::Lda(m) => m.predict_proba(x),
            TrainedModel::Knn(m) => m.predict_proba(x),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(crate::math::argmax(&self.predict_proba(x)?))
    }
}

pub(crate) fn validate_training(x: &FeatureMatrix, y: &[usize], class_count: usize) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if class_count == 0 {
        return Err(Error::config("class_count must be positive"));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= class_count) {
        return Err(Error::validation(format!(
            "label {bad} outside 0..{class_count}"
        )));
    }
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("training features contain NaN or infinity"));
    }
    if x.cols() == 0 {
        return Err(Error::validation("training matrix has no features"));
    }
    Ok(())
}

/// Trains a classifier of the given kind. Deterministic for a fixed seed.
pub fn train(
    kind: ClassifierKind,
    x: &FeatureMatrix,
    y: &[usize],
    class_count: usize,
    hp: &HyperParams,
) -> Result<TrainedModel> {
    hp.validate()?;
    validate_training(x, y, class_count)?;
    if y.len() < class_count {
        return Err(Error::DegenerateTraining(format!(
            "{} samples for {class_count} classes",
            y.len()
        )));
    }
    let first = y.first().copied();
    if y.iter().all(|&c| Some(c) == first) {
        return Err(Error::DegenerateTraining(
            "training labels contain a single class".into(),
        ));
    }
    Ok(match kind {
        ClassifierKind::DecisionTree => {
            TrainedModel::DecisionTree(DecisionTree::fit(x, y, None, class_count, &hp.tree))
        }
        ClassifierKind::RandomForest => {
            TrainedModel::RandomForest(RandomForest::fit(x, y, class_count, &hp.forest, hp.seed))
        }
        ClassifierKind::AdaBoost => {
            TrainedModel::AdaBoost(AdaBoost::fit(x, y, class_count, &hp.boost))
        }
        ClassifierKind::Lda => TrainedModel::Lda(Lda::fit(x, y, class_count, &hp.lda)?),
        ClassifierKind::Knn => TrainedModel::Knn(Knn::fit(x, y, class_count, &hp.knn)),
    })
}

/// Probability floor applied before taking logs.
pub const LOSS_EPS: f64 = 1e-12;

/// Mean cross-entropy `-(1/N) sum log p(y_i)`, probabilities clamped to
/// `[1e-12, 1]`.
pub fn training_loss(m: &TrainedModel, x: &FeatureMatrix, y: &[usize]) -> Result<f64> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::validation("empty evaluation set"));
    }
    let mut total = 0.0;
    for (row, &label) in x.iter_rows().zip(y) {
        let p = m.predict_proba(row)?;
        let py = p.get(label).copied().ok_or(Error::InvalidLabel(label as i64))?;
        total -= libm::log(py.clamp(LOSS_EPS, 1.0));
    }
    Ok(total / y.len() as f64)
}

/// Turns non-negative scores into a probability vector; an all-zero input
/// becomes uniform.
pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for p in &mut v {
            *p /= total;
        }
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|p| *p = u);
    }
    v
}
