//! Multi-class AdaBoost (SAMME) over depth-1 stumps.

use alloc::vec;
use alloc::vec::Vec;

use super::tree::{DecisionTree, TreeParams};
use super::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoostParams {
    pub rounds: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams { rounds: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdaBoost {
    stumps: Vec<DecisionTree>,
    alphas: Vec<f64>,
    class_count: usize,
    feature_count: usize,
}

const MIN_ERROR: f64 = 1e-10;

impl AdaBoost {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &BoostParams) -> Self {
        let n = y.len();
        let k = class_count as f64;
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let mut alphas = Vec::new();
        for _ in 0..params.rounds {
            let stump = DecisionTree::fit(x, y, Some(&w), class_count, &TreeParams::stump());
            let miss: Vec<bool> = x
                .iter_rows()
                .zip(y)
                .map(|(row, &label)| stump.predict(row) != label)
                .collect();
            let total: f64 = w.iter().sum();
            let err = w
                .iter()
                .zip(&miss)
                .filter(|(_, &m)| m)
                .map(|(w, _)| w)
                .sum::<f64>()
                / total;
            // No better than chance: keep it only if nothing else exists.
            if err >= 1.0 - 1.0 / k {
                if stumps.is_empty() {
                    stumps.push(stump);
                    alphas.push(1.0);
                }
                break;
            }
            let perfect = err <= MIN_ERROR;
            let err = err.max(MIN_ERROR);
            let alpha = libm::log((1.0 - err) / err) + libm::log(k - 1.0);
            stumps.push(stump);
            alphas.push(alpha);
            if perfect {
                break;
            }
            let factor = libm::exp(alpha);
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= factor;
                }
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
        }
        AdaBoost {
            stumps,
            alphas,
            class_count,
            feature_count: x.cols(),
        }
    }

    pub fn stumps(&self) -> &[DecisionTree] {
        &self.stumps
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    /// Alpha-weighted mean of the stumps' leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.class_count];
        let total: f64 = self.alphas.iter().sum();
        for (stump, alpha) in self.stumps.iter().zip(&self.alphas) {
            for (acc, v) in p.iter_mut().zip(stump.leaf(x)) {
                *acc += alpha * v;
            }
        }
        p.iter_mut().for_each(|v| *v /= total);
        p
    }
}
