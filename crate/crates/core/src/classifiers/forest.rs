//! Bagged CART trees with per-split feature subsampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{DecisionTree, FeatureSampler, TreeParams};
use super::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (libm::sqrt(d as f64) as usize).max(1),
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            min_samples_leaf: 20,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    class_count: usize,
    feature_count: usize,
}

/// Per-tree generator: the root seed selects the key, the tree index the
/// stream, so trees are independent of training order.
fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn draw_bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// The bootstrap sample drawn for tree `tree` of a forest seeded with `seed`.
pub fn bootstrap_indices(n: usize, seed: u64, tree: usize) -> Vec<usize> {
    draw_bootstrap(&mut tree_rng(seed, tree), n)
}

impl RandomForest {
    pub fn fit(
        x: &FeatureMatrix,
        y: &[usize],
        class_count: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Self {
        let n = y.len();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
        };
        let per_split = params.max_features.resolve(x.cols());
        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = tree_rng(seed, t);
                let rows: Vec<usize> = if params.bootstrap {
                    draw_bootstrap(&mut rng, n)
                } else {
                    (0..n).collect()
                };
                let xb = x.select_rows(&rows);
                let yb: Vec<usize> = rows.iter().map(|&i| y[i]).collect();
                DecisionTree::fit_with(
                    &xb,
                    &yb,
                    None,
                    class_count,
                    &tree_params,
                    Some(FeatureSampler {
                        rng: &mut rng,
                        per_split,
                    }),
                )
            })
            .collect();
        RandomForest {
            trees,
            class_count,
            feature_count: x.cols(),
        }
    }

    /// Assembles a forest from already trained trees.
    pub fn from_trees(trees: Vec<DecisionTree>, class_count: usize, feature_count: usize) -> Self {
        RandomForest {
            trees,
            class_count,
            feature_count,
        }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.class_count];
        for t in &self.trees {
            votes[t.predict(x)] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= n);
        votes
    }
}
