//! CART decision tree with Gini impurity and optional sample weights.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use super::{normalize, FeatureMatrix};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 20,
        }
    }
}

impl TreeParams {
    pub fn stump() -> Self {
        TreeParams {
            max_depth: Some(1),
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Node {
    Leaf {
        proba: Vec<f64>,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecisionTree {
    nodes: Vec<Node>,
    class_count: usize,
    feature_count: usize,
}

/// Random feature subsampling at each split.
pub(crate) struct FeatureSampler<'r, R: Rng> {
    pub rng: &'r mut R,
    pub per_split: usize,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

const GAIN_EPS: f64 = 1e-12;

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

impl DecisionTree {
    /// Fits a tree on all rows. Single-class data yields a one-leaf tree.
    pub fn fit(
        x: &FeatureMatrix,
        y: &[usize],
        weights: Option<&[f64]>,
        class_count: usize,
        params: &TreeParams,
    ) -> Self {
        Self::fit_with::<rand_chacha::ChaCha8Rng>(x, y, weights, class_count, params, None)
    }

    pub(crate) fn fit_with<R: Rng>(
        x: &FeatureMatrix,
        y: &[usize],
        weights: Option<&[f64]>,
        class_count: usize,
        params: &TreeParams,
        mut sampler: Option<FeatureSampler<'_, R>>,
    ) -> Self {
        let unit;
        let w = match weights {
            Some(w) => w,
            None => {
                unit = vec![1.0; y.len()];
                &unit
            }
        };
        let mut tree = DecisionTree {
            nodes: Vec::new(),
            class_count,
            feature_count: x.cols(),
        };
        let all: Vec<usize> = (0..y.len()).collect();
        // Depth-first with an explicit stack; children are patched in.
        let root = tree.push_leaf(&all, y, w);
        let mut stack = vec![(root, all, 0usize)];
        while let Some((node, idx, depth)) = stack.pop() {
            if params.max_depth.is_some_and(|d| depth >= d) {
                continue;
            }
            let Node::Leaf { proba } = &tree.nodes[node] else {
                unreachable!()
            };
            if proba.iter().filter(|&&p| p > 0.0).count() <= 1 {
                continue;
            }
            if idx.len() < 2 * params.min_samples_leaf {
                continue;
            }
            let features: Vec<usize> = match sampler.as_mut() {
                Some(s) if s.per_split < x.cols() => {
                    let mut f = sample(s.rng, x.cols(), s.per_split).into_vec();
                    f.sort_unstable();
                    f
                }
                _ => (0..x.cols()).collect(),
            };
            let Some(split) = best_split(x, y, w, &idx, &features, class_count, params.min_samples_leaf)
            else {
                continue;
            };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| x.get(i, split.feature) <= split.threshold);
            let left = tree.push_leaf(&left_idx, y, w);
            let right = tree.push_leaf(&right_idx, y, w);
            tree.nodes[node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            // Right first so the left subtree is expanded first.
            stack.push((right, right_idx, depth + 1));
            stack.push((left, left_idx, depth + 1));
        }
        tree
    }

    /// A one-leaf tree predicting `proba` for every input.
    pub fn constant(proba: Vec<f64>, feature_count: usize) -> Self {
        DecisionTree {
            class_count: proba.len(),
            nodes: vec![Node::Leaf { proba }],
            feature_count,
        }
    }

    fn push_leaf(&mut self, idx: &[usize], y: &[usize], w: &[f64]) -> usize {
        let mut counts = vec![0.0; self.class_count];
        for &i in idx {
            counts[y[i]] += w[i];
        }
        self.nodes.push(Node::Leaf {
            proba: normalize(counts),
        });
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { proba } => return proba,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        self.leaf(x).to_vec()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        crate::math::argmax(self.leaf(x))
    }
}

/// Exhaustive threshold search. Ties keep the first candidate found, i.e.
/// the lowest feature index and then the lowest threshold.
fn best_split(
    x: &FeatureMatrix,
    y: &[usize],
    w: &[f64],
    idx: &[usize],
    features: &[usize],
    class_count: usize,
    min_leaf: usize,
) -> Option<Split> {
    let n = idx.len();
    let mut parent = vec![0.0; class_count];
    for &i in idx {
        parent[y[i]] += w[i];
    }
    let total_w: f64 = parent.iter().sum();
    if total_w <= 0.0 {
        return None;
    }
    let parent_imp = gini(&parent, total_w);
    let mut best: Option<Split> = None;
    let mut order = idx.to_vec();
    let mut left = vec![0.0; class_count];
    let mut right = vec![0.0; class_count];
    for &f in features {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        left.iter_mut().for_each(|c| *c = 0.0);
        right.copy_from_slice(&parent);
        let mut left_w = 0.0;
        for p in 0..n - 1 {
            let i = order[p];
            left[y[i]] += w[i];
            right[y[i]] -= w[i];
            left_w += w[i];
            let n_left = p + 1;
            if n_left < min_leaf {
                continue;
            }
            if n - n_left < min_leaf {
                break;
            }
            let v = x.get(i, f);
            let v_next = x.get(order[p + 1], f);
            if v >= v_next {
                continue;
            }
            let right_w = total_w - left_w;
            let gain = parent_imp
                - (left_w / total_w) * gini(&left, left_w)
                - (right_w / total_w) * gini(&right, right_w.max(0.0));
            if best.as_ref().is_none_or(|b| gain > b.gain + GAIN_EPS) {
                let mut threshold = v + (v_next - v) / 2.0;
                if threshold >= v_next {
                    threshold = v;
                }
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best.filter(|b| b.gain > -GAIN_EPS)
}
