//! k-nearest neighbours on z-scored features.

use alloc::vec;
use alloc::vec::Vec;

use super::FeatureMatrix;
use crate::math::{mean, std_dev};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Knn {
    k: usize,
    center: Vec<f64>,
    scale: Vec<f64>,
    /// Standardised training rows, row-major.
    points: Vec<f64>,
    labels: Vec<usize>,
    class_count: usize,
}

impl Knn {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &KnnParams) -> Self {
        let d = x.cols();
        let mut center = Vec::with_capacity(d);
        let mut scale = Vec::with_capacity(d);
        for j in 0..d {
            let col: Vec<f64> = (0..x.rows()).map(|i| x.get(i, j)).collect();
            center.push(mean(&col));
            let s = std_dev(&col);
            scale.push(if s > 0.0 { s } else { 1.0 });
        }
        let mut points = Vec::with_capacity(x.rows() * d);
        for row in x.iter_rows() {
            points.extend(row.iter().zip(&center).zip(&scale).map(|((v, c), s)| (v - c) / s));
        }
        Knn {
            k: params.k.min(y.len()).max(1),
            center,
            scale,
            points,
            labels: y.to_vec(),
            class_count,
        }
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.center.len()
    }

    /// Neighbour class frequencies. Equidistant neighbours resolve by
    /// training-row order.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let d = self.center.len();
        let q: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .zip(&self.scale)
            .map(|((v, c), s)| (v - c) / s)
            .collect();
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks(d.max(1))
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let mut votes = vec![0.0; self.class_count];
        for &(_, i) in &dist[..k] {
            votes[self.labels[i]] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= k as f64);
        votes
    }
}
