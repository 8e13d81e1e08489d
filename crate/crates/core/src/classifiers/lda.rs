//! Linear discriminant analysis with a pooled, ridge-regularised covariance.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LdaParams {
    /// Added to the covariance diagonal as `ridge * trace(cov)`.
    pub ridge: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams { ridge: 1e-6 }
    }
}

/// Discriminant `x . coef[c] + intercept[c]`; classes absent from training
/// carry no discriminant and always get probability zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lda {
    coef: Vec<Vec<f64>>,
    intercept: Vec<Option<f64>>,
    feature_count: usize,
}

impl Lda {
    pub fn fit(x: &FeatureMatrix, y: &[usize], class_count: usize, params: &LdaParams) -> Result<Self> {
        let d = x.cols();
        let n = y.len();
        let mut counts = vec![0usize; class_count];
        let mut means = vec![vec![0.0; d]; class_count];
        for (row, &c) in x.iter_rows().zip(y) {
            counts[c] += 1;
            for (m, v) in means[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            if c > 0 {
                m.iter_mut().for_each(|v| *v /= c as f64);
            }
        }
        let present = counts.iter().filter(|&&c| c > 0).count();
        let dof = n.saturating_sub(present).max(1) as f64;
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for (row, &c) in x.iter_rows().zip(y) {
            let diff = DVector::from_iterator(d, row.iter().zip(&means[c]).map(|(v, m)| v - m));
            cov.ger(1.0, &diff, &diff, 1.0);
        }
        cov /= dof;
        let ridge = (params.ridge * cov.trace()).max(1e-12);
        for i in 0..d {
            cov[(i, i)] += ridge;
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::DegenerateTraining("pooled covariance is not positive definite".into()))?;
        let mut coef = Vec::with_capacity(class_count);
        let mut intercept = Vec::with_capacity(class_count);
        for (mean, &count) in means.iter().zip(&counts) {
            if count == 0 {
                coef.push(vec![0.0; d]);
                intercept.push(None);
                continue;
            }
            let mu = DVector::from_column_slice(mean);
            let w = chol.solve(&mu);
            let prior = count as f64 / n as f64;
            intercept.push(Some(-0.5 * mu.dot(&w) + libm::log(prior)));
            coef.push(w.iter().copied().collect());
        }
        Ok(Lda {
            coef,
            intercept,
            feature_count: d,
        })
    }

    pub fn class_count(&self) -> usize {
        self.coef.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn decision(&self, x: &[f64]) -> Vec<Option<f64>> {
        self.coef
            .iter()
            .zip(&self.intercept)
            .map(|(w, b)| b.map(|b| b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()))
            .collect()
    }

    /// Softmax over the discriminants.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let scores = self.decision(x);
        let top = scores
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores
            .iter()
            .map(|s| s.map_or(0.0, |s| libm::exp(s - top)))
            .collect();
        super::normalize(exp)
    }
}
