//! Late fusion of branch predictions: hard voting, soft voting and a
//! per-class Kalman filter that tracks class probabilities over time.
//!
//! The Kalman back-end treats the unknown state as the vector of class
//! probabilities for the current window. Transition and measurement
//! matrices are identity, so every class evolves as an independent scalar
//! filter: a time update inflates each variance by `q`, then each branch
//! prediction whose top probability exceeds `epsilon` is applied as a
//! measurement `z' = gamma * probs` with noise `R_i = ((1 - z'_i) * s)^2`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::datamodel::Problem;
use crate::error::{Error, Result};
use crate::gating::BranchId;
use crate::math::argmax;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPrediction {
    pub branch: BranchId,
    pub probs: Vec<f64>,
}

impl BranchPrediction {
    pub fn new(branch: BranchId, probs: Vec<f64>) -> Self {
        BranchPrediction { branch, probs }
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

fn check_preds(preds: &[BranchPrediction]) -> Result<usize> {
    let first = preds
        .first()
        .ok_or_else(|| Error::validation("late fusion needs at least one prediction"))?;
    let c = first.probs.len();
    if c == 0 {
        return Err(Error::validation("empty probability vector"));
    }
    if let Some(p) = preds.iter().find(|p| p.probs.len() != c) {
        return Err(Error::DimensionMismatch {
            expected: c,
            actual: p.probs.len(),
        });
    }
    Ok(c)
}

/// Majority vote over per-branch argmax classes. Ties go to the tied class
/// with the larger summed probability, then to the lower class index.
pub fn fuse_hard(preds: &[BranchPrediction]) -> Result<usize> {
    let c = check_preds(preds)?;
    let mut votes = vec![0usize; c];
    let mut mass = vec![0.0; c];
    for p in preds {
        votes[p.argmax()] += 1;
        for (m, v) in mass.iter_mut().zip(&p.probs) {
            *m += v;
        }
    }
    let top = *votes.iter().max().expect("non-empty");
    let mut best: Option<usize> = None;
    for class in (0..c).filter(|&k| votes[k] == top) {
        if best.is_none_or(|b| mass[class] > mass[b]) {
            best = Some(class);
        }
    }
    Ok(best.expect("at least one class has the top vote"))
}

/// Argmax of the element-wise mean probability; ties to the lowest index.
pub fn fuse_soft(preds: &[BranchPrediction]) -> Result<usize> {
    let c = check_preds(preds)?;
    let mut mean = vec![0.0; c];
    for p in preds {
        for (m, v) in mean.iter_mut().zip(&p.probs) {
            *m += v;
        }
    }
    let n = preds.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(argmax(&mean))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KalmanConfig {
    pub x0: Vec<f64>,
    /// Initial covariance is `p0 * I`.
    pub p0: f64,
    /// Process noise variance added to every class per window.
    pub q: f64,
    /// Measurement noise scale `s` in `R_i = ((1 - z'_i) * s)^2`.
    pub noise_scale: f64,
    /// A prediction is used only if its top raw probability exceeds this.
    pub epsilon: f64,
    /// Per-class scaling applied to measurements before the update.
    pub gamma: Vec<f64>,
}

impl KalmanConfig {
    pub fn for_problem(problem: Problem) -> Self {
        match problem {
            Problem::ThreeClass => KalmanConfig {
                x0: vec![0.8, 0.1, 0.1],
                p0: 0.01,
                q: 5e-4,
                noise_scale: 2.0,
                epsilon: 0.4,
                gamma: vec![0.278, 1.0, 1.0],
            },
            Problem::TwoClass => KalmanConfig {
                x0: vec![0.8, 0.2],
                p0: 0.01,
                q: 5e-4,
                noise_scale: 0.5,
                epsilon: 0.7,
                gamma: vec![0.667, 1.1],
            },
        }
    }

    pub fn class_count(&self) -> usize {
        self.x0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.x0.len();
        if c == 0 {
            return Err(Error::config("kalman x0 is empty"));
        }
        if self.gamma.len() != c {
            return Err(Error::config(format!(
                "kalman gamma has {} entries, x0 has {c}",
                self.gamma.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("kalman epsilon must lie in [0, 1]"));
        }
        if self.gamma.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::config("kalman gamma entries must be positive"));
        }
        if !(self.p0 > 0.0 && self.p0.is_finite()) {
            return Err(Error::config("kalman p0 must be positive"));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err(Error::config("kalman q must be non-negative"));
        }
        if !self.noise_scale.is_finite() || self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("kalman parameters must be finite"));
        }
        Ok(())
    }

    /// Measurement noise for one scaled measurement component.
    pub fn measurement_noise(&self, z: f64) -> f64 {
        let r = (1.0 - z) * self.noise_scale;
        r * r
    }
}

/// Floor on `R` so a measurement of exactly 1 cannot zero the covariance.
const MIN_MEASUREMENT_NOISE: f64 = 1e-12;

/// Estimate `x` and diagonal covariance `p`. `x` is not renormalised.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub step: usize,
}

impl KalmanState {
    pub fn initial(cfg: &KalmanConfig) -> Self {
        KalmanState {
            x: cfg.x0.clone(),
            p: vec![cfg.p0; cfg.x0.len()],
            step: 0,
        }
    }

    pub fn label(&self) -> usize {
        argmax(&self.x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanStep {
    pub state: KalmanState,
    pub label: usize,
    pub applied: usize,
    pub skipped: usize,
}

/// One window: time update, then a measurement update per prediction in
/// ascending branch order.
pub fn kalman_step(
    state: &KalmanState,
    preds: &[BranchPrediction],
    cfg: &KalmanConfig,
) -> Result<KalmanStep> {
    let c = cfg.class_count();
    if state.x.len() != c || state.p.len() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            actual: state.x.len(),
        });
    }
    if let Some(p) = preds.iter().find(|p| p.probs.len() != c) {
        return Err(Error::DimensionMismatch {
            expected: c,
            actual: p.probs.len(),
        });
    }
    let mut x = state.x.clone();
    let mut p: Vec<f64> = state.p.iter().map(|v| v + cfg.q).collect();
    let mut ordered: Vec<&BranchPrediction> = preds.iter().collect();
    ordered.sort_by_key(|b| b.branch);
    let (mut applied, mut skipped) = (0, 0);
    for pred in ordered {
        let top = pred.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // NaN confidence counts as below threshold.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(top > cfg.epsilon) {
            skipped += 1;
            continue;
        }
        applied += 1;
        for i in 0..c {
            let z = cfg.gamma[i] * pred.probs[i];
            let r = cfg.measurement_noise(z).max(MIN_MEASUREMENT_NOISE);
            let k = p[i] / (p[i] + r);
            x[i] += k * (z - x[i]);
            p[i] *= 1.0 - k;
        }
    }
    let state = KalmanState {
        x,
        p,
        step: state.step + 1,
    };
    let label = state.label();
    Ok(KalmanStep {
        state,
        label,
        applied,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SequenceOutput {
    pub labels: Vec<usize>,
    pub applied: usize,
    pub skipped: usize,
}

/// Filters a temporally ordered window sequence. `keys` holds
/// `(subject, window_index)` per window; state carries over between windows
/// of one subject and resets to `(x0, p0)` when the subject changes.
pub fn run_kalman_sequence(
    keys: &[(&str, usize)],
    preds: &[Vec<BranchPrediction>],
    cfg: &KalmanConfig,
) -> Result<SequenceOutput> {
    cfg.validate()?;
    if keys.len() != preds.len() {
        return Err(Error::DimensionMismatch {
            expected: keys.len(),
            actual: preds.len(),
        });
    }
    let mut finished: Vec<&str> = Vec::new();
    let mut out = SequenceOutput::default();
    let mut state = KalmanState::initial(cfg);
    let mut prev: Option<(&str, usize)> = None;
    for (&(subject, index), window_preds) in keys.iter().zip(preds) {
        match prev {
            Some((s, i)) if s == subject => {
                if index <= i {
                    return Err(Error::validation(format!(
                        "subject {subject}: window {index} follows window {i}"
                    )));
                }
            }
            Some((s, _)) => {
                finished.push(s);
                if finished.contains(&subject) {
                    return Err(Error::validation(format!(
                        "subject {subject} windows are not contiguous"
                    )));
                }
                state = KalmanState::initial(cfg);
            }
            None => {}
        }
        let step = kalman_step(&state, window_preds, cfg)?;
        out.labels.push(step.label);
        out.applied += step.applied;
        out.skipped += step.skipped;
        state = step.state;
        prev = Some((subject, index));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(branch: BranchId, probs: &[f64]) -> BranchPrediction {
        BranchPrediction::new(branch, probs.to_vec())
    }

    #[test]
    fn hard_voting() {
        let preds = [
            pred(BranchId::B1, &[0.2, 0.7, 0.1]),
            pred(BranchId::B2, &[0.3, 0.5, 0.2]),
            pred(BranchId::B3, &[0.6, 0.3, 0.1]),
        ];
        assert_eq!(fuse_hard(&preds).unwrap(), 1);
        assert_eq!(fuse_hard(&preds[2..]).unwrap(), 0);
        // One vote each for classes 0 and 1; class 1 holds more mass.
        let tie = [pred(BranchId::B1, &[0.55, 0.45]), pred(BranchId::B2, &[0.35, 0.65])];
        assert_eq!(fuse_hard(&tie).unwrap(), 1);
        let even = [pred(BranchId::B1, &[0.6, 0.4]), pred(BranchId::B2, &[0.4, 0.6])];
        assert_eq!(fuse_hard(&even).unwrap(), 0);
        assert!(fuse_hard(&[]).is_err());
    }

    #[test]
    fn hard_tie_uses_summed_probability() {
        // One vote each for classes 0 and 2; summed mass 0.9 vs 1.1.
        let preds = [
            pred(BranchId::B1, &[0.6, 0.0, 0.4]),
            pred(BranchId::B2, &[0.3, 0.0, 0.7]),
        ];
        assert_eq!(fuse_hard(&preds).unwrap(), 2);
    }

    #[test]
    fn soft_voting() {
        let preds = [pred(BranchId::B1, &[0.6, 0.4]), pred(BranchId::B2, &[0.3, 0.7])];
        assert_eq!(fuse_soft(&preds).unwrap(), 1);
        let same = [pred(BranchId::B1, &[0.1, 0.2, 0.7]), pred(BranchId::B3, &[0.1, 0.2, 0.7])];
        assert_eq!(fuse_soft(&same).unwrap(), 2);
        let tie = [pred(BranchId::B1, &[0.5, 0.5]), pred(BranchId::B2, &[0.5, 0.5])];
        assert_eq!(fuse_soft(&tie).unwrap(), 0);
    }

    #[test]
    fn hand_evaluated_scalar_update() {
        // Class 0 only: x- = 0.8, P- = 0.01 + 5e-4, z = 0.9, gamma = 1.
        let mut cfg = KalmanConfig::for_problem(Problem::ThreeClass);
        cfg.gamma = vec![1.0, 1.0, 1.0];
        let state = KalmanState::initial(&cfg);
        let step = kalman_step(&state, &[pred(BranchId::B1, &[0.9, 0.05, 0.05])], &cfg).unwrap();
        let k: f64 = 0.0105 / (0.0105 + 0.04);
        assert!((k - 0.207_920_792).abs() < 1e-8);
        assert!((step.state.x[0] - 0.820_79).abs() < 1e-5);
        assert!((step.state.p[0] - 0.008_317).abs() < 1e-5);
        assert_eq!(step.applied, 1);
    }

    #[test]
    fn zero_innovation_keeps_estimate_and_shrinks_variance() {
        let mut cfg = KalmanConfig::for_problem(Problem::TwoClass);
        cfg.gamma = vec![1.0, 1.0];
        cfg.epsilon = 0.5;
        let state = KalmanState::initial(&cfg);
        let step = kalman_step(&state, &[pred(BranchId::B2, &[0.8, 0.2])], &cfg).unwrap();
        assert_eq!(step.state.x, vec![0.8, 0.2]);
        for (p, prior) in step.state.p.iter().zip(&state.p) {
            assert!(*p < prior + cfg.q);
        }
    }

    #[test]
    fn low_confidence_measurements_are_skipped() {
        let cfg = KalmanConfig::for_problem(Problem::ThreeClass);
        let state = KalmanState::initial(&cfg);
        let step = kalman_step(&state, &[pred(BranchId::B1, &[0.35, 0.4, 0.25])], &cfg).unwrap();
        assert_eq!(step.skipped, 1);
        assert_eq!(step.state.x, state.x);
        assert_eq!(step.label, state.label());
        assert!(step.state.p.iter().all(|p| (p - 0.0105).abs() < 1e-15));
    }

    #[test]
    fn measurement_noise_shape() {
        let cfg = KalmanConfig::for_problem(Problem::ThreeClass);
        assert_eq!(cfg.measurement_noise(1.0), 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let r = cfg.measurement_noise(i as f64 / 100.0);
            assert!(r < prev);
            prev = r;
        }
        let two = KalmanConfig::for_problem(Problem::TwoClass);
        assert!((two.measurement_noise(0.6) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn confident_stress_stream_converges() {
        let cfg = KalmanConfig::for_problem(Problem::ThreeClass);
        let keys: Vec<(&str, usize)> = (0..10).map(|i| ("S2", i)).collect();
        let preds: Vec<Vec<BranchPrediction>> =
            (0..10).map(|_| vec![pred(BranchId::B1, &[0.02, 0.96, 0.02])]).collect();
        let mut state = KalmanState::initial(&cfg);
        let mut xs = Vec::new();
        for p in &preds {
            state = kalman_step(&state, p, &cfg).unwrap().state;
            xs.push(state.x[1]);
        }
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert!(*xs.last().unwrap() > 0.9);
        let out = run_kalman_sequence(&keys, &preds, &cfg).unwrap();
        assert_eq!(*out.labels.last().unwrap(), 1);
    }

    #[test]
    fn sequence_resets_between_subjects() {
        let cfg = KalmanConfig::for_problem(Problem::TwoClass);
        let stress = vec![pred(BranchId::B1, &[0.05, 0.95])];
        let keys = [("S2", 0), ("S2", 1), ("S2", 2), ("S3", 0)];
        let preds = vec![stress.clone(), stress.clone(), stress.clone(), vec![pred(BranchId::B1, &[0.5, 0.5])]];
        let out = run_kalman_sequence(&keys, &preds, &cfg).unwrap();
        // The S3 window is skipped (0.5 <= 0.7) and reverts to the x0 argmax.
        assert_eq!(out.labels[3], 0);
        let single = kalman_step(&KalmanState::initial(&cfg), &preds[0], &cfg).unwrap();
        assert_eq!(out.labels[0], single.label);
    }

    #[test]
    fn sequence_rejects_unsorted_input() {
        let cfg = KalmanConfig::for_problem(Problem::TwoClass);
        let p = vec![pred(BranchId::B1, &[0.5, 0.5])];
        let preds = vec![p.clone(), p.clone(), p.clone()];
        assert!(run_kalman_sequence(&[("S2", 1), ("S2", 0), ("S2", 2)], &preds, &cfg).is_err());
        assert!(run_kalman_sequence(&[("S2", 0), ("S3", 0), ("S2", 1)], &preds, &cfg).is_err());
    }

    #[test]
    fn measurements_processed_in_branch_order() {
        let cfg = KalmanConfig::for_problem(Problem::ThreeClass);
        let state = KalmanState::initial(&cfg);
        let a = pred(BranchId::B1, &[0.1, 0.8, 0.1]);
        let b = pred(BranchId::B3, &[0.7, 0.2, 0.1]);
        let fwd = kalman_step(&state, &[a.clone(), b.clone()], &cfg).unwrap();
        let rev = kalman_step(&state, &[b, a], &cfg).unwrap();
        assert_eq!(fwd, rev);
    }
}
