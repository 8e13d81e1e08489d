//! Checks the vector Kalman update against a plain scalar recursion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wristfuse_core::fusion::{kalman_step, BranchPrediction, KalmanConfig, KalmanState};
use wristfuse_core::gating::BranchId;
use wristfuse_core::Problem;

/// One class, one window: predict, then absorb each accepted measurement.
fn scalar_kalman(
    x: f64,
    p: f64,
    q: f64,
    measurements: &[(f64, bool)],
    gamma: f64,
    scale: f64,
) -> (f64, f64) {
    let mut x = x;
    let mut p = p + q;
    for &(z_raw, accepted) in measurements {
        if !accepted {
            continue;
        }
        let z = gamma * z_raw;
        let r = ((1.0 - z) * scale).powi(2).max(1e-12);
        let k = p / (p + r);
        x = x + k * (z - x);
        p *= 1.0 - k;
    }
    (x, p)
}

fn random_probs(rng: &mut ChaCha8Rng, c: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..c).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

#[test]
fn matches_scalar_recursion_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = std::time::Instant::now();
    for trial in 0..1000 {
        let problem = if trial % 2 == 0 { Problem::ThreeClass } else { Problem::TwoClass };
        let c = problem.class_count();
        let mut cfg = KalmanConfig::for_problem(problem);
        cfg.q = rng.gen_range(1e-5..1e-2);
        cfg.epsilon = rng.gen_range(0.0..0.9);
        cfg.noise_scale = rng.gen_range(0.1..3.0);
        cfg.gamma = (0..c).map(|_| rng.gen_range(0.2..1.2)).collect();
        let state = KalmanState {
            x: (0..c).map(|_| rng.gen::<f64>()).collect(),
            p: (0..c).map(|_| rng.gen_range(1e-4..0.1)).collect(),
            step: trial,
        };
        let n = rng.gen_range(1..=5);
        let ids = [BranchId::B1, BranchId::B2, BranchId::B3, BranchId::B4, BranchId::B5];
        let preds: Vec<BranchPrediction> = (0..n)
            .map(|i| BranchPrediction::new(ids[i], random_probs(&mut rng, c)))
            .collect();
        let step = kalman_step(&state, &preds, &cfg).unwrap();
        for class in 0..c {
            let ms: Vec<(f64, bool)> = preds
                .iter()
                .map(|p| {
                    let top = p.probs.iter().cloned().fold(f64::MIN, f64::max);
                    (p.probs[class], top > cfg.epsilon)
                })
                .collect();
            let (x, p) = scalar_kalman(
                state.x[class],
                state.p[class],
                cfg.q,
                &ms,
                cfg.gamma[class],
                cfg.noise_scale,
            );
            assert!((step.state.x[class] - x).abs() < 1e-9, "trial {trial} class {class}");
            assert!((step.state.p[class] - p).abs() < 1e-9, "trial {trial} class {class}");
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn hand_case_three_class() {
    let (x, p) = scalar_kalman(0.8, 0.01, 5e-4, &[(0.9, true)], 1.0, 2.0);
    assert!((x - 0.82079).abs() < 1e-5);
    assert!((p - 0.008317).abs() < 1e-5);

    let mut cfg = KalmanConfig::for_problem(Problem::ThreeClass);
    cfg.gamma = vec![1.0; 3];
    let step = kalman_step(
        &KalmanState::initial(&cfg),
        &[BranchPrediction::new(BranchId::B1, vec![0.9, 0.05, 0.05])],
        &cfg,
    )
    .unwrap();
    assert!((step.state.x[0] - x).abs() < 1e-12);
    assert!((step.state.p[0] - p).abs() < 1e-12);
}
