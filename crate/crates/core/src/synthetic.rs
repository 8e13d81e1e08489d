//! Deterministic synthetic wrist recordings with block-structured labels.
//!
//! Each subject goes through baseline, stress and amusement blocks of equal
//! length, always starting with baseline. Every class has its
//! own heart rate, tonic EDA level, SCR rate, skin temperature and arm
//! motion; subjects get small physiological offsets.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datamodel::{LabelTimeline, Modality, SensorStream, SubjectRecord};
use crate::error::{Error, Result};

/// Physiology of one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassParams {
    pub heart_rate_bpm: f64,
    /// Beat-to-beat interval jitter, seconds.
    pub ibi_jitter: f64,
    pub eda_level: f64,
    /// SCR events per minute.
    pub scr_rate: f64,
    pub temp: f64,
    /// Arm motion amplitude in g.
    pub motion_amp: f64,
    pub motion_freq: f64,
}

/// Per-class parameters in class-id order (baseline, stress, amusement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProfile {
    pub classes: [ClassParams; 3],
    /// Scale of the per-subject offsets; 0 makes subjects identical up to noise.
    pub subject_spread: f64,
}

impl ClassProfile {
    /// All modalities carry class information.
    pub fn separable() -> Self {
        ClassProfile {
            classes: [
                ClassParams {
                    heart_rate_bpm: 64.0,
                    ibi_jitter: 0.05,
                    eda_level: 2.0,
                    scr_rate: 1.0,
                    temp: 33.8,
                    motion_amp: 0.02,
                    motion_freq: 0.8,
                },
                ClassParams {
                    heart_rate_bpm: 92.0,
                    ibi_jitter: 0.015,
                    eda_level: 6.0,
                    scr_rate: 6.0,
                    temp: 32.6,
                    motion_amp: 0.08,
                    motion_freq: 1.6,
                },
                ClassParams {
                    heart_rate_bpm: 76.0,
                    ibi_jitter: 0.03,
                    eda_level: 3.8,
                    scr_rate: 3.0,
                    temp: 34.4,
                    motion_amp: 0.35,
                    motion_freq: 3.0,
                },
            ],
            subject_spread: 1.0,
        }
    }

    /// Only EDA differs between classes; ACC, BVP and TEMP are drawn from
    /// one shared distribution.
    pub fn eda_only() -> Self {
        let shared = ClassParams {
            heart_rate_bpm: 74.0,
            ibi_jitter: 0.03,
            eda_level: 0.0,
            scr_rate: 0.0,
            temp: 33.5,
            motion_amp: 0.05,
            motion_freq: 1.5,
        };
        let mut p = ClassProfile {
            classes: [shared; 3],
            subject_spread: 1.0,
        };
        for (c, (level, rate)) in p.classes.iter_mut().zip([(2.0, 1.0), (6.0, 6.0), (4.0, 3.0)]) {
            c.eda_level = level;
            c.scr_rate = rate;
        }
        p
    }
}

impl Default for ClassProfile {
    fn default() -> Self {
        Self::separable()
    }
}

struct Noise(ChaCha8Rng);

impl Noise {
    fn uniform(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    /// Box-Muller.
    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
    }

    fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(1.0 - self.uniform()) / rate
    }
}

struct Offsets {
    hr: f64,
    eda_scale: f64,
    temp: f64,
}

/// Block boundaries and classes for one subject: baseline first, then
/// stress and amusement in an order that alternates between subjects.
fn schedule(subject: usize, duration: f64) -> Vec<(f64, f64, usize)> {
    let block = duration / 3.0;
    let order = if subject.is_multiple_of(2) { [0, 1, 2] } else { [0, 2, 1] };
    order
        .iter()
        .enumerate()
        .map(|(b, &c)| (b as f64 * block, (b + 1) as f64 * block, c))
        .collect()
}

fn class_at(blocks: &[(f64, f64, usize)], t: f64) -> usize {
    blocks
        .iter()
        .find(|(s, e, _)| t >= *s && t < *e)
        .unwrap_or(&blocks[blocks.len() - 1])
        .2
}

/// Generates `subjects` recordings named `S1..Sn`, each `duration` seconds.
pub fn generate_synthetic(
    subjects: usize,
    duration: f64,
    seed: u64,
    profile: &ClassProfile,
) -> Result<Vec<SubjectRecord>> {
    if subjects < 2 {
        return Err(Error::config("synthetic data needs at least 2 subjects"));
    }
    if !(duration >= 180.0 && duration.is_finite()) {
        return Err(Error::config(format!(
            "synthetic duration {duration} s is below the 180 s minimum"
        )));
    }
    (0..subjects)
        .map(|i| generate_subject(i, duration, seed, profile))
        .collect()
}

fn generate_subject(i: usize, duration: f64, seed: u64, profile: &ClassProfile) -> Result<SubjectRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let mut noise = Noise(rng);
    let spread = profile.subject_spread;
    let offsets = Offsets {
        hr: spread * 3.0 * (2.0 * noise.uniform() - 1.0),
        eda_scale: 1.0 + spread * 0.1 * (2.0 * noise.uniform() - 1.0),
        temp: spread * 0.2 * (2.0 * noise.uniform() - 1.0),
    };
    let blocks = schedule(i, duration);
    let params = |t: f64| &profile.classes[class_at(&blocks, t)];

    let acc = acc_signal(duration, &params, &mut noise);
    let bvp = bvp_signal(duration, &params, &offsets, &mut noise, &acc);
    let eda = eda_signal(duration, &params, &offsets, &mut noise);
    let temp = temp_signal(duration, &params, &offsets, &mut noise);

    let streams = [
        SensorStream::new(Modality::Acc, Modality::Acc.sample_rate(), 0.0, acc)?,
        SensorStream::mono(Modality::Bvp, 0.0, bvp)?,
        SensorStream::mono(Modality::Eda, 0.0, eda)?,
        SensorStream::mono(Modality::Temp, 0.0, temp)?,
    ];
    let labels = LabelTimeline::new(blocks.iter().map(|&(s, _, c)| (s, c as i8)).collect())?;
    SubjectRecord::new(format!("S{}", i + 1), streams, labels)
}

fn samples(m: Modality, duration: f64) -> (usize, f64) {
    (m.samples_in(duration), m.sample_rate())
}

fn acc_signal<'p>(duration: f64, params: &impl Fn(f64) -> &'p ClassParams, noise: &mut Noise) -> Vec<Vec<f64>> {
    let (n, fs) = samples(Modality::Acc, duration);
    let gravity = [0.1, -0.2, 0.97];
    let phases = [0.0, 2.1, 4.2];
    let mut out: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    let mut phase = 0.0;
    for k in 0..n {
        let t = k as f64 / fs;
        let p = params(t);
        phase += 2.0 * PI * p.motion_freq / fs;
        for (c, ch) in out.iter_mut().enumerate() {
            let v = gravity[c] + p.motion_amp * libm::sin(phase + phases[c]) + 0.01 * noise.normal();
            ch.push(v);
        }
    }
    out
}

/// Pulse train with one narrow systolic peak per beat plus motion artifacts.
fn bvp_signal<'p>(
    duration: f64,
    params: &impl Fn(f64) -> &'p ClassParams,
    offsets: &Offsets,
    noise: &mut Noise,
    acc: &[Vec<f64>],
) -> Vec<f64> {
    let (n, fs) = samples(Modality::Bvp, duration);
    let mut beats = Vec::new();
    let mut t = 0.2 * noise.uniform();
    while t < duration + 2.0 {
        beats.push(t);
        let p = params(t.min(duration - 1e-9));
        let ibi = 60.0 / (p.heart_rate_bpm + offsets.hr) + p.ibi_jitter * noise.normal();
        t += ibi.max(0.35);
    }
    let acc_fs = Modality::Acc.sample_rate();
    let mut out = Vec::with_capacity(n);
    let mut b = 0;
    for k in 0..n {
        let t = k as f64 / fs;
        while b + 1 < beats.len() && beats[b + 1] <= t {
            b += 1;
        }
        let mut v = 0.0;
        for &bt in &beats[b.saturating_sub(1)..(b + 2).min(beats.len())] {
            let d = t - bt - 0.15;
            v += 40.0 * libm::exp(-d * d / (2.0 * 0.06 * 0.06));
        }
        let ai = ((t * acc_fs) as usize).min(acc[2].len() - 1);
        let artifact = 20.0 * (acc[2][ai] - 0.97);
        out.push(v + artifact + 1.0 * noise.normal());
    }
    out
}

/// Tonic level with slow drift plus SCRs with a 1 s rise and 4 s decay.
fn eda_signal<'p>(
    duration: f64,
    params: &impl Fn(f64) -> &'p ClassParams,
    offsets: &Offsets,
    noise: &mut Noise,
) -> Vec<f64> {
    let (n, fs) = samples(Modality::Eda, duration);
    let mut events = Vec::new();
    let mut t = 0.0;
    while t < duration {
        let rate = params(t).scr_rate / 60.0;
        if rate <= 0.0 {
            t += 1.0;
            continue;
        }
        t += noise.exponential(rate);
        if t < duration {
            events.push((t, 0.2 + 0.3 * noise.uniform()));
        }
    }
    let drift_phase = 2.0 * PI * noise.uniform();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / fs;
        let p = params(t);
        let mut v = p.eda_level * offsets.eda_scale + 0.1 * libm::sin(2.0 * PI * t / 300.0 + drift_phase);
        for &(te, amp) in &events {
            let d = t - te;
            if d > 0.0 && d < 30.0 {
                v += amp * (1.0 - libm::exp(-d / 1.0)) * libm::exp(-d / 4.0) * offsets.eda_scale;
            }
        }
        out.push(v + 0.005 * noise.normal());
    }
    out
}

fn temp_signal<'p>(
    duration: f64,
    params: &impl Fn(f64) -> &'p ClassParams,
    offsets: &Offsets,
    noise: &mut Noise,
) -> Vec<f64> {
    let (n, fs) = samples(Modality::Temp, duration);
    (0..n)
        .map(|k| params(k as f64 / fs).temp + offsets.temp + 0.02 * noise.normal())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureBank;
    use crate::preprocess::{segment, FilterBank};

    #[test]
    fn rejects_bad_sizes() {
        let p = ClassProfile::default();
        assert!(matches!(generate_synthetic(1, 600.0, 0, &p), Err(Error::Config(_))));
        assert!(matches!(generate_synthetic(2, 60.0, 0, &p), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let p = ClassProfile::default();
        let a = generate_synthetic(2, 180.0, 7, &p).unwrap();
        let b = generate_synthetic(2, 180.0, 7, &p).unwrap();
        let c = generate_synthetic(2, 180.0, 8, &p).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a[1].subject_id(), "S2");
        assert_eq!(a[0].stream(Modality::Bvp).len(), 180 * 64);
    }

    #[test]
    fn windows_extract_cleanly() {
        let subjects = generate_synthetic(2, 360.0, 3, &ClassProfile::default()).unwrap();
        let bank = FilterBank::default();
        for s in &subjects {
            let windows = segment(&bank.apply(s).unwrap(), 60.0, 5.0).unwrap();
            // Three 120 s blocks, 13 windows each.
            assert_eq!(windows.len(), 39);
            let mut seen = [false; 3];
            for w in &windows {
                FeatureBank::extract(w).unwrap();
                seen[w.label().id()] = true;
            }
            assert_eq!(seen, [true; 3]);
        }
    }

    #[test]
    fn heart_rate_follows_class() {
        let subjects = generate_synthetic(2, 360.0, 1, &ClassProfile::default()).unwrap();
        let bank = FilterBank::default();
        let windows = segment(&bank.apply(&subjects[0]).unwrap(), 60.0, 5.0).unwrap();
        let mut hr = [0.0; 3];
        let mut n = [0.0; 3];
        for w in &windows {
            let f = FeatureBank::extract(w).unwrap();
            let c = w.label().id();
            hr[c] += f.get(Modality::Bvp).values()[0];
            n[c] += 1.0;
        }
        let hr: Vec<f64> = hr.iter().zip(n).map(|(h, n)| h / n).collect();
        for (c, expected) in [64.0, 92.0, 76.0].iter().enumerate() {
            assert!((hr[c] - expected).abs() < 5.0, "class {c}: {}", hr[c]);
        }
    }
}
