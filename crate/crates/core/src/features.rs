//! Fixed per-modality feature sets and the per-window extraction cache used
//! for early fusion.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::datamodel::{FeatureVector, Modality, ModalitySet, SensorWindow};
use crate::error::{Error, Result};
use crate::math::{argmax, centered_moving_average, max, mean, min, slope, std_dev};

pub const ACC_FEATURES: [&str; 12] = [
    "acc_mean_x",
    "acc_mean_y",
    "acc_mean_z",
    "acc_std_x",
    "acc_std_y",
    "acc_std_z",
    "acc_mean_mag",
    "acc_std_mag",
    "acc_absint_x",
    "acc_absint_y",
    "acc_absint_z",
    "acc_dom_freq",
];

pub const BVP_FEATURES: [&str; 6] = [
    "bvp_mean_hr",
    "bvp_std_hr",
    "bvp_mean_ibi",
    "bvp_sdnn",
    "bvp_rmssd",
    "bvp_pnn50",
];

pub const EDA_FEATURES: [&str; 7] = [
    "eda_tonic_mean",
    "eda_tonic_std",
    "eda_tonic_min",
    "eda_tonic_max",
    "eda_tonic_slope",
    "eda_scr_count",
    "eda_scr_amp_sum",
];

pub const TEMP_FEATURES: [&str; 5] = [
    "temp_mean",
    "temp_std",
    "temp_min",
    "temp_max",
    "temp_slope",
];

/// Ordered feature names for one modality.
pub fn feature_names(m: Modality) -> &'static [&'static str] {
    match m {
        Modality::Acc => &ACC_FEATURES,
        Modality::Bvp => &BVP_FEATURES,
        Modality::Eda => &EDA_FEATURES,
        Modality::Temp => &TEMP_FEATURES,
    }
}

/// Length of the concatenated vector for a modality subset.
pub fn feature_len(set: ModalitySet) -> usize {
    set.iter().map(|m| feature_names(m).len()).sum()
}

const DOMINANT_BAND_HZ: (f64, f64) = (0.1, 16.0);
const BVP_CONTEXT_S: f64 = 10.0;
const BVP_THRESHOLD_STD: f64 = 0.5;
const BVP_REFRACTORY_S: f64 = 0.4;
const EDA_TONIC_S: f64 = 8.0;
const SCR_MIN_PROMINENCE: f64 = 0.01;

fn vector(m: Modality, values: Vec<f64>) -> Result<FeatureVector> {
    FeatureVector::new(
        feature_names(m).to_vec(),
        values,
        ModalitySet::of(&[m]),
    )
    .map_err(|e| Error::FeatureExtraction {
        modality: m,
        reason: e.to_string(),
    })
}

pub fn extract(m: Modality, w: &SensorWindow) -> Result<FeatureVector> {
    match m {
        Modality::Acc => extract_acc(w),
        Modality::Bvp => extract_bvp(w),
        Modality::Eda => extract_eda(w),
        Modality::Temp => extract_temp(w),
    }
}

/// Motion statistics per axis and of the magnitude, plus the dominant
/// frequency of the magnitude signal.
pub fn extract_acc(w: &SensorWindow) -> Result<FeatureVector> {
    let axes = w.slice(Modality::Acc);
    let fs = Modality::Acc.sample_rate();
    let n = axes[0].len();
    let magnitude: Vec<f64> = (0..n)
        .map(|i| libm::sqrt(axes.iter().map(|a| a[i] * a[i]).sum::<f64>()))
        .collect();
    let mut values = Vec::with_capacity(ACC_FEATURES.len());
    values.extend(axes.iter().map(|a| mean(a)));
    values.extend(axes.iter().map(|a| std_dev(a)));
    values.push(mean(&magnitude));
    values.push(std_dev(&magnitude));
    // Integral of |a| dt divided by the window duration.
    values.extend(
        axes.iter()
            .map(|a| a.iter().map(|v| v.abs()).sum::<f64>() / n.max(1) as f64),
    );
    values.push(dominant_frequency(&magnitude, fs, DOMINANT_BAND_HZ));
    vector(Modality::Acc, values)
}

/// Frequency of the largest spectral magnitude within `band` after mean
/// removal. The signal is zero-padded to a power of two; ties pick the
/// lowest bin.
pub fn dominant_frequency(x: &[f64], fs: f64, band: (f64, f64)) -> f64 {
    let n_fft = x.len().max(2).next_power_of_two();
    let m = mean(x);
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v - m, 0.0)).collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    fft_in_place(&mut buf);
    let bin_hz = fs / n_fft as f64;
    let lo = libm::ceil(band.0 / bin_hz - 1e-9) as usize;
    let hi = (libm::floor(band.1 / bin_hz + 1e-9) as usize).min(n_fft / 2);
    if lo > hi {
        return lo as f64 * bin_hz;
    }
    let mags: Vec<f64> = buf[lo..=hi].iter().map(|c| c.norm_sqr()).collect();
    (lo + argmax(&mags)) as f64 * bin_hz
}

/// Iterative radix-2 Cooley-Tukey; `buf.len()` must be a power of two.
fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = Complex64::from_polar(1.0, -2.0 * PI / len as f64);
        for chunk in buf.chunks_mut(len) {
            let mut tw = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let t = *b * tw;
                *b = *a - t;
                *a += t;
                tw *= step;
            }
        }
        len <<= 1;
    }
}

/// Local maxima, plateaus resolved to their midpoint.
pub(crate) fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i + 1;
            while j < n && x[j] == x[i] {
                j += 1;
            }
            if j < n && x[j] < x[i] {
                peaks.push((i + j - 1) / 2);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Height of a peak above the higher of its two bases. Each base is the
/// minimum between the peak and the nearest strictly higher sample on
/// that side (or the signal edge).
pub(crate) fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Systolic peak indices: local maxima above `mean + 0.5 std` of a
/// centered 10 s context, at least 0.4 s apart (higher peaks win).
pub fn detect_bvp_peaks(x: &[f64], fs: f64) -> Vec<usize> {
    let n = x.len();
    let mut s1 = Vec::with_capacity(n + 1);
    let mut s2 = Vec::with_capacity(n + 1);
    s1.push(0.0);
    s2.push(0.0);
    // Offset by the global mean to keep the running sums well conditioned.
    let offset = mean(x);
    for &v in x {
        let d = v - offset;
        s1.push(s1.last().unwrap() + d);
        s2.push(s2.last().unwrap() + d * d);
    }
    let half = libm::round(BVP_CONTEXT_S * fs / 2.0) as usize;
    let above_threshold = |i: usize| {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        let count = (hi - lo) as f64;
        let m = (s1[hi] - s1[lo]) / count;
        let var = ((s2[hi] - s2[lo]) / count - m * m).max(0.0);
        x[i] - offset > m + BVP_THRESHOLD_STD * libm::sqrt(var)
    };
    let mut candidates: Vec<usize> = local_maxima(x)
        .into_iter()
        .filter(|&i| above_threshold(i))
        .collect();
    let distance = libm::ceil(BVP_REFRACTORY_S * fs) as usize;
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        if kept.iter().all(|&k| c.abs_diff(k) >= distance) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

/// Time-domain HRV from inter-beat intervals in milliseconds:
/// mean HR, std HR, mean IBI, SDNN, RMSSD, pNN50.
pub fn hrv_features(ibi_ms: &[f64]) -> [f64; 6] {
    let hr: Vec<f64> = ibi_ms.iter().map(|ibi| 60_000.0 / ibi).collect();
    let diffs: Vec<f64> = ibi_ms.windows(2).map(|p| p[1] - p[0]).collect();
    let rmssd = if diffs.is_empty() {
        0.0
    } else {
        libm::sqrt(diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64)
    };
    let pnn50 = if diffs.is_empty() {
        0.0
    } else {
        diffs.iter().filter(|d| d.abs() > 50.0).count() as f64 / diffs.len() as f64
    };
    [
        mean(&hr),
        std_dev(&hr),
        mean(ibi_ms),
        std_dev(ibi_ms),
        rmssd,
        pnn50,
    ]
}

pub fn extract_bvp(w: &SensorWindow) -> Result<FeatureVector> {
    let x = &w.slice(Modality::Bvp)[0];
    let fs = Modality::Bvp.sample_rate();
    let peaks = detect_bvp_peaks(x, fs);
    if peaks.len() < 3 {
        return Err(Error::FeatureExtraction {
            modality: Modality::Bvp,
            reason: format!("{} peaks detected, need at least 3", peaks.len()),
        });
    }
    let ibi_ms: Vec<f64> = peaks
        .windows(2)
        .map(|p| (p[1] - p[0]) as f64 * 1000.0 / fs)
        .collect();
    vector(Modality::Bvp, hrv_features(&ibi_ms).to_vec())
}

/// Splits a skin-conductance signal into a tonic level (8 s centered
/// moving average) and the phasic residual.
pub fn eda_decompose(x: &[f64], fs: f64) -> (Vec<f64>, Vec<f64>) {
    let half = libm::round(EDA_TONIC_S * fs / 2.0) as usize;
    let tonic = centered_moving_average(x, half);
    let phasic = x.iter().zip(&tonic).map(|(v, t)| v - t).collect();
    (tonic, phasic)
}

pub fn extract_eda(w: &SensorWindow) -> Result<FeatureVector> {
    let x = &w.slice(Modality::Eda)[0];
    let fs = Modality::Eda.sample_rate();
    let (tonic, phasic) = eda_decompose(x, fs);
    let amplitudes: Vec<f64> = local_maxima(&phasic)
        .into_iter()
        .map(|p| prominence(&phasic, p))
        .filter(|&a| a > SCR_MIN_PROMINENCE)
        .collect();
    vector(
        Modality::Eda,
        vec![
            mean(&tonic),
            std_dev(&tonic),
            min(&tonic),
            max(&tonic),
            slope(&tonic, 1.0 / fs),
            amplitudes.len() as f64,
            amplitudes.iter().sum(),
        ],
    )
}

pub fn extract_temp(w: &SensorWindow) -> Result<FeatureVector> {
    let x = &w.slice(Modality::Temp)[0];
    let fs = Modality::Temp.sample_rate();
    vector(
        Modality::Temp,
        vec![mean(x), std_dev(x), min(x), max(x), slope(x, 1.0 / fs)],
    )
}

/// Lazily extracted per-modality features of one window. Each modality is
/// extracted at most once, whatever combination of branches asks for it.
#[derive(Debug)]
pub struct FeatureCache<'w> {
    window: &'w SensorWindow,
    slots: [Option<Result<FeatureVector>>; 4],
    extracted: ModalitySet,
    hits: usize,
}

impl<'w> FeatureCache<'w> {
    pub fn new(window: &'w SensorWindow) -> Self {
        FeatureCache {
            window,
            slots: Default::default(),
            extracted: ModalitySet::EMPTY,
            hits: 0,
        }
    }

    pub fn window(&self) -> &'w SensorWindow {
        self.window
    }

    pub fn get(&mut self, m: Modality) -> Result<&FeatureVector> {
        let slot = &mut self.slots[m.index()];
        if slot.is_some() {
            self.hits += 1;
        } else {
            *slot = Some(extract(m, self.window));
            self.extracted.insert(m);
        }
        slot.as_ref().expect("filled above").as_ref().map_err(Clone::clone)
    }

    /// Modalities extracted so far.
    pub fn extracted(&self) -> ModalitySet {
        self.extracted
    }

    pub fn hits(&self) -> usize {
        self.hits
    }
}

/// Per-modality feature access for gated inference.
pub trait FeatureSource {
    fn features(&mut self, m: Modality) -> Result<&FeatureVector>;

    /// Modalities read so far.
    fn touched(&self) -> ModalitySet;
}

impl FeatureSource for FeatureCache<'_> {
    fn features(&mut self, m: Modality) -> Result<&FeatureVector> {
        self.get(m)
    }

    fn touched(&self) -> ModalitySet {
        self.extracted
    }
}

/// A precomputed [`FeatureBank`] that records which modalities are read.
#[derive(Debug)]
pub struct BankView<'b> {
    bank: &'b FeatureBank,
    touched: ModalitySet,
}

impl<'b> BankView<'b> {
    pub fn new(bank: &'b FeatureBank) -> Self {
        BankView {
            bank,
            touched: ModalitySet::EMPTY,
        }
    }
}

impl FeatureSource for BankView<'_> {
    fn features(&mut self, m: Modality) -> Result<&FeatureVector> {
        self.touched.insert(m);
        Ok(self.bank.get(m))
    }

    fn touched(&self) -> ModalitySet {
        self.touched
    }
}

/// Early fusion: concatenates per-modality vectors in ACC, BVP, EDA, TEMP
/// order, pulling each from the source.
pub fn extract_for_branch<S: FeatureSource + ?Sized>(
    source: &mut S,
    modalities: ModalitySet,
) -> Result<FeatureVector> {
    if modalities.is_empty() {
        return Err(Error::config("branch modality set is empty"));
    }
    let mut parts = Vec::with_capacity(modalities.len());
    for m in modalities.iter() {
        parts.push(source.features(m)?.clone());
    }
    Ok(FeatureVector::concat(&parts))
}

/// Every modality's features for one window, in [`Modality::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBank {
    parts: [FeatureVector; 4],
}

impl FeatureBank {
    pub fn extract(w: &SensorWindow) -> Result<Self> {
        let parts = [
            extract_acc(w)?,
            extract_bvp(w)?,
            extract_eda(w)?,
            extract_temp(w)?,
        ];
        Ok(FeatureBank { parts })
    }

    /// Assembles a bank from precomputed vectors in [`Modality::ALL`] order.
    pub fn from_parts(parts: [FeatureVector; 4]) -> Result<Self> {
        for (m, p) in Modality::ALL.into_iter().zip(&parts) {
            if p.modalities() != ModalitySet::of(&[m]) || p.len() != feature_names(m).len() {
                return Err(Error::validation(format!("bank slot {m} holds the wrong features")));
            }
        }
        Ok(FeatureBank { parts })
    }

    pub fn get(&self, m: Modality) -> &FeatureVector {
        &self.parts[m.index()]
    }

    /// Concatenated values for a modality subset.
    pub fn values_for(&self, set: ModalitySet) -> Vec<f64> {
        let mut out = Vec::with_capacity(feature_len(set));
        for m in set.iter() {
            out.extend_from_slice(self.parts[m.index()].values());
        }
        out
    }

    pub fn all(&self) -> FeatureVector {
        FeatureVector::concat(&self.parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::ClassLabel;

    fn window_with(f: impl Fn(Modality, usize, f64) -> f64) -> SensorWindow {
        let slices = Modality::ALL.map(|m| {
            let n = m.samples_in(60.0);
            (0..m.channels())
                .map(|c| (0..n).map(|i| f(m, c, i as f64 / m.sample_rate())).collect())
                .collect()
        });
        SensorWindow::new("S2", 0, 0.0, 60.0, slices, ClassLabel::three_class(0).unwrap()).unwrap()
    }

    /// Narrow raised-cosine pulses at `hz`, roughly PPG-like.
    fn pulse(t: f64, hz: f64) -> f64 {
        let phase = (t * hz).fract();
        if phase < 0.2 {
            0.5 * (1.0 - libm::cos(2.0 * PI * phase / 0.2))
        } else {
            0.0
        }
    }

    #[test]
    fn constant_acc() {
        let w = window_with(|m, c, _| if m == Modality::Acc && c == 0 { 1.0 } else { 0.0 });
        let f = extract_acc(&w).unwrap();
        assert_eq!(f.len(), 12);
        let v = f.values();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!(v[3].abs() < 1e-12);
        assert!((v[6] - 1.0).abs() < 1e-12);
        assert!(v[7].abs() < 1e-12);
        // Lowest bin at or above 0.1 Hz of the padded 2048-point transform.
        let bin = 32.0 / 2048.0;
        assert!((v[11] - 7.0 * bin).abs() < 1e-12);
        assert!(v[11] >= 0.1);
    }

    #[test]
    fn dominant_frequency_of_sampled_sine() {
        let w = window_with(|m, c, t| {
            if m == Modality::Acc && c == 2 {
                1.0 + 0.5 * libm::sin(2.0 * PI * 2.0 * t)
            } else {
                0.0
            }
        });
        let f = extract_acc(&w).unwrap();
        let bin = 32.0 / 2048.0;
        assert!((f.values()[11] - 2.0).abs() <= bin, "{}", f.values()[11]);
    }

    #[test]
    fn fft_matches_direct_dft() {
        let x: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(libm::sin(i as f64 * 0.7) + 0.1 * i as f64, 0.0))
            .collect();
        let mut y = x.clone();
        fft_in_place(&mut y);
        for (k, yk) in y.iter().enumerate() {
            let direct: Complex64 = x
                .iter()
                .enumerate()
                .map(|(n, xn)| xn * Complex64::from_polar(1.0, -2.0 * PI * (k * n) as f64 / 16.0))
                .sum();
            assert!((yk - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn uniform_pulse_train() {
        let w = window_with(|m, _, t| if m == Modality::Bvp { pulse(t, 1.0) } else { 1.0 });
        let f = extract_bvp(&w).unwrap();
        let v = f.values();
        assert!((v[0] - 60.0).abs() < 1e-9, "mean hr {}", v[0]);
        assert!((v[2] - 1000.0).abs() < 1e-9);
        assert_eq!(v[3], 0.0);
        assert_eq!(v[4], 0.0);
        assert_eq!(v[5], 0.0);
    }

    #[test]
    fn alternating_intervals() {
        let ibi: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 900.0 } else { 1100.0 }).collect();
        let v = hrv_features(&ibi);
        assert!((v[2] - 1000.0).abs() < 1e-9);
        assert!((v[3] - 100.0).abs() < 1e-9);
        assert!((v[4] - 200.0).abs() < 1e-9);
        assert_eq!(v[5], 1.0);
    }

    #[test]
    fn flat_bvp_fails() {
        let w = window_with(|_, _, _| 0.0);
        assert!(matches!(
            extract_bvp(&w),
            Err(Error::FeatureExtraction { modality: Modality::Bvp, .. })
        ));
    }

    #[test]
    fn bvp_offset_invariance() {
        let base = window_with(|m, _, t| if m == Modality::Bvp { pulse(t, 1.3) } else { 0.0 });
        let shifted = window_with(|m, _, t| if m == Modality::Bvp { pulse(t, 1.3) + 42.0 } else { 0.0 });
        assert_eq!(extract_bvp(&base).unwrap(), extract_bvp(&shifted).unwrap());
    }

    #[test]
    fn refractory_period_rejects_close_peaks() {
        // Main peaks every second with a smaller echo 0.2 s later.
        let fs = 64.0;
        let x: Vec<f64> = (0..640)
            .map(|i| {
                let t = i as f64 / fs;
                pulse(t, 1.0) + 0.6 * pulse(t - 0.2, 1.0)
            })
            .collect();
        let peaks = detect_bvp_peaks(&x, fs);
        assert!(peaks.windows(2).all(|p| p[1] - p[0] >= 26));
        assert!(peaks.len() >= 9 && peaks.len() <= 10, "{peaks:?}");
    }

    #[test]
    fn constant_eda() {
        let w = window_with(|_, _, _| 5.0);
        let v = extract_eda(&w).unwrap().values().to_vec();
        assert_eq!(v.len(), 7);
        assert!((v[0] - 5.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
        assert!(v[4].abs() < 1e-12);
        assert_eq!(v[5], 0.0);
        assert_eq!(v[6], 0.0);
    }

    #[test]
    fn eda_ramp_slope() {
        let w = window_with(|_, _, t| 2.0 + 0.05 * t);
        let v = extract_eda(&w).unwrap();
        assert!((v.values()[4] - 0.05).abs() < 1e-6);
    }

    #[test]
    fn single_scr_bump() {
        // 0.5 uS triangle, 2 s wide, centred at 30 s on a 3 uS baseline.
        let w = window_with(|_, _, t| 3.0 + (0.5 * (1.0 - (t - 30.0).abs())).max(0.0));
        let v = extract_eda(&w).unwrap();
        assert_eq!(v.values()[5], 1.0);
        assert!((v.values()[6] - 0.5).abs() < 1e-9, "{}", v.values()[6]);
    }

    #[test]
    fn temp_features() {
        let v = extract_temp(&window_with(|_, _, _| 33.0)).unwrap();
        assert_eq!(v.values(), &[33.0, 0.0, 33.0, 33.0, 0.0]);
        let ramp = extract_temp(&window_with(|_, _, t| 32.0 + 2.0 * t / 60.0)).unwrap();
        assert!((ramp.values()[4] - 2.0 / 60.0).abs() < 1e-9);
        assert_eq!(ramp.len(), 5);
    }

    #[test]
    fn branch_concatenation_and_cache() {
        let w = window_with(|m, _, t| match m {
            Modality::Bvp => pulse(t, 1.2),
            _ => 1.0 + 0.01 * t,
        });
        let mut cache = FeatureCache::new(&w);
        let be = extract_for_branch(&mut cache, ModalitySet::of(&[Modality::Eda, Modality::Bvp])).unwrap();
        assert_eq!(be.len(), 13);
        assert_eq!(be.names()[0], "bvp_mean_hr");
        assert_eq!(cache.hits(), 0);
        let abe = extract_for_branch(
            &mut cache,
            ModalitySet::of(&[Modality::Acc, Modality::Bvp, Modality::Eda]),
        )
        .unwrap();
        assert_eq!(abe.len(), 25);
        assert_eq!(cache.hits(), 2);
        assert_eq!(cache.extracted().len(), 3);
        assert!(extract_for_branch(&mut cache, ModalitySet::EMPTY).is_err());
    }
}
