//! Per-modality filtering and sliding-window segmentation.
//!
//! Butterworth filters are designed from the analog prototype through the
//! bilinear transform (with frequency prewarping) and applied as a cascade
//! of second-order sections, forward and backward, so the result has zero
//! phase. Edges are handled with odd extension and steady-state initial
//! conditions, which makes constant inputs pass through a lowpass exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::datamodel::{
    ClassLabel, Modality, SensorStream, SensorWindow, SubjectRecord, IGNORE_LABEL,
};
use crate::error::{Error, Result};
use crate::math::centered_moving_average;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FilterKind {
    ButterworthBandpass,
    ButterworthLowpass,
    /// Centered moving average over `order` samples.
    MovingAverage,
    None,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::ButterworthBandpass => "butterworth-bandpass",
            FilterKind::ButterworthLowpass => "butterworth-lowpass",
            FilterKind::MovingAverage => "moving-average",
            FilterKind::None => "none",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "butterworth-bandpass" => Ok(FilterKind::ButterworthBandpass),
            "butterworth-lowpass" => Ok(FilterKind::ButterworthLowpass),
            "moving-average" => Ok(FilterKind::MovingAverage),
            "none" => Ok(FilterKind::None),
            other => Err(Error::config(format!("unknown filter kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub order: usize,
    /// `[low, high]` for band-pass, `[cutoff]` for lowpass, empty otherwise.
    pub cutoffs: Vec<f64>,
}

impl FilterSpec {
    pub fn none() -> Self {
        FilterSpec {
            kind: FilterKind::None,
            order: 0,
            cutoffs: Vec::new(),
        }
    }

    pub fn bandpass(order: usize, low: f64, high: f64) -> Self {
        FilterSpec {
            kind: FilterKind::ButterworthBandpass,
            order,
            cutoffs: vec![low, high],
        }
    }

    pub fn lowpass(order: usize, cutoff: f64) -> Self {
        FilterSpec {
            kind: FilterKind::ButterworthLowpass,
            order,
            cutoffs: vec![cutoff],
        }
    }

    pub fn moving_average(samples: usize) -> Self {
        FilterSpec {
            kind: FilterKind::MovingAverage,
            order: samples,
            cutoffs: Vec::new(),
        }
    }

    /// Default filter for a modality at E4 rates.
    pub fn default_for(m: Modality) -> Self {
        match m {
            Modality::Acc => FilterSpec::none(),
            Modality::Bvp => FilterSpec::bandpass(3, 0.7, 3.7),
            Modality::Eda => FilterSpec::lowpass(4, 1.0),
            Modality::Temp => FilterSpec::moving_average(4),
        }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        let nyquist = sample_rate / 2.0;
        let check_cutoff = |c: f64| {
            if !(c > 0.0 && c < nyquist) {
                Err(Error::config(format!(
                    "{} cutoff {c} Hz must lie in (0, {nyquist}) Hz",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        if self.kind != FilterKind::None && self.order < 1 {
            return Err(Error::config(format!("{} order must be >= 1", self.kind)));
        }
        match self.kind {
            FilterKind::None | FilterKind::MovingAverage => Ok(()),
            FilterKind::ButterworthLowpass => match self.cutoffs.as_slice() {
                [c] => check_cutoff(*c),
                _ => Err(Error::config("lowpass needs exactly one cutoff")),
            },
            FilterKind::ButterworthBandpass => match self.cutoffs.as_slice() {
                [lo, hi] if lo < hi => {
                    check_cutoff(*lo)?;
                    check_cutoff(*hi)
                }
                _ => Err(Error::config("band-pass needs two increasing cutoffs")),
            },
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.order)?;
        for (i, c) in self.cutoffs.iter().enumerate() {
            f.write_str(if i == 0 { ":" } else { "," })?;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for FilterSpec {
    type Err = Error;

    /// `kind[:order[:c1[,c2]]]`, e.g. `butterworth-bandpass:3:0.7,3.7`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind: FilterKind = parts.next().unwrap_or("").trim().parse()?;
        let order = match parts.next() {
            Some(o) => o
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("bad filter order '{o}'")))?,
            None => 0,
        };
        let cutoffs = match parts.next() {
            Some(c) => c
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config(format!("bad cutoff '{v}'")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        if parts.next().is_some() {
            return Err(Error::config(format!("trailing fields in filter '{s}'")));
        }
        Ok(FilterSpec {
            kind,
            order,
            cutoffs,
        })
    }
}

/// One biquad `b0 + b1 z^-1 + b2 z^-2 / 1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2])
            / (self.a[0] + z_inv * self.a[1] + z2 * self.a[2])
    }
}

/// A cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Section>,
}

impl SosFilter {
    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// Complex response of a single forward pass at `freq` Hz.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let w = 2.0 * PI * freq / sample_rate;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    fn scale(&mut self, k: f64) {
        for b in &mut self.sections[0].b {
            *b *= k;
        }
    }

    /// Single causal pass, transposed direct form II, with initial
    /// conditions set to the steady state for a constant input `x[0]`.
    fn filter_steady(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let mut level = x0;
        for s in &self.sections {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let gain = (b0 + b1 + b2) / (1.0 + a1 + a2);
            let out_level = gain * level;
            let mut z2 = b2 * level - a2 * out_level;
            let mut z1 = b1 * level - a1 * out_level + z2;
            for v in x.iter_mut() {
                let input = *v;
                let y = b0 * input + z1;
                z1 = b1 * input - a1 * y + z2;
                z2 = b2 * input - a2 * y;
                *v = y;
            }
            level = out_level;
        }
    }

    /// Forward-backward application with odd-extension padding.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        self.filter_steady(&mut ext);
        ext.reverse();
        self.filter_steady(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

fn bilinear(s: Complex64, fs2: f64) -> Complex64 {
    (fs2 + s) / (fs2 - s)
}

fn prewarp(freq: f64, sample_rate: f64) -> f64 {
    2.0 * sample_rate * libm::tan(PI * freq / sample_rate)
}

/// Poles of the order-`n` analog Butterworth prototype (unit cutoff).
fn prototype_poles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

/// Groups digital poles and zeros (zeros all real) into biquads.
fn to_sections(poles: &[Complex64], zeros: &[f64]) -> Vec<Section> {
    const IM_EPS: f64 = 1e-12;
    let mut sections = Vec::new();
    let mut real_poles = Vec::new();
    let mut zero_iter = zeros.iter().copied();
    for p in poles {
        if p.im > IM_EPS {
            let z1 = zero_iter.next().unwrap_or(0.0);
            let z2 = zero_iter.next().unwrap_or(0.0);
            sections.push(Section {
                b: [1.0, -(z1 + z2), z1 * z2],
                a: [1.0, -2.0 * p.re, p.norm_sqr()],
            });
        } else if p.im.abs() <= IM_EPS {
            real_poles.push(p.re);
        }
    }
    for pair in real_poles.chunks(2) {
        match pair {
            [p1, p2] => {
                let z1 = zero_iter.next().unwrap_or(0.0);
                let z2 = zero_iter.next().unwrap_or(0.0);
                sections.push(Section {
                    b: [1.0, -(z1 + z2), z1 * z2],
                    a: [1.0, -(p1 + p2), p1 * p2],
                });
            }
            [p] => {
                let z = zero_iter.next().unwrap_or(0.0);
                sections.push(Section {
                    b: [1.0, -z, 0.0],
                    a: [1.0, -p, 0.0],
                });
            }
            _ => unreachable!(),
        }
    }
    sections
}

/// Digital Butterworth lowpass with unit DC gain.
pub fn butter_lowpass(order: usize, cutoff: f64, sample_rate: f64) -> Result<SosFilter> {
    FilterSpec::lowpass(order, cutoff).validate(sample_rate)?;
    let fs2 = 2.0 * sample_rate;
    let wc = prewarp(cutoff, sample_rate);
    let poles: Vec<Complex64> = prototype_poles(order)
        .into_iter()
        .map(|p| bilinear(p * wc, fs2))
        .collect();
    let zeros = vec![-1.0; order];
    let mut filter = SosFilter {
        sections: to_sections(&poles, &zeros),
    };
    let dc = filter.response(0.0, sample_rate).re;
    filter.scale(1.0 / dc);
    Ok(filter)
}

/// Digital Butterworth band-pass of prototype order `order` (so `2 * order`
/// poles), unit gain at the geometric center of the warped band.
pub fn butter_bandpass(order: usize, low: f64, high: f64, sample_rate: f64) -> Result<SosFilter> {
    FilterSpec::bandpass(order, low, high).validate(sample_rate)?;
    let fs2 = 2.0 * sample_rate;
    let w_lo = prewarp(low, sample_rate);
    let w_hi = prewarp(high, sample_rate);
    let bw = w_hi - w_lo;
    let w0_sq = w_lo * w_hi;
    let mut poles = Vec::with_capacity(2 * order);
    for p in prototype_poles(order) {
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        poles.push(bilinear((pb + disc) / 2.0, fs2));
        poles.push(bilinear((pb - disc) / 2.0, fs2));
    }
    let mut zeros = Vec::with_capacity(2 * order);
    for _ in 0..order {
        zeros.push(1.0);
        zeros.push(-1.0);
    }
    let mut filter = SosFilter {
        sections: to_sections(&poles, &zeros),
    };
    // Center frequency of the digital band.
    let center = libm::atan(libm::sqrt(w0_sq) / fs2) * sample_rate / PI;
    let g = filter.response(center, sample_rate).norm();
    filter.scale(1.0 / g);
    Ok(filter)
}

/// Designs the filter described by `spec` for `sample_rate`. Returns `None`
/// for kinds that are not IIR filters.
pub fn design(spec: &FilterSpec, sample_rate: f64) -> Result<Option<SosFilter>> {
    spec.validate(sample_rate)?;
    match spec.kind {
        FilterKind::ButterworthLowpass => {
            butter_lowpass(spec.order, spec.cutoffs[0], sample_rate).map(Some)
        }
        FilterKind::ButterworthBandpass => {
            butter_bandpass(spec.order, spec.cutoffs[0], spec.cutoffs[1], sample_rate).map(Some)
        }
        FilterKind::MovingAverage | FilterKind::None => Ok(None),
    }
}

/// Zero-phase filtering of every channel. Length, rate and channel count
/// are preserved.
pub fn filter_stream(s: &SensorStream, spec: &FilterSpec) -> Result<SensorStream> {
    spec.validate(s.sample_rate())?;
    let channels = match spec.kind {
        FilterKind::None => s.channels().to_vec(),
        FilterKind::MovingAverage => s
            .channels()
            .iter()
            .map(|c| centered_moving_average(c, spec.order / 2))
            .collect(),
        FilterKind::ButterworthLowpass | FilterKind::ButterworthBandpass => {
            let filter = design(spec, s.sample_rate())?.expect("IIR kind");
            s.channels().iter().map(|c| filter.filtfilt(c)).collect()
        }
    };
    s.with_channels(channels)
}

/// Filters of one subject's four streams, in [`Modality::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterBank {
    pub specs: [FilterSpec; 4],
}

impl Default for FilterBank {
    fn default() -> Self {
        FilterBank {
            specs: Modality::ALL.map(FilterSpec::default_for),
        }
    }
}

impl FilterBank {
    pub fn spec(&self, m: Modality) -> &FilterSpec {
        &self.specs[m.index()]
    }

    pub fn set(&mut self, m: Modality, spec: FilterSpec) {
        self.specs[m.index()] = spec;
    }

    pub fn apply(&self, subject: &SubjectRecord) -> Result<SubjectRecord> {
        let mut streams = Vec::with_capacity(4);
        for m in Modality::ALL {
            streams.push(filter_stream(subject.stream(m), self.spec(m))?);
        }
        let streams: [SensorStream; 4] = streams.try_into().expect("four streams");
        subject.with_streams(streams)
    }
}

/// Cuts a subject into labelled sliding windows.
///
/// Windows start at `region_start + k * slide_s` inside each contiguous
/// same-label region and never straddle a label change; regions carrying
/// [`IGNORE_LABEL`] yield nothing. Window indices increase with start time.
pub fn segment(subject: &SubjectRecord, window_s: f64, slide_s: f64) -> Result<Vec<SensorWindow>> {
    if !(window_s > 0.0 && slide_s > 0.0) {
        return Err(Error::config("window and slide lengths must be positive"));
    }
    let span_start = subject.start_time();
    let span_end = subject.end_time();
    let mut windows = Vec::new();
    if span_end - span_start < window_s {
        return Ok(windows);
    }
    for region in subject.labels().regions(span_end) {
        if region.label == IGNORE_LABEL {
            continue;
        }
        let start = region.start.max(span_start);
        let duration = region.end - start;
        if duration + 1e-9 < window_s {
            continue;
        }
        let count = libm::floor((duration - window_s) / slide_s + 1e-9) as usize + 1;
        let label = ClassLabel::three_class(region.label as usize)?;
        for k in 0..count {
            let t0 = start + k as f64 * slide_s;
            let mut slices: [Vec<Vec<f64>>; 4] = Default::default();
            for m in Modality::ALL {
                let stream = subject.stream(m);
                let len = m.samples_in(window_s);
                let offset = libm::round((t0 - stream.start_time()) * stream.sample_rate());
                let offset = offset.max(0.0) as usize;
                if offset + len > stream.len() {
                    return Err(Error::InvalidWindow(format!(
                        "{m} window at t={t0} runs past the end of the stream"
                    )));
                }
                slices[m.index()] = stream
                    .channels()
                    .iter()
                    .map(|c| c[offset..offset + len].to_vec())
                    .collect();
            }
            let index = windows.len();
            windows.push(SensorWindow::new(
                subject.subject_id(),
                index,
                t0,
                window_s,
                slices,
                label,
            )?);
        }
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::LabelTimeline;
    use alloc::string::ToString;

    fn sine(freq: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n)
            .map(|i| libm::sin(2.0 * PI * freq * i as f64 / fs))
            .collect()
    }

    fn rms(x: &[f64]) -> f64 {
        libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
    }

    #[test]
    fn lowpass_passes_constants() {
        for (order, cutoff, fs) in [(4, 1.0, 4.0), (2, 5.0, 64.0), (3, 0.3, 4.0)] {
            let f = butter_lowpass(order, cutoff, fs).unwrap();
            let y = f.filtfilt(&[2.5; 200]);
            for v in y {
                assert!((v - 2.5).abs() < 1e-9, "order {order}: {v}");
            }
        }
    }

    /// Oracle: analog Butterworth band-pass magnitude at the prewarped
    /// frequency, which the bilinear transform maps exactly.
    fn analog_bandpass_gain(order: usize, lo: f64, hi: f64, f: f64, fs: f64) -> f64 {
        let w = prewarp(f, fs);
        let wl = prewarp(lo, fs);
        let wh = prewarp(hi, fs);
        let ratio = (w * w - wl * wh) / (w * (wh - wl));
        1.0 / libm::sqrt(1.0 + libm::pow(ratio, 2.0 * order as f64))
    }

    #[test]
    fn bandpass_matches_analog_prototype() {
        let f = butter_bandpass(3, 0.7, 3.7, 64.0).unwrap();
        assert_eq!(f.sections().len(), 3);
        for freq in [0.2, 0.7, 1.5, 3.7, 10.0, 20.0] {
            let digital = f.response(freq, 64.0).norm();
            let analog = analog_bandpass_gain(3, 0.7, 3.7, freq, 64.0);
            assert!((digital - analog).abs() < 1e-9, "{freq}: {digital} vs {analog}");
        }
    }

    #[test]
    fn bandpass_rejects_ten_hertz() {
        let spec = FilterSpec::bandpass(3, 0.7, 3.7);
        let x = sine(10.0, 64.0, 60.0);
        let s = SensorStream::mono(Modality::Bvp, 0.0, x.clone()).unwrap();
        let y = filter_stream(&s, &spec).unwrap();
        let ratio = rms(y.channel(0)) / rms(&x);
        // Zero-phase: squared single-pass magnitude.
        let expected = analog_bandpass_gain(3, 0.7, 3.7, 10.0, 64.0).powi(2);
        assert!(ratio < 0.05, "ratio {ratio}");
        let interior = &y.channel(0)[640..3200];
        let interior_ratio = rms(interior) / rms(&x[640..3200]);
        assert!((interior_ratio - expected).abs() < 1e-3, "{interior_ratio} vs {expected}");
    }

    #[test]
    fn filtering_is_zero_phase() {
        let spec = FilterSpec::bandpass(3, 0.7, 3.7);
        let x = sine(1.5, 64.0, 60.0);
        let s = SensorStream::mono(Modality::Bvp, 0.0, x.clone()).unwrap();
        let y = filter_stream(&s, &spec).unwrap();
        // Peak alignment in the interior, within one sample.
        let peak = |v: &[f64]| crate::math::argmax(&v[1000..1050]);
        assert!((peak(&x) as i64 - peak(y.channel(0)) as i64).abs() <= 1);
    }

    #[test]
    fn none_is_identity_and_filters_are_linear() {
        let x: Vec<f64> = (0..400).map(|i| libm::sin(i as f64 * 0.37) + 0.01 * i as f64).collect();
        let s = SensorStream::mono(Modality::Eda, 0.0, x.clone()).unwrap();
        assert_eq!(filter_stream(&s, &FilterSpec::none()).unwrap(), s);
        let scaled = SensorStream::mono(Modality::Eda, 0.0, x.iter().map(|v| 3.5 * v).collect()).unwrap();
        for spec in [FilterSpec::lowpass(4, 1.0), FilterSpec::moving_average(4)] {
            let a = filter_stream(&s, &spec).unwrap();
            let b = filter_stream(&scaled, &spec).unwrap();
            for (u, v) in a.channel(0).iter().zip(b.channel(0)) {
                assert!((3.5 * u - v).abs() <= 1e-9 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn cutoff_at_nyquist_is_rejected() {
        let s = SensorStream::mono(Modality::Eda, 0.0, vec![0.0; 10]).unwrap();
        assert!(matches!(
            filter_stream(&s, &FilterSpec::lowpass(4, 2.0)),
            Err(Error::Config(_))
        ));
        assert!(FilterSpec::bandpass(0, 1.0, 2.0).validate(64.0).is_err());
    }

    #[test]
    fn filter_spec_text_form() {
        let spec: FilterSpec = "butterworth-bandpass:3:0.7,3.7".parse().unwrap();
        assert_eq!(spec, FilterSpec::bandpass(3, 0.7, 3.7));
        assert_eq!(spec.to_string().parse::<FilterSpec>().unwrap(), spec);
        assert_eq!("none".parse::<FilterSpec>().unwrap(), FilterSpec::none());
    }

    fn flat_subject(secs: f64, labels: Vec<(f64, i8)>) -> SubjectRecord {
        let streams = Modality::ALL.map(|m| {
            let n = m.samples_in(secs);
            let channels = (0..m.channels()).map(|_| (0..n).map(|i| i as f64).collect()).collect();
            SensorStream::new(m, m.sample_rate(), 0.0, channels).unwrap()
        });
        SubjectRecord::new("S9", streams, LabelTimeline::new(labels).unwrap()).unwrap()
    }

    #[test]
    fn segment_counts() {
        assert_eq!(segment(&flat_subject(120.0, vec![(0.0, 0)]), 60.0, 5.0).unwrap().len(), 13);
        assert_eq!(segment(&flat_subject(60.0, vec![(0.0, 1)]), 60.0, 5.0).unwrap().len(), 1);
        assert!(segment(&flat_subject(59.0, vec![(0.0, 1)]), 60.0, 5.0).unwrap().is_empty());
    }

    #[test]
    fn segment_drops_straddling_and_ignored_windows() {
        let s = flat_subject(300.0, vec![(0.0, 0), (100.0, -1), (130.0, 1), (200.0, 2)]);
        let w = segment(&s, 60.0, 5.0).unwrap();
        // 100 s -> 9, 70 s -> 3, 100 s -> 9
        assert_eq!(w.len(), 21);
        assert!(w[..9].iter().all(|w| w.label().id() == 0));
        assert!(w[9..12].iter().all(|w| w.label().id() == 1));
        assert_eq!(w[9].start_time(), 130.0);
        assert!(w.windows(2).all(|p| p[0].window_index() + 1 == p[1].window_index()));
        // Sample offsets follow start time.
        assert_eq!(w[9].slice(Modality::Eda)[0][0], 520.0);
    }

    #[test]
    fn slide_equal_to_window_tiles() {
        let s = flat_subject(300.0, vec![(0.0, 0)]);
        let w = segment(&s, 60.0, 60.0).unwrap();
        assert_eq!(w.len(), 5);
        let starts: Vec<f64> = w.iter().map(|w| w.start_time()).collect();
        assert_eq!(starts, vec![0.0, 60.0, 120.0, 180.0, 240.0]);
    }
}
