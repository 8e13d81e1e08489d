//! Shared domain types: class labels, modalities, sensor streams, windows
//! and feature vectors.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Label id used in a label timeline for protocol phases outside the three
/// study conditions. Segmentation never emits windows from these spans.
pub const IGNORE_LABEL: i8 = -1;

/// Window length used throughout the pipeline, in seconds.
pub const WINDOW_SECONDS: f64 = 60.0;

/// Slide between consecutive window starts, in seconds.
pub const SLIDE_SECONDS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Problem {
    /// baseline / stress / amusement
    ThreeClass,
    /// non-stress / stress
    TwoClass,
}

impl Problem {
    pub const fn class_count(self) -> usize {
        match self {
            Problem::ThreeClass => 3,
            Problem::TwoClass => 2,
        }
    }

    pub const fn class_names(self) -> &'static [&'static str] {
        match self {
            Problem::ThreeClass => &["baseline", "stress", "amusement"],
            Problem::TwoClass => &["non-stress", "stress"],
        }
    }

    pub fn label(self, id: usize) -> Result<ClassLabel> {
        ClassLabel::new(self, id)
    }

    /// Map a 3-class ground-truth label onto this problem's label space.
    pub fn project(self, l3: ClassLabel) -> Result<ClassLabel> {
        match self {
            Problem::ThreeClass => {
                if l3.problem() != Problem::ThreeClass {
                    return Err(Error::InvalidLabel(l3.id() as i64));
                }
                Ok(l3)
            }
            Problem::TwoClass => to_binary_label(l3),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::ThreeClass => "3class",
            Problem::TwoClass => "2class",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3class" | "3" => Ok(Problem::ThreeClass),
            "2class" | "2" => Ok(Problem::TwoClass),
            other => Err(Error::config(format!("unknown problem '{other}'"))),
        }
    }
}

/// A class index within a problem's label space.
///
/// 3-class order is 0=baseline, 1=stress, 2=amusement; 2-class order is
/// 0=non-stress, 1=stress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassLabel {
    problem: Problem,
    id: u8,
}

impl ClassLabel {
    pub fn new(problem: Problem, id: usize) -> Result<Self> {
        if id >= problem.class_count() {
            return Err(Error::InvalidLabel(id as i64));
        }
        Ok(ClassLabel {
            problem,
            id: id as u8,
        })
    }

    pub fn three_class(id: usize) -> Result<Self> {
        Self::new(Problem::ThreeClass, id)
    }

    pub fn id(self) -> usize {
        self.id as usize
    }

    pub fn problem(self) -> Problem {
        self.problem
    }

    pub fn name(self) -> &'static str {
        self.problem.class_names()[self.id as usize]
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.id)
    }
}

/// Collapse a 3-class label to the stress / non-stress problem.
pub fn to_binary_label(l3: ClassLabel) -> Result<ClassLabel> {
    if l3.problem != Problem::ThreeClass {
        return Err(Error::InvalidLabel(l3.id as i64));
    }
    let id = match l3.id {
        0 | 2 => 0,
        1 => 1,
        other => return Err(Error::InvalidLabel(other as i64)),
    };
    ClassLabel::new(Problem::TwoClass, id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Modality {
    Acc,
    Bvp,
    Eda,
    Temp,
}

impl Modality {
    /// Canonical order, also the concatenation order for early fusion.
    pub const ALL: [Modality; 4] = [Modality::Acc, Modality::Bvp, Modality::Eda, Modality::Temp];

    /// Empatica E4 sampling rates in Hz.
    pub const fn sample_rate(self) -> f64 {
        match self {
            Modality::Acc => 32.0,
            Modality::Bvp => 64.0,
            Modality::Eda => 4.0,
            Modality::Temp => 4.0,
        }
    }

    pub const fn channels(self) -> usize {
        match self {
            Modality::Acc => 3,
            _ => 1,
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            Modality::Acc => "ACC",
            Modality::Bvp => "BVP",
            Modality::Eda => "EDA",
            Modality::Temp => "TEMP",
        }
    }

    /// Samples in a window of `seconds` at this modality's rate.
    pub fn samples_in(self, seconds: f64) -> usize {
        libm::round(seconds * self.sample_rate()) as usize
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ACC" => Ok(Modality::Acc),
            "BVP" => Ok(Modality::Bvp),
            "EDA" => Ok(Modality::Eda),
            "TEMP" => Ok(Modality::Temp),
            _ => Err(Error::config(format!("unknown modality '{s}'"))),
        }
    }
}

/// A subset of the four wrist modalities. Iteration follows [`Modality::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModalitySet(u8);

impl ModalitySet {
    pub const EMPTY: ModalitySet = ModalitySet(0);

    pub const fn of(modalities: &[Modality]) -> Self {
        let mut bits = 0u8;
        let mut i = 0;
        while i < modalities.len() {
            bits |= 1 << modalities[i] as u8;
            i += 1;
        }
        ModalitySet(bits)
    }

    pub const fn contains(self, m: Modality) -> bool {
        self.0 & (1 << m as u8) != 0
    }

    pub fn insert(&mut self, m: Modality) {
        self.0 |= 1 << m as u8;
    }

    pub const fn union(self, other: ModalitySet) -> ModalitySet {
        ModalitySet(self.0 | other.0)
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Modality> {
        Modality::ALL.into_iter().filter(move |m| self.contains(*m))
    }
}

impl fmt::Display for ModalitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(m.name())?;
        }
        f.write_str("}")
    }
}

/// One uniformly sampled modality recording. Samples are stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorStream {
    modality: Modality,
    sample_rate: f64,
    start_time: f64,
    channels: Vec<Vec<f64>>,
}

impl SensorStream {
    pub fn new(
        modality: Modality,
        sample_rate: f64,
        start_time: f64,
        channels: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidStream { modality, reason };
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(invalid(format!("sample rate {sample_rate} must be positive")));
        }
        if channels.len() != modality.channels() {
            return Err(invalid(format!(
                "expected {} channel(s), got {}",
                modality.channels(),
                channels.len()
            )));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(invalid("channels have unequal lengths".into()));
        }
        if !start_time.is_finite() {
            return Err(invalid("start time is not finite".into()));
        }
        Ok(SensorStream {
            modality,
            sample_rate,
            start_time,
            channels,
        })
    }

    /// Single-channel stream at the modality's standard rate.
    pub fn mono(modality: Modality, start_time: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(modality, modality.sample_rate(), start_time, alloc::vec![samples])
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sample_rate
    }

    /// Same timing, new sample data.
    pub fn with_channels(&self, channels: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.modality, self.sample_rate, self.start_time, channels)
    }
}

/// A contiguous span carrying one label id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRegion {
    pub start: f64,
    pub end: f64,
    pub label: i8,
}

impl LabelRegion {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Run-length encoded ground truth: `(time, label)` change points.
///
/// Label ids are the 3-class ids `0..=2` or [`IGNORE_LABEL`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelTimeline {
    points: Vec<(f64, i8)>,
}

impl LabelTimeline {
    /// Builds a timeline from change points in strictly increasing time.
    /// Repeated labels are merged.
    pub fn new(points: Vec<(f64, i8)>) -> Result<Self> {
        let mut merged: Vec<(f64, i8)> = Vec::with_capacity(points.len());
        for (t, label) in points {
            if !t.is_finite() {
                return Err(Error::validation("label time is not finite"));
            }
            if label != IGNORE_LABEL && !(0..=2).contains(&label) {
                return Err(Error::InvalidLabel(label as i64));
            }
            if let Some(&(prev_t, prev_label)) = merged.last() {
                if t <= prev_t {
                    return Err(Error::validation(format!(
                        "label change points not strictly increasing at t={t}"
                    )));
                }
                if prev_label == label {
                    continue;
                }
            }
            merged.push((t, label));
        }
        Ok(LabelTimeline { points: merged })
    }

    pub fn points(&self) -> &[(f64, i8)] {
        &self.points
    }

    pub fn start_time(&self) -> Option<f64> {
        self.points.first().map(|p| p.0)
    }

    pub fn label_at(&self, t: f64) -> Option<i8> {
        let idx = self.points.partition_point(|p| p.0 <= t);
        if idx == 0 {
            None
        } else {
            Some(self.points[idx - 1].1)
        }
    }

    /// Contiguous regions, with the final region ending at `end_time`.
    pub fn regions(&self, end_time: f64) -> Vec<LabelRegion> {
        let mut out = Vec::with_capacity(self.points.len());
        for (i, &(start, label)) in self.points.iter().enumerate() {
            let end = self.points.get(i + 1).map_or(end_time, |p| p.0).min(end_time);
            if end > start {
                out.push(LabelRegion { start, end, label });
            }
        }
        out
    }
}

/// All four wrist streams of one subject plus the label timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    subject_id: String,
    streams: [SensorStream; 4],
    labels: LabelTimeline,
}

impl SubjectRecord {
    /// `streams` must be given in [`Modality::ALL`] order.
    pub fn new(
        subject_id: impl Into<String>,
        streams: [SensorStream; 4],
        labels: LabelTimeline,
    ) -> Result<Self> {
        for (stream, m) in streams.iter().zip(Modality::ALL) {
            if stream.modality() != m {
                return Err(Error::validation(format!(
                    "stream slot {} holds {}",
                    m,
                    stream.modality()
                )));
            }
        }
        let start = streams
            .iter()
            .map(|s| s.start_time())
            .fold(f64::INFINITY, f64::min);
        match labels.start_time() {
            None => return Err(Error::validation("label timeline is empty")),
            // Half a sample of the slowest stream.
            Some(t0) if t0 > start + 0.125 => {
                return Err(Error::validation(format!(
                    "label timeline starts at {t0}, after stream start {start}"
                )))
            }
            _ => {}
        }
        Ok(SubjectRecord {
            subject_id: subject_id.into(),
            streams,
            labels,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn stream(&self, m: Modality) -> &SensorStream {
        &self.streams[m.index()]
    }

    pub fn streams(&self) -> &[SensorStream; 4] {
        &self.streams
    }

    pub fn labels(&self) -> &LabelTimeline {
        &self.labels
    }

    /// End of the span covered by every stream.
    pub fn end_time(&self) -> f64 {
        self.streams
            .iter()
            .map(|s| s.end_time())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn start_time(&self) -> f64 {
        self.streams
            .iter()
            .map(|s| s.start_time())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn duration(&self) -> f64 {
        (self.end_time() - self.start_time()).max(0.0)
    }

    /// Same subject with replaced stream data (e.g. after filtering).
    pub fn with_streams(&self, streams: [SensorStream; 4]) -> Result<Self> {
        Self::new(self.subject_id.clone(), streams, self.labels.clone())
    }
}

/// One fixed-length multi-modality segment with its ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorWindow {
    subject_id: String,
    window_index: usize,
    start_time: f64,
    window_seconds: f64,
    slices: [Vec<Vec<f64>>; 4],
    label: ClassLabel,
}

impl SensorWindow {
    /// `slices` are channel-major sample slices in [`Modality::ALL`] order,
    /// each exactly `round(window_seconds * rate)` samples long.
    pub fn new(
        subject_id: impl Into<String>,
        window_index: usize,
        start_time: f64,
        window_seconds: f64,
        slices: [Vec<Vec<f64>>; 4],
        label: ClassLabel,
    ) -> Result<Self> {
        if label.problem() != Problem::ThreeClass {
            return Err(Error::InvalidWindow(
                "window labels use the 3-class space".into(),
            ));
        }
        for (m, slice) in Modality::ALL.into_iter().zip(&slices) {
            let expected = m.samples_in(window_seconds);
            if slice.len() != m.channels() {
                return Err(Error::InvalidWindow(format!(
                    "{m} slice has {} channel(s), expected {}",
                    slice.len(),
                    m.channels()
                )));
            }
            if let Some(bad) = slice.iter().find(|c| c.len() != expected) {
                return Err(Error::InvalidWindow(format!(
                    "{m} slice has {} samples, expected {expected}",
                    bad.len()
                )));
            }
        }
        Ok(SensorWindow {
            subject_id: subject_id.into(),
            window_index,
            start_time,
            window_seconds,
            slices,
            label,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn window_index(&self) -> usize {
        self.window_index
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn window_seconds(&self) -> f64 {
        self.window_seconds
    }

    pub fn slice(&self, m: Modality) -> &[Vec<f64>] {
        &self.slices[m.index()]
    }

    /// The 3-class ground truth.
    pub fn label(&self) -> ClassLabel {
        self.label
    }
}

/// Named, ordered real-valued features for a subset of modalities.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    names: Vec<&'static str>,
    values: Vec<f64>,
    modalities: ModalitySet,
}

impl FeatureVector {
    pub fn new(
        names: Vec<&'static str>,
        values: Vec<f64>,
        modalities: ModalitySet,
    ) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "feature '{}' is not finite",
                names[i]
            )));
        }
        Ok(FeatureVector {
            names,
            values,
            modalities,
        })
    }

    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn modalities(&self) -> ModalitySet {
        self.modalities
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Early fusion: concatenate in the given order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a FeatureVector>) -> FeatureVector {
        let mut out = FeatureVector {
            names: Vec::new(),
            values: Vec::new(),
            modalities: ModalitySet::EMPTY,
        };
        for p in parts {
            out.names.extend_from_slice(&p.names);
            out.values.extend_from_slice(&p.values);
            out.modalities = out.modalities.union(p.modalities);
        }
        out
    }
}
