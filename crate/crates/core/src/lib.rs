//! Context-gated multi-modal sensor fusion for stress classification from
//! wrist-worn physiological signals.
//!
//! The pipeline runs in a fixed order per window: accelerometer features feed
//! a decision-tree gate, the gate picks a subset of early-fusion branch
//! classifiers under a performance/energy trade-off `delta`, and the selected
//! branch predictions are combined by hard voting, soft voting or a per-class
//! Kalman filter that carries state across consecutive windows of a subject.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, configuration
//! parsing and the command-line front end live in the `wristfuse` crate.

#![no_std]

extern crate alloc;

pub mod classifiers;
pub mod datamodel;
pub mod energy;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod gating;
pub mod preprocess;
pub mod synthetic;

mod math;

pub use datamodel::{
    to_binary_label, ClassLabel, FeatureVector, LabelTimeline, Modality, ModalitySet, Problem,
    SensorStream, SensorWindow, SubjectRecord, IGNORE_LABEL,
};
pub use error::{Error, Result};
