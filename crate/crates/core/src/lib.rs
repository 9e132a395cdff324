//! Learning-style detection from LMS interaction counts.
//!
//! This crate is the algorithmic half of `stylemill`. It knows nothing about
//! files, log formats or the command line; it works on count vectors,
//! questionnaire answers and labels:
//!
//! * [`style`] scores Index of Learning Styles answers into per-dimension poles.
//! * [`features`] turns canonical log events into per-student count profiles.
//! * [`dataset`] holds the feature matrix with its partial per-dimension labels.
//! * [`sampling`] under-samples, splits labeled/unlabeled pools and builds folds.
//! * [`learners`] has the five classifiers (SMO-trained SVM, Gaussian naive
//!   Bayes, gain-ratio tree, random forest, one-hidden-layer MLP).
//! * [`semisup`] runs one-pass self-training and the tri-training comparator.
//! * [`eval`] computes confusion metrics, AUC, cross-validation, ratio sweeps,
//!   method comparisons and paired t-tests.
//! * [`synth`] generates count datasets with known ground truth.
//!
//! The crate is `no_std` with `alloc` when built without the default `std`
//! feature. All floating-point transcendental functions go through `libm` so
//! results do not depend on the platform's math library.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(rust_2018_idioms)]

extern crate alloc;

mod error;

pub mod dataset;
pub mod eval;
pub mod features;
pub mod learners;
pub mod rng;
pub mod sampling;
pub mod semisup;
pub mod style;
pub mod synth;

pub use dataset::{LearningDataset, ProfileRow, WithheldLabels};
pub use error::{Error, ErrorKind, Result};
pub use learners::{ModelKind, TrainConfig, TrainedModel};
pub use rng::Rng;
pub use style::{Dimension, DimensionLabel, Pole, Strength};
