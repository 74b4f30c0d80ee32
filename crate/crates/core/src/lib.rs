//! Radar-cross-section characterization for indoor-factory sensing targets.
//!
//! The processing chain turns channel-sounder CIR sweeps into per-carrier
//! log-normal RCS fits and consolidates them into the three-component
//! `RCS = A × B1 × B2` model. [`sampler`] draws realizations from such a
//! model and [`synth`] simulates measurement campaigns with known ground
//! truth for end-to-end validation.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod derive;
pub mod error;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod power;
pub mod reference_data;
pub mod report;
pub mod sampler;
pub mod statfit;
pub mod synth;

pub use error::{Error, Result, Violation};
pub use model::{
    B1Spec, CirRecord, Frequency, Geometry, LognormalFit, PowerValue, RcsSampleSet, RcsTriple,
    SweepKind, SystemFactor,
};
