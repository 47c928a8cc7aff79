//! A real-time visual tracker built as one differentiable convolutional
//! pipeline: the feature extractor and the tracking filters are plain
//! convolutions trained jointly by SGD on a ridge loss. Online updates are
//! gated by the peak-versus-noise ratio of the response map, and target
//! size is tracked by a learned 1-D filter over a scale pyramid.
//!
//! The crate also ships the surrounding tooling: deterministic synthetic
//! sequences, OTB-style one-pass evaluation (precision / success / AUC),
//! dataset and results IO, throughput benchmarking, and SVG plots.

pub mod bench;
pub mod cli;
pub mod config;
pub mod conv;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod optim;
pub mod plot;
pub mod pretrain;
pub mod scale;
pub mod synth;
pub mod tensor;
pub mod tracker;
pub mod window;

mod error;

pub use config::{FeatureKind, ScaleConfig, TrackerConfig};
pub use error::{Error, Result};
pub use eval::{auc, center_error, iou, ope_run, ope_run_with_extractor, Curve, OpeSummary, Sequence, TrackResult};
pub use features::{crop_resize, extract, Extractor, Frame, Rect};
pub use synth::{synth_sequence, SynthSpec};
pub use tensor::{FilterStack, Map2, Tensor3};
pub use tracker::{locate_peak, pnr, ResponseMap, TrackHead, TrackerState};
