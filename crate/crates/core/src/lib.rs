//! Structured multi-task multi-view sparse tracking.
//!
//! The crate is split along the tracker's data flow:
//!
//! - [`linalg`]: dense matrices, thin SVD, proximal operators.
//! - [`solver`]: the joint sparse-coding problem and its proximal-gradient solver.
//! - [`features`]: per-view descriptors (intensity, color histogram, HOG, LBP).
//! - [`motion`]: particle propagation, likelihoods, selection, resampling.
//! - [`templates`]: per-view template dictionaries and their online update.
//! - [`tracker`]: the per-frame pipeline.
//! - [`eval`]: overlap, success curves, AUC and plot output.
//! - [`io`]: sequences, ground truth, config files, run manifests, synthetic data.

pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod linalg;
pub mod motion;
pub mod solver;
pub mod templates;
pub mod tracker;

pub use error::{Error, Result};
pub use eval::{BBox, SuccessCurve};
pub use features::{FeatureConfig, Frame, ViewKind};
pub use linalg::Mat;
pub use solver::{Problem, SolverConfig, SparseSolution, StepSize, View};
pub use templates::{TemplateSet, UpdateConfig};
pub use tracker::{track_sequence, TrackRecord, Tracker, TrackerConfig};
pub use motion::{MotionConfig, ParticleState};
