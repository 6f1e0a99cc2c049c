//! Sequences, ground truth, configuration files, run manifests and the
//! synthetic sequence generator.

pub mod config;
pub mod gt;
pub mod manifest;
pub mod sequence;
pub mod synth;

pub use config::{format_config, parse_config, read_config, RunConfig, CONFIG_KEYS, DEFAULT_WORKING};
pub use gt::{format_ground_truth, parse_ground_truth, read_ground_truth, scale_boxes};
pub use manifest::{Metrics, RunManifest, TOOL_VERSION};
pub use sequence::{decode_frame, list_frames, load_sequence, Sequence, SequenceSource};
pub use synth::{generate, write_synth, SynthConfig};
