//! Run manifests: everything needed to reproduce and score one tracking run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::eval::{average_overlap, default_thresholds, success_curve, BBox};
use crate::tracker::TrackRecord;

use super::config::RunConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub average_overlap: f64,
    pub auc: f64,
}

impl Metrics {
    pub fn compute(boxes: &[BBox], gt: &[BBox]) -> Result<Self> {
        let curve = success_curve(boxes, gt, &default_thresholds())?;
        Ok(Self {
            average_overlap: average_overlap(boxes, gt)?,
            auc: curve.auc,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub sequence: String,
    pub seed: u64,
    pub config: RunConfig,
    pub source_size: (u32, u32),
    /// Working over source size per axis; boxes below are at working size.
    pub scale: (f64, f64),
    pub boxes: Vec<BBox>,
    pub best_likelihood: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub ground_truth: Option<Vec<BBox>>,
    pub metrics: Option<Metrics>,
    /// Seconds per frame. The only field that differs between reruns.
    pub wall_time: Vec<f64>,
}

impl RunManifest {
    pub fn new(
        sequence: String,
        seed: u64,
        config: RunConfig,
        source_size: (u32, u32),
        scale: (f64, f64),
        record: TrackRecord,
        ground_truth: Option<Vec<BBox>>,
    ) -> Result<Self> {
        let metrics = match &ground_truth {
            Some(gt) => {
                if gt.len() != record.len() {
                    return arg(format!(
                        "{} tracked boxes but {} ground-truth boxes",
                        record.len(),
                        gt.len()
                    ));
                }
                Some(Metrics::compute(&record.boxes, gt)?)
            }
            None => None,
        };
        Ok(Self {
            tool_version: TOOL_VERSION.to_string(),
            sequence,
            seed,
            config,
            source_size,
            scale,
            boxes: record.boxes,
            best_likelihood: record.best_likelihood,
            degenerate: record.degenerate,
            ground_truth,
            metrics,
            wall_time: record.wall_time,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
