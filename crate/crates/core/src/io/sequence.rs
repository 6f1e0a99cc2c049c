//! Frame directories and their ground truth.

use std::path::{Path, PathBuf};

use crate::error::{arg, Error, Result};
use crate::eval::BBox;
use crate::features::Frame;

use super::gt::{read_ground_truth, scale_boxes};

const RASTER_EXTENSIONS: [&str; 7] = ["png", "jpg", "jpeg", "bmp", "pgm", "ppm", "pnm"];

/// Where a sequence lives on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSource {
    /// Directory of frames, or an OTB sequence directory containing `img/`.
    pub frames: PathBuf,
    /// Defaults to `groundtruth_rect.txt` next to `img/`.
    pub ground_truth: Option<PathBuf>,
    /// Defaults to the sequence directory's name.
    pub name: Option<String>,
}

impl SequenceSource {
    pub fn new(frames: impl Into<PathBuf>) -> Self {
        Self {
            frames: frames.into(),
            ground_truth: None,
            name: None,
        }
    }

    fn frame_dir(&self) -> PathBuf {
        let img = self.frames.join("img");
        if img.is_dir() {
            img
        } else {
            self.frames.clone()
        }
    }

    fn gt_path(&self) -> PathBuf {
        self.ground_truth
            .clone()
            .unwrap_or_else(|| self.frames.join("groundtruth_rect.txt"))
    }

    fn resolved_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.frames
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sequence".into())
        })
    }
}

/// Raster files in `dir`, sorted lexicographically by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| RASTER_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return arg(format!("no frames found in {}", dir.display()));
    }
    Ok(files)
}

/// A sequence whose frames are decoded on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub name: String,
    pub frame_paths: Vec<PathBuf>,
    /// Ground truth at working resolution.
    pub ground_truth: Vec<BBox>,
    /// Size of the source frames.
    pub source_size: (u32, u32),
    /// Resize target; `None` keeps the source size.
    pub working: Option<(u32, u32)>,
    /// Working over source size per axis.
    pub scale: (f64, f64),
    /// Non-fatal problems found while loading, e.g. a count mismatch.
    pub warnings: Vec<String>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.frame_paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame_paths.is_empty()
    }

    pub fn load_frame(&self, index: usize) -> Result<Frame> {
        let path = self.frame_paths.get(index).ok_or_else(|| Error::Frame {
            index,
            msg: "index out of range".into(),
        })?;
        decode_frame(path, self.working).map_err(|e| Error::Frame {
            index,
            msg: format!("{}: {e}", path.display()),
        })
    }

    pub fn frames(&self) -> impl Iterator<Item = Result<Frame>> + '_ {
        (0..self.len()).map(|i| self.load_frame(i))
    }
}

pub fn decode_frame(path: &Path, working: Option<(u32, u32)>) -> Result<Frame> {
    let img = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
    Frame::from_image(&img, working)
}

/// Lists frames, reads ground truth and rescales it to the working
/// resolution. Frame/box count mismatches truncate both to the shorter list
/// and add a warning.
pub fn load_sequence(src: &SequenceSource, working: Option<(u32, u32)>) -> Result<Sequence> {
    let mut frame_paths = list_frames(&src.frame_dir())?;
    let mut gt = read_ground_truth(&src.gt_path())?;
    let (sw, sh) = image::image_dimensions(&frame_paths[0]).map_err(|e| Error::Frame {
        index: 0,
        msg: format!("{}: {e}", frame_paths[0].display()),
    })?;
    let scale = match working {
        Some((w, h)) => (w as f64 / sw as f64, h as f64 / sh as f64),
        None => (1.0, 1.0),
    };
    let mut warnings = Vec::new();
    if frame_paths.len() != gt.len() {
        let n = frame_paths.len().min(gt.len());
        warnings.push(format!(
            "{} frames but {} ground-truth boxes; using the first {n}",
            frame_paths.len(),
            gt.len()
        ));
        frame_paths.truncate(n);
        gt.truncate(n);
    }
    Ok(Sequence {
        name: src.resolved_name(),
        frame_paths,
        ground_truth: scale_boxes(&gt, scale.0, scale.1),
        source_size: (sw, sh),
        working,
        scale,
        warnings,
    })
}
