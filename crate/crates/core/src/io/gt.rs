//! OTB-style ground truth: one `x y w h` box per line, separated by commas,
//! spaces or tabs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::BBox;

pub fn parse_ground_truth(text: &str, origin: &Path) -> Result<Vec<BBox>> {
    let mut boxes = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            msg,
        };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err(perr(format!("expected 4 numbers, found {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| perr(format!("'{f}' is not a finite number")))?;
        }
        boxes.push(BBox::new(v[0], v[1], v[2], v[3]));
    }
    if boxes.is_empty() {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 1,
            msg: "no boxes".into(),
        });
    }
    Ok(boxes)
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<BBox>> {
    parse_ground_truth(&std::fs::read_to_string(path)?, path)
}

/// Comma-separated, one box per line, shortest round-trip number formatting.
pub fn format_ground_truth(boxes: &[BBox]) -> String {
    let mut s = String::new();
    for b in boxes {
        let _ = writeln!(s, "{},{},{},{}", b.x, b.y, b.w, b.h);
    }
    s
}

/// Plain per-axis multiplication of positions and sizes.
pub fn scale_boxes(boxes: &[BBox], sx: f64, sy: f64) -> Vec<BBox> {
    boxes.iter().map(|b| b.scaled(sx, sy)).collect()
}
