//! Synthetic benchmark sequence: a textured square moving at constant
//! velocity over a textured background, with pixel noise and one partial
//! occlusion window. Ground truth is exact.

use std::path::Path;

use image::RgbImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::eval::BBox;
use crate::features::PIXEL_ORIGIN;

use super::gt::format_ground_truth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    /// Side of the square target in pixels.
    pub target: u32,
    /// Top-left pixel of the target in frame 0 (0-based).
    pub start: (i64, i64),
    /// Pixels per frame; the target reflects off the frame borders.
    pub velocity: (i64, i64),
    /// First occluded frame (0-based); `None` disables occlusion.
    pub occlude_at: Option<usize>,
    pub occlude_len: usize,
    /// Fraction of the target width hidden by the occluder.
    pub occlude_fraction: f64,
    /// Standard deviation of additive noise, in units of full intensity.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 100,
            width: 320,
            height: 240,
            target: 40,
            start: (60, 80),
            velocity: (2, 1),
            occlude_at: Some(50),
            occlude_len: 10,
            occlude_fraction: 0.4,
            noise: 0.05,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return arg("synth needs at least one frame");
        }
        if self.target == 0 || self.target >= self.width || self.target >= self.height {
            return arg("target must be smaller than the frame");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return arg("noise must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.occlude_fraction) {
            return arg("occlude_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    fn occluded(&self, t: usize) -> bool {
        self.occlude_at
            .is_some_and(|s| t >= s && t < s + self.occlude_len)
    }
}

/// Position in `[0, span]` after bouncing between the ends.
fn reflect(p: i64, span: i64) -> i64 {
    if span == 0 {
        return 0;
    }
    let period = 2 * span;
    let m = p.rem_euclid(period);
    if m <= span {
        m
    } else {
        period - m
    }
}

fn background(x: u32, y: u32) -> [f64; 3] {
    let (fx, fy) = (x as f64, y as f64);
    let a = (fx * 0.11).sin() * (fy * 0.07).cos();
    let b = ((fx + 2.0 * fy) * 0.045).sin();
    [0.35 + 0.08 * a, 0.45 + 0.08 * b, 0.40 + 0.06 * (a - b)]
}

fn target_texture(u: u32, v: u32, side: u32) -> [f64; 3] {
    let cell = (side / 4).max(1);
    let checker = ((u / cell) + (v / cell)) % 2 == 0;
    let stripe = ((u + v) / 3) % 2 == 0;
    match (checker, stripe) {
        (true, true) => [0.95, 0.25, 0.10],
        (true, false) => [0.85, 0.15, 0.05],
        (false, true) => [0.98, 0.90, 0.20],
        (false, false) => [0.85, 0.75, 0.10],
    }
}

const OCCLUDER: [f64; 3] = [0.20, 0.25, 0.55];

/// Renders every frame; boxes use the 1-based pixel origin.
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<RgbImage>, Vec<BBox>)> {
    cfg.validate()?;
    let side = cfg.target;
    let span_x = (cfg.width - side) as i64;
    let span_y = (cfg.height - side) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = (cfg.noise > 0.0).then(|| Normal::new(0.0, cfg.noise).expect("positive std"));

    let mut frames = Vec::with_capacity(cfg.frames);
    let mut boxes = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        let ti = t as i64;
        let x0 = reflect(cfg.start.0 + cfg.velocity.0 * ti, span_x) as u32;
        let y0 = reflect(cfg.start.1 + cfg.velocity.1 * ti, span_y) as u32;
        let occ_w = if cfg.occluded(t) {
            (cfg.occlude_fraction * side as f64).round() as u32
        } else {
            0
        };
        let mut img = RgbImage::new(cfg.width, cfg.height);
        for (x, y, px) in img.enumerate_pixels_mut() {
            let inside = x >= x0 && x < x0 + side && y >= y0 && y < y0 + side;
            let base = if inside && x < x0 + occ_w {
                OCCLUDER
            } else if inside {
                target_texture(x - x0, y - y0, side)
            } else {
                background(x, y)
            };
            for (c, v) in px.0.iter_mut().zip(base) {
                let n = noise.map_or(0.0, |d| d.sample(&mut rng));
                *c = ((v + n).clamp(0.0, 1.0) * 255.0).round() as u8;
            }
        }
        frames.push(img);
        boxes.push(BBox::new(
            x0 as f64 + PIXEL_ORIGIN,
            y0 as f64 + PIXEL_ORIGIN,
            side as f64,
            side as f64,
        ));
    }
    Ok((frames, boxes))
}

/// Writes `img/0001.png ...` and `groundtruth_rect.txt` under `dir`.
pub fn write_synth(cfg: &SynthConfig, dir: &Path) -> Result<Vec<BBox>> {
    let (frames, boxes) = generate(cfg)?;
    let img_dir = dir.join("img");
    std::fs::create_dir_all(&img_dir)?;
    let digits = cfg.frames.to_string().len().max(4);
    for (i, f) in frames.iter().enumerate() {
        f.save(img_dir.join(format!("{:0digits$}.png", i + 1)))?;
    }
    std::fs::write(dir.join("groundtruth_rect.txt"), format_ground_truth(&boxes))?;
    Ok(boxes)
}
