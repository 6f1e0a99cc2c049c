//! Per-view feature extraction: intensity template, joint RGB histogram, HOG
//! and uniform LBP.
//!
//! Gray views go through [`illum_normalize`] first; the color histogram is
//! taken on the raw crop. Every descriptor is L2-normalized. A descriptor
//! that is identically zero stays zero and is flagged instead.

mod hog;
mod illum;
mod lbp;

pub use hog::{extract_hog, HOG_BINS, HOG_CELL, HOG_DIM};
pub use illum::{gaussian_blur, illum_normalize, IllumConfig};
pub use lbp::{extract_lbp, lbp_code, uniform_bin_table, LBP_BINS, LBP_NEIGHBORS};

use image::{imageops::FilterType, DynamicImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::eval::BBox;

/// Side of the square patch HOG and LBP are computed on.
pub const CANONICAL_SIDE: usize = 32;
pub const COLOR_BINS_PER_CHANNEL: usize = 8;
pub const COLOR_DIM: usize = 512;

/// Boxes follow the benchmark convention of a 1-based pixel origin: the
/// pixel in column 0 spans `x` in `[1, 2)`.
pub const PIXEL_ORIGIN: f64 = 1.0;

/// Single-channel real image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return arg(format!("bad plane {width}x{height} with {} values", data.len()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Bilinear resampling with pixel-center alignment and clamped borders.
pub fn resample_bilinear(p: &Plane, width: usize, height: usize) -> Plane {
    if p.width == width && p.height == height {
        return p.clone();
    }
    let sx = p.width as f64 / width as f64;
    let sy = p.height as f64 / height as f64;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (p.height - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(p.height - 1);
        let ty = fy - y0 as f64;
        for x in 0..width {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (p.width - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(p.width - 1);
            let tx = fx - x0 as f64;
            let top = p.at(x0, y0) * (1.0 - tx) + p.at(x1, y0) * tx;
            let bot = p.at(x0, y1) * (1.0 - tx) + p.at(x1, y1) * tx;
            data.push(top * (1.0 - ty) + bot * ty);
        }
    }
    Plane {
        width,
        height,
        data,
    }
}

/// 8-bit RGB pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorPatch {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[u8; 3]>,
}

/// A video frame with its derived gray plane (values in `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[u8; 3]>,
    pub gray: Plane,
}

fn luma(px: [u8; 3]) -> f64 {
    (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64) / 255.0
}

impl Frame {
    pub fn from_rgb(width: usize, height: usize, rgb: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || rgb.len() != width * height {
            return arg(format!("bad frame {width}x{height} with {} pixels", rgb.len()));
        }
        let gray = Plane {
            width,
            height,
            data: rgb.iter().map(|&p| luma(p)).collect(),
        };
        Ok(Self {
            width,
            height,
            rgb,
            gray,
        })
    }

    /// Converts a decoded image, resizing it (bilinear) to `working` if given.
    pub fn from_image(img: &DynamicImage, working: Option<(u32, u32)>) -> Result<Self> {
        let mut rgb = img.to_rgb8();
        if let Some((w, h)) = working {
            if rgb.dimensions() != (w, h) {
                rgb = image::imageops::resize(&rgb, w, h, FilterType::Triangle);
            }
        }
        let (w, h) = rgb.dimensions();
        Self::from_rgb(
            w as usize,
            h as usize,
            rgb.pixels().map(|p| p.0).collect(),
        )
    }

    pub fn to_image(&self) -> RgbImage {
        let mut img = RgbImage::new(self.width as u32, self.height as u32);
        for (dst, src) in img.pixels_mut().zip(&self.rgb) {
            dst.0 = *src;
        }
        img
    }
}

/// Pixel rectangle `[x0, x1) x [y0, y1)` covered by `b`, clipped to the frame.
pub fn pixel_bounds(frame: &Frame, b: &BBox) -> Result<(usize, usize, usize, usize)> {
    if !b.is_valid() {
        return Err(Error::InvalidParticle);
    }
    let span = |start: f64, len: f64, limit: usize| -> Option<(usize, usize)> {
        let lo = (start - PIXEL_ORIGIN).round();
        let hi = (start - PIXEL_ORIGIN + len).round().max(lo + 1.0);
        let lo = lo.max(0.0);
        let hi = hi.min(limit as f64);
        (hi > lo).then_some((lo as usize, hi as usize))
    };
    let (x0, x1) = span(b.x, b.w, frame.width).ok_or(Error::InvalidParticle)?;
    let (y0, y1) = span(b.y, b.h, frame.height).ok_or(Error::InvalidParticle)?;
    Ok((x0, y0, x1, y1))
}

/// Cropped region of a frame in both gray and color form.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub gray: Plane,
    pub color: ColorPatch,
    pub source: BBox,
}

pub fn crop(frame: &Frame, b: &BBox) -> Result<Patch> {
    let (x0, y0, x1, y1) = pixel_bounds(frame, b)?;
    let (w, h) = (x1 - x0, y1 - y0);
    let mut gray = Vec::with_capacity(w * h);
    let mut rgb = Vec::with_capacity(w * h);
    for y in y0..y1 {
        let row = y * frame.width;
        gray.extend_from_slice(&frame.gray.data[row + x0..row + x1]);
        rgb.extend_from_slice(&frame.rgb[row + x0..row + x1]);
    }
    Ok(Patch {
        gray: Plane {
            width: w,
            height: h,
            data: gray,
        },
        color: ColorPatch {
            width: w,
            height: h,
            rgb,
        },
        source: *b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Intensity,
    ColorHist,
    Hog,
    Lbp,
}

impl ViewKind {
    pub const ALL: [ViewKind; 4] = [
        ViewKind::Intensity,
        ViewKind::ColorHist,
        ViewKind::Hog,
        ViewKind::Lbp,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewVector {
    pub kind: ViewKind,
    pub values: Vec<f64>,
    /// Set when the raw descriptor was identically zero and left unnormalized.
    pub zero: bool,
}

impl ViewVector {
    pub fn normalized(kind: ViewKind, mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let zero = norm == 0.0;
        if !zero {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Self { kind, values, zero }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn round_half_up(v: f64) -> usize {
    ((v + 0.5).floor() as usize).max(1)
}

/// A third of the initial box, or half of it when its shorter side is under
/// 20 pixels; each side rounded half-up and at least 1.
pub fn intensity_template_size(w: f64, h: f64) -> Result<(usize, usize)> {
    if !(w > 0.0 && h > 0.0) {
        return arg(format!("template size needs a positive box, got {w}x{h}"));
    }
    let div = if w.min(h) < 20.0 { 2.0 } else { 3.0 };
    Ok((round_half_up(w / div), round_half_up(h / div)))
}

/// Gray patch resampled to the template size, row-major.
pub fn extract_intensity(gray: &Plane, template: (usize, usize)) -> ViewVector {
    let p = resample_bilinear(gray, template.0, template.1);
    ViewVector::normalized(ViewKind::Intensity, p.data)
}

pub fn color_bin(px: [u8; 3]) -> usize {
    let shift = 8 - COLOR_BINS_PER_CHANNEL.trailing_zeros();
    let b = |c: u8| (c >> shift) as usize;
    (b(px[0]) * COLOR_BINS_PER_CHANNEL + b(px[1])) * COLOR_BINS_PER_CHANNEL + b(px[2])
}

/// Joint 8x8x8 RGB histogram, L1- then L2-normalized.
pub fn extract_color_hist(color: &ColorPatch) -> ViewVector {
    let mut hist = vec![0.0; COLOR_DIM];
    for &px in &color.rgb {
        hist[color_bin(px)] += 1.0;
    }
    let total = color.rgb.len().max(1) as f64;
    hist.iter_mut().for_each(|v| *v /= total);
    ViewVector::normalized(ViewKind::ColorHist, hist)
}

/// Which views are extracted; order is always intensity, color, HOG, LBP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSet {
    pub intensity: bool,
    pub color_hist: bool,
    pub hog: bool,
    pub lbp: bool,
}

impl Default for ViewSet {
    fn default() -> Self {
        Self {
            intensity: true,
            color_hist: true,
            hog: true,
            lbp: true,
        }
    }
}

impl ViewSet {
    pub fn enabled(&self) -> Vec<ViewKind> {
        let flags = [self.intensity, self.color_hist, self.hog, self.lbp];
        ViewKind::ALL
            .into_iter()
            .zip(flags)
            .filter_map(|(k, on)| on.then_some(k))
            .collect()
    }

    pub fn dims(&self, template: (usize, usize)) -> Vec<usize> {
        self.enabled()
            .into_iter()
            .map(|k| match k {
                ViewKind::Intensity => template.0 * template.1,
                ViewKind::ColorHist => COLOR_DIM,
                ViewKind::Hog => HOG_DIM,
                ViewKind::Lbp => LBP_BINS,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub illum: IllumConfig,
    pub views: ViewSet,
}

/// Crops `b` (clipped to the frame) and extracts every enabled view.
pub fn extract_all_views(
    frame: &Frame,
    b: &BBox,
    template: (usize, usize),
    cfg: &FeatureConfig,
) -> Result<Vec<ViewVector>> {
    let patch = crop(frame, b)?;
    Ok(extract_patch_views(&patch, template, cfg))
}

pub fn extract_patch_views(
    patch: &Patch,
    template: (usize, usize),
    cfg: &FeatureConfig,
) -> Vec<ViewVector> {
    let kinds = cfg.views.enabled();
    let needs_gray = kinds.iter().any(|k| *k != ViewKind::ColorHist);
    let (normalized, canonical) = if needs_gray {
        let n = illum_normalize(&patch.gray, &cfg.illum);
        let c = resample_bilinear(&n, CANONICAL_SIDE, CANONICAL_SIDE);
        (Some(n), Some(c))
    } else {
        (None, None)
    };
    kinds
        .into_iter()
        .map(|k| match k {
            ViewKind::Intensity => extract_intensity(normalized.as_ref().expect("gray"), template),
            ViewKind::ColorHist => extract_color_hist(&patch.color),
            ViewKind::Hog => extract_hog(canonical.as_ref().expect("gray")),
            ViewKind::Lbp => extract_lbp(canonical.as_ref().expect("gray")),
        })
        .collect()
}
