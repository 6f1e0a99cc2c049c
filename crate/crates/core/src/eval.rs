//! One-pass evaluation metrics: overlap (IoU), success curves, AUC, and
//! CSV/SVG plot output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// Axis-aligned box: top-left corner plus size, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn is_valid(&self) -> bool {
        self.w > 0.0 && self.h > 0.0 && self.x.is_finite() && self.y.is_finite()
    }

    pub fn scaled(&self, sx: f64, sy: f64) -> Self {
        Self::new(self.x * sx, self.y * sy, self.w * sx, self.h * sy)
    }
}

/// `|a ∩ b| / |a ∪ b|`.
pub fn overlap(a: &BBox, b: &BBox) -> Result<f64> {
    if !a.is_valid() || !b.is_valid() {
        return arg("overlap needs boxes with positive area");
    }
    // (x + w) - x is not always w in floating point.
    if a == b {
        return Ok(1.0);
    }
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

pub fn overlaps(tracked: &[BBox], gt: &[BBox]) -> Result<Vec<f64>> {
    if tracked.len() != gt.len() {
        return arg(format!(
            "{} tracked boxes vs {} ground-truth boxes",
            tracked.len(),
            gt.len()
        ));
    }
    tracked.iter().zip(gt).map(|(t, g)| overlap(t, g)).collect()
}

pub fn average_overlap(tracked: &[BBox], gt: &[BBox]) -> Result<f64> {
    let ov = overlaps(tracked, gt)?;
    if ov.is_empty() {
        return arg("no frames to average");
    }
    Ok(ov.iter().sum::<f64>() / ov.len() as f64)
}

/// Fraction of frames whose overlap exceeds each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub auc: f64,
}

/// `0, 0.05, ..., 1`.
pub fn default_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// Success rate at each threshold, counting frames with overlap strictly
/// greater than the threshold.
pub fn success_curve_from_overlaps(overlaps: &[f64], thresholds: &[f64]) -> Result<SuccessCurve> {
    if overlaps.is_empty() {
        return arg("empty track record");
    }
    if thresholds.windows(2).any(|w| w[1] < w[0])
        || thresholds.iter().any(|t| !(0.0..=1.0).contains(t))
    {
        return arg("thresholds must be ascending within [0, 1]");
    }
    let n = overlaps.len() as f64;
    let values: Vec<f64> = thresholds
        .iter()
        .map(|&t| overlaps.iter().filter(|&&o| o > t).count() as f64 / n)
        .collect();
    let mut curve = SuccessCurve {
        thresholds: thresholds.to_vec(),
        values,
        auc: 0.0,
    };
    if curve.thresholds.len() >= 2 {
        curve.auc = auc(&curve)?;
    }
    Ok(curve)
}

pub fn success_curve(tracked: &[BBox], gt: &[BBox], thresholds: &[f64]) -> Result<SuccessCurve> {
    success_curve_from_overlaps(&overlaps(tracked, gt)?, thresholds)
}

/// Trapezoidal area under the curve divided by the threshold span.
pub fn auc(curve: &SuccessCurve) -> Result<f64> {
    let (t, v) = (&curve.thresholds, &curve.values);
    if t.len() < 2 || t.len() != v.len() {
        return arg("AUC needs at least two curve points");
    }
    let span = t[t.len() - 1] - t[0];
    if span <= 0.0 {
        return arg("threshold grid has zero span");
    }
    let area: f64 = t
        .windows(2)
        .zip(v.windows(2))
        .map(|(tw, vw)| (tw[1] - tw[0]) * (vw[0] + vw[1]) / 2.0)
        .sum();
    Ok(area / span)
}

/// A labelled curve for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCurve {
    pub name: String,
    pub curve: SuccessCurve,
}

/// Writes `threshold,<name1>,<name2>,...` rows. All curves must share one
/// threshold grid.
pub fn write_curves_csv<W: std::io::Write>(mut w: W, curves: &[NamedCurve]) -> Result<()> {
    let Some(first) = curves.first() else {
        return arg("no curves to write");
    };
    if curves
        .iter()
        .any(|c| c.curve.thresholds != first.curve.thresholds)
    {
        return arg("curves use different threshold grids");
    }
    let header: Vec<String> = std::iter::once("threshold".to_string())
        .chain(curves.iter().map(|c| csv_field(&c.name)))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (row, t) in first.curve.thresholds.iter().enumerate() {
        let mut line = format!("{t:?}");
        for c in curves {
            write!(line, ",{:?}", c.curve.values[row]).expect("string write");
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match (ch, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

/// Parses a curve CSV written by [`write_curves_csv`]; AUCs are recomputed.
pub fn read_curves_csv(text: &str, origin: &Path) -> Result<Vec<NamedCurve>> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(perr(1, "empty curve file".into()));
    };
    let names = split_csv_line(header.trim_end_matches('\r'));
    if names.len() < 2 || names[0] != "threshold" {
        return Err(perr(1, "header must be 'threshold,<name>,...'".into()));
    }
    let mut thresholds = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len() - 1];
    for (idx, line) in lines {
        let fields = split_csv_line(line.trim_end_matches('\r'));
        if fields.len() != names.len() {
            return Err(perr(idx + 1, format!("expected {} fields", names.len())));
        }
        let nums: Vec<f64> = fields
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| perr(idx + 1, format!("cannot parse '{f}'")))
            })
            .collect::<Result<_>>()?;
        thresholds.push(nums[0]);
        for (c, v) in cols.iter_mut().zip(&nums[1..]) {
            c.push(*v);
        }
    }
    names[1..]
        .iter()
        .zip(cols)
        .map(|(name, values)| {
            let mut curve = SuccessCurve {
                thresholds: thresholds.clone(),
                values,
                auc: 0.0,
            };
            curve.auc = auc(&curve)?;
            Ok(NamedCurve {
                name: name.clone(),
                curve,
            })
        })
        .collect()
}

/// Curves ordered by AUC, best first; ties keep input order.
pub fn sorted_by_auc(curves: &[NamedCurve]) -> Vec<&NamedCurve> {
    let mut sorted: Vec<&NamedCurve> = curves.iter().collect();
    sorted.sort_by(|a, b| b.curve.auc.total_cmp(&a.curve.auc));
    sorted
}

pub fn legend_label(c: &NamedCurve) -> String {
    format!("{} ({:.3})", c.name, c.curve.auc)
}

const PALETTE: [&str; 10] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Self-contained SVG success plot; the legend lists "name (auc)" sorted by
/// AUC.
pub fn render_svg(curves: &[NamedCurve]) -> String {
    let (w, h) = (480.0, 360.0);
    let (left, right, top, bottom) = (56.0, 16.0, 28.0, 48.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |t: f64| left + t * pw;
    let py = |v: f64| top + (1.0 - v) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="16" text-anchor="middle" font-size="13">Success plots of OPE</text>"#,
        w / 2.0
    );
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#e0e0e0"/>"##,
            top,
            top + ph,
            x = px(t)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#e0e0e0"/>"##,
            left,
            left + pw,
            y = py(t)
        );
        if i % 2 == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t:.1}</text>"#,
                px(t),
                top + ph + 14.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t:.1}</text>"#,
                left - 6.0,
                py(t) + 4.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Overlap threshold</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">Success rate</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );

    for (rank, c) in sorted_by_auc(curves).into_iter().enumerate() {
        let color = PALETTE[rank % PALETTE.len()];
        let pts: Vec<String> = c
            .curve
            .thresholds
            .iter()
            .zip(&c.curve.values)
            .map(|(&t, &v)| format!("{:.2},{:.2}", px(t), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = top + 14.0 + rank as f64 * 16.0;
        let lx = left + pw - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
            lx + 26.0,
            xml_escape(&legend_label(c))
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<prefix>.csv` and `<prefix>.svg`, returning both paths.
pub fn emit_plot(curves: &[NamedCurve], prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    if curves.is_empty() {
        return arg("no curves to plot");
    }
    let with_ext = |ext: &str| {
        let mut name = prefix.as_os_str().to_owned();
        name.push(ext);
        PathBuf::from(name)
    };
    let csv_path = with_ext(".csv");
    let svg_path = with_ext(".svg");
    let mut f = std::io::BufWriter::new(fs::File::create(&csv_path)?);
    write_curves_csv(&mut f, curves)?;
    f.flush()?;
    fs::write(&svg_path, render_svg(curves))?;
    Ok((csv_path, svg_path))
}
