mod common;

use proptest::prelude::*;
use rand::Rng;
use smtmvt::eval::BBox;
use smtmvt::features::{
    color_bin, crop, extract_all_views, extract_color_hist, extract_hog, extract_lbp, extract_patch_views,
    illum_normalize, intensity_template_size, ColorPatch, FeatureConfig, Frame, IllumConfig, Plane, ViewKind,
};

fn random_plane(seed: u64, w: usize, h: usize) -> Plane {
    let mut r = common::rng(seed);
    Plane::new(w, h, (0..w * h).map(|_| r.random_range(0.0..1.0)).collect()).unwrap()
}

fn random_frame(seed: u64, w: usize, h: usize) -> Frame {
    let mut r = common::rng(seed);
    Frame::from_rgb(w, h, (0..w * h).map(|_| [r.random(), r.random(), r.random()]).collect()).unwrap()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = l2(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Per-pixel HOG written from the definition: central differences with
/// replicated borders, unsigned 20-degree bins, 8x8 cells, 2x2 blocks at a
/// cell stride, L2-Hys (clip 0.2, eps 1e-3), then L2.
fn naive_hog(p: &Plane) -> Vec<f64> {
    assert_eq!((p.width, p.height), (32, 32));
    let px = |x: i64, y: i64| p.data[(y.clamp(0, 31) * 32 + x.clamp(0, 31)) as usize];
    let mut cells = [[[0.0f64; 9]; 4]; 4];
    for y in 0..32i64 {
        for x in 0..32i64 {
            let gx = px(x + 1, y) - px(x - 1, y);
            let gy = px(x, y + 1) - px(x, y - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees();
            while angle < 0.0 {
                angle += 180.0;
            }
            while angle >= 180.0 {
                angle -= 180.0;
            }
            let bin = ((angle / 20.0).floor() as usize).min(8);
            cells[(y / 8) as usize][(x / 8) as usize][bin] += mag;
        }
    }
    let mut out = Vec::new();
    for by in 0..3 {
        for bx in 0..3 {
            let mut block: Vec<f64> = Vec::new();
            for (cy, cx) in [(by, bx), (by, bx + 1), (by + 1, bx), (by + 1, bx + 1)] {
                block.extend(cells[cy][cx]);
            }
            let n = (block.iter().map(|v| v * v).sum::<f64>() + 1e-6).sqrt();
            let clipped: Vec<f64> = block.iter().map(|v| (v / n).min(0.2)).collect();
            let n = (clipped.iter().map(|v| v * v).sum::<f64>() + 1e-6).sqrt();
            out.extend(clipped.iter().map(|v| v / n));
        }
    }
    unit(out)
}

/// Uniform patterns listed by scanning codes and counting circular bit flips
/// one bit at a time.
fn naive_uniform_bins() -> Vec<Option<usize>> {
    let mut next = 0;
    (0..256u32)
        .map(|code| {
            let bits: Vec<u32> = (0..8).map(|i| (code >> i) & 1).collect();
            let flips = (0..8).filter(|&i| bits[i] != bits[(i + 1) % 8]).count();
            (flips <= 2).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

fn naive_lbp_codes(p: &Plane) -> Vec<u32> {
    // top-left, top, top-right, right, bottom-right, bottom, bottom-left, left
    let ring = [(-1i64, -1i64), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];
    let at = |x: i64, y: i64| p.data[(y * p.width as i64 + x) as usize];
    let mut codes = Vec::new();
    for y in 1..p.height as i64 - 1 {
        for x in 1..p.width as i64 - 1 {
            let mut code = 0;
            for (bit, (dx, dy)) in ring.iter().enumerate() {
                if at(x + dx, y + dy) > at(x, y) {
                    code += 1 << bit;
                }
            }
            codes.push(code);
        }
    }
    codes
}

fn naive_lbp(p: &Plane) -> Vec<f64> {
    let bins = naive_uniform_bins();
    let mut hist = vec![0.0; 59];
    for code in naive_lbp_codes(p) {
        hist[bins[code as usize].unwrap_or(58)] += 1.0;
    }
    unit(hist)
}

fn naive_color_hist(c: &ColorPatch) -> Vec<f64> {
    let mut hist = vec![0.0; 512];
    for px in &c.rgb {
        let (r, g, b) = (px[0] as usize / 32, px[1] as usize / 32, px[2] as usize / 32);
        hist[r * 64 + g * 8 + b] += 1.0;
    }
    let total: f64 = hist.iter().sum();
    unit(hist.iter().map(|v| v / total).collect())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn hog_matches_naive_oracle() {
    for seed in 0..20 {
        let p = random_plane(seed, 32, 32);
        let v = extract_hog(&p);
        assert!(close(&v.values, &naive_hog(&p), 1e-10), "seed {seed}");
    }
}

#[test]
fn vertical_edge_puts_hog_energy_in_first_bin() {
    let p = Plane::new(32, 32, (0..1024).map(|i| if i % 32 < 16 { 0.0 } else { 1.0 }).collect()).unwrap();
    let v = extract_hog(&p);
    let mut per_bin = [0.0; 9];
    for (i, x) in v.values.iter().enumerate() {
        per_bin[i % 9] += x;
    }
    let argmax = (0..9).fold(0, |m, b| if per_bin[b] > per_bin[m] { b } else { m });
    assert_eq!(argmax, 0);
    assert!(per_bin[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn constant_patch_gives_flagged_zero_hog() {
    let v = extract_hog(&Plane::filled(32, 32, 0.4));
    assert!(v.zero);
    assert!(v.values.iter().all(|&x| x == 0.0));
    assert_eq!(v.dim(), 324);
}

#[test]
fn lbp_matches_naive_oracle() {
    for seed in 0..20 {
        let p = random_plane(100 + seed, 32, 32);
        assert!(close(&extract_lbp(&p).values, &naive_lbp(&p), 1e-12), "seed {seed}");
    }
}

#[test]
fn constant_patch_has_single_lbp_bin() {
    let v = extract_lbp(&Plane::filled(32, 32, 0.7));
    assert_eq!(v.values.iter().filter(|&&x| x != 0.0).count(), 1);
    assert_eq!(v.values[0], 1.0);
}

/// Complementing brightness flips every bit of a tie-free code; the
/// histogram permutes accordingly.
#[test]
fn inverted_patch_permutes_lbp_bins() {
    let bins = naive_uniform_bins();
    for seed in 0..5 {
        let p = random_plane(200 + seed, 32, 32);
        let inv = p.map(|v| 1.0 - v);
        let mut predicted = vec![0.0; 59];
        for code in naive_lbp_codes(&p) {
            predicted[bins[(!code & 0xff) as usize].unwrap_or(58)] += 1.0;
        }
        assert!(close(&extract_lbp(&inv).values, &unit(predicted), 1e-12));
    }
}

#[test]
fn color_hist_matches_tally() {
    let mut r = common::rng(9);
    for _ in 0..20 {
        let (w, h) = (r.random_range(1..20), r.random_range(1..20));
        let c = ColorPatch {
            width: w,
            height: h,
            rgb: (0..w * h).map(|_| [r.random(), r.random(), r.random()]).collect(),
        };
        assert!(close(&extract_color_hist(&c).values, &naive_color_hist(&c), 1e-12));
    }
    assert_eq!(color_bin([255, 255, 255]), 511);
    assert_eq!(color_bin([32, 0, 31]), 64);
}

/// Gradient patches scaled by 2 before the chain (clipped to 1) come out
/// within 5% of each other.
#[test]
fn illumination_chain_removes_brightness_scale() {
    let cfg = IllumConfig::default();
    for (fx, fy) in [(0.01, 0.0), (0.005, 0.008), (0.0, 0.012)] {
        let p = Plane::new(
            24,
            24,
            (0..576)
                .map(|i| 0.05 + fx * (i % 24) as f64 + fy * (i / 24) as f64 + 0.1 * ((i % 5) as f64 / 5.0))
                .collect(),
        )
        .unwrap();
        let bright = p.map(|v| (2.0 * v).min(1.0));
        let a = illum_normalize(&p, &cfg);
        let b = illum_normalize(&bright, &cfg);
        let diff = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(diff <= 0.05 * l2(&a.data), "relative difference {}", diff / l2(&a.data));
    }
}

#[test]
fn disabled_chain_is_identity_and_flat_goes_to_zero() {
    let p = random_plane(3, 10, 7);
    let off = IllumConfig {
        enabled: false,
        ..IllumConfig::default()
    };
    assert_eq!(illum_normalize(&p, &off), p);
    let flat = illum_normalize(&Plane::filled(9, 9, 0.6), &IllumConfig::default());
    assert!(flat.data.iter().all(|&v| v == 0.0));
}

#[test]
fn view_dims_follow_template_size() {
    let frame = random_frame(1, 80, 60);
    let b = BBox::new(11.0, 6.0, 30.0, 45.0);
    let t = intensity_template_size(b.w, b.h).unwrap();
    let views = extract_all_views(&frame, &b, t, &FeatureConfig::default()).unwrap();
    let kinds: Vec<ViewKind> = views.iter().map(|v| v.kind).collect();
    assert_eq!(kinds, ViewKind::ALL.to_vec());
    let dims: Vec<usize> = views.iter().map(|v| v.dim()).collect();
    assert_eq!(dims, vec![t.0 * t.1, 512, 324, 59]);
    assert_eq!(FeatureConfig::default().views.dims(t), dims);
}

#[test]
fn clipped_box_equals_manual_crop() {
    let frame = random_frame(2, 50, 40);
    let cfg = FeatureConfig::default();
    let outside = BBox::new(-9.0, 21.0, 30.0, 30.0);
    let inside = BBox::new(1.0, 21.0, 20.0, 20.0);
    let a = extract_all_views(&frame, &outside, (5, 5), &cfg).unwrap();
    let b = extract_patch_views(&crop(&frame, &inside).unwrap(), (5, 5), &cfg);
    assert_eq!(a, b);
    assert!(extract_all_views(&frame, &BBox::new(200.0, 5.0, 10.0, 10.0), (5, 5), &cfg).is_err());
}

#[test]
fn extraction_is_deterministic_across_threads() {
    let frame = random_frame(5, 64, 48);
    let cfg = FeatureConfig::default();
    let b = BBox::new(10.0, 10.0, 25.0, 20.0);
    let reference = extract_all_views(&frame, &b, (8, 7), &cfg).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let (frame, cfg) = (frame.clone(), cfg.clone());
            std::thread::spawn(move || extract_all_views(&frame, &b, (8, 7), &cfg).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), reference);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn views_are_unit_norm_or_flagged(seed in any::<u64>(), x in 1.0f64..40.0, y in 1.0f64..30.0,
                                      w in 4.0f64..30.0, h in 4.0f64..30.0) {
        let frame = random_frame(seed, 60, 50);
        let b = BBox::new(x, y, w, h);
        let t = intensity_template_size(w, h).unwrap();
        for v in extract_all_views(&frame, &b, t, &FeatureConfig::default()).unwrap() {
            if v.zero {
                prop_assert!(v.values.iter().all(|&x| x == 0.0));
            } else {
                prop_assert!((l2(&v.values) - 1.0).abs() < 1e-6);
            }
            if matches!(v.kind, ViewKind::ColorHist | ViewKind::Lbp) {
                prop_assert!(v.values.iter().all(|&x| x >= 0.0));
            }
        }
    }
}
