use super::{resample_bilinear, Plane, ViewKind, ViewVector, CANONICAL_SIDE};

pub const HOG_BINS: usize = 9;
pub const HOG_CELL: usize = 8;
pub const HOG_DIM: usize = 324;
const L2HYS_CLIP: f64 = 0.2;
const L2HYS_EPS: f64 = 1e-3;

/// Unsigned orientation bin of a gradient, 20 degrees per bin.
pub(crate) fn orientation_bin(gx: f64, gy: f64) -> usize {
    let deg = gy.atan2(gx).to_degrees().rem_euclid(180.0);
    ((deg / (180.0 / HOG_BINS as f64)) as usize).min(HOG_BINS - 1)
}

fn l2hys(block: &mut [f64]) {
    let norm = |b: &[f64]| (b.iter().map(|v| v * v).sum::<f64>() + L2HYS_EPS * L2HYS_EPS).sqrt();
    let n = norm(block);
    block.iter_mut().for_each(|v| *v = (*v / n).min(L2HYS_CLIP));
    let n = norm(block);
    block.iter_mut().for_each(|v| *v /= n);
}

/// 9-bin unsigned HOG on a 32x32 patch: 8x8 cells, 2x2-cell blocks at a
/// one-cell stride, L2-Hys per block, then L2 normalization.
pub fn extract_hog(gray: &Plane) -> ViewVector {
    let patch = if gray.width == CANONICAL_SIDE && gray.height == CANONICAL_SIDE {
        gray.clone()
    } else {
        resample_bilinear(gray, CANONICAL_SIDE, CANONICAL_SIDE)
    };
    let side = CANONICAL_SIDE;
    let cells = side / HOG_CELL;
    let mut hist = vec![0.0; cells * cells * HOG_BINS];
    for y in 0..side {
        for x in 0..side {
            let gx = patch.at(x.saturating_add(1).min(side - 1), y) - patch.at(x.saturating_sub(1), y);
            let gy = patch.at(x, (y + 1).min(side - 1)) - patch.at(x, y.saturating_sub(1));
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let cell = (y / HOG_CELL) * cells + x / HOG_CELL;
            hist[cell * HOG_BINS + orientation_bin(gx, gy)] += mag;
        }
    }

    let mut out = Vec::with_capacity(HOG_DIM);
    for by in 0..cells - 1 {
        for bx in 0..cells - 1 {
            let mut block = Vec::with_capacity(4 * HOG_BINS);
            for (cy, cx) in [(by, bx), (by, bx + 1), (by + 1, bx), (by + 1, bx + 1)] {
                let c = cy * cells + cx;
                block.extend_from_slice(&hist[c * HOG_BINS..(c + 1) * HOG_BINS]);
            }
            l2hys(&mut block);
            out.extend(block);
        }
    }
    ViewVector::normalized(ViewKind::Hog, out)
}
