use std::sync::OnceLock;

use super::{resample_bilinear, Plane, ViewKind, ViewVector, CANONICAL_SIDE};

pub const LBP_BINS: usize = 59;

/// Neighbor offsets `(dx, dy)`, clockwise from the top-left; bit `i` of a
/// code is neighbor `i`.
pub const LBP_NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_right(1)).count_ones()
}

/// Maps each 8-bit code to its histogram bin: the 58 uniform codes (at most
/// two circular 0/1 transitions) in ascending order, everything else to 58.
pub fn uniform_bin_table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [(LBP_BINS - 1) as u8; 256];
        let mut next = 0u8;
        for code in 0..=255u8 {
            if transitions(code) <= 2 {
                table[code as usize] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next as usize, LBP_BINS - 1);
        table
    })
}

/// Code of an interior pixel. A neighbor sets its bit when strictly brighter
/// than the center, so flat regions map to code 0.
pub fn lbp_code(p: &Plane, x: usize, y: usize) -> u8 {
    let c = p.at(x, y);
    let mut code = 0u8;
    for (bit, (dx, dy)) in LBP_NEIGHBORS.iter().enumerate() {
        let v = p.at((x as isize + dx) as usize, (y as isize + dy) as usize);
        if v > c {
            code |= 1 << bit;
        }
    }
    code
}

/// Uniform LBP (8 neighbors, radius 1) histogram over the interior of a 32x32
/// patch.
pub fn extract_lbp(gray: &Plane) -> ViewVector {
    let patch = if gray.width == CANONICAL_SIDE && gray.height == CANONICAL_SIDE {
        gray.clone()
    } else {
        resample_bilinear(gray, CANONICAL_SIDE, CANONICAL_SIDE)
    };
    let table = uniform_bin_table();
    let mut hist = vec![0.0; LBP_BINS];
    for y in 1..patch.height - 1 {
        for x in 1..patch.width - 1 {
            hist[table[lbp_code(&patch, x, y) as usize] as usize] += 1.0;
        }
    }
    ViewVector::normalized(ViewKind::Lbp, hist)
}
