//! Particle filter pieces: random-walk propagation, sparse-code likelihood,
//! best-candidate selection and systematic resampling.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{shape, Result};
use crate::eval::BBox;
use crate::solver::{Problem, SparseSolution};

/// Scale and aspect factors are clamped to this range around the initial box.
pub const SCALE_CLAMP: (f64, f64) = (0.5, 2.0);

/// One target hypothesis: center, scale and aspect relative to the initial
/// box (`w = w0 * s`, `h = h0 * s * r`), and its weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub cx: f64,
    pub cy: f64,
    pub s: f64,
    pub r: f64,
    pub weight: f64,
}

impl ParticleState {
    pub fn at_box(b: &BBox, weight: f64) -> Self {
        let (cx, cy) = b.center();
        Self {
            cx,
            cy,
            s: 1.0,
            r: 1.0,
            weight,
        }
    }

    pub fn to_box(&self, base_w: f64, base_h: f64) -> BBox {
        BBox::from_center(self.cx, self.cy, base_w * self.s, base_h * self.s * self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionConfig {
    pub std_x: f64,
    pub std_y: f64,
    pub std_s: f64,
    pub std_r: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            std_x: 4.0,
            std_y: 4.0,
            std_s: 0.02,
            std_r: 0.005,
        }
    }
}

/// Frame extent that particle centers are kept inside, in box coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn for_frame(width: usize, height: usize) -> Self {
        let o = crate::features::PIXEL_ORIGIN;
        Self {
            x_min: o,
            x_max: o + width as f64,
            y_min: o,
            y_max: o + height as f64,
        }
    }
}

fn jitter<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    if std > 0.0 {
        Normal::new(0.0, std).expect("positive std").sample(rng)
    } else {
        0.0
    }
}

/// Perturbs every state with independent Gaussian noise, drawing x, y, s, r
/// in that order per particle.
pub fn propagate<R: Rng + ?Sized>(
    states: &[ParticleState],
    cfg: &MotionConfig,
    bounds: &Bounds,
    rng: &mut R,
) -> Vec<ParticleState> {
    states
        .iter()
        .map(|p| {
            let cx = (p.cx + jitter(rng, cfg.std_x)).clamp(bounds.x_min, bounds.x_max);
            let cy = (p.cy + jitter(rng, cfg.std_y)).clamp(bounds.y_min, bounds.y_max);
            let s = (p.s + jitter(rng, cfg.std_s)).clamp(SCALE_CLAMP.0, SCALE_CLAMP.1);
            let r = (p.r + jitter(rng, cfg.std_r)).clamp(SCALE_CLAMP.0, SCALE_CLAMP.1);
            ParticleState { cx, cy, s, r, ..*p }
        })
        .collect()
}

/// `sum_k |D^k c_i^k - x_i^k|^2` for every particle. The outlier term is not
/// part of it.
pub fn reconstruction_errors(solution: &SparseSolution, p: &Problem) -> Result<Vec<f64>> {
    if solution.c.shape() != p.c_shape() {
        return shape(format!(
            "solution C is {:?}, problem expects {:?}",
            solution.c.shape(),
            p.c_shape()
        ));
    }
    let n = p.particles();
    let mut err = vec![0.0; n];
    for (k, view) in p.views().iter().enumerate() {
        let fit = view.d.matmul(&p.c_block(&solution.c, k))?;
        for r in 0..fit.rows() {
            for (i, (f, x)) in fit.row(r).iter().zip(view.x.row(r)).enumerate() {
                err[i] += (f - x) * (f - x);
            }
        }
    }
    Ok(err)
}

/// `p_i = exp(-alpha * sum_k |D^k c_i^k - x_i^k|^2)`.
pub fn likelihood(solution: &SparseSolution, p: &Problem, alpha: f64) -> Result<Vec<f64>> {
    Ok(reconstruction_errors(solution, p)?
        .into_iter()
        .map(|e| (-alpha * e).exp())
        .collect())
}

/// Divides by the sum; `None` when the weights sum to zero.
pub fn normalize_weights(weights: &[f64]) -> Option<Vec<f64>> {
    let sum: f64 = weights.iter().sum();
    (sum > 0.0 && sum.is_finite()).then(|| weights.iter().map(|w| w / sum).collect())
}

/// Index of the largest weight, lowest index on ties. `None` when every
/// weight is zero (underflow).
pub fn select_best(weights: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 && best.is_none_or(|(_, bw)| w > bw) {
            best = Some((i, w));
        }
    }
    best.map(|(i, _)| i)
}

/// Systematic resampling. Output weights are uniform. Returns `None` (and
/// leaves the caller to keep its states) when the weights sum to zero.
pub fn resample<R: Rng + ?Sized>(
    states: &[ParticleState],
    weights: &[f64],
    rng: &mut R,
) -> Option<Vec<ParticleState>> {
    let n = states.len();
    let w = normalize_weights(weights)?;
    let uniform = 1.0 / n as f64;
    let start: f64 = rng.random_range(0.0..uniform);
    let mut out = Vec::with_capacity(n);
    let mut cum = w[0];
    let mut j = 0;
    for m in 0..n {
        let u = start + m as f64 * uniform;
        while u > cum && j + 1 < n {
            j += 1;
            cum += w[j];
        }
        out.push(ParticleState {
            weight: uniform,
            ..states[j]
        });
    }
    Some(out)
}

/// Sets every weight to `1/n`.
pub fn reset_uniform(states: &mut [ParticleState]) {
    let u = 1.0 / states.len() as f64;
    states.iter_mut().for_each(|s| s.weight = u);
}
