//! Gamma / difference-of-Gaussians / contrast-equalization chain applied to
//! gray patches before descriptor extraction.

use serde::{Deserialize, Serialize};

use super::Plane;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllumConfig {
    pub enabled: bool,
    pub gamma: f64,
    pub sigma_inner: f64,
    pub sigma_outer: f64,
    /// Trim exponent of the two equalization stages.
    pub alpha: f64,
    /// Ceiling of the second stage and the final tanh squashing.
    pub tau: f64,
}

impl Default for IllumConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            gamma: 0.2,
            sigma_inner: 1.0,
            sigma_outer: 2.0,
            alpha: 0.1,
            tau: 10.0,
        }
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(p: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return p.clone();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = (p.width as isize, p.height as isize);
    let mut tmp = vec![0.0; p.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let xx = (x + i as isize - r).clamp(0, w - 1);
                acc += kv * p.data[(y * w + xx) as usize];
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![0.0; p.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let yy = (y + i as isize - r).clamp(0, h - 1);
                acc += kv * tmp[(yy * w + x) as usize];
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    Plane {
        width: p.width,
        height: p.height,
        data: out,
    }
}

fn equalize_stage(data: &mut [f64], alpha: f64, ceiling: Option<f64>) {
    let mean = data
        .iter()
        .map(|v| {
            let a = v.abs();
            ceiling.map_or(a, |c| a.min(c)).powf(alpha)
        })
        .sum::<f64>()
        / data.len() as f64;
    let norm = mean.powf(1.0 / alpha);
    if norm > 1e-300 && norm.is_finite() {
        data.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Runs the normalization chain; returns the input unchanged when disabled.
pub fn illum_normalize(p: &Plane, cfg: &IllumConfig) -> Plane {
    if !cfg.enabled {
        return p.clone();
    }
    let gamma = Plane {
        width: p.width,
        height: p.height,
        data: p.data.iter().map(|v| v.max(0.0).powf(cfg.gamma)).collect(),
    };
    let inner = gaussian_blur(&gamma, cfg.sigma_inner);
    let outer = gaussian_blur(&gamma, cfg.sigma_outer);
    let mut data: Vec<f64> = inner.data.iter().zip(&outer.data).map(|(a, b)| a - b).collect();

    // DoG of a flat patch is numerically ~1e-17, not exactly zero; keep it flat.
    if data.iter().all(|v| v.abs() < 1e-12) {
        data.iter_mut().for_each(|v| *v = 0.0);
        return Plane {
            width: p.width,
            height: p.height,
            data,
        };
    }

    equalize_stage(&mut data, cfg.alpha, None);
    equalize_stage(&mut data, cfg.alpha, Some(cfg.tau));
    data.iter_mut().for_each(|v| *v = cfg.tau * (*v / cfg.tau).tanh());
    Plane {
        width: p.width,
        height: p.height,
        data,
    }
}
