//! Per-view template dictionaries with online, weight-based replacement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, shape, Result};
use crate::eval::BBox;
use crate::features::{extract_all_views, FeatureConfig, Frame, ViewKind, ViewVector};
use crate::linalg::Mat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateConfig {
    /// Replace a template when the best cosine similarity falls below this.
    pub similarity_threshold: f64,
    /// Weights are multiplied by `exp(boost * coefficient)`.
    pub boost: f64,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: 0.7,
            boost: 1.0,
        }
    }
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return arg("similarity_threshold must lie in [0, 1]");
        }
        if !self.boost.is_finite() {
            return arg("boost must be finite");
        }
        Ok(())
    }
}

/// `N` templates, stored column-wise per view, with a probability weight each.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    pub kinds: Vec<ViewKind>,
    /// `d_k x N` per view, unit-norm columns.
    pub dicts: Vec<Mat>,
    pub weights: Vec<f64>,
    /// Frame index each template was taken from.
    pub created: Vec<usize>,
}

/// What [`TemplateSet::maybe_update`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    pub similarity: f64,
    pub replaced: Option<usize>,
}

/// Seed of the template jitter; fixed so dictionaries are reproducible.
pub const TEMPLATE_SEED: u64 = 0x5eed_7e3b;

const JITTER: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 0 {
        (s[m - 1] + s[m]) / 2.0
    } else {
        s[m]
    }
}

impl TemplateSet {
    /// Template 0 is taken at `init`; the others at `init` shifted by 1 or 2
    /// pixels in each axis.
    pub fn init(
        frame: &Frame,
        init: &BBox,
        count: usize,
        template_size: (usize, usize),
        features: &FeatureConfig,
    ) -> Result<Self> {
        if count == 0 {
            return arg("template count must be at least 1");
        }
        if !init.is_valid() {
            return arg("initial box must have positive area");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(TEMPLATE_SEED);
        let mut columns: Vec<Vec<ViewVector>> = Vec::with_capacity(count);
        for t in 0..count {
            let b = if t == 0 {
                *init
            } else {
                let dx = JITTER[rng.random_range(0..JITTER.len())];
                let dy = JITTER[rng.random_range(0..JITTER.len())];
                BBox::new(init.x + dx, init.y + dy, init.w, init.h)
            };
            columns.push(extract_all_views(frame, &b, template_size, features)?);
        }
        let kinds: Vec<ViewKind> = columns[0].iter().map(|v| v.kind).collect();
        let dicts = (0..kinds.len())
            .map(|k| {
                let cols: Vec<Vec<f64>> = columns.iter().map(|c| c[k].values.clone()).collect();
                Mat::from_cols(&cols)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kinds,
            dicts,
            weights: vec![1.0 / count as f64; count],
            created: vec![0; count],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reweights templates by the selected candidate's coefficients (first
    /// view) and replaces the lowest-weight template with the candidate when
    /// no template resembles it closely enough.
    pub fn maybe_update(
        &mut self,
        candidate: &[ViewVector],
        coeffs: &Mat,
        cfg: &UpdateConfig,
        frame_idx: usize,
    ) -> Result<UpdateOutcome> {
        cfg.validate()?;
        let n = self.len();
        if candidate.len() != self.dicts.len() {
            return shape(format!(
                "candidate has {} views, dictionary has {}",
                candidate.len(),
                self.dicts.len()
            ));
        }
        if coeffs.rows() != n || coeffs.cols() != self.dicts.len() {
            return shape(format!(
                "coefficients are {:?}, expected ({n}, {})",
                coeffs.shape(),
                self.dicts.len()
            ));
        }
        for (v, d) in candidate.iter().zip(&self.dicts) {
            if v.dim() != d.rows() {
                return shape("candidate view dimension differs from dictionary");
            }
        }

        for (j, w) in self.weights.iter_mut().enumerate() {
            *w *= (cfg.boost * coeffs[(j, 0)]).exp();
        }
        self.renormalize();

        let first = &candidate[0].values;
        let similarity = (0..n)
            .map(|j| cosine(first, &self.dicts[0].col(j)))
            .fold(f64::NEG_INFINITY, f64::max);

        let mut replaced = None;
        if similarity < cfg.similarity_threshold {
            let mut worst = 0;
            for j in 1..n {
                if self.weights[j] < self.weights[worst] {
                    worst = j;
                }
            }
            for (dict, view) in self.dicts.iter_mut().zip(candidate) {
                dict.set_col(worst, &ViewVector::normalized(view.kind, view.values.clone()).values);
            }
            self.weights[worst] = median(&self.weights);
            self.created[worst] = frame_idx;
            self.renormalize();
            replaced = Some(worst);
        }
        Ok(UpdateOutcome {
            similarity,
            replaced,
        })
    }

    fn renormalize(&mut self) {
        let sum: f64 = self.weights.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            self.weights.iter_mut().for_each(|w| *w /= sum);
        } else {
            let u = 1.0 / self.len() as f64;
            self.weights.iter_mut().for_each(|w| *w = u);
        }
    }
}
