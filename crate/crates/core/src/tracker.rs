//! Per-frame tracking loop:
//! propagate -> crop/extract -> assemble problem -> solve -> likelihood ->
//! select -> template update -> resample.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::eval::BBox;
use crate::features::{extract_all_views, intensity_template_size, FeatureConfig, Frame, ViewVector};
use crate::linalg::Mat;
use crate::motion::{
    propagate, reconstruction_errors, reset_uniform, resample, select_best, Bounds, MotionConfig, ParticleState,
};
use crate::solver::{solve, Problem, SolverConfig, View};
use crate::templates::{TemplateSet, UpdateConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Particle count `n`.
    pub particles: usize,
    /// Template count `N`.
    pub templates: usize,
    /// Likelihood sharpness.
    pub alpha: f64,
    pub solver: SolverConfig,
    pub motion: MotionConfig,
    pub update: UpdateConfig,
    pub features: FeatureConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            particles: 400,
            templates: 10,
            alpha: 30.0,
            solver: SolverConfig::default(),
            motion: MotionConfig::default(),
            update: UpdateConfig::default(),
            features: FeatureConfig::default(),
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 || self.templates == 0 {
            return arg("particle and template counts must be at least 1");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return arg("alpha must be a nonnegative number");
        }
        let m = &self.motion;
        if [m.std_x, m.std_y, m.std_s, m.std_r]
            .iter()
            .any(|s| !(*s >= 0.0 && s.is_finite()))
        {
            return arg("motion standard deviations must be >= 0");
        }
        if self.features.views.enabled().is_empty() {
            return arg("at least one view must be enabled");
        }
        self.solver.validate()?;
        self.update.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackRecord {
    pub boxes: Vec<BBox>,
    pub best_likelihood: Vec<f64>,
    pub degenerate: Vec<bool>,
    /// Seconds spent on each frame.
    pub wall_time: Vec<f64>,
}

impl TrackRecord {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn push(&mut self, out: &FrameOutput, secs: f64) {
        self.boxes.push(out.bbox);
        self.best_likelihood.push(out.likelihood);
        self.degenerate.push(out.degenerate);
        self.wall_time.push(secs);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutput {
    pub bbox: BBox,
    pub likelihood: f64,
    /// True when the previous box was held (no valid particle, solver
    /// divergence) or every likelihood underflowed and the box is the
    /// smallest-residual particle.
    pub degenerate: bool,
    pub solver_iterations: usize,
    pub replaced_template: Option<usize>,
}

pub struct Tracker {
    cfg: TrackerConfig,
    rng: ChaCha8Rng,
    particles: Vec<ParticleState>,
    templates: TemplateSet,
    base: (f64, f64),
    template_size: (usize, usize),
    last_box: BBox,
    frame_idx: usize,
    last_problem: Option<Problem>,
}

impl Tracker {
    /// Builds templates from the first frame and places every particle on the
    /// initial box.
    pub fn new(first: &Frame, init: BBox, cfg: TrackerConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if !init.is_valid() {
            return arg("initial box must have positive area");
        }
        let template_size = intensity_template_size(init.w, init.h)?;
        let templates = TemplateSet::init(first, &init, cfg.templates, template_size, &cfg.features)?;
        let particles = vec![ParticleState::at_box(&init, 1.0 / cfg.particles as f64); cfg.particles];
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            particles,
            templates,
            base: (init.w, init.h),
            template_size,
            last_box: init,
            frame_idx: 0,
            last_problem: None,
            cfg,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn particles(&self) -> &[ParticleState] {
        &self.particles
    }

    pub fn template_size(&self) -> (usize, usize) {
        self.template_size
    }

    /// Problem assembled for the most recent frame.
    pub fn last_problem(&self) -> Option<&Problem> {
        self.last_problem.as_ref()
    }

    fn hold(&mut self) -> FrameOutput {
        reset_uniform(&mut self.particles);
        FrameOutput {
            bbox: self.last_box,
            likelihood: 0.0,
            degenerate: true,
            solver_iterations: 0,
            replaced_template: None,
        }
    }

    fn assemble(&self, features: &[Option<Vec<ViewVector>>]) -> Result<Problem> {
        let n = features.len();
        let views = self
            .templates
            .dicts
            .iter()
            .enumerate()
            .map(|(k, dict)| {
                let mut x = Mat::zeros(dict.rows(), n);
                for (i, f) in features.iter().enumerate() {
                    if let Some(f) = f {
                        x.set_col(i, &f[k].values);
                    }
                }
                View { x, d: dict.clone() }
            })
            .collect();
        Problem::new(views)
    }

    pub fn track_frame(&mut self, frame: &Frame) -> Result<FrameOutput> {
        self.frame_idx += 1;
        let bounds = Bounds::for_frame(frame.width, frame.height);
        self.particles = propagate(&self.particles, &self.cfg.motion, &bounds, &mut self.rng);

        let (bw, bh) = self.base;
        let boxes: Vec<BBox> = self.particles.iter().map(|p| p.to_box(bw, bh)).collect();
        let features: Vec<Option<Vec<ViewVector>>> = boxes
            .par_iter()
            .map(|b| match extract_all_views(frame, b, self.template_size, &self.cfg.features) {
                Ok(v) => Ok(Some(v)),
                Err(Error::InvalidParticle) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        if features.iter().all(Option::is_none) {
            return Ok(self.hold());
        }

        let problem = self.assemble(&features)?;
        let solution = match solve(&problem, &self.cfg.solver) {
            Ok(s) => s,
            Err(Error::Divergence { .. }) => {
                self.last_problem = Some(problem);
                return Ok(self.hold());
            }
            Err(e) => return Err(e),
        };
        let errors = reconstruction_errors(&solution, &problem)?;
        let mut weights: Vec<f64> = errors.iter().map(|e| (-self.cfg.alpha * e).exp()).collect();
        for (w, f) in weights.iter_mut().zip(&features) {
            if f.is_none() {
                *w = 0.0;
            }
        }

        // Every likelihood underflowed: fall back to the smallest residual
        // among valid particles and flag the frame.
        let (best, underflow) = match select_best(&weights) {
            Some(b) => (b, false),
            None => {
                let b = (0..weights.len())
                    .filter(|&i| features[i].is_some())
                    .min_by(|&a, &b| errors[a].total_cmp(&errors[b]))
                    .expect("at least one valid particle");
                (b, true)
            }
        };
        let bbox = boxes[best];
        let mut replaced = None;
        if !underflow {
            let coeffs = solution.particle_coeffs(best, problem.particles(), problem.view_count())?;
            replaced = self
                .templates
                .maybe_update(
                    features[best].as_ref().expect("best particle is valid"),
                    &coeffs,
                    &self.cfg.update,
                    self.frame_idx,
                )?
                .replaced;
        }

        for (p, w) in self.particles.iter_mut().zip(&weights) {
            p.weight = *w;
        }
        match resample(&self.particles, &weights, &mut self.rng) {
            Some(next) => self.particles = next,
            None => reset_uniform(&mut self.particles),
        }

        self.last_box = bbox;
        self.last_problem = Some(problem);
        Ok(FrameOutput {
            bbox,
            likelihood: weights[best],
            degenerate: underflow,
            solver_iterations: solution.iterations,
            replaced_template: replaced,
        })
    }
}

/// One-pass evaluation run: initialize on the first frame's box, then track
/// every following frame without resets.
pub fn track_sequence<I>(frames: I, init: BBox, cfg: &TrackerConfig, seed: u64) -> Result<TrackRecord>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    track_sequence_with(frames, init, cfg, seed, |_, _| {}).map(|(r, _)| r)
}

/// Like [`track_sequence`], also handing each frame's output to `on_frame`
/// and returning the final tracker state.
pub fn track_sequence_with<I, F>(
    frames: I,
    init: BBox,
    cfg: &TrackerConfig,
    seed: u64,
    mut on_frame: F,
) -> Result<(TrackRecord, Tracker)>
where
    I: IntoIterator<Item = Result<Frame>>,
    F: FnMut(usize, &FrameOutput),
{
    let mut frames = frames.into_iter().enumerate();
    let first = match frames.next() {
        Some((_, Ok(f))) => f,
        Some((_, Err(e))) => return Err(frame_error(0, e)),
        None => return arg("sequence has no frames"),
    };
    let start = Instant::now();
    let mut tracker = Tracker::new(&first, init, cfg.clone(), seed)?;
    let mut record = TrackRecord::default();
    let first_out = FrameOutput {
        bbox: init,
        likelihood: 1.0,
        degenerate: false,
        solver_iterations: 0,
        replaced_template: None,
    };
    record.push(&first_out, start.elapsed().as_secs_f64());
    on_frame(0, &first_out);
    drop(first);

    for (idx, frame) in frames {
        let frame = frame.map_err(|e| frame_error(idx, e))?;
        let t = Instant::now();
        let out = tracker.track_frame(&frame)?;
        record.push(&out, t.elapsed().as_secs_f64());
        on_frame(idx, &out);
    }
    Ok((record, tracker))
}

fn frame_error(index: usize, e: Error) -> Error {
    match e {
        Error::Frame { .. } => e,
        other => Error::Frame {
            index,
            msg: other.to_string(),
        },
    }
}
