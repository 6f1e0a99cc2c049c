//! Proximal-gradient solver for the structured multi-task multi-view sparse
//! coding problem
//!
//! ```text
//! minimize_{C >= 0, E}  sum_k |X^k - D^k C^k - E^k|_F^2
//!                     + lambda * sum_i |Pi_i(C)|_*
//!                     + gamma * (1^T C 1 + |E|_1)
//! ```
//!
//! `C` is `N x (n K)` with view-major column blocks `[C^1 | ... | C^K]`, and
//! `E` stacks the per-view outlier blocks `E^k` vertically. The smooth part
//! (quadratic fit, linear `gamma * 1^T C 1`, and the nuclear term through its
//! subgradient) is stepped jointly; `E` is then soft-thresholded and `C`
//! projected onto the nonnegative orthant.

mod container;

pub use container::{read_problem, read_problem_file, write_problem, write_problem_file};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, shape, Error, Result};
use crate::linalg::{
    project_nonneg, soft_threshold, spectral_norm, steepest_nuclear_subgradient, svd_thin, Mat, SvdFactors, REL_CUTOFF,
};

/// Feature matrix and dictionary of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    /// `d_k x n` candidate features, one column per particle.
    pub x: Mat,
    /// `d_k x N` templates.
    pub d: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    views: Vec<View>,
    n: usize,
    templates: usize,
    offsets: Vec<usize>,
}

impl Problem {
    pub fn new(views: Vec<View>) -> Result<Self> {
        let Some(first) = views.first() else {
            return arg("a problem needs at least one view");
        };
        let n = first.x.cols();
        let templates = first.d.cols();
        if n == 0 || templates == 0 {
            return arg("particle and template counts must be positive");
        }
        let mut offsets = Vec::with_capacity(views.len());
        let mut off = 0;
        for (k, v) in views.iter().enumerate() {
            if v.x.cols() != n {
                return shape(format!("view {k}: X has {} columns, expected {n}", v.x.cols()));
            }
            if v.d.cols() != templates {
                return shape(format!(
                    "view {k}: D has {} columns, expected {templates}",
                    v.d.cols()
                ));
            }
            if v.x.rows() != v.d.rows() || v.x.rows() == 0 {
                return shape(format!(
                    "view {k}: X has {} rows but D has {}",
                    v.x.rows(),
                    v.d.rows()
                ));
            }
            if !v.x.is_finite() || !v.d.is_finite() {
                return arg(format!("view {k}: non-finite entries"));
            }
            offsets.push(off);
            off += v.x.rows();
        }
        Ok(Self {
            views,
            n,
            templates,
            offsets,
        })
    }

    pub fn views(&self) -> &[View] {
        &self.views
    }

    /// Particle (task) count `n`.
    pub fn particles(&self) -> usize {
        self.n
    }

    /// Template count `N`.
    pub fn templates(&self) -> usize {
        self.templates
    }

    /// View count `K`.
    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    pub fn view_dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.x.rows()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.views.iter().map(|v| v.x.rows()).sum()
    }

    /// First row of view `k` inside the stacked `E`.
    pub fn row_offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn c_shape(&self) -> (usize, usize) {
        (self.templates, self.n * self.views.len())
    }

    pub fn e_shape(&self) -> (usize, usize) {
        (self.total_dim(), self.n)
    }

    fn check_iterate(&self, c: &Mat, e: &Mat) -> Result<()> {
        if c.shape() != self.c_shape() {
            return shape(format!("C is {:?}, expected {:?}", c.shape(), self.c_shape()));
        }
        if e.shape() != self.e_shape() {
            return shape(format!("E is {:?}, expected {:?}", e.shape(), self.e_shape()));
        }
        Ok(())
    }

    /// `C^k`, the `N x n` block of view `k`.
    pub fn c_block(&self, c: &Mat, k: usize) -> Mat {
        c.col_block(k * self.n, self.n)
    }

    /// `E^k`, the `d_k x n` block of view `k`.
    pub fn e_block(&self, e: &Mat, k: usize) -> Mat {
        e.row_block(self.offsets[k], self.views[k].x.rows())
    }

    /// Per-view `G^k = X^k - D^k C^k - E^k`.
    pub fn residuals(&self, c: &Mat, e: &Mat) -> Result<Vec<Mat>> {
        self.check_iterate(c, e)?;
        Ok(self.residuals_unchecked(c, e))
    }

    fn residuals_unchecked(&self, c: &Mat, e: &Mat) -> Vec<Mat> {
        self.views
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let fit = v.d.matmul(&self.c_block(c, k)).expect("shapes checked");
                let mut r = v.x.sub(&fit).expect("shapes checked");
                let off = self.offsets[k];
                for row in 0..r.rows() {
                    for (rv, ev) in r.row_mut(row).iter_mut().zip(e.row(off + row)) {
                        *rv -= ev;
                    }
                }
                r
            })
            .collect()
    }
}

/// Step size of the proximal-gradient iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepSize {
    /// Inverse Lipschitz constant of the smooth block, see [`auto_step`].
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for StepSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(StepSize::Auto);
        }
        match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(StepSize::Fixed(v)),
            _ => arg(format!("step size must be 'auto' or a positive number, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight of the per-particle nuclear norms.
    pub lambda: f64,
    /// Weight of the L1 penalties on `C` and `E`.
    pub gamma: f64,
    pub sigma: StepSize,
    /// Relative iterate-change stopping tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// SVD cutoff used by the nuclear subgradient.
    pub rel_cutoff: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            gamma: 0.25,
            sigma: StepSize::Auto,
            tol: 1e-4,
            max_iter: 100,
            rel_cutoff: REL_CUTOFF,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return arg(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return arg(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if let StepSize::Fixed(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return arg(format!("step size must be > 0, got {s}"));
            }
        }
        if !(self.tol > 0.0) {
            return arg(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return arg("max_iter must be at least 1");
        }
        if !(0.0..1.0).contains(&self.rel_cutoff) {
            return arg(format!("rel_cutoff must lie in [0, 1), got {}", self.rel_cutoff));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparseSolution {
    /// `N x (n K)`, elementwise nonnegative.
    pub c: Mat,
    /// `(sum d_k) x n`.
    pub e: Mat,
    /// `G^k = X^k - D^k C^k - E^k` at the returned iterate.
    pub residuals: Vec<Mat>,
    /// Objective at the zero initialization followed by one entry per
    /// iteration.
    pub objective_trace: Vec<f64>,
    pub best_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Initial step size; halved on each stall restart.
    pub step: f64,
}

impl SparseSolution {
    /// Coefficient columns of particle `i` across the views (`N x K`).
    pub fn particle_coeffs(&self, i: usize, n: usize, k: usize) -> Result<Mat> {
        crate::linalg::column_group_select(&self.c, i, n, k)
    }
}

/// Reusable per-iteration state: residuals and the SVD of every `Pi_i(C)` at
/// the current point.
struct Workspace {
    residuals: Vec<Mat>,
    /// Only filled when `lambda > 0` and gradients are wanted.
    factors: Vec<SvdFactors>,
}

fn group(c: &Mat, i: usize, n: usize, k: usize) -> Mat {
    let mut g = Mat::zeros(c.rows(), k);
    for r in 0..c.rows() {
        let row = c.row(r);
        for l in 0..k {
            g[(r, l)] = row[l * n + i];
        }
    }
    g
}

impl Workspace {
    fn new(p: &Problem) -> Self {
        Self {
            residuals: p.views.iter().map(|v| Mat::zeros(v.x.rows(), p.n)).collect(),
            factors: Vec::new(),
        }
    }

    /// Fills residuals (and polars when `want_polars`) at `(c, e)` and
    /// returns the objective there.
    fn evaluate(&mut self, p: &Problem, c: &Mat, e: &Mat, cfg: &SolverConfig, want_polars: bool) -> f64 {
        let (n, k) = (p.particles(), p.view_count());
        let mut fit = 0.0;
        for (l, (view, r)) in p.views.iter().zip(&mut self.residuals).enumerate() {
            let off = p.offsets[l];
            for row in 0..r.rows() {
                let out = r.row_mut(row);
                for ((o, x), ev) in out.iter_mut().zip(view.x.row(row)).zip(e.row(off + row)) {
                    *o = x - ev;
                }
                for (a, &dv) in view.d.row(row).iter().enumerate() {
                    if dv == 0.0 {
                        continue;
                    }
                    for (o, cv) in out.iter_mut().zip(&c.row(a)[l * n..(l + 1) * n]) {
                        *o -= dv * cv;
                    }
                }
                fit += out.iter().map(|v| v * v).sum::<f64>();
            }
        }

        let mut nuclear = 0.0;
        self.factors.clear();
        if cfg.lambda > 0.0 {
            let per_particle =
                |i: usize| svd_thin(&group(c, i, n, k), cfg.rel_cutoff).expect("cutoff validated");
            let factors: Vec<SvdFactors> = if n >= 64 {
                (0..n).into_par_iter().map(per_particle).collect()
            } else {
                (0..n).map(per_particle).collect()
            };
            nuclear = factors.iter().map(|f| f.s.iter().sum::<f64>()).sum();
            if want_polars {
                self.factors = factors;
            }
        }
        fit + cfg.lambda * nuclear + cfg.gamma * (c.sum() + e.l1())
    }

    /// `-2 D^T G + gamma` plus `lambda` times, per particle, the nuclear
    /// subgradient closest to cancelling that smooth part. Written into `out`.
    fn grad_c_into(&self, p: &Problem, cfg: &SolverConfig, out: &mut Mat) {
        let (n, k, big_n) = (p.particles(), p.view_count(), p.templates());
        out.as_mut_slice().fill(cfg.gamma);
        for (l, (view, r)) in p.views.iter().zip(&self.residuals).enumerate() {
            for row in 0..r.rows() {
                let rrow = r.row(row);
                for (a, &dv) in view.d.row(row).iter().enumerate() {
                    if dv == 0.0 {
                        continue;
                    }
                    let dst = &mut out.row_mut(a)[l * n..(l + 1) * n];
                    for (g, rv) in dst.iter_mut().zip(rrow) {
                        *g -= 2.0 * dv * rv;
                    }
                }
            }
        }
        if cfg.lambda > 0.0 && !self.factors.is_empty() {
            let subgrads: Vec<Mat> = (0..n)
                .map(|i| {
                    let g = group(out, i, n, k);
                    steepest_nuclear_subgradient(&self.factors[i], &g, cfg.lambda, cfg.rel_cutoff)
                        .expect("group shapes agree")
                })
                .collect();
            for (i, sg) in subgrads.iter().enumerate() {
                for a in 0..big_n {
                    for l in 0..k {
                        out[(a, l * n + i)] += cfg.lambda * sg[(a, l)];
                    }
                }
            }
        }
    }

    /// `-2 G` stacked like `E`.
    fn grad_e(&self, p: &Problem) -> Mat {
        let mut g = Mat::zeros(p.total_dim(), p.n);
        for (l, r) in self.residuals.iter().enumerate() {
            let off = p.offsets[l];
            for row in 0..r.rows() {
                for (gv, rv) in g.row_mut(off + row).iter_mut().zip(r.row(row)) {
                    *gv = -2.0 * rv;
                }
            }
        }
        g
    }
}

/// Full objective at `(c, e)`. Negative entries of `c` are rejected rather
/// than clamped.
pub fn objective(p: &Problem, c: &Mat, e: &Mat, cfg: &SolverConfig) -> Result<f64> {
    p.check_iterate(c, e)?;
    if c.min() < 0.0 {
        return arg("C must be elementwise nonnegative");
    }
    Ok(Workspace::new(p).evaluate(p, c, e, cfg, false))
}

/// Gradient of the smooth part with respect to `E`, and a subgradient with
/// respect to `C` (quadratic + `gamma * 1^T C 1` + `lambda` times the
/// scattered nuclear subgradients). Where a coefficient block is rank
/// deficient the subgradient is the steepest one, see
/// [`steepest_nuclear_subgradient`].
pub fn smooth_grad(p: &Problem, c: &Mat, e: &Mat, cfg: &SolverConfig) -> Result<(Mat, Mat)> {
    p.check_iterate(c, e)?;
    let mut ws = Workspace::new(p);
    ws.evaluate(p, c, e, cfg, true);
    let mut grad_c = Mat::zeros(p.templates(), p.n * p.view_count());
    ws.grad_c_into(p, cfg, &mut grad_c);
    Ok((grad_c, ws.grad_e(p)))
}

/// `E <- S_{sigma gamma}(E - sigma grad_E)`.
pub fn pg_step_e(e: &Mat, grad_e: &Mat, sigma: f64, gamma: f64) -> Result<Mat> {
    if !(sigma > 0.0) {
        return arg("step size must be positive");
    }
    soft_threshold(&e.axpy(-sigma, grad_e)?, sigma * gamma)
}

/// `C <- max(C - sigma grad_C, 0)`.
pub fn pg_step_c(c: &Mat, grad_c: &Mat, sigma: f64) -> Result<Mat> {
    if !(sigma > 0.0) {
        return arg("step size must be positive");
    }
    Ok(project_nonneg(&c.axpy(-sigma, grad_c)?))
}

const STEP_EPS: f64 = 1e-12;

/// `1 / (2 (max_k |D^k|_2^2 + 1) + eps)`: the inverse Lipschitz constant of
/// the quadratic fit term taken jointly in `(C, E)`.
pub fn auto_step(p: &Problem) -> f64 {
    let worst = p
        .views()
        .iter()
        .map(|v| spectral_norm(&v.d).powi(2))
        .fold(0.0, f64::max);
    1.0 / (2.0 * (worst + 1.0) + STEP_EPS)
}

#[inline]
fn shrink(v: f64, rho: f64) -> f64 {
    v.signum() * (v.abs() - rho).max(0.0)
}

/// Iterations without a new best objective before the step is halved.
pub const STALL_WINDOW: usize = 10;

/// Runs the proximal-gradient iteration from `C = 0, E = 0`.
///
/// Both updates use the gradient at the iteration-start point. Because the
/// nuclear term enters through a subgradient the trace is not monotone in
/// general, so the best iterate seen is returned. After [`STALL_WINDOW`]
/// iterations without improvement the iteration restarts from the best
/// point with half the step.

pub fn solve(p: &Problem, cfg: &SolverConfig) -> Result<SparseSolution> {
    cfg.validate()?;
    let sigma0 = match cfg.sigma {
        StepSize::Auto => auto_step(p),
        StepSize::Fixed(s) => s,
    };
    let mut sigma = sigma0;
    let (cr, cc) = p.c_shape();
    let (er, ec) = p.e_shape();
    let mut c = Mat::zeros(cr, cc);
    let mut e = Mat::zeros(er, ec);
    let mut c_next = Mat::zeros(cr, cc);
    let mut e_next = Mat::zeros(er, ec);
    let mut grad_c = Mat::zeros(cr, cc);
    let mut ws = Workspace::new(p);
    let mut obj = ws.evaluate(p, &c, &e, cfg, true);

    let mut trace = vec![obj];
    let (mut best_obj, mut best_c, mut best_e) = (obj, c.clone(), e.clone());
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;

    for it in 1..=cfg.max_iter {
        iterations = it;
        ws.grad_c_into(p, cfg, &mut grad_c);
        let rho = sigma * cfg.gamma;

        // E - sigma * (-2 G), soft-thresholded, tracking |dE| and |E|.
        let (mut de, mut ne) = (0.0, 0.0);
        for (l, r) in ws.residuals.iter().enumerate() {
            let off = p.offsets[l];
            for row in 0..r.rows() {
                let src = e.row(off + row);
                let dst = e_next.row_mut(off + row);
                for ((o, &ev), &rv) in dst.iter_mut().zip(src).zip(r.row(row)) {
                    *o = shrink(ev + 2.0 * sigma * rv, rho);
                    de += (*o - ev) * (*o - ev);
                    ne += ev * ev;
                }
            }
        }
        let (mut dc, mut nc) = (0.0, 0.0);
        for ((o, &cv), &g) in c_next
            .as_mut_slice()
            .iter_mut()
            .zip(c.as_slice())
            .zip(grad_c.as_slice())
        {
            *o = (cv - sigma * g).max(0.0);
            dc += (*o - cv) * (*o - cv);
            nc += cv * cv;
        }
        if !(de.is_finite() && dc.is_finite()) {
            return Err(Error::Divergence { iteration: it });
        }
        let delta = (dc.sqrt() / (1.0 + nc.sqrt())).max(de.sqrt() / (1.0 + ne.sqrt()));
        std::mem::swap(&mut c, &mut c_next);
        std::mem::swap(&mut e, &mut e_next);
        debug_assert!(c.min() >= 0.0);

        obj = ws.evaluate(p, &c, &e, cfg, true);
        if !obj.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        trace.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best_c.as_mut_slice().copy_from_slice(c.as_slice());
            best_e.as_mut_slice().copy_from_slice(e.as_slice());
            stalled = 0;
        } else {
            stalled += 1;
        }
        if stalled == STALL_WINDOW {
            // The subgradient iteration is cycling around a kink: restart
            // from the best point with half the step.
            sigma *= 0.5;
            stalled = 0;
            c.as_mut_slice().copy_from_slice(best_c.as_slice());
            e.as_mut_slice().copy_from_slice(best_e.as_slice());
            ws.evaluate(p, &c, &e, cfg, true);
        }
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let residuals = p.residuals_unchecked(&best_c, &best_e);
    Ok(SparseSolution {
        c: best_c,
        e: best_e,
        residuals,
        objective_trace: trace,
        best_objective: best_obj,
        iterations,
        converged,
        step: sigma0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem(x: f64, d: f64) -> Problem {
        Problem::new(vec![View {
            x: Mat::from_vec(1, 1, vec![x]).unwrap(),
            d: Mat::from_vec(1, 1, vec![d]).unwrap(),
        }])
        .unwrap()
    }

    fn one(v: f64) -> Mat {
        Mat::from_vec(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn scalar_objective_by_hand() {
        let p = scalar_problem(1.0, 1.0);
        let cfg = SolverConfig::default();
        let f = objective(&p, &one(0.5), &one(0.1), &cfg).unwrap();
        assert!((f - 0.36).abs() < 1e-12, "{f}");
    }

    #[test]
    fn objective_at_zero_is_data_energy() {
        let x = Mat::from_vec(2, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0]).unwrap();
        let d = Mat::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let p = Problem::new(vec![View { x: x.clone(), d }]).unwrap();
        let cfg = SolverConfig::default();
        let c = Mat::zeros(2, 3);
        let e = Mat::zeros(2, 3);
        let f = objective(&p, &c, &e, &cfg).unwrap();
        assert!((f - x.frobenius_sq()).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_negative_c_and_bad_shapes() {
        let p = scalar_problem(1.0, 1.0);
        let cfg = SolverConfig::default();
        assert!(objective(&p, &one(-0.1), &one(0.0), &cfg).is_err());
        assert!(objective(&p, &Mat::zeros(1, 2), &one(0.0), &cfg).is_err());
    }

    #[test]
    fn problem_validates_shapes() {
        let good = View {
            x: Mat::zeros(3, 2),
            d: Mat::zeros(3, 4),
        };
        let bad_rows = View {
            x: Mat::zeros(2, 2),
            d: Mat::zeros(3, 4),
        };
        let bad_n = View {
            x: Mat::zeros(3, 5),
            d: Mat::zeros(3, 4),
        };
        assert!(Problem::new(vec![good.clone()]).is_ok());
        assert!(Problem::new(vec![bad_rows]).is_err());
        assert!(Problem::new(vec![good, bad_n]).is_err());
        assert!(Problem::new(vec![]).is_err());
    }

    #[test]
    fn stationary_point_has_zero_gradients() {
        let d = Mat::from_vec(2, 2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        let c = Mat::from_vec(2, 1, vec![0.3, 0.7]).unwrap();
        let e = Mat::from_vec(2, 1, vec![0.1, -0.2]).unwrap();
        let x = d.matmul(&c).unwrap().add(&e).unwrap();
        let p = Problem::new(vec![View { x, d }]).unwrap();
        let cfg = SolverConfig {
            lambda: 0.0,
            gamma: 0.0,
            ..SolverConfig::default()
        };
        let (gc, ge) = smooth_grad(&p, &c, &e, &cfg).unwrap();
        assert!(gc.max_abs() < 1e-14);
        assert!(ge.max_abs() < 1e-14);
    }

    #[test]
    fn pg_steps_fixed_points() {
        let e = Mat::from_vec(1, 3, vec![0.5, -1.0, 2.0]).unwrap();
        let z = Mat::zeros(1, 3);
        assert_eq!(pg_step_e(&e, &z, 0.3, 0.0).unwrap(), e);
        assert_eq!(pg_step_e(&z, &z, 0.3, 5.0).unwrap(), z);

        let c = Mat::from_vec(1, 3, vec![0.5, 0.0, 2.0]).unwrap();
        assert_eq!(pg_step_c(&c, &z, 0.3).unwrap(), c);
        let g = Mat::from_vec(1, 3, vec![1.0, 0.0, 4.0]).unwrap();
        assert_eq!(pg_step_c(&z, &g, 0.3).unwrap(), z);

        let g = Mat::from_vec(1, 3, vec![1.0, -2.0, 4.0]).unwrap();
        let out = pg_step_c(&c, &g, 0.5).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 1.0, 0.0]);
        assert!(pg_step_c(&c, &g, 0.0).is_err());
    }

    #[test]
    fn zero_data_converges_immediately() {
        let p = Problem::new(vec![
            View {
                x: Mat::zeros(3, 2),
                d: Mat::from_vec(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap(),
            },
            View {
                x: Mat::zeros(2, 2),
                d: Mat::from_vec(2, 2, vec![0.6, 0.0, 0.8, 1.0]).unwrap(),
            },
        ])
        .unwrap();
        let sol = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.converged);
        assert_eq!(sol.c, Mat::zeros(2, 4));
        assert_eq!(sol.e, Mat::zeros(5, 2));
        assert_eq!(sol.best_objective, 0.0);
    }

    #[test]
    fn auto_step_unit_and_scaled_dictionaries() {
        let p = scalar_problem(1.0, 1.0);
        assert!((auto_step(&p) - 1.0 / 4.0).abs() < 1e-12);
        let p = scalar_problem(1.0, 10.0);
        assert!((auto_step(&p) - 1.0 / 202.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg = SolverConfig {
            max_iter: 0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = SolverConfig {
            sigma: StepSize::Fixed(-1.0),
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert_eq!("auto".parse::<StepSize>().unwrap(), StepSize::Auto);
        assert_eq!("0.05".parse::<StepSize>().unwrap(), StepSize::Fixed(0.05));
        assert!("-1".parse::<StepSize>().is_err());
    }
}
