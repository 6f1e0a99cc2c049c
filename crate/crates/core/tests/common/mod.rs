//! Independent reference computations shared by the integration tests.
//!
//! Nothing in here calls into the solver or the SVD: nuclear norms come from
//! a cyclic Jacobi eigensolver on `Y^T Y`, objectives are re-derived from the
//! formula with plain loops.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smtmvt::{Mat, Problem, View};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Mat {
    Mat::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect(),
    )
    .unwrap()
}

pub fn random_problem(rng: &mut ChaCha8Rng, k: usize, templates: usize, n: usize, d: usize) -> Problem {
    let views = (0..k)
        .map(|_| View {
            x: uniform_mat(rng, d, n, 0.0, 1.0),
            d: uniform_mat(rng, d, templates, 0.0, 1.0),
        })
        .collect();
    Problem::new(views).unwrap()
}

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix by cyclic
/// Jacobi rotations.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    (vals, v)
}

pub fn gram(y: &Mat) -> Vec<Vec<f64>> {
    let n = y.cols();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..y.rows()).map(|r| y[(r, i)] * y[(r, j)]).sum();
        }
    }
    g
}

/// Singular values via eigenvalues of the smaller of `Y^T Y` and `Y Y^T`,
/// descending. Eigenvalues under the Gram rounding floor count as zero.
pub fn oracle_singular_values(y: &Mat) -> Vec<f64> {
    let g = if y.rows() < y.cols() { gram(&y.transpose()) } else { gram(y) };
    let (vals, _) = jacobi_eigen(&g);
    let top = vals.iter().fold(0.0f64, |m, &l| m.max(l));
    let floor = 1e-13 * top;
    let mut s: Vec<f64> = vals
        .into_iter()
        .map(|l| if l <= floor { 0.0 } else { l.sqrt() })
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn oracle_nuclear(y: &Mat) -> f64 {
    oracle_singular_values(y).iter().sum()
}

/// `U V^T = Y V diag(1/s) V^T` restricted to eigenpairs with `s > tol * s_max`.
pub fn oracle_polar(y: &Mat) -> Mat {
    let (vals, vecs) = jacobi_eigen(&gram(y));
    let n = y.cols();
    let smax = vals.iter().fold(0.0f64, |m, &l| m.max(l.max(0.0).sqrt()));
    let mut out = Mat::zeros(y.rows(), n);
    for (t, &l) in vals.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        if s <= 1e-10 * smax || s == 0.0 {
            continue;
        }
        for r in 0..y.rows() {
            let yv: f64 = (0..n).map(|j| y[(r, j)] * vecs[j][t]).sum::<f64>() / s;
            for j in 0..n {
                out[(r, j)] += yv * vecs[j][t];
            }
        }
    }
    out
}

/// Plain-loop objective. `c` is N x nK view-major, `e` is (sum d) x n.
pub fn oracle_objective(p: &Problem, c: &Mat, e: &Mat, lambda: f64, gamma: f64) -> f64 {
    let n = p.particles();
    let k = p.view_count();
    let nt = p.templates();
    let mut fit = 0.0;
    let mut off = 0;
    for (l, v) in p.views().iter().enumerate() {
        for r in 0..v.x.rows() {
            for i in 0..n {
                let mut pred = 0.0;
                for a in 0..nt {
                    pred += v.d[(r, a)] * c[(a, l * n + i)];
                }
                let g = v.x[(r, i)] - pred - e[(off + r, i)];
                fit += g * g;
            }
        }
        off += v.x.rows();
    }
    let mut nuc = 0.0;
    for i in 0..n {
        let mut g = Mat::zeros(nt, k);
        for a in 0..nt {
            for l in 0..k {
                g[(a, l)] = c[(a, l * n + i)];
            }
        }
        nuc += oracle_nuclear(&g);
    }
    let l1c: f64 = c.as_slice().iter().sum();
    let l1e: f64 = e.as_slice().iter().map(|x| x.abs()).sum();
    fit + lambda * nuc + gamma * (l1c + l1e)
}

/// Projected subgradient method on the full objective with diminishing steps
/// `a0 / sqrt(t)`; returns the best objective seen.
pub fn projected_subgradient(p: &Problem, lambda: f64, gamma: f64, iters: usize, a0: f64) -> f64 {
    projected_subgradient_point(p, lambda, gamma, iters, a0).0
}

/// Same as [`projected_subgradient`] but also returns the best `(C, E)`.
pub fn projected_subgradient_point(
    p: &Problem,
    lambda: f64,
    gamma: f64,
    iters: usize,
    a0: f64,
) -> (f64, Mat, Mat) {
    let n = p.particles();
    let k = p.view_count();
    let nt = p.templates();
    let mut c = Mat::zeros(nt, n * k);
    let mut e = Mat::zeros(p.total_dim(), n);
    let mut best = oracle_objective(p, &c, &e, lambda, gamma);
    let mut best_ce = (c.clone(), e.clone());
    for t in 1..=iters {
        let mut gc = Mat::filled(nt, n * k, gamma);
        let mut ge = e.map(|x| gamma * if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 });
        let mut off = 0;
        for (l, v) in p.views().iter().enumerate() {
            for r in 0..v.x.rows() {
                for i in 0..n {
                    let mut pred = 0.0;
                    for a in 0..nt {
                        pred += v.d[(r, a)] * c[(a, l * n + i)];
                    }
                    let g = v.x[(r, i)] - pred - e[(off + r, i)];
                    ge[(off + r, i)] -= 2.0 * g;
                    for a in 0..nt {
                        gc[(a, l * n + i)] -= 2.0 * v.d[(r, a)] * g;
                    }
                }
            }
            off += v.x.rows();
        }
        if lambda > 0.0 {
            for i in 0..n {
                let mut g = Mat::zeros(nt, k);
                for a in 0..nt {
                    for l in 0..k {
                        g[(a, l)] = c[(a, l * n + i)];
                    }
                }
                let pol = oracle_polar(&g);
                for a in 0..nt {
                    for l in 0..k {
                        gc[(a, l * n + i)] += lambda * pol[(a, l)];
                    }
                }
            }
        }
        let step = a0 / (t as f64).sqrt();
        c = c.axpy(-step, &gc).unwrap().map(|x| x.max(0.0));
        e = e.axpy(-step, &ge).unwrap();
        let f = oracle_objective(p, &c, &e, lambda, gamma);
        if f < best {
            best = f;
            best_ce = (c.clone(), e.clone());
        }
    }
    (best, best_ce.0, best_ce.1)
}

/// Exhaustive search of the scalar objective over `c in [0, 2]`,
/// `e in [-2, 2]` at the given step.
pub fn scalar_grid(x: f64, d: f64, lambda: f64, gamma: f64, step: f64) -> (f64, f64, f64) {
    let nc = (2.0 / step).round() as usize;
    let ne = (4.0 / step).round() as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nc {
        let c = i as f64 * step;
        for j in 0..=ne {
            let e = -2.0 + j as f64 * step;
            let r = x - d * c - e;
            let f = r * r + lambda * c + gamma * (c + e.abs());
            if f < best.0 {
                best = (f, c, e);
            }
        }
    }
    best
}
