mod common;

use proptest::prelude::*;
use smtmvt::motion::{
    likelihood, normalize_weights, propagate, reconstruction_errors, resample, select_best, Bounds, MotionConfig,
    ParticleState,
};
use smtmvt::solver::{solve, SparseSolution};
use smtmvt::{Mat, Problem, SolverConfig, View};

fn states(n: usize) -> Vec<ParticleState> {
    (0..n)
        .map(|i| ParticleState {
            cx: 100.0 + i as f64,
            cy: 80.0,
            s: 1.0,
            r: 1.0,
            weight: 1.0 / n as f64,
        })
        .collect()
}

fn wide_bounds() -> Bounds {
    Bounds {
        x_min: -1e9,
        x_max: 1e9,
        y_min: -1e9,
        y_max: 1e9,
    }
}

fn solution_with(p: &Problem, c: Mat) -> SparseSolution {
    let (er, ec) = p.e_shape();
    let e = Mat::zeros(er, ec);
    let residuals = p.residuals(&c, &e).unwrap();
    SparseSolution {
        c,
        e,
        residuals,
        objective_trace: vec![0.0],
        best_objective: 0.0,
        iterations: 0,
        converged: true,
        step: 0.1,
    }
}

#[test]
fn zero_noise_leaves_states_unchanged() {
    let cfg = MotionConfig {
        std_x: 0.0,
        std_y: 0.0,
        std_s: 0.0,
        std_r: 0.0,
    };
    let s = states(20);
    assert_eq!(propagate(&s, &cfg, &wide_bounds(), &mut common::rng(1)), s);
}

#[test]
fn propagation_is_seeded() {
    let s = states(50);
    let cfg = MotionConfig::default();
    let a = propagate(&s, &cfg, &wide_bounds(), &mut common::rng(2));
    let b = propagate(&s, &cfg, &wide_bounds(), &mut common::rng(2));
    let c = propagate(&s, &cfg, &wide_bounds(), &mut common::rng(3));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn propagation_drift_is_within_sampling_error() {
    let n = 100_000;
    let base = ParticleState {
        cx: 0.0,
        cy: 0.0,
        s: 1.0,
        r: 1.0,
        weight: 1.0,
    };
    let cfg = MotionConfig::default();
    let out = propagate(&vec![base; n], &cfg, &wide_bounds(), &mut common::rng(4));
    let mean = |f: fn(&ParticleState) -> f64| out.iter().map(f).sum::<f64>() / n as f64;
    let bound = |std: f64| 3.0 * std / (n as f64).sqrt();
    assert!(mean(|p| p.cx).abs() < bound(cfg.std_x));
    assert!(mean(|p| p.cy).abs() < bound(cfg.std_y));
    assert!((mean(|p| p.s) - 1.0).abs() < bound(cfg.std_s));
    assert!((mean(|p| p.r) - 1.0).abs() < bound(cfg.std_r));
    let var_x = out.iter().map(|p| p.cx * p.cx).sum::<f64>() / n as f64;
    assert!((var_x.sqrt() - cfg.std_x).abs() < 0.02 * cfg.std_x);
}

#[test]
fn propagation_clamps_scale_and_position() {
    let cfg = MotionConfig {
        std_x: 500.0,
        std_y: 500.0,
        std_s: 5.0,
        std_r: 5.0,
    };
    let bounds = Bounds::for_frame(320, 240);
    for p in propagate(&states(500), &cfg, &bounds, &mut common::rng(5)) {
        assert!((0.5..=2.0).contains(&p.s) && (0.5..=2.0).contains(&p.r));
        assert!((bounds.x_min..=bounds.x_max).contains(&p.cx));
        assert!((bounds.y_min..=bounds.y_max).contains(&p.cy));
        assert!(p.to_box(30.0, 40.0).area() > 0.0);
    }
}

#[test]
fn likelihood_examples() {
    // Particle 0 is reconstructed exactly; particle 1 misses by 0.1 in total
    // squared residual.
    let d = Mat::identity(2);
    let x = Mat::from_vec(2, 2, vec![0.5, 0.5, 0.25, 0.25 - 0.1f64.sqrt()]).unwrap();
    let p = Problem::new(vec![View { x, d }]).unwrap();
    let c = Mat::from_vec(2, 2, vec![0.5, 0.5, 0.25, 0.25]).unwrap();
    let w = likelihood(&solution_with(&p, c), &p, 30.0).unwrap();
    assert_eq!(w[0], 1.0);
    assert!((w[1] - (-3.0f64).exp()).abs() < 1e-12);
    assert!((w[1] - 0.049787).abs() < 1e-6);
}

#[test]
fn likelihood_rejects_wrong_shape() {
    let p = Problem::new(vec![View {
        x: Mat::zeros(2, 3),
        d: Mat::identity(2),
    }])
    .unwrap();
    let other = Problem::new(vec![View {
        x: Mat::zeros(2, 2),
        d: Mat::identity(2),
    }])
    .unwrap();
    let sol = solve(&other, &SolverConfig::default()).unwrap();
    assert!(likelihood(&sol, &p, 30.0).is_err());
}

#[test]
fn likelihood_ignores_outlier_term() {
    let mut r = common::rng(6);
    let p = common::random_problem(&mut r, 2, 3, 4, 5);
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    let errs = reconstruction_errors(&sol, &p).unwrap();
    for i in 0..p.particles() {
        let mut total = 0.0;
        for (k, v) in p.views().iter().enumerate() {
            let fit = v.d.matmul(&p.c_block(&sol.c, k)).unwrap();
            for row in 0..fit.rows() {
                total += (fit[(row, i)] - v.x[(row, i)]).powi(2);
            }
        }
        assert!((errs[i] - total).abs() < 1e-12);
    }
}

#[test]
fn select_best_examples() {
    assert_eq!(select_best(&[0.1, 0.9, 0.3]), Some(1));
    assert_eq!(select_best(&[0.2, 0.2, 0.2]), Some(0));
    assert_eq!(select_best(&[0.0, 0.0]), None);
}

#[test]
fn resampling_a_point_mass_copies_it() {
    let s = states(10);
    let mut w = vec![0.0; 10];
    w[7] = 1.0;
    let out = resample(&s, &w, &mut common::rng(7)).unwrap();
    assert!(out.iter().all(|p| p.cx == s[7].cx && (p.weight - 0.1).abs() < 1e-15));
    assert!(resample(&s, &[0.0; 10], &mut common::rng(7)).is_none());
}

#[test]
fn uniform_resampling_is_reproducible() {
    let s = states(30);
    let w = vec![1.0; 30];
    let a = resample(&s, &w, &mut common::rng(8)).unwrap();
    let b = resample(&s, &w, &mut common::rng(8)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 30);
}

/// Average multiplicity over 10^4 trials tracks the normalized weight.
#[test]
fn resampling_multiplicity_matches_weights() {
    let n = 8;
    let s: Vec<ParticleState> = (0..n)
        .map(|i| ParticleState {
            cx: i as f64,
            ..states(1)[0]
        })
        .collect();
    let raw = [0.05, 0.3, 0.0, 0.15, 0.1, 0.2, 0.12, 0.08];
    let w = normalize_weights(&raw).unwrap();
    let mut counts = vec![0usize; n];
    let trials = 10_000;
    let mut rng = common::rng(9);
    for _ in 0..trials {
        for p in resample(&s, &raw, &mut rng).unwrap() {
            counts[p.cx as usize] += 1;
        }
    }
    for i in 0..n {
        let freq = counts[i] as f64 / (trials * n) as f64;
        assert!((freq - w[i]).abs() < 0.02, "particle {i}: {freq} vs {}", w[i]);
    }
    assert_eq!(counts[2], 0);
}

proptest! {
    #[test]
    fn normalized_weights_sum_to_one(w in prop::collection::vec(0.0f64..10.0, 1..50)) {
        if let Some(n) = normalize_weights(&w) {
            prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(n.iter().all(|&x| x >= 0.0));
        } else {
            prop_assert!(w.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn select_best_is_scale_invariant(w in prop::collection::vec(0.0f64..1.0, 1..40), scale in 1e-3f64..1e3) {
        let scaled: Vec<f64> = w.iter().map(|x| x * scale).collect();
        prop_assert_eq!(select_best(&w), select_best(&scaled));
    }

    #[test]
    fn likelihood_is_decreasing_in_residual(a in 0.0f64..2.0, b in 0.0f64..2.0, alpha in 0.1f64..50.0) {
        let d = Mat::identity(1);
        let x = Mat::from_vec(1, 2, vec![a.sqrt(), b.sqrt()]).unwrap();
        let p = Problem::new(vec![View { x, d }]).unwrap();
        let w = likelihood(&solution_with(&p, Mat::zeros(1, 2)), &p, alpha).unwrap();
        prop_assert!(w.iter().all(|&v| v > 0.0 && v <= 1.0) || w.iter().any(|&v| v == 0.0));
        if a < b {
            prop_assert!(w[0] >= w[1]);
            if alpha * (b - a) > 1e-9 {
                prop_assert!(w[0] > w[1]);
            }
        }
    }
}
