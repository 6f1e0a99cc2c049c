//! Shared fixtures for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smtmvt::{Mat, Problem, View};

/// Random problem with unit-norm dictionary and candidate columns, shaped like
/// one tracker frame.
pub fn tracker_sized_problem(seed: u64, dims: &[usize], templates: usize, particles: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let views = dims
        .iter()
        .map(|&d| View {
            x: unit_columns(&mut rng, d, particles),
            d: unit_columns(&mut rng, d, templates),
        })
        .collect();
    Problem::new(views).expect("consistent shapes")
}

fn unit_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    let columns: Vec<Vec<f64>> = (0..cols)
        .map(|_| {
            let v: Vec<f64> = (0..rows).map(|_| rng.random_range(0.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    Mat::from_cols(&columns).expect("finite")
}
