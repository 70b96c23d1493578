#![allow(dead_code)]

use nalgebra::DMatrix;
use pvarsde::path::{MatrixStepPath, StepPath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly increasing times starting at 0 with random gaps.
pub fn random_times(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut t = 0.0;
    let mut out = vec![0.0];
    for _ in 1..len {
        t += rng.random_range(0.05..1.0);
        out.push(t);
    }
    out
}

pub fn random_path(rng: &mut impl Rng, len: usize, dim: usize, scale: f64) -> StepPath {
    let times = random_times(rng, len);
    let values = (0..len).map(|_| (0..dim).map(|_| rng.random_range(-scale..scale)).collect()).collect();
    StepPath::new(times, values).unwrap()
}

/// Random walk path, which has more structure than i.i.d. values.
pub fn random_walk(rng: &mut impl Rng, len: usize, dim: usize, scale: f64) -> StepPath {
    let times = random_times(rng, len);
    let mut cur = vec![0.0; dim];
    let values = (0..len)
        .map(|i| {
            if i > 0 {
                cur.iter_mut().for_each(|c| *c += rng.random_range(-scale..scale));
            }
            cur.clone()
        })
        .collect();
    StepPath::new(times, values).unwrap()
}

pub fn random_matrix_path(rng: &mut impl Rng, len: usize, dim: usize, scale: f64) -> MatrixStepPath {
    let times = random_times(rng, len);
    let mats = (0..len).map(|_| DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-scale..scale))).collect();
    MatrixStepPath::new(times, mats).unwrap()
}

/// Exhaustive `v_p` over every subsequence of at least two points.
pub fn brute_force_pvar(values: &[Vec<f64>], p: f64) -> f64 {
    let n = values.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s: f64 = idx
            .windows(2)
            .map(|w| {
                let d: f64 = values[w[0]].iter().zip(&values[w[1]]).map(|(a, b)| (a - b) * (a - b)).sum();
                d.sqrt().powf(p)
            })
            .sum();
        best = best.max(s);
    }
    best
}

pub fn values_of(path: &StepPath) -> Vec<Vec<f64>> {
    path.values().map(|v| v.to_vec()).collect()
}
