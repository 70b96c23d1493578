//! Randomized inequality campaign behind `pvarsde verify`.

use nalgebra::DMatrix;
use pvarsde::check::Check;
use pvarsde::drivers::stream_rng;
use pvarsde::path::{Interval, MatrixStepPath, StepPath};
use pvarsde::skorokhod::{self, check_estimates_with, running_max_contraction, Reflection, Solver};
use pvarsde::young::young_bound_check;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;

const PS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const PAIRS: [(f64, f64); 4] = [(1.5, 1.5), (2.0, 1.2), (1.2, 2.0), (3.0, 1.1)];
/// Absolute tolerance for the reflection invariants.
pub const INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct Campaign {
    pub cases: usize,
    pub seed: u64,
    pub slack: f64,
    pub corrupt_solver: bool,
}

/// Solver with an inflated regulator; exists only to exercise the negative control.
fn inflated_solver(y: &StepPath, l: &StepPath) -> skorokhod::Result<Reflection> {
    let mut r = skorokhod::solve_sp(y, l)?;
    r.k = r.k.map(|v| 1.5 * v)?;
    r.x = r.y.add(&r.k)?;
    Ok(r)
}

fn times(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut t = 0.0;
    (0..len)
        .map(|i| {
            if i > 0 {
                t += rng.random_range(0.05..1.0);
            }
            t
        })
        .collect()
}

fn walk(rng: &mut impl Rng, len: usize, dim: usize, start: f64) -> Result<StepPath> {
    let ts = times(rng, len);
    let mut cur = vec![start; dim];
    let values = (0..len)
        .map(|i| {
            if i > 0 {
                cur.iter_mut().for_each(|c| *c += rng.random_range(-1.0..1.0));
            }
            cur.clone()
        })
        .collect();
    Ok(StepPath::new(ts, values)?)
}

fn admissible(rng: &mut impl Rng, dim: usize) -> Result<(StepPath, StepPath)> {
    let len = rng.random_range(2..=60);
    let y = walk(rng, len, dim, 0.0)?;
    let l_len = rng.random_range(1..=15);
    let l = walk(rng, l_len, dim, -0.5)?.map(|v| 0.5 * v)?;
    let shift: Vec<f64> = (0..dim).map(|c| (l.first()[c] - y.first()[c]).max(0.0)).collect();
    Ok((y.translate(&shift)?, l))
}

fn invariant_row(id: &str, r: &Reflection) -> Check {
    Check::new(id, r.invariants().worst(), INVARIANT_TOL, 0.0)
}

/// Checks produced by case `index`; the case type cycles through the running
/// maximum contraction, the Skorokhod estimates and the Young bound.
pub fn run_case(index: u64, c: &Campaign) -> Result<Vec<Check>> {
    let mut rng = stream_rng(c.seed, index);
    let variant = (index / 3) as usize;
    match index % 3 {
        0 => {
            let n1 = rng.random_range(2..=60);
            let n2 = rng.random_range(2..=60);
            let y1 = walk(&mut rng, n1, 1, 0.0)?;
            let y2 = walk(&mut rng, n2, 1, 0.0)?;
            Ok(vec![running_max_contraction(&y1, &y2, PS[variant % 4], c.slack)?])
        }
        1 => {
            let dim = 1 + variant % 3;
            let (y, l) = admissible(&mut rng, dim)?;
            let (y2, l2) = admissible(&mut rng, dim)?;
            let solver: Solver = if c.corrupt_solver { inflated_solver } else { skorokhod::solve_sp };
            let rep = check_estimates_with(solver, &y, &l, &y2, &l2, PS[variant % 4], c.slack)?;
            let mut out = rep.checks.clone();
            out.push(invariant_row("invariants", &rep.first));
            out.push(invariant_row("invariants2", &rep.second));
            Ok(out)
        }
        _ => {
            let dim = 1 + variant % 2;
            let (p, q) = PAIRS[variant % 4];
            let len = rng.random_range(2..=30);
            let ts = times(&mut rng, len);
            let mats = (0..len).map(|_| DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.5..1.5))).collect();
            let integrand = MatrixStepPath::new(ts, mats)?;
            let driver_len = rng.random_range(2..=40);
            let driver = walk(&mut rng, driver_len, dim, 0.0)?;
            let end = integrand.horizon().max(driver.horizon());
            let start = end * rng.random_range(0.0..0.5);
            let rep = young_bound_check(&integrand, &driver, p, q, Interval::new(start, end)?, c.slack)?;
            Ok(vec![rep.check])
        }
    }
}

/// All cases in index order, evaluated on the current rayon pool.
pub fn run(c: &Campaign) -> Result<Vec<(u64, Check)>> {
    let per_case: Vec<Vec<Check>> = (0..c.cases as u64).into_par_iter().map(|i| run_case(i, c)).collect::<Result<_>>()?;
    Ok(per_case
        .into_iter()
        .enumerate()
        .flat_map(|(i, checks)| checks.into_iter().map(move |ch| (i as u64, ch)))
        .collect())
}
