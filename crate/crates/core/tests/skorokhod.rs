mod common;

use common::*;
use pvarsde::path::{align, StepPath};
use pvarsde::skorokhod::{check_estimates, check_estimates_with, solve_sp, Reflection, Result};

/// Smallest admissible regulator value at each index, found by scanning the
/// candidate set `{0} ∪ {l_i - y_i}` for the least value that dominates
/// every earlier shortfall.
fn minimal_pushing(y: &[f64], l: &[f64]) -> Vec<f64> {
    let candidates: Vec<f64> = std::iter::once(0.0).chain(y.iter().zip(l).map(|(a, b)| b - a)).collect();
    (0..y.len())
        .map(|j| {
            candidates
                .iter()
                .copied()
                .filter(|&c| c >= 0.0 && (0..=j).all(|i| c >= l[i] - y[i]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[test]
fn scalar_regulator_is_minimal() {
    let mut r = rng(21);
    for case in 0..200 {
        let len = 2 + case % 40;
        let l = random_path(&mut r, 1 + case % 7, 1, 0.5);
        let y = random_walk(&mut r, len, 1, 1.0);
        let y = y.translate(&[(l.first()[0] - y.first()[0]).max(0.0)]).unwrap();
        let al = align(&[&y, &l]);
        let sol = solve_sp(&al[0], &al[1]).unwrap();
        let oracle = minimal_pushing(al[0].data(), al[1].data());
        for (k, o) in sol.k.data().iter().zip(&oracle) {
            assert!((k - o).abs() <= 1e-12, "case {case}: {k} vs {o}");
        }
    }
}

#[test]
fn invariants_hold_in_all_dimensions() {
    let mut r = rng(22);
    for case in 0..300 {
        let d = 1 + case % 3;
        let y = random_walk(&mut r, 2 + case % 50, d, 1.0);
        let l = random_walk(&mut r, 2 + case % 9, d, 0.7);
        let start_shift: Vec<f64> = (0..d).map(|c| (l.first()[c] - y.first()[c]).max(0.0)).collect();
        let y = y.translate(&start_shift).unwrap();
        let sol = solve_sp(&y, &l).unwrap();
        let rep = sol.invariants();
        assert!(rep.holds(1e-12), "case {case}: {rep:?}");
    }
}

fn admissible_pair(r: &mut impl rand::Rng, len: usize, d: usize) -> (StepPath, StepPath) {
    let y = random_walk(r, len, d, 1.0);
    let l = random_walk(r, 2 + len / 4, d, 0.5).translate(&vec![-0.5; d]).unwrap();
    let shift: Vec<f64> = (0..d).map(|c| (l.first()[c] - y.first()[c]).max(0.0)).collect();
    (y.translate(&shift).unwrap(), l)
}

#[test]
fn lipschitz_estimates_campaign() {
    let mut r = rng(23);
    for case in 0..400 {
        let d = 1 + case % 3;
        let (y, l) = admissible_pair(&mut r, 2 + case % 45, d);
        let (y2, l2) = admissible_pair(&mut r, 2 + case % 31, d);
        let p = [1.0, 1.5, 2.0, 3.0][case % 4];
        let rep = check_estimates(&y, &l, &y2, &l2, p, 1e-9).unwrap();
        for c in &rep.checks {
            assert!(c.pass, "case {case}: {c}");
        }
    }
}

fn doubled_regulator(y: &StepPath, l: &StepPath) -> Result<Reflection> {
    let mut r = solve_sp(y, l)?;
    r.k = r.k.map(|v| 2.0 * v).unwrap();
    r.x = r.y.add(&r.k).unwrap();
    Ok(r)
}

#[test]
fn corrupted_solver_is_detected() {
    let mut r = rng(24);
    let mut pushed = 0;
    for _ in 0..50 {
        let (y, l) = admissible_pair(&mut r, 30, 1);
        let (y2, l2) = admissible_pair(&mut r, 30, 1);
        let honest = solve_sp(&y, &l).unwrap();
        assert!(honest.invariants().holds(1e-12));
        if honest.k.last()[0] == 0.0 {
            continue;
        }
        pushed += 1;
        let bad = doubled_regulator(&y, &l).unwrap();
        let campaign = check_estimates_with(doubled_regulator, &y, &l, &y2, &l2, 2.0, 1e-9).unwrap();
        assert!(!bad.invariants().holds(1e-12) || !campaign.all_pass());
    }
    assert!(pushed > 10);
}
