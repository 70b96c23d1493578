mod common;

use common::*;
use pvarsde::path::{coarsen_jump_adapted, sup_norm_all, Interval, MatrixStepPath, StepPath, TimeGrid};
use pvarsde::young::{rs_integral, young_bound_check, zeta};

const PAIRS: [(f64, f64); 4] = [(1.5, 1.5), (2.0, 1.2), (1.2, 2.0), (3.0, 1.1)];

#[test]
fn zeta_two() {
    assert!((zeta(2.0).unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
}

#[test]
fn bound_campaign() {
    let mut r = rng(31);
    for case in 0..600 {
        let d = 1 + case % 2;
        let integrand = random_matrix_path(&mut r, 2 + case % 25, d, 1.5);
        let driver = random_walk(&mut r, 2 + case % 40, d, 1.0);
        let (p, q) = PAIRS[case % 4];
        let t = integrand.horizon().max(driver.horizon());
        let a = r_fraction(case) * t;
        let w = Interval::new(a, t).unwrap();
        let rep = young_bound_check(&integrand, &driver, p, q, w, 1e-9).unwrap();
        assert!(rep.check.pass, "case {case}: {}", rep.check);
    }
}

fn r_fraction(case: usize) -> f64 {
    [0.0, 0.0, 0.25, 0.5][case % 4]
}

#[test]
fn linear_in_integrand_and_additive() {
    let mut r = rng(32);
    for _ in 0..50 {
        let x1 = random_matrix_path(&mut r, 8, 2, 1.0);
        let z = random_walk(&mut r, 12, 2, 1.0);
        let times = x1.grid().times().to_vec();
        let scaled = MatrixStepPath::new(times.clone(), (0..x1.len()).map(|i| x1.matrix(i) * 3.0).collect()).unwrap();
        let w = Interval::new(0.0, z.horizon()).unwrap();
        let i1 = rs_integral(&x1, &z, w).unwrap();
        let i3 = rs_integral(&scaled, &z, w).unwrap();
        assert!(sup_norm_all(&i3.sub(&i1.map(|v| 3.0 * v).unwrap()).unwrap()) < 1e-12);

        let mid = z.horizon() / 2.0;
        let left = rs_integral(&x1, &z, Interval::new(0.0, mid).unwrap()).unwrap();
        let right = rs_integral(&x1, &z, Interval::new(mid, z.horizon()).unwrap()).unwrap();
        let total = i1.eval(z.horizon()).unwrap()[0];
        assert!((left.last()[0] + right.last()[0] - total).abs() < 1e-12);
    }
}

#[test]
fn constant_integrand_gives_increment() {
    let mut r = rng(33);
    let z = random_walk(&mut r, 30, 1, 1.0);
    let x = MatrixStepPath::scalar(vec![0.0], vec![2.5]).unwrap();
    let a = z.times()[7];
    let int = rs_integral(&x, &z, Interval::new(a, z.horizon()).unwrap()).unwrap();
    for (i, &t) in int.times().iter().enumerate() {
        let want = if t < a { 0.0 } else { 2.5 * (z.eval(t).unwrap()[0] - z.eval(a).unwrap()[0]) };
        assert!((int.value(i)[0] - want).abs() < 1e-12);
    }
}

#[test]
fn coarsened_driver_integral_converges() {
    let n = 4096;
    let grid = TimeGrid::uniform(1.0, n).unwrap();
    let z = StepPath::from_flat(
        grid.clone(),
        1,
        grid.times()
            .iter()
            .map(|&t| (7.0 * t).sin() + if t >= 0.3 { 1.0 } else { 0.0 } - if t >= 0.71 { 0.6 } else { 0.0 })
            .collect(),
    )
    .unwrap();
    let x = MatrixStepPath::new(
        grid.times().to_vec(),
        grid.times().iter().map(|&t| nalgebra::DMatrix::from_element(1, 1, (3.0 * t).cos() + t)).collect(),
    )
    .unwrap();
    let w = Interval::new(0.0, 1.0).unwrap();
    let exact = rs_integral(&x, &z, w).unwrap();
    let mut prev = f64::INFINITY;
    for k in 1..=9 {
        let h = 0.5f64.powi(k);
        let zc = coarsen_jump_adapted(&z, h, h).unwrap();
        let approx = rs_integral(&x, &zc, w).unwrap();
        let dist = sup_norm_all(&exact.sub(&approx).unwrap());
        assert!(dist < prev, "level {k}: {dist} !< {prev}");
        prev = dist;
    }
    assert!(prev < 2e-2);
}
