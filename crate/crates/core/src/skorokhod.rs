//! One-sided Skorokhod problem with a time-dependent lower barrier.
//!
//! Given `y` and a barrier `l` with `l_0 <= y_0`, the solution is the pair
//! `(x, k)` with `x = y + k >= l`, `k` nondecreasing from 0 and growing only
//! when `x` sits on `l`. Coordinates are decoupled and the regulator is the
//! running supremum `k_t = sup_{s<=t} (y_s - l_s)^-`, which is exact on step
//! paths.

use thiserror::Error;

use crate::check::Check;
use crate::path::{self, align, p_variation, running_max, sup_norm_all, Interval, PathError, StepPath};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkorokhodError {
    #[error("barrier starts above the input in component {component}: l_0 = {barrier} > y_0 = {start}")]
    BarrierAboveStart { component: usize, barrier: f64, start: f64 },
    #[error("dimension mismatch: input has {0} components, barrier {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Path(#[from] PathError),
}

pub type Result<T> = std::result::Result<T, SkorokhodError>;

/// Solution `(x, k)` of the Skorokhod problem for `(y, l)`, all four on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    pub x: StepPath,
    pub k: StepPath,
    pub y: StepPath,
    pub l: StepPath,
}

/// Worst-case deviations from the defining conditions of a reflection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantReport {
    /// `max |x - (y + k)|`.
    pub decomposition: f64,
    /// `max (l - x)^+`.
    pub barrier: f64,
    /// `max |k_0|` plus `max (-Δk)^+`.
    pub monotonicity: f64,
    /// `max_i |Σ (x^i - l^i) Δk^i|`.
    pub complementarity: f64,
}

impl InvariantReport {
    pub fn worst(&self) -> f64 {
        self.decomposition.max(self.barrier).max(self.monotonicity).max(self.complementarity)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

impl Reflection {
    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Measures every defining condition on the shared grid.
    pub fn invariants(&self) -> InvariantReport {
        let d = self.dim();
        let mut rep = InvariantReport::default();
        let n = self.x.len();
        let mut compl = vec![0.0; d];
        for i in 0..n {
            let (x, k, y, l) = (self.x.value(i), self.k.value(i), self.y.value(i), self.l.value(i));
            for c in 0..d {
                rep.decomposition = rep.decomposition.max((x[c] - (y[c] + k[c])).abs());
                rep.barrier = rep.barrier.max(l[c] - x[c]);
                if i == 0 {
                    rep.monotonicity = rep.monotonicity.max(k[c].abs());
                } else {
                    let dk = k[c] - self.k.value(i - 1)[c];
                    rep.monotonicity = rep.monotonicity.max(-dk);
                    compl[c] += (x[c] - l[c]) * dk;
                }
            }
        }
        rep.complementarity = compl.iter().fold(0.0, |m, v| m.max(v.abs()));
        rep
    }
}

/// Solves `SP_l(y)` on the merged grid of `y` and `l`.
pub fn solve_sp(y: &StepPath, l: &StepPath) -> Result<Reflection> {
    if y.dim() != l.dim() {
        return Err(SkorokhodError::DimensionMismatch(y.dim(), l.dim()));
    }
    for (c, (&b, &s)) in l.first().iter().zip(y.first()).enumerate() {
        if b > s {
            return Err(SkorokhodError::BarrierAboveStart { component: c, barrier: b, start: s });
        }
    }
    let aligned = align(&[y, l]);
    let (y, l) = (&aligned[0], &aligned[1]);
    let d = y.dim();
    let mut k = vec![0.0; y.len() * d];
    let mut x = vec![0.0; y.len() * d];
    let mut reg = vec![0.0f64; d];
    for i in 0..y.len() {
        let (yv, lv) = (y.value(i), l.value(i));
        for c in 0..d {
            let gap = lv[c] - yv[c];
            if gap > reg[c] {
                reg[c] = gap;
                k[i * d + c] = gap;
                // on the barrier by construction
                x[i * d + c] = lv[c];
            } else {
                k[i * d + c] = reg[c];
                x[i * d + c] = yv[c] + reg[c];
            }
        }
    }
    Ok(Reflection {
        x: StepPath::from_flat(y.grid().clone(), d, x)?,
        k: StepPath::from_flat(y.grid().clone(), d, k)?,
        y: y.clone(),
        l: l.clone(),
    })
}

/// `v_p(sup y¹ - sup y²)_T` against `v_p(y¹ - y²)_T` for scalar paths.
pub fn running_max_contraction(y1: &StepPath, y2: &StepPath, p: f64, slack: f64) -> Result<Check> {
    if y1.dim() != 1 || y2.dim() != 1 {
        return Err(SkorokhodError::DimensionMismatch(y1.dim(), y2.dim()));
    }
    let al = align(&[y1, y2]);
    let w = Interval::whole(&al[0]);
    let lhs = p_variation(&running_max(&al[0]).sub(&running_max(&al[1]))?, p, w)?;
    let rhs = p_variation(&al[0].sub(&al[1])?, p, w)?;
    Ok(Check::new("running_max", lhs, rhs, slack))
}

/// Evaluated Lipschitz estimates for two Skorokhod problems.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub checks: Vec<Check>,
    pub first: Reflection,
    pub second: Reflection,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Signature of a Skorokhod solver; lets campaigns run against alternatives.
pub type Solver = fn(&StepPath, &StepPath) -> Result<Reflection>;

/// Solves `SP_l(y)` and `SP_{l'}(y')` and evaluates the variation-norm
/// estimates `x`/`k` (ids `vbar_x`, `vbar_k`), the sup-norm estimates
/// (`sup_x`, `sup_k`) and the regulator size bound for each problem
/// (`size_k`, `size_k2`).
pub fn check_estimates(y: &StepPath, l: &StepPath, y2: &StepPath, l2: &StepPath, p: f64, slack: f64) -> Result<EstimateReport> {
    check_estimates_with(solve_sp, y, l, y2, l2, p, slack)
}

pub fn check_estimates_with(
    solver: Solver,
    y: &StepPath,
    l: &StepPath,
    y2: &StepPath,
    l2: &StepPath,
    p: f64,
    slack: f64,
) -> Result<EstimateReport> {
    let d = y.dim();
    for other in [l, y2, l2] {
        if other.dim() != d {
            return Err(SkorokhodError::DimensionMismatch(d, other.dim()));
        }
    }
    let al = align(&[y, l, y2, l2]);
    let (y, l, y2, l2) = (&al[0], &al[1], &al[2], &al[3]);
    let first = solver(y, l)?;
    let second = solver(y2, l2)?;
    let w = Interval::whole(y);
    let df = d as f64;

    let vbar = |a: &StepPath, b: &StepPath| -> Result<f64> { Ok(path::variation_norm(&a.sub(b)?, p, w)?) };
    let sup = |a: &StepPath, b: &StepPath| -> Result<f64> { Ok(sup_norm_all(&a.sub(b)?)) };

    let dy = vbar(y, y2)?;
    let dl = vbar(l, l2)?;
    let sy = sup(y, y2)?;
    let sl = sup(l, l2)?;

    let mut checks = vec![
        Check::new("vbar_x", vbar(&first.x, &second.x)?, (df + 1.0) * dy + df * dl, slack),
        Check::new("vbar_k", vbar(&first.k, &second.k)?, df * dy + df * dl, slack),
        Check::new("sup_x", sup(&first.x, &second.x)?, 2.0 * sy + sl, slack),
        Check::new("sup_k", sup(&first.k, &second.k)?, sy + sl, slack),
    ];
    for (id, r) in [("size_k", &first), ("size_k2", &second)] {
        let lhs = path::variation_norm(&r.k, p, w)?;
        let rhs = df * sup_norm_all(&r.y) + df * sup_norm_all(&r.l);
        checks.push(Check::new(id, lhs, rhs, slack));
    }
    Ok(EstimateReport { checks, first, second })
}

/// `V̄_p(k) <= d sup|y| + d sup|l|` and `V̄_p(x) <= (d+1) V̄_p(y) + d sup|l|`.
pub fn size_bounds(r: &Reflection, p: f64, slack: f64) -> Result<[Check; 2]> {
    let w = Interval::whole(&r.x);
    let df = r.dim() as f64;
    let sup_l = sup_norm_all(&r.l);
    Ok([
        Check::new("size_k", path::variation_norm(&r.k, p, w)?, df * sup_norm_all(&r.y) + df * sup_l, slack),
        Check::new(
            "size_x",
            path::variation_norm(&r.x, p, w)?,
            (df + 1.0) * path::variation_norm(&r.y, p, w)? + df * sup_l,
            slack,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(t: &[f64], v: &[f64]) -> StepPath {
        StepPath::scalar(t.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn no_reflection_when_above() {
        let y = sc(&[0.0, 1.0, 2.0], &[1.0, 2.0, 0.5]);
        let l = StepPath::constant(&[0.0]).unwrap();
        let r = solve_sp(&y, &l).unwrap();
        assert!(r.k.data().iter().all(|&k| k == 0.0));
        assert_eq!(r.x, y);
    }

    #[test]
    fn flat_barrier_example() {
        let y = sc(&[0.0, 1.0, 2.0], &[1.0, -1.0, 2.0]);
        let r = solve_sp(&y, &StepPath::constant(&[0.0]).unwrap()).unwrap();
        assert_eq!(r.k.data(), &[0.0, 1.0, 1.0]);
        assert_eq!(r.x.data(), &[1.0, 0.0, 3.0]);
        assert!(r.invariants().holds(0.0));
    }

    #[test]
    fn moving_barrier_example() {
        let y = sc(&[0.0, 1.0, 2.0], &[1.0, 0.0, 0.0]);
        let l = sc(&[0.0, 1.0, 2.0], &[0.0, 0.5, 0.0]);
        let r = solve_sp(&y, &l).unwrap();
        assert_eq!(r.k.data(), &[0.0, 0.5, 0.5]);
        assert_eq!(r.x.data(), &[1.0, 0.5, 0.5]);
    }

    #[test]
    fn errors() {
        let y = sc(&[0.0], &[0.0]);
        let l = sc(&[0.0], &[1.0]);
        assert!(matches!(solve_sp(&y, &l), Err(SkorokhodError::BarrierAboveStart { component: 0, .. })));
        let l2 = StepPath::constant(&[0.0, 0.0]).unwrap();
        assert_eq!(solve_sp(&y, &l2), Err(SkorokhodError::DimensionMismatch(1, 2)));
    }

    #[test]
    fn idempotent_on_output() {
        let y = sc(&[0.0, 1.0, 2.0, 3.0], &[0.5, -1.0, 0.3, -2.0]);
        let l = sc(&[0.0, 1.5], &[0.0, -0.5]);
        let r = solve_sp(&y, &l).unwrap();
        let again = solve_sp(&r.x, &r.l).unwrap();
        assert!(again.k.data().iter().all(|&k| k == 0.0));
    }

    #[test]
    fn identical_inputs_give_zero_lhs() {
        let y = sc(&[0.0, 1.0, 2.0], &[1.0, -1.0, 2.0]);
        let l = sc(&[0.0, 0.5], &[0.0, 0.2]);
        let rep = check_estimates(&y, &l, &y, &l, 2.0, 1e-9).unwrap();
        assert!(rep.all_pass());
        for c in &rep.checks[..4] {
            assert_eq!(c.lhs, 0.0, "{c}");
        }
    }

    #[test]
    fn constant_shift_moves_regulator_by_at_most_shift() {
        let y = sc(&[0.0, 1.0, 2.0, 3.0], &[1.0, -1.0, 2.0, -3.0]);
        let l = StepPath::constant(&[0.0]).unwrap();
        let c = 0.25;
        let y2 = y.map(|v| v + c).unwrap();
        let rep = check_estimates(&y, &l, &y2, &l, 2.0, 1e-9).unwrap();
        let sup_k = rep.checks.iter().find(|c| c.id == "sup_k").unwrap();
        assert!(sup_k.lhs <= c + 1e-15);
        assert_eq!(sup_k.rhs, c);
        assert!(rep.all_pass());
    }

    #[test]
    fn contraction_on_small_pair() {
        let y1 = sc(&[0.0, 1.0, 2.0], &[0.0, 2.0, 1.0]);
        let y2 = sc(&[0.0, 1.0, 2.0], &[0.0, 1.0, 3.0]);
        let c = running_max_contraction(&y1, &y2, 2.0, 0.0).unwrap();
        assert!(c.pass, "{c}");
    }
}
