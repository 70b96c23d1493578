//! Euler schemes for the reflected equation
//!
//! ```text
//! x_t = x_0 + ∫ f(x_{s-}) da_s + ∫ g(x_{s-}) dz_s + k_t,   (x, k) = SP_l(y)
//! ```
//!
//! On a partition `t_0 < t_1 < ...` each step computes
//! `Δy = f(x_j)(a_{t_{j+1}} - a_{t_j}) + g(x_j)(z_{t_{j+1}} - z_{t_j})` and
//! projects `x_j + Δy` onto `[l_{t_{j+1}}, ∞)` componentwise; the projection
//! distance is the regulator increment. The uniform scheme uses the grid
//! `{j/n}`, the adaptive one additionally stops at every jump of `a`, `z` or
//! `l` larger than `1/n` and restarts the mesh from there.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::check::Check;
use crate::path::{self, euclid, fmt_f64, sup_norm_all, Interval, PathError, StepPath, TimeGrid};
use crate::skorokhod::{self, Reflection, SkorokhodError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("coefficient evaluation produced a non-finite value at t = {t}")]
    CoefficientEvaluationFailure { t: f64 },
    #[error("initial point lies below the barrier in component {component}")]
    InadmissibleStart { component: usize },
    #[error("partition exceeds {cap} steps")]
    PartitionOverflow { cap: usize },
    #[error("no convergence after {doublings} doublings (last gap {gap:e})")]
    NoConvergence { doublings: u32, gap: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("unknown coefficient preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Skorokhod(#[from] SkorokhodError),
}

pub type Result<T> = std::result::Result<T, SdeError>;

/// Declared regularity constants. Informational only; never verified.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientMeta {
    /// Linear growth constant of `f`.
    pub growth: Option<f64>,
    /// Hölder order of `g`.
    pub holder_order: Option<f64>,
    /// Local Lipschitz constants of `f` on balls of radius 1, 2, ...
    pub local_lipschitz: Vec<f64>,
}

/// Drift `f: R^d → R^d` and diffusion `g: R^d → R^{d×d}`.
pub trait Coefficients: Send + Sync {
    fn dim(&self) -> usize;
    fn drift(&self, x: &[f64], out: &mut [f64]);
    fn diffusion(&self, x: &[f64], out: &mut DMatrix<f64>);
    fn meta(&self) -> CoefficientMeta {
        CoefficientMeta::default()
    }
}

type DriftFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type DiffusionFn = dyn Fn(&[f64], &mut DMatrix<f64>) + Send + Sync;

/// Coefficients from closures.
pub struct FnCoefficients {
    dim: usize,
    drift: Box<DriftFn>,
    diffusion: Box<DiffusionFn>,
    meta: CoefficientMeta,
}

impl FnCoefficients {
    pub fn new(
        dim: usize,
        drift: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(&[f64], &mut DMatrix<f64>) + Send + Sync + 'static,
    ) -> Self {
        Self { dim, drift: Box::new(drift), diffusion: Box::new(diffusion), meta: CoefficientMeta::default() }
    }

    pub fn with_meta(mut self, meta: CoefficientMeta) -> Self {
        self.meta = meta;
        self
    }
}

impl Coefficients for FnCoefficients {
    fn dim(&self) -> usize {
        self.dim
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out)
    }
    fn diffusion(&self, x: &[f64], out: &mut DMatrix<f64>) {
        (self.diffusion)(x, out)
    }
    fn meta(&self) -> CoefficientMeta {
        self.meta.clone()
    }
}

/// Fixed registry of coefficient pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `f = 0`, `g = 0`.
    Zero,
    /// `f = 0`, `g = I`.
    Identity,
    /// `f = 0`, `g(x) = diag(x)`.
    Geometric,
    /// `f(x) = -tanh(x)`, `g(x) = diag(1 + tanh(x)/2)`, componentwise.
    Tanh,
    /// `d = 2`: `f(x) = -x/2`, `g(x) = R(x_1 + x_2)/2` with `R` a rotation.
    Rotation,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Zero, Preset::Identity, Preset::Geometric, Preset::Tanh, Preset::Rotation];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::Identity => "identity",
            Preset::Geometric => "geometric",
            Preset::Tanh => "tanh",
            Preset::Rotation => "rotation",
        }
    }

    pub fn build(self, dim: usize) -> Result<PresetCoefficients> {
        if dim == 0 || (self == Preset::Rotation && dim != 2) {
            return Err(SdeError::InvalidProblem(format!("preset {} does not support dimension {dim}", self.name())));
        }
        Ok(PresetCoefficients { preset: self, dim })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = SdeError;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SdeError::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetCoefficients {
    preset: Preset,
    dim: usize,
}

impl Coefficients for PresetCoefficients {
    fn dim(&self) -> usize {
        self.dim
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        match self.preset {
            Preset::Zero | Preset::Identity | Preset::Geometric => out.fill(0.0),
            Preset::Tanh => out.iter_mut().zip(x).for_each(|(o, v)| *o = -v.tanh()),
            Preset::Rotation => out.iter_mut().zip(x).for_each(|(o, v)| *o = -0.5 * v),
        }
    }

    fn diffusion(&self, x: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
        match self.preset {
            Preset::Zero => {}
            Preset::Identity => out.fill_diagonal(1.0),
            Preset::Geometric => (0..self.dim).for_each(|i| out[(i, i)] = x[i]),
            Preset::Tanh => (0..self.dim).for_each(|i| out[(i, i)] = 1.0 + 0.5 * x[i].tanh()),
            Preset::Rotation => {
                let (s, c) = (x[0] + x[1]).sin_cos();
                out[(0, 0)] = 0.5 * c;
                out[(0, 1)] = -0.5 * s;
                out[(1, 0)] = 0.5 * s;
                out[(1, 1)] = 0.5 * c;
            }
        }
    }

    fn meta(&self) -> CoefficientMeta {
        let (growth, lip) = match self.preset {
            Preset::Zero | Preset::Identity | Preset::Geometric => (0.0, 0.0),
            Preset::Tanh => (1.0, 1.0),
            Preset::Rotation => (0.5, 0.5),
        };
        CoefficientMeta { growth: Some(growth), holder_order: Some(1.0), local_lipschitz: vec![lip] }
    }
}

/// Data of one reflected equation.
#[derive(Clone)]
pub struct Problem {
    pub x0: Vec<f64>,
    /// Scalar finite-variation driver.
    pub a: StepPath,
    /// p-variation driver.
    pub z: StepPath,
    /// Lower barrier.
    pub l: StepPath,
    pub coeffs: Arc<dyn Coefficients>,
    pub p: f64,
    /// Simulation horizon; defaults to the latest grid time among `a, z, l`.
    pub horizon: f64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("x0", &self.x0)
            .field("dim", &self.dim())
            .field("p", &self.p)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(x0: Vec<f64>, a: StepPath, z: StepPath, l: StepPath, coeffs: Arc<dyn Coefficients>, p: f64) -> Result<Self> {
        let d = x0.len();
        if d == 0 || z.dim() != d || l.dim() != d || coeffs.dim() != d {
            return Err(SdeError::InvalidProblem(format!(
                "dimensions differ: x0 {d}, z {}, l {}, coefficients {}",
                z.dim(),
                l.dim(),
                coeffs.dim()
            )));
        }
        if a.dim() != 1 {
            return Err(SdeError::InvalidProblem("finite-variation driver must be scalar".into()));
        }
        if !(p >= 1.0) {
            return Err(SdeError::InvalidProblem(format!("p must be >= 1, got {p}")));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(PathError::NonFiniteValue.into());
        }
        if let Some(component) = (0..d).find(|&c| x0[c] < l.first()[c]) {
            return Err(SdeError::InadmissibleStart { component });
        }
        let horizon = a.horizon().max(z.horizon()).max(l.horizon());
        Ok(Self { x0, a, z, l, coeffs, p, horizon })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(SdeError::InvalidProblem(format!("horizon must be finite and >= 0, got {horizon}")));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Uniform,
    Adaptive,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Uniform => "uniform",
            Scheme::Adaptive => "adaptive",
        })
    }
}

impl FromStr for Scheme {
    type Err = SdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Scheme::Uniform),
            "adaptive" => Ok(Scheme::Adaptive),
            other => Err(SdeError::InvalidProblem(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub max_steps: usize,
    pub max_doublings: u32,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { max_steps: 10_000_000, max_doublings: 14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `V̄_p(x)_T` on the scheme grid.
    pub vbar_p_x: f64,
    /// `sup_t |k_t|`.
    pub sup_k: f64,
    pub steps: usize,
    /// Cauchy gap against the previous dyadic level, when produced by [`solve`].
    pub cauchy_gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub reflection: Reflection,
    pub scheme: Scheme,
    pub n: u64,
    pub diagnostics: Diagnostics,
}

impl Solution {
    fn new(reflection: Reflection, scheme: Scheme, n: u64, p: f64) -> Result<Self> {
        let vbar_p_x = path::variation_norm(&reflection.x, p, Interval::whole(&reflection.x))?;
        let diagnostics = Diagnostics {
            vbar_p_x,
            sup_k: sup_norm_all(&reflection.k),
            steps: reflection.x.len() - 1,
            cauchy_gap: None,
        };
        Ok(Self { reflection, scheme, n, diagnostics })
    }

    pub fn x(&self) -> &StepPath {
        &self.reflection.x
    }

    pub fn k(&self) -> &StepPath {
        &self.reflection.k
    }

    /// CSV `t,x1..xd,k1..kd` followed by `# key=value` diagnostics.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.reflection.dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|c| format!("x{c}")));
        header.extend((1..=d).map(|c| format!("k{c}")));
        writeln!(w, "{}", header.join(","))?;
        for (i, &t) in self.reflection.x.times().iter().enumerate() {
            let row: Vec<String> = std::iter::once(t)
                .chain(self.reflection.x.value(i).iter().copied())
                .chain(self.reflection.k.value(i).iter().copied())
                .map(fmt_f64)
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        for (key, value) in self.footer() {
            writeln!(w, "# {key}={value}")?;
        }
        Ok(())
    }

    pub fn footer(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("scheme", self.scheme.to_string()),
            ("n", self.n.to_string()),
            ("steps", self.diagnostics.steps.to_string()),
            ("vbar_p_x", fmt_f64(self.diagnostics.vbar_p_x)),
            ("sup_k", fmt_f64(self.diagnostics.sup_k)),
        ];
        if let Some(g) = self.diagnostics.cauchy_gap {
            out.push(("cauchy_gap", fmt_f64(g)));
        }
        out
    }
}

/// Grid `{j/n : j/n <= T}`.
pub fn uniform_partition(horizon: f64, n: u64, cap: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SdeError::InvalidProblem("n must be >= 1".into()));
    }
    let nf = n as f64;
    let mut times = vec![0.0];
    let mut j = 1u64;
    loop {
        let t = j as f64 / nf;
        if t > horizon {
            break;
        }
        times.push(t);
        if times.len() > cap {
            return Err(SdeError::PartitionOverflow { cap });
        }
        j += 1;
    }
    Ok(times)
}

fn jump_times(path: &StepPath, threshold: f64, out: &mut Vec<f64>) {
    for i in 1..path.len() {
        if euclid(path.value(i), path.value(i - 1)) > threshold {
            out.push(path.times()[i]);
        }
    }
}

/// Stopping-time partition: `t_j = min(next jump > 1/n after t_{j-1}, t_{j-1} + 1/n)`.
///
/// Mesh points are computed as `anchor + m/n` from the last inserted jump, so
/// without large jumps the partition is exactly the uniform grid.
pub fn adaptive_partition(problem: &Problem, n: u64, cap: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SdeError::InvalidProblem("n must be >= 1".into()));
    }
    let nf = n as f64;
    let threshold = 1.0 / nf;
    let mut jumps = Vec::new();
    jump_times(&problem.a, threshold, &mut jumps);
    jump_times(&problem.z, threshold, &mut jumps);
    jump_times(&problem.l, threshold, &mut jumps);
    jumps.sort_by(f64::total_cmp);
    jumps.dedup();
    jumps.retain(|&t| t <= problem.horizon);

    let mut times = vec![0.0];
    let mut anchor = 0.0;
    let mut m = 0u64;
    let mut next = 0usize;
    let mut t = 0.0;
    loop {
        while next < jumps.len() && jumps[next] <= t {
            next += 1;
        }
        let mesh = anchor + (m + 1) as f64 / nf;
        match jumps.get(next) {
            Some(&tau) if tau < mesh => {
                t = tau;
                anchor = tau;
                m = 0;
            }
            _ if mesh <= problem.horizon => {
                t = mesh;
                m += 1;
            }
            _ => break,
        }
        times.push(t);
        if times.len() > cap {
            return Err(SdeError::PartitionOverflow { cap });
        }
    }
    Ok(times)
}

/// Runs the projected Euler recursion on an arbitrary partition.
pub fn euler_on_partition(problem: &Problem, times: Vec<f64>) -> Result<Reflection> {
    let d = problem.dim();
    let grid = TimeGrid::new(times)?;
    let a = problem.a.resample(&grid);
    let z = problem.z.resample(&grid);
    let l = problem.l.resample(&grid);
    let len = grid.len();

    let mut xs = Vec::with_capacity(len * d);
    let mut ks = Vec::with_capacity(len * d);
    let mut ys = Vec::with_capacity(len * d);
    let mut x = problem.x0.clone();
    let mut k = vec![0.0; d];
    let mut y = problem.x0.clone();
    if let Some(component) = (0..d).find(|&c| x[c] < l.first()[c]) {
        return Err(SdeError::InadmissibleStart { component });
    }
    xs.extend_from_slice(&x);
    ks.extend_from_slice(&k);
    ys.extend_from_slice(&y);

    let mut fx = vec![0.0; d];
    let mut gx = DMatrix::<f64>::zeros(d, d);
    let mut dy = vec![0.0; d];
    for j in 0..len - 1 {
        let da = a.value(j + 1)[0] - a.value(j)[0];
        let (z0, z1) = (z.value(j), z.value(j + 1));
        problem.coeffs.drift(&x, &mut fx);
        problem.coeffs.diffusion(&x, &mut gx);
        for r in 0..d {
            dy[r] = fx[r] * da + (0..d).map(|c| gx[(r, c)] * (z1[c] - z0[c])).sum::<f64>();
        }
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(SdeError::CoefficientEvaluationFailure { t: grid.times()[j] });
        }
        let lb = l.value(j + 1);
        for c in 0..d {
            let free = x[c] + dy[c];
            if free >= lb[c] {
                x[c] = free;
            } else {
                k[c] += lb[c] - free;
                x[c] = lb[c];
            }
            y[c] += dy[c];
        }
        xs.extend_from_slice(&x);
        ks.extend_from_slice(&k);
        ys.extend_from_slice(&y);
    }
    Ok(Reflection {
        x: StepPath::from_flat(grid.clone(), d, xs)?,
        k: StepPath::from_flat(grid.clone(), d, ks)?,
        y: StepPath::from_flat(grid, d, ys)?,
        l,
    })
}

fn run(problem: &Problem, scheme: Scheme, n: u64, opts: &SchemeOptions) -> Result<Reflection> {
    let times = match scheme {
        Scheme::Uniform => uniform_partition(problem.horizon, n, opts.max_steps)?,
        Scheme::Adaptive => adaptive_partition(problem, n, opts.max_steps)?,
    };
    euler_on_partition(problem, times)
}

/// Euler scheme on the grid `{j/n}`.
pub fn euler_uniform(problem: &Problem, n: u64) -> Result<Solution> {
    euler_with(problem, Scheme::Uniform, n, &SchemeOptions::default())
}

/// Euler scheme on the jump-adapted partition.
pub fn euler_adaptive(problem: &Problem, n: u64) -> Result<Solution> {
    euler_with(problem, Scheme::Adaptive, n, &SchemeOptions::default())
}

pub fn euler_with(problem: &Problem, scheme: Scheme, n: u64, opts: &SchemeOptions) -> Result<Solution> {
    let r = run(problem, scheme, n, opts)?;
    Solution::new(r, scheme, n, problem.p)
}

/// `max_t max(|x_f(t) - x_c(t)|, |k_f(t) - k_c(t)|)` over the coarse grid.
pub fn cauchy_gap(coarse: &Reflection, fine: &Reflection) -> f64 {
    let mut gap: f64 = 0.0;
    for (i, &t) in coarse.x.times().iter().enumerate() {
        let j = fine.x.grid().index_at(t);
        gap = gap
            .max(euclid(coarse.x.value(i), fine.x.value(j)))
            .max(euclid(coarse.k.value(i), fine.k.value(j)));
    }
    gap
}

/// One rung of the dyadic refinement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung {
    pub n: u64,
    /// Gap to the previous rung; `None` on the first.
    pub gap: Option<f64>,
    pub seconds: f64,
}

/// Runs `scheme` at `n0, 2 n0, ..., 2^levels n0` and reports successive gaps.
pub fn convergence_ladder(problem: &Problem, scheme: Scheme, n0: u64, levels: u32, opts: &SchemeOptions) -> Result<Vec<LadderRung>> {
    let mut rungs = Vec::new();
    let mut prev: Option<Reflection> = None;
    for j in 0..=levels {
        let n = n0 << j;
        let start = std::time::Instant::now();
        let r = run(problem, scheme, n, opts)?;
        let gap = prev.as_ref().map(|c| cauchy_gap(c, &r));
        rungs.push(LadderRung { n, gap, seconds: start.elapsed().as_secs_f64() });
        prev = Some(r);
    }
    Ok(rungs)
}

/// Adaptive scheme at `n0, 2 n0, 4 n0, ...` until successive iterates differ
/// by less than `tol` on the coarser grid. Returns the finer iterate.
pub fn solve(problem: &Problem, tol: f64, n0: u64) -> Result<Solution> {
    solve_with(problem, tol, n0, &SchemeOptions::default())
}

pub fn solve_with(problem: &Problem, tol: f64, n0: u64, opts: &SchemeOptions) -> Result<Solution> {
    if !(tol >= 0.0) || n0 == 0 {
        return Err(SdeError::InvalidProblem(format!("need tol >= 0 and n0 >= 1 (got {tol}, {n0})")));
    }
    let mut prev = run(problem, Scheme::Adaptive, n0, opts)?;
    let mut gap = f64::INFINITY;
    for j in 1..=opts.max_doublings {
        let n = n0 << j;
        let cur = run(problem, Scheme::Adaptive, n, opts)?;
        gap = cauchy_gap(&prev, &cur);
        if gap < tol {
            let mut sol = Solution::new(cur, Scheme::Adaptive, n, problem.p)?;
            sol.diagnostics.cauchy_gap = Some(gap);
            return Ok(sol);
        }
        prev = cur;
    }
    Err(SdeError::NoConvergence { doublings: opts.max_doublings, gap })
}

/// Size bounds of the regulator and the state against the reconstructed
/// `y^n` and the sampled barrier.
pub fn a_priori_check(solution: &Solution, problem: &Problem, slack: f64) -> Result<Vec<Check>> {
    Ok(skorokhod::size_bounds(&solution.reflection, problem.p, slack)?.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::{make_fv_driver, FvDriver};

    fn problem(coeffs: Preset, x0: f64, z: StepPath, l: StepPath) -> Problem {
        Problem::new(
            vec![x0],
            StepPath::constant(&[0.0]).unwrap(),
            z,
            l,
            Arc::new(coeffs.build(1).unwrap()),
            2.0,
        )
        .unwrap()
    }

    fn walk() -> StepPath {
        let t: Vec<f64> = (0..=8).map(|j| j as f64 / 8.0).collect();
        StepPath::scalar(t, vec![0.0, 0.4, -0.3, -0.9, 0.2, -1.4, -0.2, 0.5, -0.6]).unwrap()
    }

    #[test]
    fn identity_far_barrier_tracks_driver() {
        let p = problem(Preset::Identity, 0.0, walk(), StepPath::constant(&[-1e9]).unwrap());
        let s = euler_uniform(&p, 8).unwrap();
        assert!(s.x().data().iter().zip(walk().data()).all(|(u, v)| (u - v).abs() < 1e-14));
        assert!(s.k().data().iter().all(|&k| k == 0.0));
    }

    #[test]
    fn identity_zero_barrier_equals_skorokhod() {
        let p = problem(Preset::Identity, 0.3, walk(), StepPath::constant(&[0.0]).unwrap());
        let s = euler_uniform(&p, 16).unwrap();
        let y = walk().translate(&[0.3]).unwrap();
        let sp = skorokhod::solve_sp(&y, &StepPath::constant(&[0.0]).unwrap()).unwrap();
        for (i, &t) in s.x().times().iter().enumerate() {
            assert!((s.x().value(i)[0] - sp.x.eval(t).unwrap()[0]).abs() < 1e-12);
            assert!((s.k().value(i)[0] - sp.k.eval(t).unwrap()[0]).abs() < 1e-12);
        }
        assert!(s.reflection.invariants().holds(1e-12));
    }

    #[test]
    fn geometric_growth() {
        let z = make_fv_driver(&FvDriver::Linear { horizon: 1.0, steps: 1024 }).unwrap();
        let p = problem(Preset::Geometric, 1.0, z, StepPath::constant(&[-1e6]).unwrap());
        let s = euler_uniform(&p, 1024).unwrap();
        let x1 = s.x().eval(1.0).unwrap()[0];
        assert!((x1 - (1.0f64 + 1.0 / 1024.0).powi(1024)).abs() < 1e-12);
        assert!((x1 - std::f64::consts::E).abs() < 5e-3);
    }

    #[test]
    fn adaptive_inserts_large_jump() {
        let z = StepPath::scalar(vec![0.0, 0.37], vec![0.0, 1.0]).unwrap();
        let p = problem(Preset::Identity, 0.0, z, StepPath::constant(&[-10.0]).unwrap()).with_horizon(1.0).unwrap();
        let parts = adaptive_partition(&p, 10, usize::MAX).unwrap();
        assert!(parts.contains(&0.37));
        let pos = parts.iter().position(|&t| t == 0.37).unwrap();
        assert!((parts[pos + 1] - 0.47).abs() < 1e-15);
        let s = euler_adaptive(&p, 10).unwrap();
        assert_eq!(s.x().value(pos - 1), &[0.0]);
        assert_eq!(s.x().value(pos), &[1.0]);
    }

    #[test]
    fn adaptive_ignores_small_jumps() {
        let z = StepPath::scalar(vec![0.0, 0.37], vec![0.0, 0.05]).unwrap();
        let p = problem(Preset::Identity, 0.0, z, StepPath::constant(&[-10.0]).unwrap()).with_horizon(1.0).unwrap();
        let parts = adaptive_partition(&p, 10, usize::MAX).unwrap();
        assert_eq!(parts, uniform_partition(1.0, 10, usize::MAX).unwrap());
    }

    #[test]
    fn partition_overflow() {
        let p = problem(Preset::Identity, 0.0, walk(), StepPath::constant(&[-1.0]).unwrap());
        let opts = SchemeOptions { max_steps: 10, ..Default::default() };
        assert_eq!(euler_with(&p, Scheme::Adaptive, 100, &opts).unwrap_err(), SdeError::PartitionOverflow { cap: 10 });
    }

    #[test]
    fn inadmissible_and_invalid() {
        let z = walk();
        let res = Problem::new(
            vec![-1.0],
            StepPath::constant(&[0.0]).unwrap(),
            z.clone(),
            StepPath::constant(&[0.0]).unwrap(),
            Arc::new(Preset::Identity.build(1).unwrap()),
            2.0,
        );
        assert!(matches!(res, Err(SdeError::InadmissibleStart { component: 0 })));
        assert!(Preset::Rotation.build(3).is_err());
        assert_eq!("bogus".parse::<Preset>(), Err(SdeError::UnknownPreset("bogus".into())));
    }

    #[test]
    fn blowup_is_reported() {
        let coeffs = FnCoefficients::new(1, |x, out| out[0] = x[0] * x[0] * 1e200, |_, g| g.fill(0.0));
        let a = make_fv_driver(&FvDriver::Linear { horizon: 1.0, steps: 4 }).unwrap();
        let p = Problem::new(vec![1e100], a, StepPath::constant(&[0.0]).unwrap(), StepPath::constant(&[0.0]).unwrap(), Arc::new(coeffs), 2.0)
            .unwrap();
        assert!(matches!(euler_uniform(&p, 4), Err(SdeError::CoefficientEvaluationFailure { .. })));
    }

    #[test]
    fn solve_exact_case_and_tol_zero() {
        let p = problem(Preset::Identity, 0.1, walk(), StepPath::constant(&[0.0]).unwrap());
        let s = solve(&p, 1e-12, 8).unwrap();
        assert_eq!(s.diagnostics.cauchy_gap, Some(0.0));
        assert_eq!(s.n, 16);
        assert!(matches!(solve(&p, 0.0, 8), Err(SdeError::NoConvergence { doublings: 14, .. })));
    }

    #[test]
    fn a_priori_bounds_hold() {
        let p = problem(Preset::Identity, 0.1, walk(), StepPath::constant(&[0.0]).unwrap());
        let s = euler_uniform(&p, 8).unwrap();
        for c in a_priori_check(&s, &p, 1e-9).unwrap() {
            assert!(c.pass, "{c}");
        }
    }

    #[test]
    fn csv_layout() {
        let p = problem(Preset::Identity, 0.0, walk(), StepPath::constant(&[-5.0]).unwrap());
        let s = euler_uniform(&p, 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,k1"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
        assert!(text.contains("# scheme=uniform"));
    }
}
