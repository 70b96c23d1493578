//! Piecewise-constant càdlàg paths and the path functionals built on them.
//!
//! A [`StepPath`] holds one point of `R^d` per grid time and is read as
//! `x_t = values[i]` on `[times[i], times[i+1])`, with the last value held
//! forever. Every functional here (p-variation, oscillation, running
//! maxima) is exact on that representation: suprema over subdivisions reduce
//! to maxima over the finitely many breakpoints.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DMatrixView};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("grid times must start at 0 and be strictly increasing")]
    NonMonotoneGrid,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value in path data")]
    NonFiniteValue,
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("p-variation exponent must be >= 1, got {0}")]
    InvalidP(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("path must contain at least one point")]
    EmptyPath,
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, PathError>;

/// Strictly increasing times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(PathError::EmptyPath);
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(PathError::NonFiniteValue);
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PathError::NonMonotoneGrid);
        }
        Ok(Self { times })
    }

    /// `{k * horizon / steps : k = 0..=steps}`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() || steps == 0 {
            return Err(PathError::InvalidParameter(format!(
                "uniform grid needs horizon > 0 and steps >= 1 (got {horizon}, {steps})"
            )));
        }
        let n = steps as f64;
        Self::new((0..=steps).map(|k| horizon * k as f64 / n).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    /// Largest `i` with `times[i] <= t`. Requires `t >= 0`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// Largest `i` with `times[i] < t`, or 0 when no such index exists.
    pub fn index_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t).saturating_sub(1)
    }

    /// Sorted union of several grids.
    pub fn merge<'a>(grids: impl IntoIterator<Item = &'a TimeGrid>) -> TimeGrid {
        let mut times: Vec<f64> = grids.into_iter().flat_map(|g| g.times.iter().copied()).collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("grid times are finite"));
        times.dedup();
        TimeGrid { times }
    }
}

/// Closed time window `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) || !(b >= a) || !b.is_finite() {
            return Err(PathError::InvalidWindow(a, b));
        }
        Ok(Self { a, b })
    }

    /// `[0, horizon]` of the given path.
    pub fn whole(path: &StepPath) -> Self {
        Self { a: 0.0, b: path.horizon() }
    }
}

/// A d-dimensional càdlàg step path.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

impl StepPath {
    /// Validated construction from per-time points.
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != times.len() {
            return Err(PathError::LengthMismatch { expected: times.len(), found: values.len() });
        }
        let dim = values.first().map(Vec::len).ok_or(PathError::EmptyPath)?;
        if dim == 0 {
            return Err(PathError::InvalidParameter("dimension must be >= 1".into()));
        }
        if let Some(v) = values.iter().find(|v| v.len() != dim) {
            return Err(PathError::DimensionMismatch(dim, v.len()));
        }
        let grid = TimeGrid::new(times)?;
        Self::from_flat(grid, dim, values.into_iter().flatten().collect())
    }

    /// Scalar path from plain values.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != times.len() {
            return Err(PathError::LengthMismatch { expected: times.len(), found: values.len() });
        }
        Self::from_flat(TimeGrid::new(times)?, 1, values)
    }

    /// Row-major storage: point `i` occupies `data[i*dim..(i+1)*dim]`.
    pub fn from_flat(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(PathError::InvalidParameter("dimension must be >= 1".into()));
        }
        if data.len() != grid.len() * dim {
            return Err(PathError::LengthMismatch { expected: grid.len() * dim, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(PathError::NonFiniteValue);
        }
        Ok(Self { grid, dim, data })
    }

    /// The path that sits at `point` forever.
    pub fn constant(point: &[f64]) -> Result<Self> {
        Self::new(vec![0.0], vec![point.to_vec()])
    }

    /// Constant path at `point` carried on an existing grid.
    pub fn constant_on(grid: &TimeGrid, point: &[f64]) -> Result<Self> {
        let data = (0..grid.len()).flat_map(|_| point.iter().copied()).collect();
        Self::from_flat(grid.clone(), point.len(), data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn first(&self) -> &[f64] {
        self.value(0)
    }

    pub fn last(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    /// Right-continuous value `x_t`.
    pub fn eval(&self, t: f64) -> Result<&[f64]> {
        if !(t >= 0.0) {
            return Err(PathError::NegativeTime(t));
        }
        Ok(self.value(self.grid.index_at(t)))
    }

    /// Left limit `x_{t-}`; at `t = 0` this is `x_0`.
    pub fn left_limit(&self, t: f64) -> Result<&[f64]> {
        if !(t >= 0.0) {
            return Err(PathError::NegativeTime(t));
        }
        Ok(self.value(self.grid.index_before(t)))
    }

    /// Scalar path of coordinate `c`.
    pub fn component(&self, c: usize) -> StepPath {
        assert!(c < self.dim, "component {c} out of range for dimension {}", self.dim);
        StepPath {
            grid: self.grid.clone(),
            dim: 1,
            data: self.values().map(|v| v[c]).collect(),
        }
    }

    /// Stacks scalar paths sharing one grid into a d-dimensional path.
    pub fn stack(components: &[StepPath]) -> Result<StepPath> {
        let first = components.first().ok_or(PathError::EmptyPath)?;
        let mut dim = 0;
        for c in components {
            if c.grid != first.grid {
                return Err(PathError::InvalidParameter("stacked components must share a grid".into()));
            }
            dim += c.dim;
        }
        let mut data = Vec::with_capacity(first.len() * dim);
        for i in 0..first.len() {
            for c in components {
                data.extend_from_slice(c.value(i));
            }
        }
        StepPath::from_flat(first.grid.clone(), dim, data)
    }

    /// The same càdlàg function sampled on `grid`.
    pub fn resample(&self, grid: &TimeGrid) -> StepPath {
        let mut data = Vec::with_capacity(grid.len() * self.dim);
        for &t in grid.times() {
            data.extend_from_slice(self.value(self.grid.index_at(t)));
        }
        StepPath { grid: grid.clone(), dim: self.dim, data }
    }

    /// Pointwise combination of two paths on their merged grid.
    pub fn zip_with(&self, other: &StepPath, f: impl Fn(f64, f64) -> f64) -> Result<StepPath> {
        if self.dim != other.dim {
            return Err(PathError::DimensionMismatch(self.dim, other.dim));
        }
        let (a, b) = if self.grid == other.grid {
            (self.clone(), other.clone())
        } else {
            let grid = TimeGrid::merge([&self.grid, &other.grid]);
            (self.resample(&grid), other.resample(&grid))
        };
        let data = a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect();
        StepPath::from_flat(a.grid, a.dim, data)
    }

    pub fn sub(&self, other: &StepPath) -> Result<StepPath> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn add(&self, other: &StepPath) -> Result<StepPath> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<StepPath> {
        StepPath::from_flat(self.grid.clone(), self.dim, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Adds `shift` to every point.
    pub fn translate(&self, shift: &[f64]) -> Result<StepPath> {
        if shift.len() != self.dim {
            return Err(PathError::DimensionMismatch(self.dim, shift.len()));
        }
        let data = self
            .values()
            .flat_map(|v| v.iter().zip(shift).map(|(a, b)| a + b))
            .collect();
        StepPath::from_flat(self.grid.clone(), self.dim, data)
    }

    /// Indices of grid times in `(a, b]`, preceded by the anchor index of `a`.
    fn window_chain(&self, window: Interval, closed_right: bool) -> Vec<usize> {
        let times = self.times();
        let anchor = self.grid.index_at(window.a);
        let start = times.partition_point(|&s| s <= window.a);
        let end = if closed_right {
            times.partition_point(|&s| s <= window.b)
        } else {
            times.partition_point(|&s| s < window.b)
        };
        let mut chain = Vec::with_capacity(end.saturating_sub(start) + 1);
        chain.push(anchor);
        chain.extend(start..end.max(start));
        chain
    }
}

/// d×d-matrix valued step path, column-major per point.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixStepPath {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

impl MatrixStepPath {
    pub fn new(times: Vec<f64>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if values.len() != times.len() {
            return Err(PathError::LengthMismatch { expected: times.len(), found: values.len() });
        }
        let dim = values.first().map(|m| m.nrows()).ok_or(PathError::EmptyPath)?;
        if dim == 0 {
            return Err(PathError::InvalidParameter("dimension must be >= 1".into()));
        }
        if let Some(m) = values.iter().find(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(PathError::DimensionMismatch(dim, m.nrows().max(m.ncols())));
        }
        let grid = TimeGrid::new(times)?;
        let data: Vec<f64> = values.iter().flat_map(|m| m.iter().copied()).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(PathError::NonFiniteValue);
        }
        Ok(Self { grid, dim, data })
    }

    /// `c·I` held on the grid of `like`.
    pub fn scaled_identity(grid: &TimeGrid, dim: usize, c: f64) -> Result<Self> {
        let m = DMatrix::<f64>::identity(dim, dim) * c;
        Self::new(grid.times().to_vec(), vec![m; grid.len()])
    }

    /// Scalar integrand (d = 1) from plain values.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mats = values.into_iter().map(|v| DMatrix::from_element(1, 1, v)).collect();
        Self::new(times, mats)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    pub fn matrix(&self, i: usize) -> DMatrixView<'_, f64> {
        let n = self.dim * self.dim;
        DMatrixView::from_slice(&self.data[i * n..(i + 1) * n], self.dim, self.dim)
    }

    pub fn resample(&self, grid: &TimeGrid) -> MatrixStepPath {
        let n = self.dim * self.dim;
        let mut data = Vec::with_capacity(grid.len() * n);
        for &t in grid.times() {
            let i = self.grid.index_at(t);
            data.extend_from_slice(&self.data[i * n..(i + 1) * n]);
        }
        MatrixStepPath { grid: grid.clone(), dim: self.dim, data }
    }
}

/// Operator norm `sup{|Au| : |u| = 1}` (largest singular value).
pub fn operator_norm(m: DMatrixView<'_, f64>) -> f64 {
    match m.nrows() {
        0 => 0.0,
        1 => m[(0, 0)].abs(),
        _ => m.into_owned().singular_values().max(),
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn pow_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p == 3.0 {
        x * x * x
    } else {
        x.powf(p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(PathError::InvalidP(p));
    }
    Ok(())
}

const BLOCK: usize = 32;

/// Maximal `sum |x_{i_k} - x_{i_{k-1}}|^p` over chains `0 = i_0 < ... < i_m = n-1`.
///
/// `best[j]` is the optimum over chains ending at `j`. It is nondecreasing in
/// `j`, so a whole block `[s, e]` can be skipped for target `j` once
/// `best[e] + (dist(s, j) + radius)^p` cannot beat the current candidate.
pub(crate) fn chain_pvar(n: usize, p: f64, dist: impl Fn(usize, usize) -> f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let radius: Vec<f64> = (0..n.div_ceil(BLOCK))
        .map(|b| {
            let s = b * BLOCK;
            (s + 1..(s + BLOCK).min(n)).map(|i| dist(s, i)).fold(0.0, f64::max)
        })
        .collect();
    let mut best = vec![0.0; n];
    for j in 1..n {
        let mut cur = best[j - 1] + pow_p(dist(j - 1, j), p);
        let jb = (j - 1) / BLOCK;
        for i in jb * BLOCK..j - 1 {
            cur = cur.max(best[i] + pow_p(dist(i, j), p));
        }
        for b in (0..jb).rev() {
            let s = b * BLOCK;
            let e = s + BLOCK - 1;
            if best[e] + pow_p(dist(s, j) + radius[b], p) <= cur {
                continue;
            }
            for i in s..=e {
                cur = cur.max(best[i] + pow_p(dist(i, j), p));
            }
        }
        best[j] = cur;
    }
    best[n - 1]
}

/// Drops consecutive repeats and points inside monotone runs. For a scalar
/// sequence the p-variation (p >= 1) is attained on local extrema plus the
/// two endpoints, so this leaves the value unchanged.
fn scalar_extrema(values: &[f64]) -> Vec<f64> {
    let mut dedup: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if dedup.last() != Some(&v) {
            dedup.push(v);
        }
    }
    if dedup.len() <= 2 {
        return dedup;
    }
    let mut out = Vec::with_capacity(dedup.len());
    out.push(dedup[0]);
    for k in 1..dedup.len() - 1 {
        if (dedup[k] - dedup[k - 1]) * (dedup[k + 1] - dedup[k]) < 0.0 {
            out.push(dedup[k]);
        }
    }
    out.push(dedup[dedup.len() - 1]);
    out
}

fn chain_pvar_points(path: &StepPath, chain: &[usize], p: f64) -> f64 {
    if path.dim() == 1 {
        let vals: Vec<f64> = chain.iter().map(|&i| path.value(i)[0]).collect();
        let ext = scalar_extrema(&vals);
        chain_pvar(ext.len(), p, |i, j| (ext[j] - ext[i]).abs())
    } else {
        chain_pvar(chain.len(), p, |i, j| euclid(path.value(chain[i]), path.value(chain[j])))
    }
}

/// `v_p(x)_{[a,b]}`: the p-th power variation over the window.
pub fn p_variation(path: &StepPath, p: f64, window: Interval) -> Result<f64> {
    check_p(p)?;
    let chain = path.window_chain(window, true);
    Ok(chain_pvar_points(path, &chain, p))
}

/// `V_p(x)_{[a,b]} = v_p^{1/p}`.
pub fn p_variation_root(path: &StepPath, p: f64, window: Interval) -> Result<f64> {
    Ok(p_variation(path, p, window)?.powf(1.0 / p))
}

/// `V̄_p(x)_{[a,b]} = V_p(x)_{[a,b]} + |x_a|`.
pub fn variation_norm(path: &StepPath, p: f64, window: Interval) -> Result<f64> {
    Ok(p_variation_root(path, p, window)? + norm(path.eval(window.a)?))
}

/// `v_p` of a matrix path under the operator norm over `[a, b)`.
pub fn matrix_p_variation_half_open(path: &MatrixStepPath, p: f64, window: Interval) -> Result<f64> {
    check_p(p)?;
    let times = path.grid().times();
    let anchor = path.grid().index_at(window.a);
    let start = times.partition_point(|&s| s <= window.a);
    let end = times.partition_point(|&s| s < window.b).max(start);
    let chain: Vec<usize> = std::iter::once(anchor).chain(start..end).collect();
    Ok(chain_pvar(chain.len(), p, |i, j| {
        operator_norm((path.matrix(chain[j]) - path.matrix(chain[i])).as_view())
    }))
}

/// `V̄_q(x)_{[a,b)}` of a matrix path: `V_q` over the half-open window plus `‖x_a‖`.
pub fn matrix_variation_norm_half_open(path: &MatrixStepPath, q: f64, window: Interval) -> Result<f64> {
    let v = matrix_p_variation_half_open(path, q, window)?;
    let a = path.grid().index_at(window.a);
    Ok(v.powf(1.0 / q) + operator_norm(path.matrix(a)))
}

/// Componentwise running supremum `s ↦ sup_{u <= s} x_u`.
pub fn running_max(path: &StepPath) -> StepPath {
    let d = path.dim();
    let mut data = path.data().to_vec();
    for i in 1..path.len() {
        for c in 0..d {
            data[i * d + c] = data[i * d + c].max(data[(i - 1) * d + c]);
        }
    }
    StepPath { grid: path.grid.clone(), dim: d, data }
}

/// `sup_{s,t in [a,b]} |x_t - x_s|`.
pub fn oscillation(path: &StepPath, window: Interval) -> f64 {
    let chain = path.window_chain(window, true);
    if path.dim() == 1 {
        let (lo, hi) = chain.iter().map(|&i| path.value(i)[0]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        return hi - lo;
    }
    let mut osc: f64 = 0.0;
    for (k, &i) in chain.iter().enumerate() {
        for &j in &chain[k + 1..] {
            osc = osc.max(euclid(path.value(i), path.value(j)));
        }
    }
    osc
}

/// `sup_{t in [a,b]} |x_t|`.
pub fn sup_norm(path: &StepPath, window: Interval) -> f64 {
    path.window_chain(window, true)
        .into_iter()
        .map(|i| norm(path.value(i)))
        .fold(0.0, f64::max)
}

/// `sup_t |x_t|` over the whole path.
pub fn sup_norm_all(path: &StepPath) -> f64 {
    path.values().map(norm).fold(0.0, f64::max)
}

/// Jump-adapted coarsening.
///
/// Sampling times are `t_0 = 0` and `t_{i+1} = min(t_i + mesh, τ)` where `τ`
/// is the first grid time after `t_i` carrying a jump larger than `delta`.
/// Jump times up to the horizon are always kept; a mesh time is kept only when
/// it falls strictly before the horizon. The output holds `x_{t_i}` on
/// `[t_i, t_{i+1})`.
pub fn coarsen_jump_adapted(path: &StepPath, delta: f64, mesh: f64) -> Result<StepPath> {
    if !(delta > 0.0) || !(mesh > 0.0) || !delta.is_finite() || !mesh.is_finite() {
        return Err(PathError::InvalidParameter(format!(
            "coarsening needs delta > 0 and mesh > 0 (got {delta}, {mesh})"
        )));
    }
    let times = path.times();
    let horizon = path.horizon();
    let big_jumps: Vec<f64> = (1..path.len())
        .filter(|&i| euclid(path.value(i), path.value(i - 1)) > delta)
        .map(|i| times[i])
        .collect();
    let mut out_times = vec![0.0];
    let mut t = 0.0;
    let mut next_jump = 0;
    loop {
        while next_jump < big_jumps.len() && big_jumps[next_jump] <= t {
            next_jump += 1;
        }
        let mesh_t = t + mesh;
        t = match big_jumps.get(next_jump) {
            Some(&tj) if tj <= mesh_t => tj,
            _ if mesh_t < horizon => mesh_t,
            _ => break,
        };
        out_times.push(t);
    }
    let grid = TimeGrid::new(out_times)?;
    Ok(path.resample(&grid))
}

/// Resamples every path on the union of their grids.
pub fn align(paths: &[&StepPath]) -> Vec<StepPath> {
    let grid = TimeGrid::merge(paths.iter().map(|p| p.grid()));
    paths.iter().map(|p| p.resample(&grid)).collect()
}

/// Parses the `t,x1,...,xd` CSV format. Lines starting with `#` are skipped.
pub fn read_csv<R: Read>(reader: R) -> Result<StepPath> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| PathError::Csv(e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "t" {
        return Err(PathError::Csv(format!("expected header t,x1,...,xd, got {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let dim = headers.len() - 1;
    let mut times = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| PathError::Csv(e.to_string()))?;
        if rec.len() != dim + 1 {
            return Err(PathError::Csv(format!("row has {} fields, expected {}", rec.len(), dim + 1)));
        }
        let mut fields = rec.iter().map(|f| f.parse::<f64>().map_err(|e| PathError::Csv(format!("{f:?}: {e}"))));
        times.push(fields.next().expect("row is non-empty")?);
        for f in fields {
            data.push(f?);
        }
    }
    StepPath::from_flat(TimeGrid::new(times)?, dim, data)
}

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(path: &StepPath, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((1..=path.dim()).map(|c| format!("x{c}")));
    w.write_record(&header).map_err(|e| PathError::Csv(e.to_string()))?;
    for (i, &t) in path.times().iter().enumerate() {
        let row = std::iter::once(t).chain(path.value(i).iter().copied()).map(fmt_f64);
        w.write_record(row).map_err(|e| PathError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| PathError::Csv(e.to_string()))
}
