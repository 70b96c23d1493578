//! Stochastic and deterministic drivers.
//!
//! Fractional Brownian motion is sampled exactly on a uniform grid by
//! circulant embedding of the fractional Gaussian noise covariance, with a
//! dense Cholesky sampler as fallback and as an independent reference.
//!
//! Randomness comes from ChaCha20 keyed by the user seed, with one ChaCha
//! stream per path index. ChaCha is a counter-mode generator, so the normals
//! drawn for path `i` depend only on `(seed, i)` and never on scheduling.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::path::{self, Interval, PathError, StepPath, TimeGrid};
use crate::young::{self, YoungError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("Hurst index must lie in (0.5, 1), got {0}")]
    InvalidHurst(f64),
    #[error("invalid driver spec: {0}")]
    InvalidSpec(String),
    #[error("covariance is not positive definite even after jitter")]
    EmbeddingFailure,
    #[error("component grids differ")]
    GridMismatch,
    #[error("unknown kind {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Young(#[from] YoungError),
}

pub type Result<T> = std::result::Result<T, DriverError>;

/// Generator for path `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fractional Brownian motion on the uniform grid `{k T / n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmSpec {
    pub hurst: f64,
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
}

impl FbmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return Err(DriverError::InvalidHurst(self.hurst));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() || self.steps == 0 {
            return Err(DriverError::InvalidSpec(format!(
                "horizon must be > 0 and steps >= 1 (got {}, {})",
                self.horizon, self.steps
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::uniform(self.horizon, self.steps)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    /// Circulant embedding, falling back to Cholesky when the embedding is
    /// not nonnegative definite.
    Circulant,
    Cholesky,
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

enum Engine {
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky { lower: DMatrix<f64> },
}

/// Reusable fBm sampler; precomputes the spectral or Cholesky factor once.
pub struct FbmSampler {
    spec: FbmSpec,
    grid: TimeGrid,
    scale: f64,
    engine: Engine,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler")
            .field("spec", &self.spec)
            .field("method", &self.method())
            .finish()
    }
}

impl FbmSampler {
    pub fn new(spec: FbmSpec, method: FbmMethod) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid()?;
        let scale = (spec.horizon / spec.steps as f64).powf(spec.hurst);
        let engine = match method {
            FbmMethod::Circulant => match circulant_engine(spec.hurst, spec.steps) {
                Some(e) => e,
                None => cholesky_engine(spec.hurst, spec.steps)?,
            },
            FbmMethod::Cholesky => cholesky_engine(spec.hurst, spec.steps)?,
        };
        Ok(Self { spec, grid, scale, engine })
    }

    pub fn spec(&self) -> &FbmSpec {
        &self.spec
    }

    /// Method actually in use after any fallback.
    pub fn method(&self) -> FbmMethod {
        match self.engine {
            Engine::Circulant { .. } => FbmMethod::Circulant,
            Engine::Cholesky { .. } => FbmMethod::Cholesky,
        }
    }

    /// Unit-step fractional Gaussian noise increments, scaled to the grid.
    pub fn increments<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.spec.steps;
        match &self.engine {
            Engine::Circulant { sqrt_eig, fft } => {
                let mut w: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|&s| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut w);
                w[..n].iter().map(|c| c.re * self.scale).collect()
            }
            Engine::Cholesky { lower } => {
                let xi = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
                (lower * xi * self.scale).data.into()
            }
        }
    }

    /// One path `B^H` with `B^H_0 = 0`.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> StepPath {
        let inc = self.increments(rng);
        let mut vals = Vec::with_capacity(inc.len() + 1);
        let mut acc = 0.0;
        vals.push(0.0);
        for v in inc {
            acc += v;
            vals.push(acc);
        }
        StepPath::from_flat(self.grid.clone(), 1, vals).expect("finite gaussian sample")
    }
}

fn circulant_engine(hurst: f64, steps: usize) -> Option<Engine> {
    let half = steps.next_power_of_two();
    let m = 2 * half;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= half { j } else { m - j };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    let mut sqrt_eig = Vec::with_capacity(m);
    for c in &row {
        if c.re < -1e-10 {
            return None;
        }
        sqrt_eig.push((c.re.max(0.0) / m as f64).sqrt());
    }
    Some(Engine::Circulant { sqrt_eig, fft })
}

fn cholesky_engine(hurst: f64, steps: usize) -> Result<Engine> {
    let gamma: Vec<f64> = (0..steps).map(|k| fgn_autocovariance(hurst, k)).collect();
    let cov = DMatrix::from_fn(steps, steps, |i, j| gamma[i.abs_diff(j)]);
    let lower = match cov.clone().cholesky() {
        Some(c) => c.l(),
        None => {
            let jittered = cov + DMatrix::identity(steps, steps) * 1e-12;
            jittered.cholesky().ok_or(DriverError::EmbeddingFailure)?.l()
        }
    };
    Ok(Engine::Cholesky { lower })
}

/// Samples path `path_index` of the fBm described by `spec`.
pub fn sample_fbm(spec: &FbmSpec, path_index: u64) -> Result<StepPath> {
    let sampler = FbmSampler::new(*spec, FbmMethod::Circulant)?;
    Ok(sampler.sample(&mut stream_rng(spec.seed, path_index)))
}

/// Per-component volatility samples on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySpec {
    pub sigma: Vec<Vec<f64>>,
}

impl VolatilitySpec {
    pub fn new(sigma: Vec<Vec<f64>>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(DriverError::InvalidSpec("volatility needs at least one component".into()));
        }
        if sigma.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DriverError::InvalidSpec("volatility samples must be finite".into()));
        }
        Ok(Self { sigma })
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `σ^i_t = f(i, t)` sampled on `grid`.
    pub fn from_fn(grid: &TimeGrid, dim: usize, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        Self::new((0..dim).map(|i| grid.times().iter().map(|&t| f(i, t)).collect()).collect())
    }

    pub fn constant(grid: &TimeGrid, dim: usize, c: f64) -> Result<Self> {
        Self::from_fn(grid, dim, |_, _| c)
    }

    /// Discrete `(Σ |σ^i_k|^{1/H} Δt)^H` per component (left-point rule).
    pub fn lh_norms(&self, grid: &TimeGrid, hurst: f64) -> Vec<f64> {
        let t = grid.times();
        self.sigma
            .iter()
            .map(|s| {
                let sum: f64 = (1..t.len()).map(|k| s[k - 1].abs().powf(1.0 / hurst) * (t[k] - t[k - 1])).sum();
                sum.powf(hurst)
            })
            .collect()
    }
}

/// `Z^{H,i} = ∫ σ^i dB^{H,i}` by left-point Riemann sums on the common grid.
pub fn build_zh(components: &[StepPath], vol: &VolatilitySpec) -> Result<StepPath> {
    let first = components.first().ok_or_else(|| DriverError::InvalidSpec("no fBm components".into()))?;
    if vol.dim() != components.len() {
        return Err(DriverError::InvalidSpec(format!(
            "{} volatility components for {} drivers",
            vol.dim(),
            components.len()
        )));
    }
    let mut zs = Vec::with_capacity(components.len());
    for (b, sigma) in components.iter().zip(&vol.sigma) {
        if b.grid() != first.grid() || b.dim() != 1 || sigma.len() != b.len() {
            return Err(DriverError::GridMismatch);
        }
        let z = young::scalar_riemann_sum(sigma, b.data())?;
        zs.push(StepPath::from_flat(b.grid().clone(), 1, z)?);
    }
    Ok(StepPath::stack(&zs)?)
}

/// Samples `d` independent fBm components for path `path_index`, drawn in
/// order from that path's stream.
pub fn sample_fbm_components(sampler: &FbmSampler, dim: usize, path_index: u64) -> Vec<StepPath> {
    let mut rng = stream_rng(sampler.spec().seed, path_index);
    (0..dim).map(|_| sampler.sample(&mut rng)).collect()
}

/// `V_p` of the path restricted to dyadic sub-grids with `2^level` steps.
///
/// Sub-grid `level` keeps indices `j (n-1) / 2^level`; levels finer than the
/// path saturate at the full grid.
pub fn empirical_pvar_profile(path: &StepPath, p: f64, levels: &[u32]) -> Result<Vec<f64>> {
    let steps = path.len() - 1;
    levels
        .iter()
        .map(|&level| {
            let m = (1usize << level.min(62)).min(steps.max(1));
            let idx: Vec<usize> = (0..=m).map(|j| j * steps / m).collect();
            let times = idx.iter().map(|&i| path.times()[i]).collect();
            let data = idx.iter().flat_map(|&i| path.value(i).iter().copied()).collect();
            let sub = StepPath::from_flat(TimeGrid::new(times)?, path.dim(), data)?;
            Ok(path::p_variation_root(&sub, p, Interval::whole(&sub))?)
        })
        .collect()
}

/// Finite-variation drivers `a`.
#[derive(Debug, Clone, PartialEq)]
pub enum FvDriver {
    /// `a ≡ 0`.
    Zero,
    /// `a_t = t` sampled on the uniform grid.
    Linear { horizon: f64, steps: usize },
    /// Starts at 0 and jumps by `size` at each `time`.
    PureJump { jumps: Vec<(f64, f64)> },
}

/// Lower barriers `l`.
#[derive(Debug, Clone, PartialEq)]
pub enum Barrier {
    Constant { level: Vec<f64> },
    /// `l^i_t = offset + amplitude sin(2π frequency t)`, sampled uniformly.
    Sinusoidal { dim: usize, offset: f64, amplitude: f64, frequency: f64, horizon: f64, steps: usize },
    /// Starts at `base` and jumps by the given vector at each time.
    Jumps { base: Vec<f64>, jumps: Vec<(f64, Vec<f64>)> },
}

/// Names accepted by [`make_fv_driver`] kinds parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvKind {
    Zero,
    Linear,
    Jump,
}

impl FromStr for FvKind {
    type Err = DriverError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "linear" => Ok(Self::Linear),
            "jump" => Ok(Self::Jump),
            other => Err(DriverError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    Constant,
    Sine,
    Jumps,
}

impl FromStr for BarrierKind {
    type Err = DriverError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "sine" => Ok(Self::Sine),
            "jumps" => Ok(Self::Jumps),
            other => Err(DriverError::UnknownKind(other.to_string())),
        }
    }
}

fn jump_path(base: &[f64], jumps: &[(f64, Vec<f64>)]) -> Result<StepPath> {
    let mut sorted: Vec<&(f64, Vec<f64>)> = jumps.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut times = vec![0.0];
    let mut values = vec![base.to_vec()];
    for (t, size) in sorted {
        if size.len() != base.len() {
            return Err(DriverError::InvalidSpec("jump size dimension differs from base".into()));
        }
        let next: Vec<f64> = values.last().expect("non-empty").iter().zip(size).map(|(a, b)| a + b).collect();
        if *t == 0.0 {
            values[0] = next;
        } else if times.last() == Some(t) {
            *values.last_mut().expect("non-empty") = next;
        } else {
            times.push(*t);
            values.push(next);
        }
    }
    Ok(StepPath::new(times, values)?)
}

pub fn make_fv_driver(kind: &FvDriver) -> Result<StepPath> {
    match kind {
        FvDriver::Zero => Ok(StepPath::constant(&[0.0])?),
        FvDriver::Linear { horizon, steps } => {
            let grid = TimeGrid::uniform(*horizon, *steps)?;
            let data = grid.times().to_vec();
            Ok(StepPath::from_flat(grid, 1, data)?)
        }
        FvDriver::PureJump { jumps } => {
            let jumps: Vec<(f64, Vec<f64>)> = jumps.iter().map(|&(t, s)| (t, vec![s])).collect();
            jump_path(&[0.0], &jumps)
        }
    }
}

pub fn make_barrier(kind: &Barrier) -> Result<StepPath> {
    match kind {
        Barrier::Constant { level } => Ok(StepPath::constant(level)?),
        Barrier::Sinusoidal { dim, offset, amplitude, frequency, horizon, steps } => {
            let grid = TimeGrid::uniform(*horizon, *steps)?;
            let data = grid
                .times()
                .iter()
                .flat_map(|&t| std::iter::repeat_n(offset + amplitude * (2.0 * PI * frequency * t).sin(), *dim))
                .collect();
            Ok(StepPath::from_flat(grid, *dim, data)?)
        }
        Barrier::Jumps { base, jumps } => jump_path(base, jumps),
    }
}
