//! Problem presets and the settings-to-`Problem` builder.

use std::sync::Arc;

use pvarsde::drivers::{
    build_zh, make_barrier, make_fv_driver, sample_fbm_components, Barrier, BarrierKind, DriverError, FbmMethod, FbmSampler, FbmSpec,
    FvDriver, FvKind, VolatilitySpec,
};
use pvarsde::path::{StepPath, TimeGrid};
use pvarsde::sde::{Preset, Problem};

use crate::config::Settings;
use crate::error::{CliError, Result};

pub const PROBLEM_PRESETS: [&str; 4] = ["linear-reflected", "geometric", "degenerate", "fbm-tanh"];

/// Fills preset-specific defaults for everything the user did not set.
pub fn apply_problem_defaults(s: &mut Settings) -> Result<()> {
    s.fallback("problem", "linear-reflected");
    let name = s.raw("problem").unwrap_or_default().to_string();
    let defaults: &[(&str, &str)] = match name.as_str() {
        // Identity coefficients against a zero barrier; the driver lives on
        // the coarsest scheme grid, so every refinement reproduces it exactly.
        "linear-reflected" => &[
            ("coeffs", "identity"),
            ("fv", "zero"),
            ("driver", "fbm"),
            ("barrier", "constant"),
            ("barrier_level", "0"),
            ("x0", "0"),
            ("driver_steps", "256"),
            ("n0", "256"),
        ],
        "geometric" => &[
            ("coeffs", "geometric"),
            ("fv", "zero"),
            ("driver", "linear"),
            ("barrier", "constant"),
            ("barrier_level", "-1e6"),
            ("x0", "1"),
            ("driver_steps", "65536"),
            ("n0", "16"),
            ("tol", "1e-2"),
        ],
        "degenerate" => &[
            ("coeffs", "zero"),
            ("fv", "zero"),
            ("driver", "zero"),
            ("barrier", "constant"),
            ("barrier_level", "-1"),
            ("x0", "1"),
            ("n0", "16"),
        ],
        "fbm-tanh" => &[
            ("coeffs", "tanh"),
            ("fv", "linear"),
            ("driver", "fbm"),
            ("barrier", "sine"),
            ("barrier_level", "-0.3"),
            ("x0", "0"),
            ("driver_steps", "1024"),
            ("n0", "16"),
        ],
        other => return Err(CliError::Config(format!("unknown problem preset {other:?} (known: {})", PROBLEM_PRESETS.join(", ")))),
    };
    for (k, v) in defaults {
        s.fallback(k, *v);
    }
    for (k, v) in [
        ("dim", "1"),
        ("hurst", "0.75"),
        ("sigma", "1"),
        ("sigma_shape", "constant"),
        ("horizon", "1"),
        ("driver_steps", "1024"),
        ("barrier_amplitude", "0.2"),
        ("barrier_frequency", "2"),
        ("p", "2"),
        ("scheme", "adaptive"),
        ("tol", "1e-3"),
        ("n0", "16"),
        ("levels", "8"),
        ("method", "circulant"),
    ] {
        s.fallback(k, v);
    }
    Ok(())
}

/// Validated, replicate-independent part of a problem.
pub struct ProblemTemplate {
    dim: usize,
    x0: Vec<f64>,
    horizon: f64,
    p: f64,
    coeffs: Preset,
    a: StepPath,
    l: StepPath,
    driver: DriverKind,
}

enum DriverKind {
    Zero,
    Linear(usize),
    Fbm { sampler: FbmSampler, vol: VolatilitySpec },
}

impl ProblemTemplate {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let dim: usize = s.require("dim")?;
        if dim == 0 {
            return Err(CliError::Config("dim must be >= 1".into()));
        }
        let horizon: f64 = s.require("horizon")?;
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(CliError::Config(format!("horizon must be positive, got {horizon}")));
        }
        let p: f64 = s.require("p")?;
        if p.is_nan() || p < 1.0 {
            return Err(CliError::Path(pvarsde::PathError::InvalidP(p)));
        }
        let hurst: f64 = s.require("hurst")?;
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(DriverError::InvalidHurst(hurst).into());
        }
        let steps: usize = s.require("driver_steps")?;
        if steps == 0 {
            return Err(CliError::Config("driver_steps must be >= 1".into()));
        }
        let coeffs: Preset = s.require::<String>("coeffs")?.parse()?;
        coeffs.build(dim)?;

        let a = match s.require::<String>("fv")?.parse::<FvKind>()? {
            FvKind::Zero => make_fv_driver(&FvDriver::Zero)?,
            FvKind::Linear => make_fv_driver(&FvDriver::Linear { horizon, steps })?,
            FvKind::Jump => make_fv_driver(&FvDriver::PureJump { jumps: s.jumps("fv_jumps")? })?,
        };

        let level: f64 = s.require("barrier_level")?;
        let l = match s.require::<String>("barrier")?.parse::<BarrierKind>()? {
            BarrierKind::Constant => make_barrier(&Barrier::Constant { level: vec![level; dim] })?,
            BarrierKind::Sine => make_barrier(&Barrier::Sinusoidal {
                dim,
                offset: level,
                amplitude: s.require("barrier_amplitude")?,
                frequency: s.require("barrier_frequency")?,
                horizon,
                steps,
            })?,
            BarrierKind::Jumps => make_barrier(&Barrier::Jumps {
                base: vec![level; dim],
                jumps: s.jumps("barrier_jumps")?.into_iter().map(|(t, v)| (t, vec![v; dim])).collect(),
            })?,
        };

        let x0 = vec![s.require::<f64>("x0")?; dim];
        let driver = match s.require::<String>("driver")?.as_str() {
            "zero" => DriverKind::Zero,
            "linear" => DriverKind::Linear(steps),
            "fbm" => {
                let spec = FbmSpec { hurst, horizon, steps, seed: s.get_or("seed", 0u64)? };
                let method: FbmMethod = match s.require::<String>("method")?.as_str() {
                    "circulant" => FbmMethod::Circulant,
                    "cholesky" => FbmMethod::Cholesky,
                    other => return Err(CliError::Config(format!("unknown fBm method {other:?}"))),
                };
                let sampler = FbmSampler::new(spec, method)?;
                let grid = spec.grid()?;
                let vol = volatility(s, &grid, dim, horizon)?;
                DriverKind::Fbm { sampler, vol }
            }
            other => return Err(DriverError::UnknownKind(other.to_string()).into()),
        };
        Ok(Self { dim, x0, horizon, p, coeffs, a, l, driver })
    }

    /// Problem for replicate `index`; the driver is drawn from stream `index`.
    pub fn instantiate(&self, index: u64) -> Result<Problem> {
        let z = match &self.driver {
            DriverKind::Zero => StepPath::constant(&vec![0.0; self.dim])?,
            DriverKind::Linear(steps) => {
                let grid = TimeGrid::uniform(self.horizon, *steps)?;
                let data = grid.times().iter().flat_map(|&t| std::iter::repeat_n(t, self.dim)).collect();
                StepPath::from_flat(grid, self.dim, data)?
            }
            DriverKind::Fbm { sampler, vol } => build_zh(&sample_fbm_components(sampler, self.dim, index), vol)?,
        };
        let coeffs = Arc::new(self.coeffs.build(self.dim)?);
        Ok(Problem::new(self.x0.clone(), self.a.clone(), z, self.l.clone(), coeffs, self.p)?.with_horizon(self.horizon)?)
    }
}

fn volatility(s: &Settings, grid: &TimeGrid, dim: usize, horizon: f64) -> Result<VolatilitySpec> {
    let sigma: f64 = s.require("sigma")?;
    let vol = match s.require::<String>("sigma_shape")?.as_str() {
        "constant" => VolatilitySpec::constant(grid, dim, sigma)?,
        "ramp" => VolatilitySpec::from_fn(grid, dim, |_, t| sigma * (1.0 + t / horizon))?,
        "switch" => VolatilitySpec::from_fn(grid, dim, |_, t| if t < horizon / 2.0 { sigma } else { sigma / 2.0 })?,
        other => return Err(CliError::Config(format!("unknown sigma_shape {other:?}"))),
    };
    Ok(vol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, *v);
        }
        apply_problem_defaults(&mut s).unwrap();
        s
    }

    #[test]
    fn every_preset_builds() {
        for name in PROBLEM_PRESETS {
            let t = ProblemTemplate::from_settings(&settings(&[("problem", name), ("dim", "2")])).unwrap();
            let p = t.instantiate(3).unwrap();
            assert_eq!(p.dim(), 2);
        }
    }

    #[test]
    fn invalid_hurst_and_unknown_preset() {
        let s = settings(&[("hurst", "0.4")]);
        assert!(matches!(ProblemTemplate::from_settings(&s), Err(CliError::Driver(DriverError::InvalidHurst(_)))));
        let mut s = Settings::default();
        s.set("problem", "nope");
        assert!(apply_problem_defaults(&mut s).is_err());
        let s = settings(&[("coeffs", "cubic")]);
        assert!(ProblemTemplate::from_settings(&s).is_err());
    }

    #[test]
    fn replicates_use_distinct_streams() {
        let t = ProblemTemplate::from_settings(&settings(&[("seed", "5")])).unwrap();
        assert_ne!(t.instantiate(0).unwrap().z, t.instantiate(1).unwrap().z);
        assert_eq!(t.instantiate(1).unwrap().z, t.instantiate(1).unwrap().z);
    }
}
