//! Command-line harness for `pvarsde`: simulations, convergence ladders,
//! fBm sampling, p-variation of CSV paths and randomized estimate campaigns.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numerical failure (including non-convergence). Failures also
//! print a machine-readable `error=<code>` line on stderr.

pub mod config;
pub mod error;
pub mod presets;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pvarsde::drivers::{FbmMethod, FbmSampler, FbmSpec, sample_fbm_components};
use pvarsde::path::{self, Interval, StepPath};
use pvarsde::sde::{self, Scheme, SchemeOptions, Solution};

use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::presets::{apply_problem_defaults, ProblemTemplate};

#[derive(Debug, Parser)]
#[command(name = "pvarsde", version, about = "Reflected SDEs driven by p-variation paths")]
pub struct Cli {
    /// INI file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Worker threads for replicates and campaigns (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a configured problem and write the solution CSV.
    Simulate(ProblemArgs),
    /// Dyadic refinement ladder: `n,gap,runtime_s`.
    Convergence {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        levels: Option<u32>,
    },
    /// Sample one fBm path.
    Fbm(FbmArgs),
    /// Randomized inequality campaign.
    Verify(VerifyArgs),
    /// p-variation of a CSV path.
    Pvar(PvarArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// linear-reflected, geometric, degenerate or fbm-tanh.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// zero, identity, geometric, tanh or rotation.
    #[arg(long)]
    pub coeffs: Option<String>,
    /// Finite-variation driver: zero, linear or jump.
    #[arg(long)]
    pub fv: Option<String>,
    /// Jumps of the `jump` driver as `time:size,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub fv_jumps: Option<String>,
    /// Noise driver: fbm, linear or zero.
    #[arg(long)]
    pub driver: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub hurst: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// constant, ramp or switch.
    #[arg(long)]
    pub sigma_shape: Option<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub driver_steps: Option<usize>,
    /// constant, sine or jumps.
    #[arg(long)]
    pub barrier: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub barrier_level: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub barrier_amplitude: Option<f64>,
    #[arg(long)]
    pub barrier_frequency: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub barrier_jumps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// uniform or adaptive (fixed-n runs only).
    #[arg(long)]
    pub scheme: Option<String>,
    /// Fixed resolution; when absent the solver refines until `tol`.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub n0: Option<u64>,
    /// circulant or cholesky.
    #[arg(long)]
    pub method: Option<String>,
}

impl ProblemArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("problem", self.problem.clone());
        s.set_opt("dim", self.dim);
        s.set_opt("coeffs", self.coeffs.clone());
        s.set_opt("fv", self.fv.clone());
        s.set_opt("fv_jumps", self.fv_jumps.clone());
        s.set_opt("driver", self.driver.clone());
        s.set_opt("hurst", self.hurst);
        s.set_opt("sigma", self.sigma);
        s.set_opt("sigma_shape", self.sigma_shape.clone());
        s.set_opt("horizon", self.horizon);
        s.set_opt("driver_steps", self.driver_steps);
        s.set_opt("barrier", self.barrier.clone());
        s.set_opt("barrier_level", self.barrier_level);
        s.set_opt("barrier_amplitude", self.barrier_amplitude);
        s.set_opt("barrier_frequency", self.barrier_frequency);
        s.set_opt("barrier_jumps", self.barrier_jumps.clone());
        s.set_opt("x0", self.x0);
        s.set_opt("p", self.p);
        s.set_opt("scheme", self.scheme.clone());
        s.set_opt("n", self.n);
        s.set_opt("tol", self.tol);
        s.set_opt("n0", self.n0);
        s.set_opt("method", self.method.clone());
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct FbmArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub hurst: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Path index; selects the RNG stream.
    #[arg(long)]
    pub index: Option<u64>,
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub slack: Option<f64>,
    #[arg(long, hide = true)]
    pub corrupt_solver: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PvarArgs {
    /// CSV with header `t,x1,...,xd`.
    pub input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code != 0 {
                eprintln!("error=Usage");
            }
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pvarsde: {e}");
            eprintln!("error={}", e.code());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let name = match &cli.command {
        Command::Simulate(_) => "simulate",
        Command::Convergence { .. } => "convergence",
        Command::Fbm(_) => "fbm",
        Command::Verify(_) => "verify",
        Command::Pvar(_) => "pvar",
    };
    let mut s = Settings::load(cli.config.as_deref(), name)?;
    s.set_opt("seed", cli.seed);
    s.set_opt("replicates", cli.replicates);
    s.set_opt("workers", cli.workers);
    if let Some(out) = &cli.out {
        s.set("out", out.to_string_lossy());
    }
    let out = match &cli.command {
        Command::Simulate(p) => {
            p.apply(&mut s);
            cmd_simulate(&mut s)
        }
        Command::Convergence { problem, levels } => {
            problem.apply(&mut s);
            s.set_opt("levels", *levels);
            cmd_convergence(&mut s)
        }
        Command::Fbm(a) => {
            s.set_opt("hurst", a.hurst);
            s.set_opt("horizon", a.horizon);
            s.set_opt("steps", a.steps);
            s.set_opt("dim", a.dim);
            s.set_opt("index", a.index);
            s.set_opt("method", a.method.clone());
            cmd_fbm(&s)
        }
        Command::Verify(a) => {
            s.set_opt("cases", a.cases);
            s.set_opt("slack", a.slack);
            cmd_verify(&s, a.corrupt_solver)
        }
        Command::Pvar(a) => {
            s.set_opt("p", a.p);
            s.set_opt("a", a.a);
            s.set_opt("b", a.b);
            cmd_pvar(&s, &a.input)
        }
    };
    // Verification failures still emit their table.
    let (bytes, failure) = match out {
        Ok(bytes) => (bytes, None),
        Err(Failure::WithOutput(bytes, e)) => (bytes, Some(e)),
        Err(Failure::Plain(e)) => return Err(e),
    };
    emit(s.raw("out").map(Path::new), &bytes)?;
    failure.map_or(Ok(()), Err)
}

enum Failure {
    Plain(CliError),
    WithOutput(Vec<u8>, CliError),
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Plain(e.into())
    }
}

type CmdResult = std::result::Result<Vec<u8>, Failure>;

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn pool(s: &Settings) -> Result<rayon::ThreadPool> {
    let workers: usize = s.get_or("workers", 0)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn simulate_one(template: &ProblemTemplate, s: &Settings, index: u64) -> Result<Solution> {
    let problem = template.instantiate(index)?;
    Ok(match s.get::<u64>("n")? {
        Some(n) => {
            let scheme: Scheme = s.require::<String>("scheme")?.parse()?;
            sde::euler_with(&problem, scheme, n, &SchemeOptions::default())?
        }
        None => sde::solve(&problem, s.require("tol")?, s.require("n0")?)?,
    })
}

fn cmd_simulate(s: &mut Settings) -> CmdResult {
    apply_problem_defaults(s)?;
    let template = ProblemTemplate::from_settings(s)?;
    let replicates: usize = s.get_or("replicates", 1)?;
    if replicates == 0 {
        return Err(CliError::Config("replicates must be >= 1".into()).into());
    }
    let solutions: Vec<Solution> = pool(s)?.install(|| {
        use rayon::prelude::*;
        (0..replicates as u64).into_par_iter().map(|i| simulate_one(&template, s, i)).collect::<Result<_>>()
    })?;
    let mut buf = Vec::new();
    if replicates == 1 {
        solutions[0].write_csv(&mut buf)?;
        return Ok(buf);
    }
    for (i, sol) in solutions.iter().enumerate() {
        let mut one = Vec::new();
        sol.write_csv(&mut one)?;
        for (j, line) in String::from_utf8_lossy(&one).lines().enumerate() {
            if let Some(rest) = line.strip_prefix("# ") {
                writeln!(buf, "# replicate={i} {rest}")?;
            } else if j == 0 {
                if i == 0 {
                    writeln!(buf, "replicate,{line}")?;
                }
            } else {
                writeln!(buf, "{i},{line}")?;
            }
        }
    }
    Ok(buf)
}

fn cmd_convergence(s: &mut Settings) -> CmdResult {
    apply_problem_defaults(s)?;
    let template = ProblemTemplate::from_settings(s)?;
    let problem = template.instantiate(0)?;
    let scheme: Scheme = s.require::<String>("scheme")?.parse()?;
    let ladder = sde::convergence_ladder(&problem, scheme, s.require("n0")?, s.require("levels")?, &SchemeOptions::default())?;
    let mut buf = Vec::new();
    writeln!(buf, "n,gap,runtime_s")?;
    for rung in ladder.iter().filter(|r| r.gap.is_some()) {
        writeln!(buf, "{},{},{:.6}", rung.n, path::fmt_f64(rung.gap.unwrap_or_default()), rung.seconds)?;
    }
    Ok(buf)
}

fn cmd_fbm(s: &Settings) -> CmdResult {
    let spec = FbmSpec {
        hurst: s.get_or("hurst", 0.75)?,
        horizon: s.get_or("horizon", 1.0)?,
        steps: s.get_or("steps", 1024)?,
        seed: s.get_or("seed", 0)?,
    };
    let method = match s.get_or("method", "circulant".to_string())?.as_str() {
        "circulant" => FbmMethod::Circulant,
        "cholesky" => FbmMethod::Cholesky,
        other => return Err(CliError::Config(format!("unknown fBm method {other:?}")).into()),
    };
    let dim: usize = s.get_or("dim", 1)?;
    if dim == 0 {
        return Err(CliError::Config("dim must be >= 1".into()).into());
    }
    let sampler = FbmSampler::new(spec, method)?;
    let path = StepPath::stack(&sample_fbm_components(&sampler, dim, s.get_or("index", 0)?))?;
    let mut buf = Vec::new();
    path::write_csv(&path, &mut buf)?;
    Ok(buf)
}

fn cmd_pvar(s: &Settings, input: &Path) -> CmdResult {
    let file = fs::File::open(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let p: f64 = s.get_or("p", 2.0)?;
    let path = path::read_csv(file)?;
    let a = s.get_or("a", path.times()[0])?;
    let b = s.get_or("b", path.horizon())?;
    let v = path::p_variation_root(&path, p, Interval::new(a, b)?)?;
    Ok(format!("{v}\n").into_bytes())
}

fn cmd_verify(s: &Settings, corrupt_solver: bool) -> CmdResult {
    let campaign = verify::Campaign {
        cases: s.get_or("cases", 1000)?,
        seed: s.get_or("seed", 7)?,
        slack: s.get_or("slack", pvarsde::check::DEFAULT_SLACK)?,
        corrupt_solver,
    };
    let rows = pool(s)?.install(|| verify::run(&campaign))?;
    let mut buf = Vec::new();
    writeln!(buf, "case,{}", pvarsde::check::CSV_HEADER)?;
    for (case, check) in &rows {
        writeln!(buf, "{case},{}", check.csv_row())?;
    }
    let failed = rows.iter().filter(|(_, c)| !c.pass).count();
    writeln!(buf, "# cases={} checks={} passed={} failed={failed}", campaign.cases, rows.len(), rows.len() - failed)?;
    if failed > 0 {
        return Err(Failure::WithOutput(buf, CliError::VerificationFailed { failed, total: rows.len() }));
    }
    Ok(buf)
}
