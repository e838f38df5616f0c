#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use nls_core::asymptotics::q_asymptotic_on;
use nls_core::fit::fit_slope;
use nls_core::grid::{SampledFn, UniformGrid};
use nls_core::inverse::{evolve_reflection, reconstruct_potential, SolverOptions};
use nls_core::io::{decay_table_csv, parse_decay_table_csv, reflection_from_json, samples_csv, Json};
use nls_core::oracle::{compare_asymptotics, spectral_tail, split_step_evolve, ComparisonOptions, FieldState, StepperConfig, RESOLUTION_TOL};
use nls_core::scattering::{scattering_coefficients, Potential};
use nls_core::verify::{verify_suite, VerifySettings, DECAY_TIMES};

const MIN_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// q₀ → scattering data
    Scatter,
    /// r, t → q(·, t)
    Invert,
    /// r, t → r(·, t)
    Evolve,
    /// r, t → leading-order asymptotic q on the x-grid
    Asym,
    /// q₀, t → split-step field at time t
    Oracle,
    /// run a named verification suite
    Verify,
    /// oracle-versus-asymptotics decay table and fitted slope
    DecayFit,
}

#[derive(Debug, Parser)]
#[command(name = "nls", version, about = "Inverse scattering toolkit for the defocusing NLS equation")]
struct Cli {
    command: Command,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON file with any of the options below; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    z_half_width: Option<f64>,
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// suite for `verify`
    #[arg(long)]
    suite: Option<String>,
    /// time step for `oracle` and `decay-fit`
    #[arg(long)]
    dt: Option<f64>,
    /// comma-separated snapshot times for `decay-fit`
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    t: Option<f64>,
    x_min: Option<f64>,
    x_max: Option<f64>,
    nx: Option<usize>,
    z_half_width: Option<f64>,
    nz: Option<usize>,
    tol: Option<f64>,
    threads: Option<usize>,
    seed: Option<u64>,
    suite: Option<String>,
    dt: Option<f64>,
    times: Option<Vec<f64>>,
}

#[derive(Debug)]
struct RunConfig {
    command: Command,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    t: f64,
    xgrid: UniformGrid,
    zgrid: UniformGrid,
    tol: f64,
    threads: Option<usize>,
    seed: u64,
    suite: Option<String>,
    dt: f64,
    times: Vec<f64>,
}

impl RunConfig {
    fn resolve(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<FileConfig>(&text).with_context(|| format!("{}: malformed config", path.display()))?
            }
            None => FileConfig::default(),
        };
        if let Some(c) = file.command {
            if c != cli.command {
                bail!("config names command {c:?} but {:?} was requested", cli.command);
            }
        }

        let x_min = cli.x_min.or(file.x_min).unwrap_or(-40.0);
        let x_max = cli.x_max.or(file.x_max).unwrap_or(40.0);
        let nx = cli.nx.or(file.nx).unwrap_or(4096);
        let z_half_width = cli.z_half_width.or(file.z_half_width).unwrap_or(40.0);
        let nz = cli.nz.or(file.nz).unwrap_or(4096);
        let tol = cli.tol.or(file.tol).unwrap_or(nls_core::inverse::DEFAULT_MU_TOL);
        let t = cli.t.or(file.t).unwrap_or(0.0);
        let dt = cli.dt.or(file.dt).unwrap_or(0.02);
        let threads = match cli.threads.or(file.threads) {
            Some(n) => Some(n),
            None => match std::env::var("NLS_THREADS") {
                Ok(v) => Some(v.trim().parse::<usize>().map_err(|e| anyhow!("NLS_THREADS = {v:?}: {e}"))?),
                Err(_) => None,
            },
        };

        for (name, n) in [("nx", nx), ("nz", nz)] {
            if n < MIN_GRID {
                bail!("{name} = {n} is below the minimum grid size {MIN_GRID}");
            }
        }
        for (name, v) in [("tol", tol), ("dt", dt), ("z-half-width", z_half_width)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if !(t >= 0.0 && t.is_finite()) {
            bail!("t must be finite and non-negative, got {t}");
        }
        if threads == Some(0) {
            bail!("thread count must be at least 1");
        }

        Ok(Self {
            command: cli.command,
            input: cli.input.or(file.input),
            output: cli.output.or(file.output),
            t,
            xgrid: UniformGrid::cells(x_min, x_max, nx)?,
            zgrid: UniformGrid::symmetric(z_half_width, nz)?,
            tol,
            threads,
            seed: cli.seed.or(file.seed).unwrap_or(0),
            suite: cli.suite.or(file.suite),
            dt,
            times: cli.times.or(file.times).unwrap_or_else(|| DECAY_TIMES.to_vec()),
        })
    }

    fn input(&self) -> Result<(String, &Path)> {
        let path = self.input.as_deref().ok_or_else(|| anyhow!("--input is required for this command"))?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok((text, path))
    }

    fn output(&self) -> Result<&Path> {
        self.output.as_deref().ok_or_else(|| anyhow!("--output is required for this command"))
    }
}

/// Writes through a temporary file in the target directory so a failed run leaves nothing behind.
fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn with_path<T>(r: nls_core::error::Result<T>, path: &Path) -> Result<T> {
    r.with_context(|| format!("{}", path.display()))
}

enum Outcome {
    Done,
    VerificationFailed,
}

fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Scatter => {
            let (text, path) = cfg.input()?;
            let q0 = with_path(SampledFn::from_json(&text).and_then(Potential::new), path)?;
            let sd = scattering_coefficients(&q0, &cfg.zgrid)?;
            write_atomically(cfg.output()?, &sd.to_json()?)?;
        }
        Command::Invert => {
            let (text, path) = cfg.input()?;
            let r = with_path(reflection_from_json(&text), path)?;
            let xs = cfg.xgrid.points();
            let rec = reconstruct_potential(&r, &xs, cfg.t, &SolverOptions { tol: cfg.tol, ..Default::default() })?;
            let out = cfg.output()?;
            let body = if is_csv(out) { samples_csv(&rec.xs, &rec.q) } else { rec.to_json()? };
            write_atomically(out, &body)?;
        }
        Command::Evolve => {
            let (text, path) = cfg.input()?;
            let r = with_path(reflection_from_json(&text), path)?;
            write_atomically(cfg.output()?, &evolve_reflection(&r, cfg.t)?.to_json()?)?;
        }
        Command::Asym => {
            let (text, path) = cfg.input()?;
            let r = with_path(reflection_from_json(&text), path)?;
            if !(cfg.t > 0.0) {
                bail!("asym needs t > 0");
            }
            let q = q_asymptotic_on(&r, &cfg.xgrid, cfg.t)?;
            let out = cfg.output()?;
            let body = if is_csv(out) { samples_csv(&cfg.xgrid.points(), q.values()) } else { q.to_json()? };
            write_atomically(out, &body)?;
        }
        Command::Oracle => {
            let (text, path) = cfg.input()?;
            let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
            let start = if value.get("t").is_some() {
                with_path(FieldState::from_json(&text), path)?
            } else {
                FieldState::new(with_path(SampledFn::from_json(&text), path)?, 0.0)
            };
            let stepper = StepperConfig { dt: cfg.dt, resolution_tol: None, endpoint_tol: None };
            let end = split_step_evolve(&start, cfg.t.max(start.t), &stepper)?;
            let tail = spectral_tail(end.q.values());
            if tail > RESOLUTION_TOL {
                eprintln!("warning: spectral tail {tail:.3e} exceeds {RESOLUTION_TOL:.0e} of the peak; refine the grid");
            }
            write_atomically(cfg.output()?, &end.to_json()?)?;
        }
        Command::Verify => {
            let suite = cfg.suite.as_deref().ok_or_else(|| anyhow!("--suite is required for verify"))?;
            let settings = VerifySettings { xgrid: cfg.xgrid, zgrid: cfg.zgrid, tol: cfg.tol, seed: cfg.seed };
            let report = verify_suite(suite, &settings)?;
            let json = report.to_json()?;
            match &cfg.output {
                Some(out) => write_atomically(out, &json)?,
                None => println!("{json}"),
            }
            for c in &report.checks {
                eprintln!("{} {}: {:.6e} (threshold {:.3e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
            }
            if !report.pass {
                return Ok(Outcome::VerificationFailed);
            }
        }
        Command::DecayFit => {
            let (text, path) = cfg.input()?;
            let (rows, slope) = if is_csv(path) {
                let rows = with_path(parse_decay_table_csv(&text), path)?;
                let slope = fit_slope(&rows)?;
                (rows, Some(slope))
            } else {
                let q0 = with_path(SampledFn::from_json(&text).and_then(Potential::new), path)?;
                let opts = ComparisonOptions { zgrid: cfg.zgrid, dt: cfg.dt, ..Default::default() };
                let table = compare_asymptotics(&q0, &cfg.times, &opts)?;
                (table.rows, table.slope)
            };
            write_atomically(cfg.output()?, &decay_table_csv(&rows))?;
            match slope {
                Some(s) => println!("slope {s:.6}"),
                None => println!("slope none (exact match)"),
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = RunConfig::resolve(cli).and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
        }
        run(&cfg)
    });
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
