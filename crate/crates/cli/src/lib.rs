//! Command-line driver for the spectral-forge verification suites.
//!
//! Every subcommand builds a [`Suite`], runs it and writes a [`RunReport`] as
//! JSON lines (or CSV). The exit status is 0 iff every check passes.

pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{CommandFactory, Parser, Subcommand};
use serde::Deserialize;
use spectral_forge::numeric::C64;
use spectral_forge::psint::PsMode;

pub use report::{Check, RunReport};
pub use suites::{Context, Suite, SuiteError};

use suites::*;

pub const THREADS_ENV: &str = "SPECTRAL_FORGE_THREADS";

/// Exit status for usage and input errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when at least one check fails.
pub const EXIT_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "spectral-forge", version, about = "Numerical verification suites")]
pub struct Cli {
    /// Write checks as CSV instead of JSON lines.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Seed for every randomized suite.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Omit timestamps and wall times so reports are byte-reproducible.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// JSON file with defaults for seed, csv, no_timestamp and threads.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

fn complex_arg(s: &str) -> Result<C64, String> {
    parse_complex(s)
}

fn mode_arg(s: &str) -> Result<PsMode, String> {
    s.parse::<PsMode>().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rankin-Selberg series vs Euler product vs closed form.
    Rankin {
        #[arg(long, default_value = "3.5", value_parser = complex_arg)]
        s: C64,
        #[arg(long, default_value_t = 10)]
        systems: usize,
        #[arg(long, default_value_t = 100_000)]
        terms: u64,
        #[arg(long, default_value_t = 100_000)]
        p_max: u64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Three-mode pairing of an odd system with G_{q1,q2}.
    Ps {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        q1: u64,
        #[arg(long)]
        q2: u64,
        #[arg(long, value_parser = complex_arg)]
        s: C64,
        /// Evaluate a single mode: series, quadrature or closed.
        #[arg(long, value_parser = mode_arg)]
        mode: Option<PsMode>,
        #[arg(long, default_value_t = 100_000)]
        terms: u64,
    },
    /// Bessel moment closed form vs quadrature.
    Bessel {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// First-order expansion checks on random symmetric families.
    Kato {
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPS_GRID)]
        eps_grid: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        families: usize,
    },
    /// Geometric side of the trace formula for class data.
    Trace {
        #[arg(long, value_name = "FILE")]
        classes: PathBuf,
        /// Gaussian parameter in h(r) = exp(-z r^2).
        #[arg(long, default_value = "1", value_parser = complex_arg)]
        z: C64,
        #[arg(long, default_value_t = 64)]
        k_max: usize,
    },
    /// Smoothed eigenvalue counting N_w(T).
    Smooth {
        #[arg(long, value_name = "FILE")]
        spectrum: PathBuf,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Non-vanishing scan over even primitive twists.
    TwistScan {
        #[arg(long, default_value = "2", value_parser = complex_arg)]
        s: C64,
        /// Conductors must be coprime to M.
        #[arg(long = "M", default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 50)]
        rmax: u64,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        level: u64,
        #[arg(long, default_value_t = 20_000)]
        terms: u64,
    },
    /// Character table mod q.
    Characters {
        #[arg(long)]
        q: u64,
    },
}

impl Command {
    pub fn into_suite(self) -> Box<dyn Suite> {
        match self {
            Command::Rankin {
                s,
                systems,
                terms,
                p_max,
                tolerance,
            } => Box::new(RankinSuite {
                s,
                systems,
                terms,
                p_max,
                tolerance,
            }),
            Command::Ps {
                level,
                q1,
                q2,
                s,
                mode,
                terms,
            } => Box::new(PsSuite {
                level,
                q1,
                q2,
                s,
                mode,
                terms,
            }),
            Command::Bessel { count, tolerance } => Box::new(BesselSuite { count, tolerance }),
            Command::Kato { dim, eps_grid, families } => Box::new(KatoSuite { dim, families, eps_grid }),
            Command::Trace { classes, z, k_max } => Box::new(TraceSuite { classes, z, k_max }),
            Command::Smooth { spectrum, t, w, delta } => Box::new(SmoothSuite { spectrum, t, w, delta }),
            Command::TwistScan {
                s,
                m,
                rmax,
                threshold,
                level,
                terms,
            } => Box::new(TwistScanSuite {
                s,
                avoid: m,
                r_max: rmax,
                threshold,
                level,
                terms,
            }),
            Command::Characters { q } => Box::new(CharactersSuite { q }),
        }
    }
}

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    #[serde(default)]
    pub csv: bool,
    #[serde(default)]
    pub no_timestamp: bool,
    pub threads: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

pub const DEFAULT_SEED: u64 = 1;

fn configure_threads(config: &Config) -> Result<(), String> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?),
        Err(_) => config.threads,
    };
    if let Some(n) = requested.filter(|&n| n > 0) {
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a suite and times it.
pub fn execute(suite: &dyn Suite, ctx: &Context) -> Result<RunReport, SuiteError> {
    let start = Instant::now();
    let checks = suite.run(ctx)?;
    let report = RunReport {
        suite: suite.name(),
        seed: ctx.seed,
        parameters: suite.parameters(),
        checks,
        wall_time: start.elapsed().as_secs_f64(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs()),
    };
    match report.duplicate_names().first() {
        Some(dup) => Err(SuiteError(format!("suite {} emitted check '{dup}' twice", report.suite))),
        None => Ok(report),
    }
}

/// Parses `args` (program name first), runs the suite and writes the report
/// to `out`. Diagnostics go to `err`. Returns the exit status.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let mut text = e.render().to_string();
            return if e.use_stderr() {
                if !text.contains("Usage:") {
                    text.push_str(&format!("\n{}\n", Cli::command().render_usage()));
                }
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let config = match cli.config.as_deref().map(Config::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = configure_threads(&config) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    let ctx = Context {
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
    };
    let csv = cli.csv || config.csv;
    let with_time = !(cli.no_timestamp || config.no_timestamp);
    let suite = cli.command.into_suite();
    let report = match execute(suite.as_ref(), &ctx) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", suite.name());
            return EXIT_USAGE;
        }
    };
    let written = if csv {
        report.write_csv(out)
    } else {
        report.write_jsonl(out, with_time)
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: writing report: {e}");
        return EXIT_USAGE;
    }
    if report.passed() {
        0
    } else {
        EXIT_FAILED
    }
}
