//! Command-line front end: manifest ingestion, command dispatch and
//! report emission.

pub mod commands;
pub mod manifest;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use periodlab_core::quad::QuadConfig;
use periodlab_core::stokes::Tolerance;
use serde::Serialize;
use serde_json::json;

pub use manifest::{InputError, Manifest};
pub use report::Report;

/// Environment variable consulted when `--jobs` is not given.
pub const JOBS_ENV: &str = "PERIODLAB_JOBS";

#[derive(Debug, Parser)]
#[command(name = "periodlab", version, about = "Integrate differential forms over singular chains and check the results")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct Flags {
    /// Relative tolerance of verdicts.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Absolute tolerance of verdicts.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Relative accuracy requested from the cubature (default: 1e-8, or
    /// 1e-6 when an integrand may be singular).
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Maximum bisection depth of the cubature.
    #[arg(long, global = true)]
    pub max_depth: Option<u32>,
    /// Worker threads (falls back to PERIODLAB_JOBS).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Omit timings so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Check that simplices have finite volume.
    CheckVolume {
        manifest: PathBuf,
        #[arg(long)]
        simplex: Vec<String>,
        /// Check every simplex of this chain.
        #[arg(long)]
        chain: Option<String>,
    },
    /// Compare ∫dω with the integral of ω over the boundary.
    CheckStokes {
        manifest: PathBuf,
        #[arg(long)]
        form: String,
        #[arg(long, conflicts_with_all = ["chain", "triangulation"])]
        simplex: Option<String>,
        #[arg(long, conflicts_with = "triangulation")]
        chain: Option<String>,
        #[arg(long)]
        triangulation: Option<String>,
    },
    /// Finite volume of a cone, and its integral computed as a cone and as a prism.
    Cone {
        manifest: PathBuf,
        #[arg(long)]
        simplex: String,
        #[arg(long)]
        form: Option<String>,
    },
    /// Barycentric subdivision of a chain or triangulation.
    Subdivide {
        manifest: PathBuf,
        #[arg(long, conflicts_with = "triangulation")]
        chain: Option<String>,
        #[arg(long)]
        triangulation: Option<String>,
        #[arg(long, default_value_t = 1)]
        times: usize,
        /// Also write the emitted manifest to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Integer homology of a complex or triangulation.
    Homology {
        manifest: PathBuf,
        #[arg(long, conflicts_with = "triangulation")]
        complex: Option<String>,
        #[arg(long)]
        triangulation: Option<String>,
    },
    /// Period matrix of cycles against closed forms.
    Periods {
        manifest: PathBuf,
        /// Chains or simplices, comma separated.
        #[arg(long, value_delimiter = ',')]
        cycles: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        forms: Vec<String>,
        /// Add the homology generators of this triangulation as cycles.
        #[arg(long)]
        triangulation: Option<String>,
    },
    /// Glue triangulation t1 onto t2 along their shared part.
    Glue {
        manifest: PathBuf,
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Glue several pieces, each onto the union of the previous ones.
    Cover {
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        pieces: Vec<String>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckVolume { .. } => "check-volume",
            Command::CheckStokes { .. } => "check-stokes",
            Command::Cone { .. } => "cone",
            Command::Subdivide { .. } => "subdivide",
            Command::Homology { .. } => "homology",
            Command::Periods { .. } => "periods",
            Command::Glue { .. } => "glue",
            Command::Cover { .. } => "cover",
        }
    }
}

/// Settings shared by all commands.
#[derive(Clone, Debug)]
pub struct Settings {
    pub quad: QuadConfig,
    pub tol: Tolerance,
    pub jobs: Option<usize>,
    pub seed: u64,
    pub output: OutputFormat,
    pub deterministic: bool,
}

impl Settings {
    pub fn from_flags(flags: &Flags) -> Result<Settings, InputError> {
        let mut quad = QuadConfig {
            rel_tol: flags.quad_tol,
            ..QuadConfig::default()
        };
        if let Some(d) = flags.max_depth {
            quad.max_depth = d;
        }
        let default = Tolerance::default();
        let tol = Tolerance::new(flags.tol.unwrap_or(default.rel), flags.abs_tol.unwrap_or(default.abs));
        if !(tol.rel >= 0.0 && tol.abs >= 0.0 && tol.rel.is_finite() && tol.abs.is_finite()) {
            return Err(InputError::new("", "tolerances must be finite and non-negative"));
        }
        let jobs = match flags.jobs {
            Some(n) => Some(n),
            None => match std::env::var(JOBS_ENV) {
                Ok(v) => Some(
                    v.trim()
                        .parse()
                        .map_err(|_| InputError::new("", format!("{JOBS_ENV} must be a positive integer, got `{v}`")))?,
                ),
                Err(_) => None,
            },
        };
        if jobs == Some(0) {
            return Err(InputError::new("", "the number of jobs must be positive"));
        }
        Ok(Settings {
            quad,
            tol,
            jobs,
            seed: flags.seed,
            output: flags.output,
            deterministic: flags.deterministic,
        })
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "tol": self.tol.rel,
            "abs_tol": self.tol.abs,
            "quad_rel_tol": self.quad.rel_tol,
            "quad_abs_tol": self.quad.abs_tol,
            "max_depth": self.quad.max_depth,
            "max_cells": self.quad.max_cells,
            "jobs": self.jobs,
            "seed": self.seed,
            "deterministic": self.deterministic,
            "output": self.output,
        })
    }
}

/// What a run prints and how it exits.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

impl Outcome {
    fn input_error(e: &InputError) -> Outcome {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            exit_code: 2,
        }
    }
}

/// Runs a parsed command line. Exit codes: 0 on pass, 1 on a failed or
/// inconclusive verdict, 2 on an input error.
pub fn run(cli: &Cli) -> Outcome {
    let settings = match Settings::from_flags(&cli.flags) {
        Ok(s) => s,
        Err(e) => return Outcome::input_error(&e),
    };
    let start = Instant::now();
    let result = match settings.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cli.command, &settings)),
            Err(e) => return Outcome::input_error(&InputError::new("", format!("cannot start {n} workers: {e}"))),
        },
        None => commands::dispatch(&cli.command, &settings),
    };
    let done = match result {
        Ok(d) => d,
        Err(e) => return Outcome::input_error(&e),
    };
    let arguments = serde_json::to_value(&cli.command).expect("arguments serialise");
    let mut report = Report::new(cli.command.name(), arguments, settings.echo(), done.result, done.pass);
    if !settings.deterministic {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let stdout = match settings.output {
        OutputFormat::Json => report::to_json(&report) + "\n",
        OutputFormat::Csv => match done.csv {
            Some(csv) => csv,
            None => {
                return Outcome::input_error(&InputError::new(
                    "",
                    format!("`{}` has no CSV output; use --output json", cli.command.name()),
                ))
            }
        },
    };
    Outcome {
        stdout,
        stderr: String::new(),
        exit_code: if done.pass { 0 } else { 1 },
    }
}
