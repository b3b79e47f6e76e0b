//! `convpow` command-line front end.

mod commands;
mod output;
mod report;
mod scheme;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exit status for a successful run whose checks passed.
pub const EXIT_PASS: u8 = 0;
/// Exit status for an analytic failure (assumptions or verification failed, or a numerical error).
pub const EXIT_FAIL: u8 = 1;
/// Exit status for invalid usage or unparseable input.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Library(#[from] convpow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(e: std::io::Error) -> Self {
        CliError::Io(e)
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "USAGE",
            CliError::Io(_) => "IO_ERROR",
            CliError::Library(e) => e.code(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: String,
}

#[derive(Debug, Parser)]
#[command(
    name = "convpow",
    version,
    about = "Convolution powers of finite difference schemes",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Scheme: `lf:<lambda>`, `imp:<lambda>` or a JSON file.
    #[arg(long, global = true, env = "CONVPOW_SCHEME", default_value = "lf:0.5")]
    pub scheme: String,
    /// Output directory; artifacts go to stdout when omitted.
    #[arg(long, global = true, env = "CONVPOW_OUT")]
    pub out: Option<PathBuf>,
    #[arg(
        long,
        global = true,
        env = "CONVPOW_TOL_TANGENCY",
        default_value_t = 1e-9
    )]
    pub tol_tangency: f64,
    #[arg(
        long,
        global = true,
        env = "CONVPOW_TOL_CIRCLE",
        default_value_t = 1e-8
    )]
    pub tol_circle: f64,
    #[arg(long, global = true, env = "CONVPOW_TOL_QUAD", default_value_t = 1e-9)]
    pub tol_quad: f64,
    #[arg(
        long,
        global = true,
        env = "CONVPOW_TOL_SOLVER",
        default_value_t = 1e-13
    )]
    pub tol_solver: f64,
    #[arg(long, global = true, env = "CONVPOW_ETA", default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, global = true, env = "CONVPOW_EPSILON", default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long, global = true, env = "CONVPOW_C_CAP", default_value_t = 1e3)]
    pub c_cap: f64,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, env = "CONVPOW_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Seed for sampled verification sweeps.
    #[arg(long, global = true, env = "CONVPOW_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl GlobalArgs {
    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("tol-tangency", self.tol_tangency),
            ("tol-circle", self.tol_circle),
            ("tol-quad", self.tol_quad),
            ("tol-solver", self.tol_solver),
            ("eta", self.eta),
            ("epsilon", self.epsilon),
            ("c-cap", self.c_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::usage(format!(
                    "--{name} must be positive, got {v}"
                )));
            }
        }
        if self.eta >= self.epsilon {
            return Err(CliError::usage(format!(
                "--eta ({}) must be smaller than --epsilon ({})",
                self.eta, self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpatialMethod {
    Modal,
    Truncated,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TemporalMethod {
    Iterate,
    Contour,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural assumptions and report the tangency data as JSON.
    Analyze,
    /// Sample the symbol on the unit circle as CSV.
    Spectrum {
        #[arg(long, default_value_t = 1024)]
        points: usize,
    },
    /// Resolvent Green's function at one spectral parameter as CSV.
    Spatial {
        /// Spectral parameter as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = -20, allow_hyphen_values = true)]
        jmin: i64,
        #[arg(long, default_value_t = 20, allow_hyphen_values = true)]
        jmax: i64,
        #[arg(long, value_enum, default_value_t = SpatialMethod::Modal)]
        method: SpatialMethod,
    },
    /// Temporal Green's function `G^n` as CSV.
    Temporal {
        #[arg(long)]
        n: usize,
        /// Defaults to the certified window of the iteration.
        #[arg(long, allow_hyphen_values = true)]
        jmin: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        jmax: Option<i64>,
        #[arg(long, value_enum, default_value_t = TemporalMethod::Iterate)]
        method: TemporalMethod,
    },
    /// Splitting sweep, envelope fit and, for implicit schemes, far-field check as JSON.
    Verify {
        #[arg(long, default_value_t = 32)]
        nfit: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![128usize, 256, 512])]
        ntest: Vec<usize>,
        /// Number of sampled spectral parameters in the splitting sweep.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1.1)]
        inflation: f64,
        /// Largest `n` in the far-field check.
        #[arg(long, default_value_t = 64)]
        far_n: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.exit_code() == 0 => {
            let _ = e.print();
            return ExitCode::from(EXIT_PASS);
        }
        Err(e) => {
            report_error(&CliError::usage(e.to_string().trim_end()));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn report_error(e: &CliError) {
    let body = ErrorJson {
        error: ErrorBody {
            code: e.code(),
            message: e.to_string(),
        },
    };
    eprintln!("{}", serde_json::to_string(&body).unwrap_or_default());
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    cli.global.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| commands::dispatch(cli))
}
