//! `headtraj` command-line pipeline: simulate scenes, perturb them into
//! observations, decompose headings, reconstruct world motion, evaluate and
//! fit, all over JSON files.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use headtraj_core::HeadingConfig;

pub mod commands;
pub mod formats;
pub mod io;
pub mod selftest;

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

/// Overrides the heading decomposition epsilon.
pub const EPSILON_ENV: &str = "HEADTRAJ_EPSILON";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
    Selftest,
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Selftest => EXIT_SELFTEST,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error: {e:#}"),
            Failure::Solver(e) => write!(f, "solver error: {e:#}"),
            Failure::Selftest => f.write_str("selftest failed"),
        }
    }
}

pub(crate) trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

/// Heading configuration, honoring the epsilon override in the environment.
pub fn heading_config() -> anyhow::Result<HeadingConfig> {
    match std::env::var(EPSILON_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(HeadingConfig::default()),
        Err(e) => Err(anyhow::anyhow!("{EPSILON_ENV}: {e}")),
        Ok(s) => {
            let eps: f64 = s
                .trim()
                .parse()
                .map_err(|e| anyhow::anyhow!("{EPSILON_ENV}=`{s}`: {e}"))?;
            Ok(HeadingConfig::new(eps)?)
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "headtraj",
    version,
    about = "Heading decomposition and world trajectory reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene from a preset or a config file.
    Simulate(SimulateArgs),
    /// Turn a scene into (optionally noisy) observations.
    Perturb(PerturbArgs),
    /// Split camera orientations into heading and roll-pitch.
    Decompose(DecomposeArgs),
    /// Rebuild world-frame motion from observations.
    Reconstruct(ReconstructArgs),
    /// Score a predicted scene against ground truth.
    Evaluate(EvaluateArgs),
    /// Refine observations against supervision with the trajectory objective.
    Fit(FitArgs),
    /// Run the built-in invariant suite.
    Selftest,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene config JSON.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// `<path>-<rig>`, path in stationary|line|circle|figure-eight, rig in static|orbit|follow|handheld.
    #[arg(long)]
    pub preset: Option<String>,
    /// Frame count (preset default 120; overrides the config file).
    #[arg(long)]
    pub frames: Option<usize>,
    /// Frame rate (preset default 30; overrides the config file).
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Noise model JSON; the flags below override its fields.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Roll-pitch rotation noise std, radians.
    #[arg(long)]
    pub rp_noise: Option<f64>,
    /// Local velocity noise std per axis, meters per frame.
    #[arg(long)]
    pub vel_noise: Option<f64>,
    /// Angular velocity rotation noise std, radians.
    #[arg(long)]
    pub ang_vel_noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leave out the ground-truth initial heading.
    #[arg(long)]
    pub no_initial_yaw: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Start the heading at identity even if the observations carry one.
    #[arg(long)]
    pub identity_initial_yaw: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-segment errors as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long)]
    pub supervision: PathBuf,
    /// `{"solver": {...}, "weights": {...}}`; omitted fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Selftest => {
            if selftest::run(stdout) {
                Ok(())
            } else {
                Err(Failure::Selftest)
            }
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&cli, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            if !matches!(f, Failure::Selftest) {
                eprintln!("headtraj: {f}");
            }
            f.code()
        }
    }
}
