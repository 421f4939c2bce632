//! Command-line front end shared by the `catchwise` binary.
//!
//! Exit codes: 0 success; `regs check` also uses 1 (must release) and 2
//! (no rule). Failures use the BSD `sysexits` values: 64 usage, 65 bad
//! input data, 66 missing input, 70 internal, 74 I/O.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{apply_config, GlobalConfig};

use crate::augment::{BlurSpec, Range};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn data(message: impl ToString) -> Self {
        Self::new(EXIT_DATA, message.to_string())
    }

    pub fn io(message: impl ToString) -> Self {
        Self::new(EXIT_IO, message.to_string())
    }

    /// Missing files become 66, everything else 74.
    pub fn from_io(path: &std::path::Path, e: std::io::Error) -> Self {
        let code = if e.kind() == std::io::ErrorKind::NotFound {
            EXIT_NO_INPUT
        } else {
            EXIT_IO
        };
        Self::new(code, format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "catchwise", version, about = "Camera-bob catch assistant toolkit")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON file whose keys fill in flags not given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset augmentation and near-duplicate reduction.
    #[command(subcommand)]
    Augment(AugmentCmd),
    /// Fishing regulation checks.
    #[command(subcommand)]
    Regs(RegsCmd),
    /// Lure drive electrical model.
    #[command(subcommand)]
    Ems(EmsCmd),
    /// Simulated camera bob.
    #[command(subcommand)]
    Bob(BobCmd),
    /// Live session engine.
    #[command(subcommand)]
    Engine(EngineCmd),
    /// Re-run a recorded session trace and print the catch log.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum AugmentCmd {
    /// Augment every PNG in a directory.
    Run(AugmentRunArgs),
    /// Drop near-duplicate PNGs and write a manifest.
    Dedup(DedupArgs),
    /// Write the synthetic near-duplicate corpus as PNGs.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct AugmentRunArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long = "out", value_name = "DIR")]
    pub output: PathBuf,
    /// Equidistant fisheye focal length in pixels.
    #[arg(long, value_name = "F")]
    pub fisheye: Option<f64>,
    /// Contrast factor range; one factor is drawn per image.
    #[arg(long, value_name = "LO:HI", default_value = "1:1")]
    pub contrast: Range,
    /// Gaussian noise standard deviation in pixel levels.
    #[arg(long, value_name = "SIGMA", default_value_t = 0.0)]
    pub noise: f64,
    /// Box motion blur, length in pixels and angle in radians.
    #[arg(long, value_name = "LEN:ANGLE")]
    pub blur: Option<BlurSpec>,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub patch: usize,
    #[arg(long = "ssd-thresh", value_name = "T", default_value_t = 150.0)]
    pub ssd_thresh: f64,
    #[arg(long = "ssim-thresh", value_name = "S", default_value_t = 0.9)]
    pub ssim_thresh: f64,
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long = "out", value_name = "DIR")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub uniques: usize,
    #[arg(long, default_value_t = 7)]
    pub variants: usize,
    #[arg(long, default_value_t = 128)]
    pub size: usize,
}

#[derive(Debug, Subcommand)]
pub enum RegsCmd {
    /// Evaluate one catch against a regulation file.
    Check(RegsCheckArgs),
}

#[derive(Debug, Args)]
pub struct RegsCheckArgs {
    #[arg(long, value_name = "REGS.json")]
    pub file: PathBuf,
    #[arg(long)]
    pub species: String,
    /// Omit when the length could not be measured.
    #[arg(long = "length-cm", value_name = "L")]
    pub length_cm: Option<f64>,
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub date: chrono::NaiveDate,
    /// Fish of this species already kept today.
    #[arg(long, default_value_t = 0)]
    pub bag: u32,
}

#[derive(Debug, Subcommand)]
pub enum EmsCmd {
    /// Voltage needed to drive a current through a resistance.
    Calc(EmsCalcArgs),
    /// Reeling tension from the calibration table.
    Tension(EmsTensionArgs),
}

#[derive(Debug, Args)]
pub struct EmsCalcArgs {
    #[arg(long, value_name = "A")]
    pub current: f64,
    #[arg(long, value_name = "OHM", default_value_t = 21_800.0)]
    pub resistance: f64,
}

#[derive(Debug, Args)]
pub struct EmsTensionArgs {
    #[arg(long, value_name = "A")]
    pub current: f64,
    #[arg(long = "mass-g", value_name = "M")]
    pub mass_g: f64,
    #[arg(long, value_name = "FILE")]
    pub cal: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BobCmd {
    /// Serve one engine connection as a simulated bob.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClockArg {
    Virtual,
    Real,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "HOST:PORT", default_value = "127.0.0.1:7878")]
    pub listen: String,
    /// PNG frames to cycle through; a synthetic fish pass when omitted.
    #[arg(long, value_name = "DIR")]
    pub frames: Option<PathBuf>,
    /// Species label of the synthetic fish.
    #[arg(long, default_value = "walleye")]
    pub species: String,
    #[arg(long, default_value_t = 24.0)]
    pub fps: f64,
    #[arg(long, value_enum, default_value_t = ClockArg::Real)]
    pub clock: ClockArg,
    #[arg(long = "capacity-mah", default_value_t = 2600.0)]
    pub capacity_mah: f64,
    /// Stop after this many seconds of simulator time.
    #[arg(long = "duration-s")]
    pub duration_s: Option<f64>,
    /// Write the message trace (JSON lines) here on exit.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EngineCmd {
    /// Connect to a bob and run a catch session.
    Run(EngineRunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct EngineRunArgs {
    #[arg(long, value_name = "HOST:PORT")]
    pub bob: String,
    #[arg(long, value_name = "FILE")]
    pub regs: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub log: PathBuf,
    #[arg(long = "ui-listen", value_name = "HOST:PORT")]
    pub ui_listen: Option<String>,
    #[arg(long = "auto-release", value_enum, default_value_t = OnOff::Off)]
    pub auto_release: OnOff,
    /// `blob` (color key) or `sidecar:FILE` (pre-computed boxes).
    #[arg(long, default_value = "blob")]
    pub detector: String,
    /// Species reported by the blob detector.
    #[arg(long, default_value = "walleye")]
    pub species: String,
    /// Uniform scene depth in meters used for length estimates.
    #[arg(long, value_name = "M", default_value_t = 1.0)]
    pub depth: f64,
    /// Pinhole focal length in pixels.
    #[arg(long = "focal-px", default_value_t = 100.0)]
    pub focal_px: f64,
    /// Lure drive current in amperes.
    #[arg(long = "lure-current", value_name = "A", default_value_t = 0.020)]
    pub lure_current: f64,
    /// Write the session event trace here on exit.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Session event trace (JSON lines).
    pub trace: PathBuf,
    #[arg(long = "auto-release", value_enum, default_value_t = OnOff::Off)]
    pub auto_release: OnOff,
    /// Write the reproduced catch log here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Compare against this log byte for byte; exit 1 on mismatch.
    #[arg(long, value_name = "FILE")]
    pub expect: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&args) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    let _ = env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            2 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        })
        .parse_default_env()
        .try_init();
    let global = GlobalConfig::from_cli(&cli);
    match commands::dispatch(&cli.command, &global, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn parse(args: &[OsString]) -> Result<Cli, i32> {
    use clap::{CommandFactory, FromArgMatches};
    let report = |e: clap::Error| {
        let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
        let _ = e.print();
        code
    };
    let args = match config::config_path(args) {
        Some(path) => apply_config(args, &path).map_err(|e| {
            eprintln!("error: {e}");
            e.code
        })?,
        None => args.to_vec(),
    };
    let matches = Cli::command().try_get_matches_from(&args).map_err(report)?;
    Cli::from_arg_matches(&matches).map_err(report)
}
