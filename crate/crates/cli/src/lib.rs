//! `levsim` command-line front end.

pub mod commands;
pub mod config;
pub mod presets;
pub mod report;
pub mod units;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use levsim_core::levitation::Model;

use config::RunConfig;
use presets::PresetTable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_LEVITATION: i32 = 3;
pub const EXIT_INVERSION: i32 = 4;
pub const EXIT_NO_DATA: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, message)
    }

    pub fn io(what: &str, err: std::io::Error) -> Self {
        Self::new(EXIT_INTERNAL, format!("{what}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<levsim_core::Error> for CliError {
    fn from(e: levsim_core::Error) -> Self {
        use levsim_core::Error as E;
        let code = match &e {
            E::Domain(_) | E::Parameter(_) | E::Format { .. } | E::Calibration(_) => EXIT_CONFIG,
            E::NoLevitation(_) => EXIT_NO_LEVITATION,
            E::Inversion { .. } => EXIT_INVERSION,
            E::NoData(_) => EXIT_NO_DATA,
            _ => EXIT_INTERNAL,
        };
        let message = match &e {
            E::Inversion { message, min, max } => {
                format!("{message}; achievable range at this radius is [{min:.6e}, {max:.6e}] Hz")
            }
            _ => e.to_string(),
        };
        CliError { code, message }
    }
}

#[derive(Debug, Parser)]
#[command(name = "levsim", version, about = "Meissner levitation and cavity frequency-shift toolkit")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Preset table replacing the built-in one.
    #[arg(long, global = true)]
    pub preset_file: Option<PathBuf>,
    /// Directory for reports and tables.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Suppress the human-readable summary.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium height of one magnet.
    Levitate(LevitateArgs),
    /// Heights and onset temperatures over several presets.
    Sweep(SweepArgs),
    /// Tabulate the frequency-shift map.
    Freqmap(FreqmapArgs),
    /// Levitation height from a measured frequency shift.
    Invert(InvertArgs),
    /// Fit a directory of cooldown traces and segment the series.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MagnetArgs {
    /// Preset label, e.g. N52.
    #[arg(long, conflicts_with = "remanence")]
    pub preset: Option<String>,
    /// Remanence of a custom magnet (e.g. 1.3T).
    #[arg(long, value_parser = units::field)]
    pub remanence: Option<f64>,
    /// Custom magnet radius (e.g. 0.5mm).
    #[arg(long, value_parser = units::length, requires = "remanence")]
    pub radius: Option<f64>,
    /// Custom magnet height.
    #[arg(long, value_parser = units::length, requires = "remanence")]
    pub height: Option<f64>,
    /// Custom magnet mass (e.g. 2.75mg).
    #[arg(long, value_parser = units::mass, requires = "remanence")]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct LevitateArgs {
    #[command(flatten)]
    pub magnet: MagnetArgs,
    #[arg(long, default_value = "two-loop")]
    pub model: Model,
    /// Disc temperature (e.g. 50mK); omit for full screening.
    #[arg(long, value_parser = units::temperature)]
    pub temperature: Option<f64>,
    /// Response loop count.
    #[arg(long)]
    pub loops: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated preset labels; default is every preset.
    #[arg(long, value_delimiter = ',')]
    pub presets: Vec<String>,
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long, value_parser = units::temperature)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub loops: Option<usize>,
    /// Height-bracket scan points.
    #[arg(long)]
    pub z_points: Option<usize>,
    /// CSV output path (default <out-dir>/sweep.csv).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FreqmapArgs {
    /// Ingest a gridded `r_m,z_m,df_hz` map instead of the parametric one.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Number of radial samples.
    #[arg(long, default_value_t = 21)]
    pub r_points: usize,
    /// Comma-separated heights (e.g. 0,0.1mm,0.7mm).
    #[arg(long, value_delimiter = ',', value_parser = units::length)]
    pub z: Vec<f64>,
    /// Refit the parametric map to the default anchors before tabulating.
    #[arg(long)]
    pub calibrate: bool,
    /// CSV output path (default <out-dir>/freqmap.csv).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InvertArgs {
    /// Measured shift (e.g. -30MHz).
    #[arg(long, allow_hyphen_values = true, value_parser = units::frequency)]
    pub df: f64,
    /// Radius of the magnet centre, or `edge`.
    #[arg(long, default_value = "edge", value_parser = units::radius)]
    pub r: units::Radius,
    /// Frequency noise used for the height uncertainty.
    #[arg(long, default_value = "0", value_parser = units::frequency)]
    pub noise: f64,
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Directory of `T_<mK>mK.s2p`/`.csv` traces or a `manifest.csv`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "auto")]
    pub format: commands::analyze::TraceFormat,
    /// `first` or a frequency such as 10GHz.
    #[arg(long)]
    pub reference: Option<String>,
    /// Write a synthetic cooldown for this preset into the input directory first.
    #[arg(long)]
    pub emit_synthetic: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long, value_parser = units::frequency)]
    pub fluctuation: Option<f64>,
    #[arg(long, value_parser = units::frequency)]
    pub step: Option<f64>,
    #[arg(long, value_parser = units::frequency)]
    pub stability: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Cooldown CSV path (default <out-dir>/cooldown.csv).
    #[arg(long)]
    pub cooldown: Option<PathBuf>,
    /// Segmentation JSON path (default <out-dir>/segmentation.json).
    #[arg(long)]
    pub segments: Option<PathBuf>,
}

/// Everything a command needs besides its own arguments.
pub struct Context {
    pub config: RunConfig,
    pub presets: PresetTable,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl Context {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    pub fn output_path(&self, explicit: &Option<PathBuf>, default_name: &str) -> Result<PathBuf, CliError> {
        let path = match explicit {
            Some(p) => p.clone(),
            None => self.out_dir.join(default_name),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(&format!("creating {}", parent.display()), e))?;
        }
        Ok(path)
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LEVSIM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config(format!("LEVSIM_THREADS must be a positive integer, got '{v}'")))?;
        // A pool may already exist when called repeatedly in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let presets = match cli.preset_file.as_ref().or(config.presets_file.as_ref()) {
        Some(path) => PresetTable::load(path)?,
        None => PresetTable::builtin(),
    };
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| config.output.dir.clone());
    let ctx = Context {
        config,
        presets,
        out_dir,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Levitate(a) => commands::levitate::run(&ctx, a),
        Command::Sweep(a) => commands::sweep::run(&ctx, a),
        Command::Freqmap(a) => commands::freqmap::run(&ctx, a),
        Command::Invert(a) => commands::invert::run(&ctx, a),
        Command::Analyze(a) => commands::analyze::run(&ctx, a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
