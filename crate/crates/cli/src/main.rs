//! `lrfhss`: LR-FHSS time-on-air, frame layout and energy calculator.
//!
//! Exit codes: 0 success, 1 model or calibration error, 2 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrfhss_core::{DataRate, DataRateProfile, DEFAULT_TRANSITION_TIME_MS};

/// Environment variable consulted when `--cal` is not given.
pub const CAL_ENV: &str = "LRFHSS_CAL";

#[derive(Debug, Parser)]
#[command(
    name = "lrfhss",
    version,
    about = "LR-FHSS time-on-air and energy models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time-on-Air of one packet under the proposed model and both baselines.
    Toa(ToaArgs),
    /// Compare the three ToA models over a payload range (CSV).
    Compare(CompareArgs),
    /// Average current, per-state charge and lifetime for one configuration.
    Energy(EnergyArgs),
    /// Sweep transmit power, payload or notification period (CSV).
    Sweep(SweepArgs),
    /// Dump the frame plan (headers, fragments, hop channels).
    Frame(FrameArgs),
    /// Dump the current waveform of one notification period.
    Timeline(TimelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Output formats for table-shaped commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Ptx,
    Payload,
    Period,
}

fn parse_dr(s: &str) -> Result<DataRateProfile, String> {
    s.parse::<DataRate>()
        .map(DataRateProfile::new)
        .map_err(|_| format!("unknown data rate `{s}` (DR8, DR9, DR10, DR11, DR5US, DR6US)"))
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a non-negative number")),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Args)]
pub struct PacketArgs {
    /// Data rate.
    #[arg(long, default_value = "DR8", value_parser = parse_dr)]
    dr: DataRateProfile,
    /// Physical payload length in bytes.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=255))]
    payload: u32,
}

#[derive(Debug, Args)]
pub struct CalArgs {
    /// Calibration JSON; falls back to $LRFHSS_CAL, then the bundled defaults.
    #[arg(long)]
    cal: Option<PathBuf>,
    /// Override the calibration's hop transition time (ms).
    #[arg(long, value_parser = parse_non_negative)]
    tt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToaArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// Hop transition time (ms).
    #[arg(long, default_value_t = DEFAULT_TRANSITION_TIME_MS, value_parser = parse_non_negative)]
    tt: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "DR8", value_parser = parse_dr)]
    dr: DataRateProfile,
    /// First payload length (bytes).
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=255))]
    from: u32,
    /// Last payload length (bytes), inclusive.
    #[arg(long, default_value_t = 65, value_parser = clap::value_parser!(u32).range(1..=255))]
    to: u32,
    #[arg(long, default_value_t = DEFAULT_TRANSITION_TIME_MS, value_parser = parse_non_negative)]
    tt: f64,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// Transmit power (dBm).
    #[arg(long, allow_negative_numbers = true)]
    ptx: f64,
    /// Notification period (s).
    #[arg(long, value_parser = parse_positive)]
    period: f64,
    /// Battery capacity (mAh); adds a lifetime estimate.
    #[arg(long, value_parser = parse_positive)]
    battery: Option<f64>,
    #[command(flatten)]
    cal: CalArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Quantity to vary.
    #[arg(long, value_enum)]
    over: Axis,
    /// First value (dBm, bytes or seconds).
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    /// Last value, inclusive.
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    step: f64,
    #[arg(long, default_value = "DR8", value_parser = parse_dr)]
    dr: DataRateProfile,
    /// Fixed payload (bytes) when not swept.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=255))]
    payload: u32,
    /// Fixed transmit power (dBm) when not swept.
    #[arg(long, default_value_t = 14.0, allow_negative_numbers = true)]
    ptx: f64,
    /// Fixed notification period (s) when not swept.
    #[arg(long, default_value_t = 900.0, value_parser = parse_positive)]
    period: f64,
    #[arg(long, value_parser = parse_positive)]
    battery: Option<f64>,
    #[command(flatten)]
    cal: CalArgs,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    #[command(flatten)]
    packet: PacketArgs,
    /// OBW channels in the hop grid.
    #[arg(long, default_value_t = 35, value_parser = clap::value_parser!(u32).range(2..))]
    channels: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DataFormat::Json)]
    format: DataFormat,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
pub struct TimelineArgs {
    #[command(flatten)]
    packet: PacketArgs,
    #[arg(long, allow_negative_numbers = true)]
    ptx: f64,
    #[arg(long, value_parser = parse_positive)]
    period: f64,
    #[command(flatten)]
    cal: CalArgs,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
    #[command(flatten)]
    out: OutArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version exit 0, real usage errors exit 2
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Toa(a) => commands::toa(a),
        Command::Compare(a) => commands::compare(a),
        Command::Energy(a) => commands::energy(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Frame(a) => commands::frame(a),
        Command::Timeline(a) => commands::timeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
