use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use lrfhss_core::energy::{ActiveProfile, EnergyReport, StateTimeline};
use lrfhss_core::framing::{build_frame_plan, HopGrid};
use lrfhss_core::toa::{compare_models, write_comparison_csv, ToaComparison};
use lrfhss_core::{
    fragment_count, stepped_range, sweep as run_sweep, write_sweep_csv, RadioCalibration,
    SweepAxis, SweepBase,
};
use thiserror::Error;

use crate::{
    Axis, CalArgs, CompareArgs, DataFormat, EnergyArgs, Format, FrameArgs, OutArgs, SweepArgs,
    TimelineArgs, ToaArgs, CAL_ENV,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] lrfhss_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("output: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load_calibration(args: &CalArgs) -> Result<RadioCalibration> {
    let path = args
        .cal
        .clone()
        .or_else(|| std::env::var_os(CAL_ENV).map(PathBuf::from));
    let cal = match path {
        Some(p) => RadioCalibration::from_path(p)?,
        None => RadioCalibration::bundled(),
    };
    match args.tt {
        Some(tt) => {
            let mut doc = cal.to_document();
            doc.transition_time_ms = tt;
            Ok(RadioCalibration::from_document(doc)?)
        }
        None => Ok(cal),
    }
}

fn with_output(out: &OutArgs, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &out.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn stdout() -> OutArgs {
    OutArgs { out: None }
}

pub fn toa(args: ToaArgs) -> Result<()> {
    let dr = args.packet.dr;
    let len = args.packet.payload;
    let row = ToaComparison::new(len, &dr, args.tt)?;
    let n_f = fragment_count(len, &dr)?;
    with_output(&stdout(), |w| {
        match args.format {
            Format::Text => {
                writeln!(w, "dr={}", dr.id)?;
                writeln!(w, "code_rate={}", dr.code_rate)?;
                writeln!(w, "header_replicas={}", dr.header_replicas)?;
                writeln!(w, "payload_bytes={len}")?;
                writeln!(w, "fragments={n_f}")?;
                writeln!(w, "transitions={}", dr.header_replicas + n_f - 1)?;
                writeln!(w, "transition_time_ms={:.6}", args.tt)?;
                writeln!(w, "proposed_ms={:.6}", row.toa_proposed_ms)?;
                writeln!(w, "model1_ms={:.6}", row.toa_model1_ms)?;
                writeln!(w, "model2_ms={:.6}", row.toa_model2_ms)?;
            }
            Format::Csv => write_comparison_csv(&[row], &mut *w)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &row)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })
}

pub fn compare(args: CompareArgs) -> Result<()> {
    if args.from > args.to {
        return Err(CliError::Usage(format!(
            "--from {} is greater than --to {}",
            args.from, args.to
        )));
    }
    let rows = compare_models(args.from..=args.to, &args.dr, args.tt)?;
    with_output(&args.out, |w| {
        match args.format {
            DataFormat::Csv => write_comparison_csv(&rows, &mut *w)?,
            DataFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })
}

pub fn energy(args: EnergyArgs) -> Result<()> {
    let cal = load_calibration(&args.cal)?;
    let report = EnergyReport::new(
        args.packet.payload,
        &args.packet.dr,
        args.ptx,
        args.period * 1000.0,
        &cal,
        args.battery,
    )?;
    with_output(&stdout(), |w| {
        match args.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                writeln!(w)?;
            }
            Format::Csv => {
                writeln!(
                    w,
                    "number,state,duration_ms,current_ma,gross_charge_ma_ms,charge_ma_ms"
                )?;
                for s in &report.state_charges {
                    writeln!(
                        w,
                        "{},{},{:.6},{:.6},{:.6},{:.6}",
                        s.number,
                        s.state.as_str(),
                        s.duration_ms,
                        s.current_ma,
                        s.gross_charge_ma_ms,
                        s.charge_ma_ms
                    )?;
                }
            }
            Format::Text => write_energy_text(w, &report)?,
        }
        Ok(())
    })
}

fn write_energy_text(w: &mut dyn Write, r: &EnergyReport) -> Result<()> {
    writeln!(w, "dr={}", r.dr)?;
    writeln!(w, "payload_bytes={}", r.payload_bytes)?;
    writeln!(w, "p_tx_dbm={:.6}", r.p_tx_dbm)?;
    writeln!(w, "notification_s={:.6}", r.notification_period_ms / 1000.0)?;
    writeln!(w, "toa_ms={:.6}", r.toa_ms)?;
    writeln!(w, "t_active_ms={:.6}", r.active_duration_ms)?;
    writeln!(w, "t_sleep_ms={:.6}", r.sleep_duration_ms)?;
    writeln!(w, "transitions={}", r.transitions)?;
    writeln!(w, "transition_drop_ma={:.6}", r.transition_drop_ma)?;
    writeln!(w, "i_avg_ma={:.6}", r.average_current_ma)?;
    writeln!(w, "charge_per_period_mah={:.6}", r.charge_per_period_mah)?;
    if let (Some(c), Some(h)) = (r.battery_capacity_mah, r.lifetime_h) {
        writeln!(w, "battery_mah={c:.6}")?;
        writeln!(w, "lifetime_h={h:.6}")?;
        writeln!(w, "lifetime_years={:.6}", h / (24.0 * 365.0))?;
    }
    writeln!(w)?;
    writeln!(
        w,
        "{:>2}  {:<14} {:>14} {:>11} {:>16}",
        "#", "state", "duration_ms", "current_ma", "charge_ma_ms"
    )?;
    for s in &r.state_charges {
        writeln!(
            w,
            "{:>2}  {:<14} {:>14.6} {:>11.6} {:>16.6}",
            s.number,
            s.state.as_str(),
            s.duration_ms,
            s.current_ma,
            s.charge_ma_ms
        )?;
    }
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let cal = load_calibration(&args.cal)?;
    let axis = match args.over {
        Axis::Ptx => SweepAxis::TxPower,
        Axis::Payload => SweepAxis::Payload,
        Axis::Period => SweepAxis::NotificationPeriod,
    };
    let values =
        stepped_range(args.from, args.to, args.step).map_err(|e| CliError::Usage(e.to_string()))?;
    let base = SweepBase {
        dr: args.dr,
        payload_len: args.payload,
        p_tx_dbm: args.ptx,
        notification_s: args.period,
        battery_mah: args.battery,
    };
    let rows = run_sweep(axis, &base, &values, &cal)?;
    with_output(&args.out, |w| {
        match args.format {
            DataFormat::Csv => write_sweep_csv(&rows, &mut *w)?,
            DataFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })
}

pub fn frame(args: FrameArgs) -> Result<()> {
    let grid = HopGrid::new(args.channels, args.seed)?;
    let plan = build_frame_plan(args.packet.payload, &args.packet.dr, &grid)?;
    with_output(&args.out, |w| {
        match args.format {
            DataFormat::Csv => plan.write_csv(&mut *w)?,
            DataFormat::Json => writeln!(w, "{}", plan.to_json())?,
        }
        Ok(())
    })
}

pub fn timeline(args: TimelineArgs) -> Result<()> {
    let cal = load_calibration(&args.cal)?;
    let profile = ActiveProfile::new(args.packet.payload, &args.packet.dr, args.ptx, &cal)?;
    let timeline = StateTimeline::from_profile(&profile, args.period * 1000.0)?;
    with_output(&args.out, |w| {
        match args.format {
            DataFormat::Csv => timeline.write_csv(&mut *w)?,
            DataFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, &timeline)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })
}
