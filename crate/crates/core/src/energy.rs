//! Transmission current model and battery lifetime.
//!
//! One notification period runs through eight radio states: wake-up,
//! standby, frequency synthesis, radio prepare, transmission, radio off,
//! a final standby and sleep. The average current over the period is
//!
//! ```text
//! I_avg = (sum_i T_i I_i - T_T I_D N_T) / T_notification
//! I_D   = I_tx - (2 I_tx + I_off) / 3
//! ```
//!
//! where the subtracted term accounts for the current sagging towards
//! `I_off` during each hop transition.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{RadioCalibration, TimedState};
use crate::error::{Error, Result};
use crate::framing::block_layout;
use crate::model::{bits_to_ms, check_payload, DataRate, DataRateProfile};
use crate::toa::toa_proposed;

const MS_PER_HOUR: f64 = 3_600_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadioState {
    WakeUp,
    Standby,
    FrequencySynthesis,
    RadioPrepare,
    Transmission,
    RadioOff,
    StandbyFinal,
    Sleep,
}

impl RadioState {
    /// Period order.
    pub const SEQUENCE: [RadioState; 8] = [
        RadioState::WakeUp,
        RadioState::Standby,
        RadioState::FrequencySynthesis,
        RadioState::RadioPrepare,
        RadioState::Transmission,
        RadioState::RadioOff,
        RadioState::StandbyFinal,
        RadioState::Sleep,
    ];

    /// State number, 1 (wake-up) through 8 (sleep).
    pub fn number(self) -> u8 {
        match self {
            RadioState::WakeUp => 1,
            RadioState::Standby => 2,
            RadioState::FrequencySynthesis => 3,
            RadioState::RadioPrepare => 4,
            RadioState::Transmission => 5,
            RadioState::RadioOff => 6,
            RadioState::StandbyFinal => 7,
            RadioState::Sleep => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RadioState::WakeUp => "wake_up",
            RadioState::Standby => "standby",
            RadioState::FrequencySynthesis => "fs",
            RadioState::RadioPrepare => "radio_prepare",
            RadioState::Transmission => "transmission",
            RadioState::RadioOff => "radio_off",
            RadioState::StandbyFinal => "standby_final",
            RadioState::Sleep => "sleep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateLoad {
    pub state: RadioState,
    pub duration_ms: f64,
    pub current_ma: f64,
}

/// Durations and currents of the seven active states of one transmission,
/// plus what the transition correction and the sleep term need.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveProfile {
    /// Wake-up through final standby, in period order.
    pub states: [StateLoad; 7],
    /// On-air duration of every block, in plan order.
    pub block_durations_ms: Vec<f64>,
    pub transition_time_ms: f64,
    pub sleep_current_ma: f64,
}

impl ActiveProfile {
    pub fn new(
        len: u32,
        dr: &DataRateProfile,
        p_tx_dbm: f64,
        cal: &RadioCalibration,
    ) -> Result<Self> {
        let len = check_payload(len)?;
        let t_t = cal.transition_time_ms();
        let i_tx = cal.tx_current(p_tx_dbm, dr)?;
        let load = |state, duration_ms, current_ma| StateLoad {
            state,
            duration_ms,
            current_ma,
        };
        let states = [
            load(
                RadioState::WakeUp,
                cal.wake_up().duration_ms,
                cal.wake_up().current_ma,
            ),
            load(
                RadioState::Standby,
                cal.state_duration(TimedState::Standby, len)?,
                cal.standby_current_ma(),
            ),
            load(
                RadioState::FrequencySynthesis,
                cal.state_duration(TimedState::FrequencySynthesis, len)?,
                cal.fs_current_ma(),
            ),
            load(
                RadioState::RadioPrepare,
                cal.radio_prepare().duration_ms,
                cal.radio_prepare().current_ma,
            ),
            load(RadioState::Transmission, toa_proposed(len, dr, t_t)?, i_tx),
            load(
                RadioState::RadioOff,
                cal.radio_off().duration_ms,
                cal.radio_off().current_ma,
            ),
            load(
                RadioState::StandbyFinal,
                cal.standby_final_duration_ms(),
                cal.standby_current_ma(),
            ),
        ];
        let block_durations_ms = block_layout(len, dr)?
            .into_iter()
            .map(|(_, bits)| bits_to_ms(bits))
            .collect();
        Ok(Self {
            states,
            block_durations_ms,
            transition_time_ms: t_t,
            sleep_current_ma: cal.sleep_current_ma(),
        })
    }

    fn load(&self, state: RadioState) -> StateLoad {
        *self
            .states
            .iter()
            .find(|s| s.state == state)
            .expect("active profile holds every active state")
    }

    /// `T_active`: sum of the seven active state durations.
    pub fn active_duration_ms(&self) -> f64 {
        self.states.iter().map(|s| s.duration_ms).sum()
    }

    pub fn tx_duration_ms(&self) -> f64 {
        self.load(RadioState::Transmission).duration_ms
    }

    pub fn tx_current_ma(&self) -> f64 {
        self.load(RadioState::Transmission).current_ma
    }

    /// Current at the bottom of a hop transition (`I_off`).
    pub fn transition_floor_ma(&self) -> f64 {
        self.load(RadioState::RadioOff).current_ma
    }

    /// `N_T`
    pub fn transitions(&self) -> u32 {
        self.block_durations_ms.len().saturating_sub(1) as u32
    }

    /// Mean current during one transition, `(2 I_tx + I_off) / 3`.
    pub fn transition_mean_current_ma(&self) -> f64 {
        (2.0 * self.tx_current_ma() + self.transition_floor_ma()) / 3.0
    }

    /// `I_D = I_tx - mean transition current`.
    pub fn transition_drop_ma(&self) -> f64 {
        self.tx_current_ma() - self.transition_mean_current_ma()
    }

    /// Charge not drawn because of transition dips, `T_T I_D N_T` (mA·ms).
    pub fn transition_deficit_ma_ms(&self) -> f64 {
        self.transition_time_ms * self.transition_drop_ma() * f64::from(self.transitions())
    }

    fn check_period(&self, period_ms: f64) -> Result<f64> {
        let active_ms = self.active_duration_ms();
        if !period_ms.is_finite() || period_ms <= 0.0 {
            return Err(Error::NonPositive {
                name: "notification period",
                value: period_ms,
            });
        }
        if period_ms < active_ms {
            return Err(Error::InfeasiblePeriod {
                period_ms,
                active_ms,
            });
        }
        Ok(period_ms - active_ms)
    }

    /// Per-state loads for a whole period, sleep included.
    pub fn period_loads(&self, period_ms: f64) -> Result<[StateLoad; 8]> {
        let sleep_ms = self.check_period(period_ms)?;
        let mut out = [StateLoad {
            state: RadioState::Sleep,
            duration_ms: sleep_ms,
            current_ma: self.sleep_current_ma,
        }; 8];
        out[..7].copy_from_slice(&self.states);
        Ok(out)
    }

    /// Closed-form average current over a notification period.
    pub fn average_current(&self, period_ms: f64) -> Result<f64> {
        let gross: f64 = self
            .period_loads(period_ms)?
            .iter()
            .map(|s| s.duration_ms * s.current_ma)
            .sum();
        Ok((gross - self.transition_deficit_ma_ms()) / period_ms)
    }
}

/// `T_active` for one transmission.
pub fn active_duration(
    len: u32,
    dr: &DataRateProfile,
    p_tx_dbm: f64,
    cal: &RadioCalibration,
) -> Result<f64> {
    Ok(ActiveProfile::new(len, dr, p_tx_dbm, cal)?.active_duration_ms())
}

/// Closed-form average current (mA) over a notification period in milliseconds.
pub fn average_current(
    len: u32,
    dr: &DataRateProfile,
    p_tx_dbm: f64,
    period_ms: f64,
    cal: &RadioCalibration,
) -> Result<f64> {
    ActiveProfile::new(len, dr, p_tx_dbm, cal)?.average_current(period_ms)
}

/// Linear battery model: hours until `capacity_mah` is drained at `avg_current_ma`.
pub fn battery_lifetime(avg_current_ma: f64, capacity_mah: f64) -> Result<f64> {
    if !(avg_current_ma.is_finite() && avg_current_ma > 0.0) {
        return Err(Error::NonPositive {
            name: "average current",
            value: avg_current_ma,
        });
    }
    if !(capacity_mah.is_finite() && capacity_mah > 0.0) {
        return Err(Error::NonPositive {
            name: "battery capacity",
            value: capacity_mah,
        });
    }
    Ok(capacity_mah / avg_current_ma)
}

// ---- timeline ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub state: RadioState,
    pub start_ms: f64,
    pub duration_ms: f64,
    pub current_ma: f64,
}

impl Segment {
    pub fn end_ms(&self) -> f64 {
        self.start_ms + self.duration_ms
    }
}

/// A hop transition inside the transmission segment.
///
/// Current holds at `base_ma` for the first and last sixth of the window
/// and forms a triangle down to `floor_ma` over the middle two thirds, so
/// the window averages `(2 base + floor) / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dip {
    pub start_ms: f64,
    pub width_ms: f64,
    pub base_ma: f64,
    pub floor_ma: f64,
}

impl Dip {
    fn vertices(&self) -> [(f64, f64); 5] {
        let w = self.width_ms;
        let t = self.start_ms;
        [
            (t, self.base_ma),
            (t + w / 6.0, self.base_ma),
            (t + w / 2.0, self.floor_ma),
            (t + 5.0 * w / 6.0, self.base_ma),
            (t + w, self.base_ma),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateTimeline {
    pub period_ms: f64,
    pub segments: Vec<Segment>,
    pub dips: Vec<Dip>,
}

impl StateTimeline {
    pub fn from_profile(profile: &ActiveProfile, period_ms: f64) -> Result<Self> {
        let loads = profile.period_loads(period_ms)?;
        let mut segments = Vec::with_capacity(loads.len());
        let mut t = 0.0;
        let mut dips = Vec::new();
        for load in loads {
            if load.state == RadioState::Transmission {
                let mut at = t;
                let n = profile.block_durations_ms.len();
                for (i, block_ms) in profile.block_durations_ms.iter().enumerate() {
                    at += block_ms;
                    if i + 1 < n {
                        dips.push(Dip {
                            start_ms: at,
                            width_ms: profile.transition_time_ms,
                            base_ma: load.current_ma,
                            floor_ma: profile.transition_floor_ma(),
                        });
                        at += profile.transition_time_ms;
                    }
                }
            }
            segments.push(Segment {
                state: load.state,
                start_ms: t,
                duration_ms: load.duration_ms,
                current_ma: load.current_ma,
            });
            t += load.duration_ms;
        }
        Ok(Self {
            period_ms,
            segments,
            dips,
        })
    }

    pub fn segment(&self, state: RadioState) -> Option<&Segment> {
        self.segments.iter().find(|s| s.state == state)
    }

    /// Current waveform as `(time_ms, current_ma)` vertices joined by
    /// straight lines; steps between states appear as repeated times.
    pub fn current_profile(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.segments.len() + 5 * self.dips.len());
        for seg in &self.segments {
            out.push((seg.start_ms, seg.current_ma));
            if seg.state == RadioState::Transmission {
                for dip in &self.dips {
                    out.extend(dip.vertices());
                }
            }
            out.push((seg.end_ms(), seg.current_ma));
        }
        out
    }

    /// `time_ms,current_ma` rows of the waveform.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_ms", "current_ma"])?;
        for (t, i) in self.current_profile() {
            w.write_record([format!("{t:.6}"), format!("{i:.6}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn build_state_timeline(
    len: u32,
    dr: &DataRateProfile,
    p_tx_dbm: f64,
    period_ms: f64,
    cal: &RadioCalibration,
) -> Result<StateTimeline> {
    StateTimeline::from_profile(&ActiveProfile::new(len, dr, p_tx_dbm, cal)?, period_ms)
}

/// Time-weighted mean of the timeline's current waveform, integrated
/// piece by piece with the trapezoid rule.
pub fn average_current_from_timeline(timeline: &StateTimeline) -> f64 {
    let charge: f64 = timeline
        .current_profile()
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    charge / timeline.period_ms
}

// ---- reports and sweeps ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateCharge {
    pub state: RadioState,
    pub number: u8,
    pub duration_ms: f64,
    pub current_ma: f64,
    /// `T_i I_i`
    pub gross_charge_ma_ms: f64,
    /// Gross charge less the transition deficit (transmission only).
    pub charge_ma_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub dr: DataRate,
    pub payload_bytes: u32,
    pub p_tx_dbm: f64,
    pub notification_period_ms: f64,
    pub toa_ms: f64,
    pub active_duration_ms: f64,
    pub sleep_duration_ms: f64,
    pub transitions: u32,
    pub transition_time_ms: f64,
    pub transition_mean_current_ma: f64,
    pub transition_drop_ma: f64,
    pub transition_deficit_ma_ms: f64,
    pub state_charges: Vec<StateCharge>,
    pub average_current_ma: f64,
    pub charge_per_period_mah: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battery_capacity_mah: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifetime_h: Option<f64>,
}

impl EnergyReport {
    pub fn new(
        len: u32,
        dr: &DataRateProfile,
        p_tx_dbm: f64,
        period_ms: f64,
        cal: &RadioCalibration,
        battery_mah: Option<f64>,
    ) -> Result<Self> {
        let profile = ActiveProfile::new(len, dr, p_tx_dbm, cal)?;
        let deficit = profile.transition_deficit_ma_ms();
        let state_charges: Vec<StateCharge> = profile
            .period_loads(period_ms)?
            .iter()
            .map(|s| {
                let gross = s.duration_ms * s.current_ma;
                let net = if s.state == RadioState::Transmission {
                    gross - deficit
                } else {
                    gross
                };
                StateCharge {
                    state: s.state,
                    number: s.state.number(),
                    duration_ms: s.duration_ms,
                    current_ma: s.current_ma,
                    gross_charge_ma_ms: gross,
                    charge_ma_ms: net,
                }
            })
            .collect();
        let average_current_ma = profile.average_current(period_ms)?;
        let lifetime_h = battery_mah
            .map(|c| battery_lifetime(average_current_ma, c))
            .transpose()?;
        Ok(Self {
            dr: dr.id,
            payload_bytes: len,
            p_tx_dbm,
            notification_period_ms: period_ms,
            toa_ms: profile.tx_duration_ms(),
            active_duration_ms: profile.active_duration_ms(),
            sleep_duration_ms: period_ms - profile.active_duration_ms(),
            transitions: profile.transitions(),
            transition_time_ms: profile.transition_time_ms,
            transition_mean_current_ma: profile.transition_mean_current_ma(),
            transition_drop_ma: profile.transition_drop_ma(),
            transition_deficit_ma_ms: deficit,
            charge_per_period_mah: state_charges.iter().map(|s| s.charge_ma_ms).sum::<f64>()
                / MS_PER_HOUR,
            state_charges,
            average_current_ma,
            battery_capacity_mah: battery_mah,
            lifetime_h,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    TxPower,
    Payload,
    NotificationPeriod,
}

/// Inputs held fixed while one axis varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub dr: DataRateProfile,
    pub payload_len: u32,
    pub p_tx_dbm: f64,
    pub notification_s: f64,
    pub battery_mah: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub dr: DataRate,
    pub payload_bytes: u32,
    pub p_tx_dbm: f64,
    pub notification_s: f64,
    pub toa_ms: f64,
    pub t_active_ms: f64,
    pub i_avg_ma: f64,
    pub lifetime_h: Option<f64>,
}

fn sweep_row(base: &SweepBase, cal: &RadioCalibration) -> Result<SweepRow> {
    let profile = ActiveProfile::new(base.payload_len, &base.dr, base.p_tx_dbm, cal)?;
    let i_avg = profile.average_current(base.notification_s * 1000.0)?;
    Ok(SweepRow {
        dr: base.dr.id,
        payload_bytes: base.payload_len,
        p_tx_dbm: base.p_tx_dbm,
        notification_s: base.notification_s,
        toa_ms: profile.tx_duration_ms(),
        t_active_ms: profile.active_duration_ms(),
        i_avg_ma: i_avg,
        lifetime_h: base
            .battery_mah
            .map(|c| battery_lifetime(i_avg, c))
            .transpose()?,
    })
}

/// Evaluates one row per value of `axis`. Rows are computed in parallel and
/// returned in input order.
pub fn sweep(
    axis: SweepAxis,
    base: &SweepBase,
    values: &[f64],
    cal: &RadioCalibration,
) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .map(|&v| {
            let mut point = *base;
            match axis {
                SweepAxis::TxPower => point.p_tx_dbm = v,
                SweepAxis::NotificationPeriod => point.notification_s = v,
                SweepAxis::Payload => {
                    if v.fract() != 0.0 || !(1.0..=255.0).contains(&v) {
                        return Err(Error::InvalidRange(format!(
                            "payload sweep value {v} is not an integer in 1..=255"
                        )));
                    }
                    point.payload_len = v as u32;
                }
            }
            sweep_row(&point, cal)
        })
        .collect()
}

/// `from, from + step, ...` up to and including `to` (within 1e-9 of a step).
pub fn stepped_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err(Error::InvalidRange("bounds must be finite".into()));
    }
    if to < from {
        return Err(Error::InvalidRange(format!("{from}..{to} is empty")));
    }
    if from == to {
        return Ok(vec![from]);
    }
    if step <= 0.0 {
        return Err(Error::InvalidRange(format!("step {step} must be positive")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

pub const SWEEP_CSV_HEADER: [&str; 8] = [
    "dr",
    "payload_bytes",
    "p_tx_dbm",
    "notification_s",
    "toa_ms",
    "t_active_ms",
    "i_avg_ma",
    "lifetime_h",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.dr.to_string(),
            r.payload_bytes.to_string(),
            format!("{:.6}", r.p_tx_dbm),
            format!("{:.6}", r.notification_s),
            format!("{:.6}", r.toa_ms),
            format!("{:.6}", r.t_active_ms),
            format!("{:.6}", r.i_avg_ma),
            r.lifetime_h.map(|h| format!("{h:.6}")).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
