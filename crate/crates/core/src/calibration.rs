//! Measured radio constants: per-state durations and currents, the
//! transmit-current curve and the payload-dependent standby/FS timings.
//!
//! Calibration lives in a JSON document so that measurements from a
//! different board or radio can be dropped in without touching code.
//! [`RadioCalibration`] is the validated, immutable form; edit a
//! [`CalibrationDocument`] and convert it back when a variant is needed.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Curve;
use crate::model::{DataRate, DataRateClass, DataRateProfile};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PA_SWITCH_DBM: f64 = 14.0;

/// Bundled default: measured scalars for the LR1120 plus placeholder curves.
pub const DEFAULT_CALIBRATION_JSON: &str = include_str!("../data/default_calibration.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Amplifier {
    #[serde(rename = "LPA")]
    Low,
    #[serde(rename = "HPA")]
    High,
}

impl Amplifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Amplifier::Low => "LPA",
            Amplifier::High => "HPA",
        }
    }
}

impl fmt::Display for Amplifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Payload-dependent radio states with a duration curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimedState {
    Standby,
    FrequencySynthesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    pub duration_ms: f64,
    pub current_ma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxCurrentPoint {
    pub p_tx_dbm: f64,
    pub dr: DataRate,
    pub i_tx_ma: f64,
    pub pa: Amplifier,
}

// ---- on-disk schema ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub states: StatesDocument,
    pub tx_current: Vec<TxCurrentPoint>,
    pub transition_time_ms: f64,
    #[serde(default = "default_pa_switch")]
    pub pa_switch_threshold_dbm: f64,
}

fn default_pa_switch() -> f64 {
    DEFAULT_PA_SWITCH_DBM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesDocument {
    pub wake_up: StateParams,
    pub standby: CurveState,
    pub fs: CurveState,
    pub radio_prepare: StateParams,
    pub radio_off: StateParams,
    pub standby_final: DurationOnly,
    pub sleep: CurrentOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveState {
    /// `[payload_bytes, duration_ms]` pairs.
    pub curve: Vec<[f64; 2]>,
    pub current_ma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationOnly {
    pub duration_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentOnly {
    pub current_ma: f64,
}

impl CalibrationDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration document serializes")
    }
}

// ---- validated form ----

#[derive(Debug, Clone, PartialEq)]
pub struct RadioCalibration {
    description: Option<String>,
    wake_up: StateParams,
    standby_current_ma: f64,
    standby_final_duration_ms: f64,
    fs_current_ma: f64,
    radio_prepare: StateParams,
    radio_off: StateParams,
    sleep_current_ma: f64,
    transition_time_ms: f64,
    pa_switch_threshold_dbm: f64,
    tx_points: Vec<TxCurrentPoint>,
    tx_curves: HashMap<(DataRateClass, Amplifier), Curve>,
    standby_duration: Curve,
    fs_duration: Curve,
}

/// Parses and validates a calibration JSON document.
pub fn load_calibration(document: &str) -> Result<RadioCalibration> {
    RadioCalibration::from_document(CalibrationDocument::from_json(document)?)
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::calibration(field, "currents must be positive"))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::calibration(field, "durations must be non-negative"))
    }
}

impl RadioCalibration {
    /// The bundled default calibration.
    pub fn bundled() -> Self {
        load_calibration(DEFAULT_CALIBRATION_JSON).expect("bundled calibration is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::calibration(path.display().to_string(), format!("cannot read file: {e}"))
        })?;
        load_calibration(&text)
    }

    pub fn from_document(doc: CalibrationDocument) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::calibration(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", doc.schema_version),
            ));
        }
        let s = &doc.states;

        non_negative("states.wake_up.duration_ms", s.wake_up.duration_ms)?;
        positive("states.wake_up.current_ma", s.wake_up.current_ma)?;
        let standby_current_ma = positive("states.standby.current_ma", s.standby.current_ma)?;
        let fs_current_ma = positive("states.fs.current_ma", s.fs.current_ma)?;
        non_negative(
            "states.radio_prepare.duration_ms",
            s.radio_prepare.duration_ms,
        )?;
        positive(
            "states.radio_prepare.current_ma",
            s.radio_prepare.current_ma,
        )?;
        non_negative("states.radio_off.duration_ms", s.radio_off.duration_ms)?;
        positive("states.radio_off.current_ma", s.radio_off.current_ma)?;
        let standby_final_duration_ms = non_negative(
            "states.standby_final.duration_ms",
            s.standby_final.duration_ms,
        )?;
        let sleep_current_ma = positive("states.sleep.current_ma", s.sleep.current_ma)?;
        if sleep_current_ma >= standby_current_ma {
            return Err(Error::calibration(
                "states.sleep.current_ma",
                "sleep current must be below standby current",
            ));
        }
        let transition_time_ms = non_negative("transition_time_ms", doc.transition_time_ms)?;
        let pa_switch_threshold_dbm = doc.pa_switch_threshold_dbm;
        if !pa_switch_threshold_dbm.is_finite() {
            return Err(Error::calibration(
                "pa_switch_threshold_dbm",
                "must be finite",
            ));
        }

        let standby_duration = duration_curve("states.standby.curve", &s.standby.curve)?;
        let fs_duration = duration_curve("states.fs.curve", &s.fs.curve)?;

        let tx_curves = tx_curves(&doc.tx_current, standby_current_ma, pa_switch_threshold_dbm)?;

        Ok(Self {
            description: doc.description,
            wake_up: s.wake_up,
            standby_current_ma,
            standby_final_duration_ms,
            fs_current_ma,
            radio_prepare: s.radio_prepare,
            radio_off: s.radio_off,
            sleep_current_ma,
            transition_time_ms,
            pa_switch_threshold_dbm,
            tx_points: doc.tx_current,
            tx_curves,
            standby_duration,
            fs_duration,
        })
    }

    pub fn to_document(&self) -> CalibrationDocument {
        let curve = |c: &Curve| c.knots().iter().map(|&(x, y)| [x, y]).collect();
        CalibrationDocument {
            schema_version: SCHEMA_VERSION,
            description: self.description.clone(),
            states: StatesDocument {
                wake_up: self.wake_up,
                standby: CurveState {
                    curve: curve(&self.standby_duration),
                    current_ma: self.standby_current_ma,
                },
                fs: CurveState {
                    curve: curve(&self.fs_duration),
                    current_ma: self.fs_current_ma,
                },
                radio_prepare: self.radio_prepare,
                radio_off: self.radio_off,
                standby_final: DurationOnly {
                    duration_ms: self.standby_final_duration_ms,
                },
                sleep: CurrentOnly {
                    current_ma: self.sleep_current_ma,
                },
            },
            tx_current: self.tx_points.clone(),
            transition_time_ms: self.transition_time_ms,
            pa_switch_threshold_dbm: self.pa_switch_threshold_dbm,
        }
    }

    pub fn to_json(&self) -> String {
        self.to_document().to_json()
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn wake_up(&self) -> StateParams {
        self.wake_up
    }

    pub fn standby_current_ma(&self) -> f64 {
        self.standby_current_ma
    }

    pub fn standby_final_duration_ms(&self) -> f64 {
        self.standby_final_duration_ms
    }

    pub fn fs_current_ma(&self) -> f64 {
        self.fs_current_ma
    }

    pub fn radio_prepare(&self) -> StateParams {
        self.radio_prepare
    }

    pub fn radio_off(&self) -> StateParams {
        self.radio_off
    }

    pub fn sleep_current_ma(&self) -> f64 {
        self.sleep_current_ma
    }

    pub fn transition_time_ms(&self) -> f64 {
        self.transition_time_ms
    }

    pub fn pa_switch_threshold_dbm(&self) -> f64 {
        self.pa_switch_threshold_dbm
    }

    pub fn tx_points(&self) -> &[TxCurrentPoint] {
        &self.tx_points
    }

    pub fn standby_duration_curve(&self) -> &Curve {
        &self.standby_duration
    }

    pub fn fs_duration_curve(&self) -> &Curve {
        &self.fs_duration
    }

    /// Amplifier used at `p_tx_dbm`: HPA strictly above the switch threshold.
    pub fn amplifier_for(&self, p_tx_dbm: f64) -> Amplifier {
        if p_tx_dbm > self.pa_switch_threshold_dbm {
            Amplifier::High
        } else {
            Amplifier::Low
        }
    }

    /// Transmit-power knots calibrated for the data rate's class, sorted.
    pub fn tx_knots(&self, dr: &DataRateProfile) -> Vec<f64> {
        let mut knots: Vec<f64> = [Amplifier::Low, Amplifier::High]
            .iter()
            .filter_map(|&pa| self.tx_curves.get(&(dr.class(), pa)))
            .flat_map(|c| c.knots().iter().map(|&(x, _)| x))
            .collect();
        knots.sort_by(f64::total_cmp);
        knots
    }

    /// Transmit current at `p_tx_dbm`, interpolated within one amplifier region.
    pub fn tx_current(&self, p_tx_dbm: f64, dr: &DataRateProfile) -> Result<f64> {
        let pa = self.amplifier_for(p_tx_dbm);
        let curve = self
            .tx_curves
            .get(&(dr.class(), pa))
            .ok_or(Error::MissingCalibration {
                dr: dr.id,
                amplifier: pa.as_str(),
            })?;
        curve.eval(p_tx_dbm, "transmit power (dBm)")
    }

    /// Duration of a payload-dependent state for `payload_len` bytes.
    pub fn state_duration(&self, state: TimedState, payload_len: u32) -> Result<f64> {
        let x = f64::from(payload_len);
        match state {
            TimedState::Standby => self.standby_duration.eval(x, "standby payload (bytes)"),
            TimedState::FrequencySynthesis => self.fs_duration.eval(x, "FS payload (bytes)"),
        }
    }
}

/// Free-function form of [`RadioCalibration::tx_current`].
pub fn tx_current(cal: &RadioCalibration, p_tx_dbm: f64, dr: &DataRateProfile) -> Result<f64> {
    cal.tx_current(p_tx_dbm, dr)
}

/// Free-function form of [`RadioCalibration::state_duration`].
pub fn state_duration(cal: &RadioCalibration, state: TimedState, payload_len: u32) -> Result<f64> {
    cal.state_duration(state, payload_len)
}

fn duration_curve(field: &str, pairs: &[[f64; 2]]) -> Result<Curve> {
    for (i, p) in pairs.iter().enumerate() {
        non_negative(&format!("{field}[{i}]"), p[1])?;
    }
    Curve::new(field, pairs.iter().map(|p| (p[0], p[1])).collect())
}

fn tx_curves(
    points: &[TxCurrentPoint],
    standby_current_ma: f64,
    threshold: f64,
) -> Result<HashMap<(DataRateClass, Amplifier), Curve>> {
    let mut groups: HashMap<(DataRateClass, Amplifier), Vec<(f64, f64)>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let field = format!("tx_current[{i}]");
        if !p.p_tx_dbm.is_finite() {
            return Err(Error::calibration(
                format!("{field}.p_tx_dbm"),
                "must be finite",
            ));
        }
        positive(&format!("{field}.i_tx_ma"), p.i_tx_ma)?;
        if p.i_tx_ma <= standby_current_ma {
            return Err(Error::calibration(
                format!("{field}.i_tx_ma"),
                "transmit current must exceed standby current",
            ));
        }
        let expected = if p.p_tx_dbm > threshold {
            Amplifier::High
        } else {
            Amplifier::Low
        };
        if p.pa != expected {
            return Err(Error::calibration(
                format!("{field}.pa"),
                format!(
                    "{} dBm falls in the {expected} region (switch above {threshold} dBm)",
                    p.p_tx_dbm
                ),
            ));
        }
        groups
            .entry((p.dr.class(), p.pa))
            .or_default()
            .push((p.p_tx_dbm, p.i_tx_ma));
    }
    groups
        .into_iter()
        .map(|((class, pa), mut knots)| {
            knots.sort_by(|a, b| a.0.total_cmp(&b.0));
            let label = match class {
                DataRateClass::Robust => "DR8",
                DataRateClass::Fast => "DR9",
            };
            let field = format!("tx_current[{label}-class {pa}]");
            Curve::new(&field, knots).map(|c| ((class, pa), c))
        })
        .collect()
}
