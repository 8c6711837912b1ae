//! Time-on-Air models.
//!
//! * [`toa_proposed`]: every coded bit at the GMSK bit rate plus one
//!   transition time per hop change.
//! * [`toa_model_i`]: the regional-parameters formula, which counts whole
//!   102.4 ms fragments for `ceil((L + 3) / M)` hops.
//! * [`toa_model_ii`]: whole headers plus a fractional number of 102.4 ms
//!   fragments, with no overhead bits, preambles or transitions.
//!
//! The baselines are kept as their closed forms define them, including their biases.

use std::io::Write;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::framing::{encoded_payload_bits, FramePlan};
use crate::model::{
    bits_to_ms, check_payload, DataRate, DataRateClass, DataRateProfile, PhyConstants, CRC_BYTES,
    FRAGMENT_PAYLOAD_BITS, FRAGMENT_PREAMBLE_BITS, HEADER_BITS,
};

fn check_transition(t_t_ms: f64) -> Result<f64> {
    if t_t_ms.is_finite() && t_t_ms >= 0.0 {
        Ok(t_t_ms)
    } else {
        Err(Error::Negative {
            name: "transition time",
            value: t_t_ms,
        })
    }
}

/// Number of hop transitions `N_T = N_H + N_F - 1`.
pub fn transitions(len: u32, dr: &DataRateProfile) -> Result<u32> {
    let n_f = encoded_payload_bits(len, dr)?.div_ceil(FRAGMENT_PAYLOAD_BITS);
    Ok(dr.header_replicas + n_f - 1)
}

/// Proposed model: `P_B / R_b + T_T * N_T`, in milliseconds.
pub fn toa_proposed(len: u32, dr: &DataRateProfile, t_t_ms: f64) -> Result<f64> {
    let t_t_ms = check_transition(t_t_ms)?;
    let coded = encoded_payload_bits(len, dr)?;
    let n_f = coded.div_ceil(FRAGMENT_PAYLOAD_BITS);
    let total_bits = HEADER_BITS * dr.header_replicas + coded + FRAGMENT_PREAMBLE_BITS * n_f;
    let n_t = dr.header_replicas + n_f - 1;
    Ok(bits_to_ms(total_bits) + t_t_ms * f64::from(n_t))
}

/// Model I: `N_H T_H + T_P ceil((L + 3) / M)`, `M` = 2 (CR 1/3) or 4 (CR 2/3).
pub fn toa_model_i(len: u32, dr: &DataRateProfile) -> Result<f64> {
    let len = check_payload(len)?;
    let phy = PhyConstants::LR_FHSS;
    let m = match dr.class() {
        DataRateClass::Robust => 2,
        DataRateClass::Fast => 4,
    };
    let hops = (len + 3).div_ceil(m);
    Ok(f64::from(dr.header_replicas) * phy.header_duration_ms()
        + f64::from(hops) * phy.fragment_duration_ms())
}

/// Model II: `N_H T_H + N_PL T_P` with `N_PL = (L + CRC) / (6 CR)` left fractional.
pub fn toa_model_ii(len: u32, dr: &DataRateProfile) -> Result<f64> {
    let len = check_payload(len)?;
    let phy = PhyConstants::LR_FHSS;
    let cr = dr.code_rate;
    let n_pl = f64::from((len + CRC_BYTES) * cr.denominator()) / f64::from(6 * cr.numerator());
    Ok(
        f64::from(dr.header_replicas) * phy.header_duration_ms()
            + n_pl * phy.fragment_duration_ms(),
    )
}

/// Sums block durations of a plan and adds one transition per block boundary.
pub fn toa_from_frame_plan(plan: &FramePlan, t_t_ms: f64) -> f64 {
    let air: f64 = plan.blocks.iter().map(|b| b.duration_ms).sum();
    let boundaries = plan.blocks.len().saturating_sub(1);
    air + t_t_ms * boundaries as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToaComparison {
    #[serde(rename = "L")]
    pub payload_len: u32,
    pub dr: DataRate,
    pub toa_proposed_ms: f64,
    pub toa_model1_ms: f64,
    pub toa_model2_ms: f64,
    /// Model I minus proposed.
    pub delta1_ms: f64,
    /// Model II minus proposed.
    pub delta2_ms: f64,
}

impl ToaComparison {
    pub fn new(len: u32, dr: &DataRateProfile, t_t_ms: f64) -> Result<Self> {
        let proposed = toa_proposed(len, dr, t_t_ms)?;
        let m1 = toa_model_i(len, dr)?;
        let m2 = toa_model_ii(len, dr)?;
        Ok(Self {
            payload_len: len,
            dr: dr.id,
            toa_proposed_ms: proposed,
            toa_model1_ms: m1,
            toa_model2_ms: m2,
            delta1_ms: m1 - proposed,
            delta2_ms: m2 - proposed,
        })
    }
}

/// One comparison row per payload length in `range`.
pub fn compare_models(
    range: RangeInclusive<u32>,
    dr: &DataRateProfile,
    t_t_ms: f64,
) -> Result<Vec<ToaComparison>> {
    if range.is_empty() {
        return Err(Error::InvalidRange(format!(
            "payload range {}..={} is empty",
            range.start(),
            range.end()
        )));
    }
    range.map(|l| ToaComparison::new(l, dr, t_t_ms)).collect()
}

pub const COMPARISON_CSV_HEADER: [&str; 7] = [
    "L",
    "dr",
    "toa_proposed_ms",
    "toa_model1_ms",
    "toa_model2_ms",
    "delta1_ms",
    "delta2_ms",
];

pub fn write_comparison_csv<W: Write>(rows: &[ToaComparison], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.payload_len.to_string(),
            r.dr.to_string(),
            format!("{:.6}", r.toa_proposed_ms),
            format!("{:.6}", r.toa_model1_ms),
            format!("{:.6}", r.toa_model2_ms),
            format!("{:.6}", r.delta1_ms),
            format!("{:.6}", r.delta2_ms),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
