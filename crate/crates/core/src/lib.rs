//! Analytical models for LoRaWAN LR-FHSS uplinks: frame layout and hop
//! planning, Time-on-Air, the per-state transmission current model and
//! battery lifetime.
//!
//! ```
//! use lrfhss_core::{toa_proposed, DataRateProfile, DEFAULT_TRANSITION_TIME_MS};
//!
//! let toa = toa_proposed(10, &DataRateProfile::dr8(), DEFAULT_TRANSITION_TIME_MS).unwrap();
//! assert!((toa - 1336.69).abs() < 1e-6);
//! ```

pub mod calibration;
pub mod energy;
pub mod error;
pub mod framing;
pub mod interp;
pub mod model;
pub mod toa;

pub use calibration::{
    load_calibration, state_duration, tx_current, Amplifier, CalibrationDocument, RadioCalibration,
    TimedState, TxCurrentPoint,
};
pub use energy::{
    active_duration, average_current, average_current_from_timeline, battery_lifetime,
    build_state_timeline, stepped_range, sweep, write_sweep_csv, ActiveProfile, EnergyReport,
    RadioState, StateTimeline, SweepAxis, SweepBase, SweepRow,
};
pub use error::{Error, Result};
pub use framing::{
    build_frame_plan, encoded_payload_bits, fragment_count, generate_hop_sequence, Block,
    BlockKind, FramePlan, HopGrid,
};
pub use interp::Curve;
pub use model::{
    CodeRate, DataRate, DataRateClass, DataRateProfile, PhyConstants, DEFAULT_TRANSITION_TIME_MS,
};
pub use toa::{
    compare_models, toa_from_frame_plan, toa_model_i, toa_model_ii, toa_proposed,
    write_comparison_csv, ToaComparison,
};
