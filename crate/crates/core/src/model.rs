//! Physical-layer constants and LR-FHSS data-rate profiles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instantaneous GMSK bit rate in bits per second.
pub const BIT_RATE_BPS: f64 = 488.281_25;
/// Coded bits in one header replica.
pub const HEADER_BITS: u32 = 114;
/// Payload-carrying bits in one full fragment.
pub const FRAGMENT_PAYLOAD_BITS: u32 = 48;
/// Preamble bits prepended to every fragment.
pub const FRAGMENT_PREAMBLE_BITS: u32 = 2;
/// On-air bits of a full fragment (payload plus preamble).
pub const FRAGMENT_BITS: u32 = FRAGMENT_PAYLOAD_BITS + FRAGMENT_PREAMBLE_BITS;
/// CRC appended to the physical payload, in bytes.
pub const CRC_BYTES: u32 = 2;
/// Trailing overhead bits added by the encoder.
pub const OVERHEAD_BITS: u32 = 6;
/// Largest physical payload accepted, in bytes.
pub const MAX_PAYLOAD_BYTES: u32 = 255;
/// Measured inter-hop transition time of the LR1120, in milliseconds.
pub const DEFAULT_TRANSITION_TIME_MS: f64 = 0.61;

/// Duration of `bits` at [`BIT_RATE_BPS`], in milliseconds.
pub fn bits_to_ms(bits: u32) -> f64 {
    f64::from(bits) * 1000.0 / BIT_RATE_BPS
}

/// Validates a physical payload length, returning it unchanged.
pub fn check_payload(len: u32) -> Result<u32> {
    if (1..=MAX_PAYLOAD_BYTES).contains(&len) {
        Ok(len)
    } else {
        Err(Error::PayloadOutOfRange(len))
    }
}

/// Grouped view of the fixed bit-level constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhyConstants {
    pub bit_rate_bps: f64,
    pub header_bits: u32,
    pub fragment_bits: u32,
    pub fragment_payload_bits: u32,
    pub preamble_bits_per_fragment: u32,
    pub crc_bytes: u32,
    pub overhead_bits: u32,
}

impl PhyConstants {
    pub const LR_FHSS: PhyConstants = PhyConstants {
        bit_rate_bps: BIT_RATE_BPS,
        header_bits: HEADER_BITS,
        fragment_bits: FRAGMENT_BITS,
        fragment_payload_bits: FRAGMENT_PAYLOAD_BITS,
        preamble_bits_per_fragment: FRAGMENT_PREAMBLE_BITS,
        crc_bytes: CRC_BYTES,
        overhead_bits: OVERHEAD_BITS,
    };

    /// Header replica duration, 233.472 ms.
    pub fn header_duration_ms(&self) -> f64 {
        f64::from(self.header_bits) * 1000.0 / self.bit_rate_bps
    }

    /// Full fragment duration, 102.4 ms.
    pub fn fragment_duration_ms(&self) -> f64 {
        f64::from(self.fragment_bits) * 1000.0 / self.bit_rate_bps
    }
}

impl Default for PhyConstants {
    fn default() -> Self {
        Self::LR_FHSS
    }
}

/// Payload FEC code rate as an exact fraction.
///
/// Only 1/3 and 2/3 are usable; 1/2 and 5/6 exist in the radio but are
/// reserved by LoRaWAN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeRate {
    num: u32,
    den: u32,
}

impl CodeRate {
    pub const ONE_THIRD: CodeRate = CodeRate { num: 1, den: 3 };
    pub const TWO_THIRDS: CodeRate = CodeRate { num: 2, den: 3 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        match (num, den) {
            (1, 3) => Ok(Self::ONE_THIRD),
            (2, 3) => Ok(Self::TWO_THIRDS),
            _ => Err(Error::UnsupportedCodeRate { num, den }),
        }
    }

    pub fn numerator(self) -> u32 {
        self.num
    }

    pub fn denominator(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// Coded bit count for `info_bits` information bits, rounded up.
    pub fn encode_bits(self, info_bits: u32) -> u32 {
        (info_bits * self.den).div_ceil(self.num)
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// LoRaWAN data-rate labels that select LR-FHSS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataRate {
    #[serde(rename = "DR8")]
    Dr8,
    #[serde(rename = "DR9")]
    Dr9,
    #[serde(rename = "DR10")]
    Dr10,
    #[serde(rename = "DR11")]
    Dr11,
    #[serde(rename = "DR5US", alias = "DR5_US")]
    Dr5Us,
    #[serde(rename = "DR6US", alias = "DR6_US")]
    Dr6Us,
}

impl DataRate {
    pub const ALL: [DataRate; 6] = [
        DataRate::Dr8,
        DataRate::Dr9,
        DataRate::Dr10,
        DataRate::Dr11,
        DataRate::Dr5Us,
        DataRate::Dr6Us,
    ];

    /// The profile class this label belongs to. DR10 and DR5 (US) behave as
    /// DR8; DR11 and DR6 (US) behave as DR9.
    pub fn class(self) -> DataRateClass {
        match self {
            DataRate::Dr8 | DataRate::Dr10 | DataRate::Dr5Us => DataRateClass::Robust,
            DataRate::Dr9 | DataRate::Dr11 | DataRate::Dr6Us => DataRateClass::Fast,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DataRate::Dr8 => "DR8",
            DataRate::Dr9 => "DR9",
            DataRate::Dr10 => "DR10",
            DataRate::Dr11 => "DR11",
            DataRate::Dr5Us => "DR5US",
            DataRate::Dr6Us => "DR6US",
        }
    }
}

impl fmt::Display for DataRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_uppercase();
        match norm.as_str() {
            "DR8" => Ok(DataRate::Dr8),
            "DR9" => Ok(DataRate::Dr9),
            "DR10" => Ok(DataRate::Dr10),
            "DR11" => Ok(DataRate::Dr11),
            "DR5US" => Ok(DataRate::Dr5Us),
            "DR6US" => Ok(DataRate::Dr6Us),
            _ => Err(Error::UnknownDataRate(s.to_owned())),
        }
    }
}

/// The two distinct LR-FHSS configurations behind the data-rate labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataRateClass {
    /// CR 1/3, three header replicas (DR8, DR10, DR5 US).
    Robust,
    /// CR 2/3, two header replicas (DR9, DR11, DR6 US).
    Fast,
}

/// Code rate and header-replica count selected by a data rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DataRateProfile {
    pub id: DataRate,
    pub code_rate: CodeRate,
    pub header_replicas: u32,
}

impl DataRateProfile {
    pub fn new(id: DataRate) -> Self {
        match id.class() {
            DataRateClass::Robust => Self {
                id,
                code_rate: CodeRate::ONE_THIRD,
                header_replicas: 3,
            },
            DataRateClass::Fast => Self {
                id,
                code_rate: CodeRate::TWO_THIRDS,
                header_replicas: 2,
            },
        }
    }

    pub fn dr8() -> Self {
        Self::new(DataRate::Dr8)
    }

    pub fn dr9() -> Self {
        Self::new(DataRate::Dr9)
    }

    pub fn class(&self) -> DataRateClass {
        self.id.class()
    }
}

impl From<DataRate> for DataRateProfile {
    fn from(id: DataRate) -> Self {
        Self::new(id)
    }
}

impl FromStr for DataRateProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<DataRate>().map(Self::new)
    }
}
