//! Frame construction: header replicas, FEC-sized payload fragments and the
//! hop channel of every block.
//!
//! Bit accounting for a payload of `L` bytes:
//!
//! ```text
//! P_L' = 8 (L + CRC) / CR + O_B        coded payload + CRC + overhead
//! N_F  = ceil(P_L' / 48)               fragments
//! P_L  = P_L' + 2 N_F                  with a 2-bit preamble per fragment
//! P_B  = 114 N_H + P_L                 whole packet
//! ```
//!
//! Header replicas go first, then fragments. Every fragment carries 48
//! coded bits except the last, which carries the remainder; all of them
//! carry the preamble.

use std::io::Write;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    bits_to_ms, check_payload, DataRateProfile, CRC_BYTES, FRAGMENT_PAYLOAD_BITS,
    FRAGMENT_PREAMBLE_BITS, HEADER_BITS, OVERHEAD_BITS,
};

/// Coded payload bits `P_L'`, including CRC and encoder overhead.
pub fn encoded_payload_bits(len: u32, dr: &DataRateProfile) -> Result<u32> {
    let len = check_payload(len)?;
    Ok(dr.code_rate.encode_bits(8 * (len + CRC_BYTES)) + OVERHEAD_BITS)
}

/// Number of payload fragments `N_F`.
pub fn fragment_count(len: u32, dr: &DataRateProfile) -> Result<u32> {
    Ok(encoded_payload_bits(len, dr)?.div_ceil(FRAGMENT_PAYLOAD_BITS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Header,
    Fragment,
}

impl BlockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Header => "header",
            BlockKind::Fragment => "fragment",
        }
    }
}

/// One hop: a header replica or a payload fragment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub kind: BlockKind,
    pub bits: u32,
    pub duration_ms: f64,
    pub channel: u32,
}

/// OBW channel grid and the seed driving channel selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopGrid {
    n_channels: u32,
    seed: u64,
}

impl HopGrid {
    pub fn new(n_channels: u32, seed: u64) -> Result<Self> {
        if n_channels < 2 {
            return Err(Error::InvalidGrid(n_channels));
        }
        Ok(Self { n_channels, seed })
    }

    pub fn n_channels(&self) -> u32 {
        self.n_channels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Deterministic channel sequence with no channel used twice in a row.
///
/// Stands in for the radio's proprietary hop sequence; it is not
/// interoperable with a real gateway.
pub fn generate_hop_sequence(n_blocks: usize, grid: &HopGrid) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut out = Vec::with_capacity(n_blocks);
    let mut prev: Option<u32> = None;
    for _ in 0..n_blocks {
        let ch = loop {
            // multiply-shift reduction of a 64-bit draw onto 0..n
            let c = ((u128::from(rng.next_u64()) * u128::from(grid.n_channels)) >> 64) as u32;
            if Some(c) != prev {
                break c;
            }
        };
        out.push(ch);
        prev = Some(ch);
    }
    out
}

/// Explicit on-air layout of one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    pub dr: DataRateProfile,
    pub payload_len: u32,
    /// `P_L'`
    pub encoded_payload_bits: u32,
    /// `P_L`
    pub total_payload_bits: u32,
    /// `P_B`
    pub total_bits: u32,
    /// `N_F`
    pub fragments: u32,
    /// `N_T = N_H + N_F - 1`
    pub transitions: u32,
    pub grid: HopGrid,
    pub blocks: Vec<Block>,
}

/// `(kind, bits)` for every block of the packet, headers first.
pub(crate) fn block_layout(len: u32, dr: &DataRateProfile) -> Result<Vec<(BlockKind, u32)>> {
    let coded = encoded_payload_bits(len, dr)?;
    let n_f = coded.div_ceil(FRAGMENT_PAYLOAD_BITS);
    let mut layout = Vec::with_capacity((dr.header_replicas + n_f) as usize);
    layout.extend((0..dr.header_replicas).map(|_| (BlockKind::Header, HEADER_BITS)));
    let mut remaining = coded;
    for _ in 0..n_f {
        let chunk = remaining.min(FRAGMENT_PAYLOAD_BITS);
        remaining -= chunk;
        layout.push((BlockKind::Fragment, chunk + FRAGMENT_PREAMBLE_BITS));
    }
    debug_assert_eq!(remaining, 0);
    Ok(layout)
}

pub fn build_frame_plan(len: u32, dr: &DataRateProfile, grid: &HopGrid) -> Result<FramePlan> {
    let encoded = encoded_payload_bits(len, dr)?;
    let fragments = encoded.div_ceil(FRAGMENT_PAYLOAD_BITS);
    let total_payload_bits = encoded + FRAGMENT_PREAMBLE_BITS * fragments;
    let total_bits = HEADER_BITS * dr.header_replicas + total_payload_bits;

    let layout = block_layout(len, dr)?;
    let channels = generate_hop_sequence(layout.len(), grid);
    let blocks = layout
        .into_iter()
        .zip(channels)
        .map(|((kind, bits), channel)| Block {
            kind,
            bits,
            duration_ms: bits_to_ms(bits),
            channel,
        })
        .collect();

    Ok(FramePlan {
        dr: *dr,
        payload_len: len,
        encoded_payload_bits: encoded,
        total_payload_bits,
        total_bits,
        fragments,
        transitions: dr.header_replicas + fragments - 1,
        grid: *grid,
        blocks,
    })
}

impl FramePlan {
    pub fn header_replicas(&self) -> u32 {
        self.dr.header_replicas
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("frame plan serializes")
    }

    /// One row per block: `index,kind,bits,duration_ms,channel,seed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "kind", "bits", "duration_ms", "channel", "seed"])?;
        for (i, b) in self.blocks.iter().enumerate() {
            w.write_record([
                i.to_string(),
                b.kind.as_str().to_owned(),
                b.bits.to_string(),
                format!("{:.6}", b.duration_ms),
                b.channel.to_string(),
                self.grid.seed().to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

impl Serialize for FramePlan {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FramePlan", 12)?;
        st.serialize_field("dr", &self.dr.id)?;
        st.serialize_field("code_rate", &self.dr.code_rate.to_string())?;
        st.serialize_field("header_replicas", &self.dr.header_replicas)?;
        st.serialize_field("payload_len", &self.payload_len)?;
        st.serialize_field("encoded_payload_bits", &self.encoded_payload_bits)?;
        st.serialize_field("total_payload_bits", &self.total_payload_bits)?;
        st.serialize_field("total_bits", &self.total_bits)?;
        st.serialize_field("fragments", &self.fragments)?;
        st.serialize_field("transitions", &self.transitions)?;
        st.serialize_field("n_channels", &self.grid.n_channels())?;
        st.serialize_field("seed", &self.grid.seed())?;
        st.serialize_field("blocks", &self.blocks)?;
        st.end()
    }
}
