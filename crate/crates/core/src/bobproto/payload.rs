//! Typed views over message payloads.

use super::ProtoError;

fn u32_at(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// FRAME: frame id followed by PNG bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePayload {
    pub frame_id: u32,
    pub png: Vec<u8>,
}

impl FramePayload {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.png.len());
        out.extend_from_slice(&self.frame_id.to_be_bytes());
        out.extend_from_slice(&self.png);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtoError> {
        let frame_id = u32_at(bytes, 0).ok_or(ProtoError::BadPayload("FRAME needs a 4-byte frame id"))?;
        Ok(Self {
            frame_id,
            png: bytes[4..].to_vec(),
        })
    }
}

/// BATTERY: consumed and capacity, in tenths of mAh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryReport {
    pub consumed_tenths: u32,
    pub capacity_tenths: u32,
}

impl BatteryReport {
    pub fn from_mah(consumed_mah: f64, capacity_mah: f64) -> Self {
        let tenths = |v: f64| (v * 10.0).round().clamp(0.0, u32::MAX as f64) as u32;
        Self {
            consumed_tenths: tenths(consumed_mah),
            capacity_tenths: tenths(capacity_mah),
        }
    }

    pub fn consumed_mah(&self) -> f64 {
        self.consumed_tenths as f64 / 10.0
    }

    pub fn capacity_mah(&self) -> f64 {
        self.capacity_tenths as f64 / 10.0
    }

    /// Remaining charge in `[0, 1]`.
    pub fn remaining_fraction(&self) -> f64 {
        if self.capacity_tenths == 0 {
            return 0.0;
        }
        (1.0 - self.consumed_tenths as f64 / self.capacity_tenths as f64).clamp(0.0, 1.0)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.consumed_tenths.to_be_bytes().to_vec();
        out.extend_from_slice(&self.capacity_tenths.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtoError> {
        match (bytes.len(), u32_at(bytes, 0), u32_at(bytes, 4)) {
            (8, Some(consumed_tenths), Some(capacity_tenths)) => Ok(Self {
                consumed_tenths,
                capacity_tenths,
            }),
            _ => Err(ProtoError::BadPayload("BATTERY needs exactly 8 bytes")),
        }
    }
}

/// ACK: the sequence number being acknowledged.
pub fn encode_ack(acked_seq: u32) -> Vec<u8> {
    acked_seq.to_be_bytes().to_vec()
}

pub fn decode_ack(bytes: &[u8]) -> Result<u32, ProtoError> {
    match bytes.len() {
        4 => Ok(u32_at(bytes, 0).expect("length checked")),
        _ => Err(ProtoError::BadPayload("ACK needs exactly 4 bytes")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum NackReason {
    OutOfOrder = 1,
    NotReady = 2,
    Unsupported = 3,
    Malformed = 4,
    Unsafe = 5,
}

impl NackReason {
    pub fn from_code(code: u8) -> Option<Self> {
        [
            NackReason::OutOfOrder,
            NackReason::NotReady,
            NackReason::Unsupported,
            NackReason::Malformed,
            NackReason::Unsafe,
        ]
        .into_iter()
        .find(|r| *r as u8 == code)
    }
}

/// NACK: rejected sequence number plus a reason code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nack {
    pub seq: u32,
    pub reason: NackReason,
}

impl Nack {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.seq.to_be_bytes().to_vec();
        out.push(self.reason as u8);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtoError> {
        if bytes.len() != 5 {
            return Err(ProtoError::BadPayload("NACK needs exactly 5 bytes"));
        }
        let reason = NackReason::from_code(bytes[4]).ok_or(ProtoError::BadPayload("unknown NACK reason"))?;
        Ok(Self {
            seq: u32_at(bytes, 0).expect("length checked"),
            reason,
        })
    }
}

/// LURE_ON: optional commanded current in microamps.
pub fn encode_lure_on(current_a: Option<f64>) -> Vec<u8> {
    match current_a {
        Some(a) => ((a * 1e6).round().clamp(0.0, u32::MAX as f64) as u32).to_be_bytes().to_vec(),
        None => Vec::new(),
    }
}

pub fn decode_lure_on(bytes: &[u8]) -> Result<Option<f64>, ProtoError> {
    match bytes.len() {
        0 => Ok(None),
        4 => Ok(Some(u32_at(bytes, 0).expect("length checked") as f64 / 1e6)),
        _ => Err(ProtoError::BadPayload("LURE_ON payload must be empty or 4 bytes")),
    }
}
