//! Wire framing between the bob and the session engine.
//!
//! ```text
//! F1 5B | ver (1) | type (1) | seq u32 BE | len u24 BE | payload | crc32 BE
//! ```
//!
//! The CRC (IEEE 802.3, reflected, init and final xor `0xFFFFFFFF`) covers
//! everything from the version byte through the end of the payload.

use std::fmt;

use super::ProtoError;

pub const MAGIC: [u8; 2] = [0xF1, 0x5B];
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 11;
pub const TRAILER_LEN: usize = 4;
/// Largest payload the 24-bit length field can carry.
pub const MAX_PAYLOAD: usize = (1 << 24) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum MessageType {
    Hello = 0x01,
    Frame = 0x02,
    LureOn = 0x03,
    LureOff = 0x04,
    Ack = 0x05,
    Nack = 0x06,
    Battery = 0x07,
    Heartbeat = 0x08,
    Bye = 0x09,
}

impl MessageType {
    pub const ALL: [MessageType; 9] = [
        MessageType::Hello,
        MessageType::Frame,
        MessageType::LureOn,
        MessageType::LureOff,
        MessageType::Ack,
        MessageType::Nack,
        MessageType::Battery,
        MessageType::Heartbeat,
        MessageType::Bye,
    ];

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| *t as u8 == code)
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for MessageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MessageType::Hello => "HELLO",
            MessageType::Frame => "FRAME",
            MessageType::LureOn => "LURE_ON",
            MessageType::LureOff => "LURE_OFF",
            MessageType::Ack => "ACK",
            MessageType::Nack => "NACK",
            MessageType::Battery => "BATTERY",
            MessageType::Heartbeat => "HEARTBEAT",
            MessageType::Bye => "BYE",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobMessage {
    pub kind: MessageType,
    pub seq: u32,
    pub payload: Vec<u8>,
}

impl BobMessage {
    pub fn new(kind: MessageType, seq: u32, payload: Vec<u8>) -> Self {
        Self { kind, seq, payload }
    }

    pub fn empty(kind: MessageType, seq: u32) -> Self {
        Self::new(kind, seq, Vec::new())
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len() + TRAILER_LEN
    }
}

pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

pub fn encode(msg: &BobMessage) -> Result<Vec<u8>, ProtoError> {
    let mut out = Vec::with_capacity(msg.encoded_len());
    encode_into(msg, &mut out)?;
    Ok(out)
}

pub fn encode_into(msg: &BobMessage, out: &mut Vec<u8>) -> Result<(), ProtoError> {
    let len = msg.payload.len();
    if len > MAX_PAYLOAD {
        return Err(ProtoError::PayloadTooLarge(len));
    }
    let start = out.len();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg.kind.code());
    out.extend_from_slice(&msg.seq.to_be_bytes());
    out.extend_from_slice(&(len as u32).to_be_bytes()[1..]);
    out.extend_from_slice(&msg.payload);
    let crc = crc32(&out[start + 2..]);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptKind {
    BadMagic,
    BadVersion(u8),
    UnknownType(u8),
    CrcMismatch { expected: u32, actual: u32 },
    /// Input ended inside a frame.
    Truncated,
}

impl fmt::Display for CorruptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorruptKind::BadMagic => write!(f, "bad magic"),
            CorruptKind::BadVersion(v) => write!(f, "unsupported version {v:#04x}"),
            CorruptKind::UnknownType(t) => write!(f, "unknown message type {t:#04x}"),
            CorruptKind::CrcMismatch { expected, actual } => {
                write!(f, "crc mismatch: frame says {expected:#010x}, computed {actual:#010x}")
            }
            CorruptKind::Truncated => write!(f, "truncated frame"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Message { msg: BobMessage, consumed: usize },
    /// The input is a valid prefix of a frame.
    NeedMore,
    /// Drop `skip` bytes to resynchronize on the next magic candidate.
    Corrupt { kind: CorruptKind, skip: usize },
}

/// Offset of the next possible frame start after position 0.
fn resync_offset(bytes: &[u8]) -> usize {
    (1..bytes.len())
        .find(|&i| bytes[i] == MAGIC[0] && bytes.get(i + 1).map_or(true, |&b| b == MAGIC[1]))
        .unwrap_or(bytes.len())
}

/// Parses at most one frame from the front of `bytes`. Total over arbitrary input.
pub fn decode(bytes: &[u8]) -> Decoded {
    if bytes.is_empty() {
        return Decoded::NeedMore;
    }
    let corrupt = |kind| Decoded::Corrupt {
        kind,
        skip: resync_offset(bytes),
    };
    if bytes[0] != MAGIC[0] || (bytes.len() > 1 && bytes[1] != MAGIC[1]) {
        return corrupt(CorruptKind::BadMagic);
    }
    if bytes.len() > 2 && bytes[2] != VERSION {
        return corrupt(CorruptKind::BadVersion(bytes[2]));
    }
    if bytes.len() < HEADER_LEN {
        return Decoded::NeedMore;
    }
    let seq = u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    let len = u32::from_be_bytes([0, bytes[8], bytes[9], bytes[10]]) as usize;
    let total = HEADER_LEN + len + TRAILER_LEN;
    if bytes.len() < total {
        return Decoded::NeedMore;
    }
    let body_end = HEADER_LEN + len;
    let expected = u32::from_be_bytes([
        bytes[body_end],
        bytes[body_end + 1],
        bytes[body_end + 2],
        bytes[body_end + 3],
    ]);
    let actual = crc32(&bytes[2..body_end]);
    if expected != actual {
        return corrupt(CorruptKind::CrcMismatch { expected, actual });
    }
    let Some(kind) = MessageType::from_code(bytes[3]) else {
        return corrupt(CorruptKind::UnknownType(bytes[3]));
    };
    Decoded::Message {
        msg: BobMessage::new(kind, seq, bytes[HEADER_LEN..body_end].to_vec()),
        consumed: total,
    }
}

/// One item produced while draining a byte stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamItem {
    Message(BobMessage),
    Corrupt(CorruptKind),
}

/// Incremental decoder over a byte stream with resynchronization.
#[derive(Debug, Default)]
pub struct FrameReader {
    buf: Vec<u8>,
}

impl FrameReader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// Next complete item, or `None` when more input is needed.
    pub fn next_item(&mut self) -> Option<StreamItem> {
        match decode(&self.buf) {
            Decoded::Message { msg, consumed } => {
                self.buf.drain(..consumed);
                Some(StreamItem::Message(msg))
            }
            Decoded::Corrupt { kind, skip } => {
                self.buf.drain(..skip);
                Some(StreamItem::Corrupt(kind))
            }
            Decoded::NeedMore => None,
        }
    }

    /// End of stream: reports leftover bytes as a truncated frame.
    pub fn finish(&mut self) -> Option<StreamItem> {
        if self.buf.is_empty() {
            None
        } else {
            self.buf.clear();
            Some(StreamItem::Corrupt(CorruptKind::Truncated))
        }
    }
}

/// Decodes a complete byte string, treating its end as end of stream.
pub fn decode_stream(bytes: &[u8]) -> Vec<StreamItem> {
    let mut reader = FrameReader::new();
    reader.push(bytes);
    let mut items: Vec<StreamItem> = std::iter::from_fn(|| reader.next_item()).collect();
    items.extend(reader.finish());
    items
}
