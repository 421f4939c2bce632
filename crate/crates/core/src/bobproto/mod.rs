//! Bob wire protocol and the simulated bob device.

mod battery;
mod clock;
mod codec;
mod device;
mod payload;
mod sim;
mod source;

pub use battery::*;
pub use clock::*;
pub use codec::*;
pub use device::*;
pub use payload::*;
pub use sim::*;
pub use source::*;

#[derive(Debug, thiserror::Error)]
pub enum ProtoError {
    #[error("payload of {0} bytes exceeds the 24-bit length field")]
    PayloadTooLarge(usize),
    #[error("malformed payload: {0}")]
    BadPayload(&'static str),
    #[error("frame source: {0}")]
    Source(String),
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error("trace: {0}")]
    Trace(String),
    #[error("no frames in the probe window")]
    EmptyWindow,
    #[error("connection closed")]
    Closed,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
