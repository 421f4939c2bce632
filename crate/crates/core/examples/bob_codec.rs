//! Frames messages for the bob link, feeds the bytes back in ragged
//! chunks with one corrupted frame in the middle, and recovers the rest.

use std::error::Error;

use catchwise::bobproto::{encode, encode_lure_on, BobMessage, FrameReader, MessageType, StreamItem};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let messages = [
        BobMessage::empty(MessageType::Hello, 0),
        BobMessage::new(MessageType::LureOn, 1, encode_lure_on(Some(0.020))),
        BobMessage::empty(MessageType::Heartbeat, 2),
        BobMessage::empty(MessageType::LureOff, 3),
        BobMessage::empty(MessageType::Bye, 4),
    ];
    let mut wire = Vec::new();
    let mut corrupt_at = 0;
    for (i, m) in messages.iter().enumerate() {
        let bytes = encode(m)?;
        if i == 2 {
            corrupt_at = wire.len() + 5;
        }
        println!("{:?} seq {} -> {} bytes", m.kind, m.seq, bytes.len());
        wire.extend(bytes);
    }
    wire[corrupt_at] ^= 0x40;

    let mut reader = FrameReader::new();
    for chunk in wire.chunks(7) {
        reader.push(chunk);
        while let Some(item) = reader.next_item() {
            match item {
                StreamItem::Message(m) => println!("recv {:?} seq {}", m.kind, m.seq),
                StreamItem::Corrupt(kind) => println!("skip corrupt frame: {kind}"),
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
