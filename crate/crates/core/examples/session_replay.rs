//! Replays a recorded session trace through the state machine, then again
//! with the depth results removed so the measure timeout fires.
//!
//! ```text
//! cargo run --example session_replay -- [TRACE]
//! ```

use std::error::Error;
use std::path::{Path, PathBuf};

use catchwise::session::{parse_trace, replay, SessionConfig, SessionEvent};

pub fn replay_file(path: &Path) -> Result<(), Box<dyn Error>> {
    let events = parse_trace(&std::fs::read_to_string(path)?)?;
    let cfg = SessionConfig::default();
    let out = replay(&events, &cfg);
    println!("{} events -> {} records, final phase {:?}", events.len(), out.records.len(), out.state.phase);
    print!("{}", out.log_text());

    let without_depth: Vec<_> = events
        .into_iter()
        .filter(|e| !matches!(e.event, SessionEvent::MeasureDone { .. }))
        .collect();
    let out = replay(&without_depth, &cfg);
    println!("without depth: {} timeouts injected", out.injected_timeouts);
    print!("{}", out.log_text());
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    replay_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/golden/happy_path.trace"))
}

fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(p) => replay_file(&PathBuf::from(p)),
        None => run_example(),
    }
}
