//! Recorded session event traces and their deterministic replay.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::record::CatchRecord;
use super::state::{pending_timeout, step, Effect, SessionConfig, SessionEvent, SessionState};
use super::SessionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub at: DateTime<Utc>,
    pub event: SessionEvent,
}

impl TimedEvent {
    pub fn to_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            at: String,
            event: &'a SessionEvent,
        }
        let mut s = serde_json::to_string(&Line {
            at: self.at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            event: &self.event,
        })
        .expect("event serializes");
        s.push('\n');
        s
    }
}

pub fn parse_trace(text: &str) -> Result<Vec<TimedEvent>, SessionError> {
    let mut out: Vec<TimedEvent> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ev: TimedEvent = serde_json::from_str(line).map_err(|e| SessionError::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        if out.last().is_some_and(|prev| ev.at < prev.at) {
            return Err(SessionError::Format {
                line: i + 1,
                message: "timestamps go backwards".into(),
            });
        }
        out.push(ev);
    }
    Ok(out)
}

pub fn write_trace(events: &[TimedEvent]) -> String {
    events.iter().map(TimedEvent::to_line).collect()
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub records: Vec<CatchRecord>,
    /// Every effect with the time of the event that produced it, including
    /// timeouts synthesized during replay.
    pub effects: Vec<(DateTime<Utc>, Effect)>,
    pub state: SessionState,
    pub injected_timeouts: usize,
}

impl ReplayOutput {
    pub fn log_text(&self) -> String {
        self.records.iter().map(CatchRecord::to_line).collect()
    }
}

/// Re-runs `step` over a trace. Timeouts that would have fired between
/// recorded events are injected at their deadlines.
pub fn replay(events: &[TimedEvent], cfg: &SessionConfig) -> ReplayOutput {
    let mut state = SessionState::new();
    let mut out = ReplayOutput {
        records: Vec::new(),
        effects: Vec::new(),
        state: SessionState::new(),
        injected_timeouts: 0,
    };
    let apply = |state: &mut SessionState, at: DateTime<Utc>, ev: &SessionEvent, out: &mut ReplayOutput| {
        let (next, fx) = step(state, at, ev, cfg);
        *state = next;
        for e in fx {
            if let Effect::AppendLog(rec) = &e {
                out.records.push(rec.clone());
            }
            out.effects.push((at, e));
        }
    };
    for te in events {
        while let Some((kind, frame_id, deadline)) = pending_timeout(&state, cfg) {
            if deadline > te.at {
                break;
            }
            out.injected_timeouts += 1;
            apply(&mut state, deadline, &SessionEvent::Timeout { kind, frame_id }, &mut out);
        }
        apply(&mut state, te.at, &te.event, &mut out);
    }
    out.state = state;
    out
}
