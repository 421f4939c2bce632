//! The pure session transition function.

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::record::{CatchOutcome, CatchRecord};
use super::ui::UiMessage;
use crate::regulations::{species_key, CatchContext, Decision, Verdict};
use crate::vision::{Detection, LengthEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Idle,
    FishPresent,
    Measured,
    AwaitingDecision,
    Releasing,
    Landing,
}

impl Phase {
    /// A fish is hooked but not yet logged.
    pub fn in_progress(self) -> bool {
        matches!(self, Phase::FishPresent | Phase::Measured | Phase::AwaitingDecision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OperatorDecision {
    Keep,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimeoutKind {
    Measure,
    Verdict,
    Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceEvent {
    Ack { seq: u32 },
    Nack { seq: u32, reason: u8 },
    Battery { consumed_mah: f64, capacity_mah: f64 },
    Bye,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionEvent {
    FrameIn {
        frame_id: u32,
        detections: Vec<Detection>,
    },
    MeasureDone {
        frame_id: u32,
        estimate: Option<LengthEstimate>,
    },
    Verdict {
        frame_id: u32,
        verdict: Verdict,
    },
    Operator {
        decision: OperatorDecision,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame_id: Option<u32>,
    },
    Device {
        event: DeviceEvent,
    },
    Timeout {
        kind: TimeoutKind,
        frame_id: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    RequestDepth { frame_id: u32, detection: Detection },
    SendLureOn,
    SendLureOff,
    /// Run the regulation check and feed back a VERDICT.
    Evaluate { frame_id: u32, context: CatchContext },
    AppendLog(CatchRecord),
    NotifyUi(UiMessage),
    /// The event was not valid in the current phase.
    Diagnostic(String),
}

impl Effect {
    pub fn name(&self) -> &'static str {
        match self {
            Effect::RequestDepth { .. } => "REQUEST_DEPTH",
            Effect::SendLureOn => "SEND_LURE_ON",
            Effect::SendLureOff => "SEND_LURE_OFF",
            Effect::Evaluate { .. } => "EVALUATE",
            Effect::AppendLog(_) => "APPEND_LOG",
            Effect::NotifyUi(_) => "NOTIFY_UI",
            Effect::Diagnostic(_) => "DIAGNOSTIC",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Current {
    pub frame_id: u32,
    pub detection: Detection,
    pub length: Option<LengthEstimate>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub auto_release: bool,
    pub measure_timeout_s: u32,
    pub decision_timeout_s: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            auto_release: false,
            measure_timeout_s: 10,
            decision_timeout_s: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub phase: Phase,
    pub current: Option<Current>,
    bag_date: Option<NaiveDate>,
    bag_counts: BTreeMap<String, u32>,
    pub lure_on: bool,
    /// When the current phase was entered.
    pub since: DateTime<Utc>,
}

impl Default for SessionState {
    fn default() -> Self {
        Self {
            phase: Phase::Idle,
            current: None,
            bag_date: None,
            bag_counts: BTreeMap::new(),
            lure_on: false,
            since: DateTime::<Utc>::UNIX_EPOCH,
        }
    }
}

impl SessionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Kept count for `species` on `date`; zero for any other day than the
    /// one being tracked.
    pub fn bag_count(&self, species: &str, date: NaiveDate) -> u32 {
        if self.bag_date != Some(date) {
            return 0;
        }
        self.bag_counts.get(&species_key(species)).copied().unwrap_or(0)
    }

    pub fn bag_counts(&self) -> &BTreeMap<String, u32> {
        &self.bag_counts
    }

    /// Phase/field consistency.
    pub fn check(&self) -> Result<(), String> {
        match self.phase {
            Phase::Idle if self.current.is_some() => Err("IDLE with a current catch".into()),
            Phase::Idle => Ok(()),
            _ if self.current.is_none() => Err(format!("{:?} without a detection", self.phase)),
            Phase::AwaitingDecision if self.current.as_ref().unwrap().verdict.is_none() => {
                Err("AWAITING_DECISION without a verdict".into())
            }
            _ => Ok(()),
        }
    }

    fn roll_day(&mut self, at: DateTime<Utc>) {
        let today = at.date_naive();
        if self.bag_date != Some(today) {
            self.bag_date = Some(today);
            self.bag_counts.clear();
        }
    }

    fn enter(&mut self, phase: Phase, at: DateTime<Utc>) {
        self.phase = phase;
        self.since = at;
    }
}

/// Highest confidence, then largest box, then leftmost, then topmost.
pub fn select_detection(detections: &[Detection]) -> Option<&Detection> {
    detections.iter().min_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(b.bbox.area().cmp(&a.bbox.area()))
            .then(a.bbox.x.cmp(&b.bbox.x))
            .then(a.bbox.y.cmp(&b.bbox.y))
    })
}

/// The timeout armed by the current phase, if any.
pub fn pending_timeout(state: &SessionState, cfg: &SessionConfig) -> Option<(TimeoutKind, u32, DateTime<Utc>)> {
    let (kind, secs) = match state.phase {
        Phase::FishPresent => (TimeoutKind::Measure, cfg.measure_timeout_s),
        Phase::Measured => (TimeoutKind::Verdict, cfg.measure_timeout_s),
        Phase::AwaitingDecision => (TimeoutKind::Decision, cfg.decision_timeout_s),
        _ => return None,
    };
    let frame_id = state.current.as_ref()?.frame_id;
    Some((kind, frame_id, state.since + TimeDelta::seconds(secs as i64)))
}

fn record(cur: &Current, at: DateTime<Utc>, outcome: CatchOutcome) -> CatchRecord {
    CatchRecord {
        timestamp: CatchRecord::stamp(at),
        species: cur.detection.species.clone(),
        length_cm: cur.length.map(|l| l.length_cm),
        verdict: cur.verdict.clone(),
        outcome,
        frame_id: cur.frame_id,
    }
}

fn verdict_message(cur: &Current, verdict: &Verdict) -> UiMessage {
    UiMessage::Verdict {
        frame_id: cur.frame_id,
        species: cur.detection.species.clone(),
        length_cm: cur.length.map(|l| l.length_cm),
        decision: verdict.decision,
        reasons: verdict.reasons.clone(),
        keep_enabled: verdict.decision == Decision::KeepAllowed,
    }
}

fn release(s: &mut SessionState, at: DateTime<Utc>, fx: &mut Vec<Effect>) {
    let cur = s.current.as_ref().expect("release needs a current catch");
    fx.push(Effect::SendLureOff);
    fx.push(Effect::AppendLog(record(cur, at, CatchOutcome::Released)));
    s.lure_on = false;
    s.enter(Phase::Releasing, at);
}

fn lose(s: &mut SessionState, at: DateTime<Utc>, fx: &mut Vec<Effect>) {
    let cur = s.current.take().expect("lose needs a current catch");
    fx.push(Effect::AppendLog(record(&cur, at, CatchOutcome::Lost)));
    if s.lure_on {
        fx.push(Effect::SendLureOff);
        s.lure_on = false;
    }
    s.enter(Phase::Idle, at);
}

/// One transition. Total: events that make no sense in the current phase
/// leave the state unchanged and yield a diagnostic.
pub fn step(
    state: &SessionState,
    at: DateTime<Utc>,
    event: &SessionEvent,
    cfg: &SessionConfig,
) -> (SessionState, Vec<Effect>) {
    let mut s = state.clone();
    let mut fx = Vec::new();
    s.roll_day(at);
    let current_id = s.current.as_ref().map(|c| c.frame_id);
    let invalid = |fx: &mut Vec<Effect>| {
        fx.push(Effect::Diagnostic(format!(
            "ignored {} in {:?}",
            event_name(event),
            state.phase
        )))
    };

    match (s.phase, event) {
        (Phase::Idle, SessionEvent::FrameIn { frame_id, detections }) => {
            if let Some(det) = select_detection(detections) {
                s.current = Some(Current {
                    frame_id: *frame_id,
                    detection: det.clone(),
                    length: None,
                    verdict: None,
                });
                s.lure_on = true;
                s.enter(Phase::FishPresent, at);
                fx.push(Effect::SendLureOn);
                fx.push(Effect::RequestDepth {
                    frame_id: *frame_id,
                    detection: det.clone(),
                });
            }
        }
        (Phase::Releasing | Phase::Landing, SessionEvent::FrameIn { detections, .. }) => {
            if detections.is_empty() {
                if s.lure_on {
                    fx.push(Effect::SendLureOff);
                    s.lure_on = false;
                }
                s.current = None;
                s.enter(Phase::Idle, at);
            }
        }
        (_, SessionEvent::FrameIn { .. }) => {}

        (Phase::FishPresent, SessionEvent::MeasureDone { frame_id, estimate }) if Some(*frame_id) == current_id => {
            let bag = {
                let cur = s.current.as_mut().unwrap();
                cur.length = *estimate;
                cur.detection.species.clone()
            };
            let context = CatchContext {
                species: bag.clone(),
                length_cm: estimate.map(|e| e.length_cm),
                date: at.date_naive(),
                bag_count_today: s.bag_count(&bag, at.date_naive()),
            };
            s.enter(Phase::Measured, at);
            fx.push(Effect::Evaluate {
                frame_id: *frame_id,
                context,
            });
        }
        (Phase::Measured, SessionEvent::Verdict { frame_id, verdict }) if Some(*frame_id) == current_id => {
            let cur = s.current.as_mut().unwrap();
            cur.verdict = Some(verdict.clone());
            fx.push(Effect::NotifyUi(verdict_message(cur, verdict)));
            if cfg.auto_release && verdict.decision == Decision::MustRelease {
                release(&mut s, at, &mut fx);
            } else {
                s.enter(Phase::AwaitingDecision, at);
            }
        }
        (Phase::AwaitingDecision, SessionEvent::Operator { decision, frame_id })
            if frame_id.is_none() || *frame_id == current_id =>
        {
            match decision {
                OperatorDecision::Release => release(&mut s, at, &mut fx),
                OperatorDecision::Keep => {
                    let cur = s.current.as_ref().unwrap();
                    let verdict = cur.verdict.as_ref().unwrap();
                    if verdict.decision == Decision::KeepAllowed {
                        let rec = record(cur, at, CatchOutcome::Kept);
                        *s.bag_counts.entry(species_key(&rec.species)).or_insert(0) += 1;
                        fx.push(Effect::AppendLog(rec));
                        s.enter(Phase::Landing, at);
                    } else {
                        fx.push(Effect::NotifyUi(UiMessage::Refusal {
                            frame_id: cur.frame_id,
                            reason: format!("cannot keep: verdict is {verdict}"),
                        }));
                    }
                }
            }
        }

        (_, SessionEvent::Device { event: DeviceEvent::Bye }) => {
            if s.phase.in_progress() {
                lose(&mut s, at, &mut fx);
            } else {
                if s.lure_on {
                    fx.push(Effect::SendLureOff);
                    s.lure_on = false;
                }
                s.current = None;
                if s.phase != Phase::Idle {
                    s.enter(Phase::Idle, at);
                }
            }
        }
        (_, SessionEvent::Device { .. }) => {}

        (phase, SessionEvent::Timeout { kind, frame_id }) => {
            let live = pending_timeout(state, cfg).is_some_and(|(k, f, _)| k == *kind && f == *frame_id);
            if live {
                match phase {
                    Phase::FishPresent | Phase::Measured => lose(&mut s, at, &mut fx),
                    Phase::AwaitingDecision => release(&mut s, at, &mut fx),
                    _ => unreachable!("pending_timeout only arms in-progress phases"),
                }
            }
        }

        _ => invalid(&mut fx),
    }
    (s, fx)
}

pub fn event_name(event: &SessionEvent) -> &'static str {
    match event {
        SessionEvent::FrameIn { .. } => "FRAME_IN",
        SessionEvent::MeasureDone { .. } => "MEASURE_DONE",
        SessionEvent::Verdict { .. } => "VERDICT",
        SessionEvent::Operator { .. } => "OPERATOR",
        SessionEvent::Device { .. } => "DEVICE",
        SessionEvent::Timeout { .. } => "TIMEOUT",
    }
}
