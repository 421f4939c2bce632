mod common;

use std::path::Path;

use catchwise::regulations::{bag_counter, Decision, Verdict};
use catchwise::session::{
    parse_log, parse_trace, replay, select_detection, step, write_trace, CatchOutcome, CatchRecord, DeviceEvent,
    Effect, OperatorDecision, Phase, SessionConfig, SessionEvent, SessionState, TimedEvent, TimeoutKind, UiMessage,
};
use catchwise::vision::{LengthEstimate, LensModel};
use chrono::{DateTime, TimeDelta, Utc};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/golden").join(name)).unwrap()
}

fn t0() -> DateTime<Utc> {
    "2026-06-01T05:30:00Z".parse().unwrap()
}

fn names(fx: &[Effect]) -> Vec<&'static str> {
    fx.iter().map(Effect::name).collect()
}

fn estimate(cm: f64) -> Option<LengthEstimate> {
    Some(LengthEstimate { length_cm: cm, depth_used_m: 1.0, method: LensModel::Pinhole })
}

/// Drives one catch up to AWAITING_DECISION with the given verdict.
fn awaiting(decision: Decision) -> SessionState {
    let cfg = SessionConfig::default();
    let s = SessionState::new();
    let frame = SessionEvent::FrameIn { frame_id: 7, detections: vec![common::detection("walleye", 4, 30)] };
    let (s, fx) = step(&s, t0(), &frame, &cfg);
    assert_eq!(names(&fx), ["SEND_LURE_ON", "REQUEST_DEPTH"]);
    let (s, fx) = step(&s, t0(), &SessionEvent::MeasureDone { frame_id: 7, estimate: estimate(41.0) }, &cfg);
    assert_eq!(names(&fx), ["EVALUATE"]);
    let verdict = Verdict { decision, reasons: vec![] };
    let (s, fx) = step(&s, t0(), &SessionEvent::Verdict { frame_id: 7, verdict }, &cfg);
    assert_eq!(names(&fx), ["NOTIFY_UI"]);
    assert_eq!(s.phase, Phase::AwaitingDecision);
    s
}

#[test]
fn keep_refused_on_must_release() {
    let s = awaiting(Decision::MustRelease);
    let keep = SessionEvent::Operator { decision: OperatorDecision::Keep, frame_id: None };
    let (next, fx) = step(&s, t0(), &keep, &SessionConfig::default());
    assert_eq!(next, s);
    assert!(matches!(&fx[..], [Effect::NotifyUi(UiMessage::Refusal { .. })]));
}

#[test]
fn keep_lands_and_counts() {
    let s = awaiting(Decision::KeepAllowed);
    let keep = SessionEvent::Operator { decision: OperatorDecision::Keep, frame_id: None };
    let (s, fx) = step(&s, t0(), &keep, &SessionConfig::default());
    assert_eq!(s.phase, Phase::Landing);
    assert!(matches!(&fx[..], [Effect::AppendLog(r)] if r.outcome == CatchOutcome::Kept));
    assert_eq!(s.bag_count("WALLEYE", t0().date_naive()), 1);
    let empty = SessionEvent::FrameIn { frame_id: 9, detections: vec![] };
    let (s, fx) = step(&s, t0(), &empty, &SessionConfig::default());
    assert_eq!(s.phase, Phase::Idle);
    assert_eq!(names(&fx), ["SEND_LURE_OFF"]);
}

#[test]
fn decision_timeout_releases() {
    let s = awaiting(Decision::KeepAllowed);
    let ev = SessionEvent::Timeout { kind: TimeoutKind::Decision, frame_id: 7 };
    let (s, fx) = step(&s, t0() + TimeDelta::seconds(60), &ev, &SessionConfig::default());
    assert_eq!(s.phase, Phase::Releasing);
    assert_eq!(names(&fx), ["SEND_LURE_OFF", "APPEND_LOG"]);
}

#[test]
fn auto_release_skips_the_operator() {
    let cfg = SessionConfig { auto_release: true, ..SessionConfig::default() };
    let s = SessionState::new();
    let frame = SessionEvent::FrameIn { frame_id: 1, detections: vec![common::detection("walleye", 0, 9)] };
    let (s, _) = step(&s, t0(), &frame, &cfg);
    let (s, _) = step(&s, t0(), &SessionEvent::MeasureDone { frame_id: 1, estimate: estimate(20.0) }, &cfg);
    let verdict = Verdict { decision: Decision::MustRelease, reasons: vec![] };
    let (s, fx) = step(&s, t0(), &SessionEvent::Verdict { frame_id: 1, verdict }, &cfg);
    assert_eq!(s.phase, Phase::Releasing);
    assert_eq!(names(&fx), ["NOTIFY_UI", "SEND_LURE_OFF", "APPEND_LOG"]);
}

#[test]
fn detection_choice_breaks_ties_left_then_up() {
    let a = common::detection("a", 30, 10);
    let b = common::detection("b", 5, 10);
    let big = common::detection("big", 40, 20);
    assert_eq!(select_detection(&[a.clone(), b.clone()]).unwrap().species, "b");
    assert_eq!(select_detection(&[a, b, big]).unwrap().species, "big");
    assert!(select_detection(&[]).is_none());
}

#[test]
fn golden_trace_round_trips_and_replays() {
    let text = golden("happy_path.trace");
    let events = parse_trace(&text).unwrap();
    assert_eq!(write_trace(&events), text);
    let out = replay(&events, &SessionConfig::default());
    assert_eq!(out.log_text(), golden("happy_path.log"));
    assert_eq!(out.injected_timeouts, 0);
    assert_eq!(parse_log(&out.log_text()).unwrap().records, out.records);
}

#[test]
fn empty_trace_gives_an_empty_log() {
    let out = replay(&[], &SessionConfig::default());
    assert!(out.records.is_empty());
    assert_eq!(out.log_text(), "");
    assert_eq!(out.state, SessionState::new());
}

#[test]
fn dropping_measure_done_loses_the_fish() {
    let events: Vec<TimedEvent> = parse_trace(&golden("happy_path.trace"))
        .unwrap()
        .into_iter()
        .filter(|e| !matches!(e.event, SessionEvent::MeasureDone { .. }))
        .collect();
    let out = replay(&events, &SessionConfig::default());
    assert_eq!(out.injected_timeouts, 1);
    assert_eq!(out.records.len(), 1);
    let rec = &out.records[0];
    assert_eq!(rec.outcome, CatchOutcome::Lost);
    assert_eq!(rec.verdict, None);
    // Armed at the first fish frame (2 s), fires 10 s later.
    assert_eq!(rec.timestamp, t0() + TimeDelta::seconds(12));
}

#[test]
fn backwards_timestamps_are_rejected() {
    let a = TimedEvent { at: t0(), event: SessionEvent::Device { event: DeviceEvent::Bye } };
    let b = TimedEvent { at: t0() - TimeDelta::seconds(1), ..a.clone() };
    assert!(parse_trace(&write_trace(&[a, b])).is_err());
}

fn run_sequence(seed: u64, len: usize) -> Result<(), TestCaseError> {
    let cfg = SessionConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SessionState::new();
    let mut at = t0();
    let mut records: Vec<CatchRecord> = Vec::new();
    let mut lure_cmds: Vec<&'static str> = Vec::new();
    for _ in 0..len {
        at += TimeDelta::milliseconds(rand::Rng::gen_range(&mut rng, 0..3_600_000));
        let ev = common::random_event(&mut rng);
        let (next, fx) = step(&state, at, &ev, &cfg);
        prop_assert_eq!(step(&state, at, &ev, &cfg), (next.clone(), fx.clone()), "step is not pure");
        prop_assert!(next.check().is_ok(), "{:?}", next.check());
        for e in &fx {
            match e {
                Effect::SendLureOn | Effect::SendLureOff => lure_cmds.push(e.name()),
                Effect::AppendLog(r) => {
                    prop_assert!(r.validate().is_ok());
                    records.push(r.clone());
                }
                _ => {}
            }
        }
        prop_assert!(
            lure_cmds.iter().enumerate().all(|(i, n)| *n == if i % 2 == 0 { "SEND_LURE_ON" } else { "SEND_LURE_OFF" }),
            "lure commands do not alternate: {:?}",
            lure_cmds
        );
        prop_assert_eq!(next.lure_on, lure_cmds.len() % 2 == 1);
        if matches!(ev, SessionEvent::Device { event: DeviceEvent::Bye }) {
            prop_assert!(!next.lure_on);
            prop_assert_eq!(next.phase, Phase::Idle);
        }
        let today = at.date_naive();
        for species in ["walleye", "yellow perch"] {
            prop_assert_eq!(next.bag_count(species, today), bag_counter(&records, species, today).unwrap());
        }
        state = next;
    }
    Ok(())
}

proptest! {
    #[test]
    fn invariants_hold_after_every_step(seed in any::<u64>(), len in 1usize..120) {
        run_sequence(seed, len)?;
    }
}
