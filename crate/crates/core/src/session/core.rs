//! The engine as a sans-io object: bob messages, operator input and clock
//! readings go in; bob commands, UI messages and log records come out.

use std::collections::VecDeque;

use base64::Engine as _;
use chrono::{DateTime, Utc};

use super::record::CatchRecord;
use super::replay::TimedEvent;
use super::state::{
    pending_timeout, step, DeviceEvent, Effect, OperatorDecision, Phase, SessionConfig, SessionEvent, SessionState,
};
use super::ui::UiMessage;
use super::SessionError;
use crate::augment::ImageBuffer;
use crate::bobproto::{
    decode_ack, encode_lure_on, BatteryReport, BobMessage, FramePayload, MessageType, Nack,
};
use crate::ems::{safety_check, ElectricalParams};
use crate::regulations::{evaluate, RegulationSet};
use crate::vision::{estimate_length, CameraIntrinsics, DepthProvider, Detector};

pub struct CoreConfig {
    pub session: SessionConfig,
    pub regs: RegulationSet,
    pub camera: CameraIntrinsics,
    pub lure_current_a: f64,
    pub electrical: ElectricalParams,
    /// Forward every frame to the UI (base64 PNG plus boxes).
    pub forward_frames: bool,
}

#[derive(Debug, Default)]
pub struct Output {
    pub to_bob: Vec<BobMessage>,
    pub to_ui: Vec<UiMessage>,
    pub records: Vec<CatchRecord>,
    /// The bob said goodbye; the session is over.
    pub finished: bool,
}

pub enum Input {
    Bob(BobMessage),
    Operator(OperatorDecision),
    /// Only fires due timers.
    Tick,
}

pub struct EngineCore<D, P> {
    cfg: CoreConfig,
    detector: D,
    depth: P,
    state: SessionState,
    out_seq: u32,
    last_frame: Option<(u32, ImageBuffer)>,
    battery_remaining: Option<f64>,
    trace: Vec<TimedEvent>,
    effects: Vec<(DateTime<Utc>, Effect)>,
}

impl<D: Detector, P: DepthProvider> EngineCore<D, P> {
    pub fn new(cfg: CoreConfig, detector: D, depth: P) -> Self {
        Self {
            cfg,
            detector,
            depth,
            state: SessionState::new(),
            out_seq: 0,
            last_frame: None,
            battery_remaining: None,
            trace: Vec::new(),
            effects: Vec::new(),
        }
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    /// Recorded session events, replayable with [`super::replay`]. FRAME_IN
    /// events without detections that arrive in IDLE change nothing and
    /// are not recorded.
    pub fn trace(&self) -> &[TimedEvent] {
        &self.trace
    }

    pub fn effects(&self) -> &[(DateTime<Utc>, Effect)] {
        &self.effects
    }

    fn message(&mut self, kind: MessageType, payload: Vec<u8>) -> BobMessage {
        let seq = self.out_seq;
        self.out_seq = self.out_seq.wrapping_add(1);
        BobMessage::new(kind, seq, payload)
    }

    pub fn hello(&mut self) -> BobMessage {
        self.message(MessageType::Hello, b"catchwise-engine".to_vec())
    }

    pub fn bye(&mut self) -> BobMessage {
        self.message(MessageType::Bye, Vec::new())
    }

    pub fn next_timer(&self) -> Option<DateTime<Utc>> {
        pending_timeout(&self.state, &self.cfg.session).map(|(_, _, t)| t)
    }

    fn state_message(&self) -> UiMessage {
        UiMessage::State {
            phase: self.state.phase,
            frame_id: self.state.current.as_ref().map(|c| c.frame_id),
            lure_on: self.state.lure_on,
            bag_counts: self.state.bag_counts().clone(),
            battery_remaining: self.battery_remaining,
        }
    }

    pub fn handle(&mut self, at: DateTime<Utc>, input: Input) -> Result<Output, SessionError> {
        let mut out = Output::default();
        let phase_before = self.state.phase;
        while let Some((kind, frame_id, deadline)) = pending_timeout(&self.state, &self.cfg.session) {
            if deadline > at {
                break;
            }
            self.run(deadline, SessionEvent::Timeout { kind, frame_id }, &mut out)?;
        }
        match input {
            Input::Tick => {}
            Input::Operator(decision) => {
                self.run(at, SessionEvent::Operator { decision, frame_id: None }, &mut out)?;
            }
            Input::Bob(msg) => self.on_bob(at, msg, &mut out)?,
        }
        if self.state.phase != phase_before {
            out.to_ui.push(self.state_message());
        }
        Ok(out)
    }

    fn on_bob(&mut self, at: DateTime<Utc>, msg: BobMessage, out: &mut Output) -> Result<(), SessionError> {
        let device = |event| SessionEvent::Device { event };
        match msg.kind {
            MessageType::Frame => {
                let frame = FramePayload::decode(&msg.payload)?;
                let img = ImageBuffer::decode_png(&frame.png)?;
                let detections = self.detector.detect(frame.frame_id, &img)?;
                if self.cfg.forward_frames {
                    out.to_ui.push(UiMessage::Frame {
                        frame_id: frame.frame_id,
                        width: img.width(),
                        height: img.height(),
                        png: base64::engine::general_purpose::STANDARD.encode(&frame.png),
                        detections: detections.clone(),
                    });
                }
                self.last_frame = Some((frame.frame_id, img));
                self.run(
                    at,
                    SessionEvent::FrameIn {
                        frame_id: frame.frame_id,
                        detections,
                    },
                    out,
                )
            }
            MessageType::Ack => {
                let seq = decode_ack(&msg.payload)?;
                self.run(at, device(DeviceEvent::Ack { seq }), out)
            }
            MessageType::Nack => {
                let nack = Nack::decode(&msg.payload)?;
                log::warn!("bob refused seq {}: {:?}", nack.seq, nack.reason);
                self.run(
                    at,
                    device(DeviceEvent::Nack {
                        seq: nack.seq,
                        reason: nack.reason as u8,
                    }),
                    out,
                )
            }
            MessageType::Battery => {
                let report = BatteryReport::decode(&msg.payload)?;
                self.battery_remaining = Some(report.remaining_fraction());
                self.run(
                    at,
                    device(DeviceEvent::Battery {
                        consumed_mah: report.consumed_mah(),
                        capacity_mah: report.capacity_mah(),
                    }),
                    out,
                )?;
                out.to_ui.push(self.state_message());
                Ok(())
            }
            MessageType::Bye => {
                out.finished = true;
                self.run(at, device(DeviceEvent::Bye), out)
            }
            MessageType::Hello => {
                log::info!("bob says hello: {}", String::from_utf8_lossy(&msg.payload));
                Ok(())
            }
            MessageType::Heartbeat => Ok(()),
            other => {
                log::warn!("unexpected {other} from bob");
                Ok(())
            }
        }
    }

    /// Steps one event and executes its effects; internal follow-up events
    /// (MEASURE_DONE, VERDICT) are processed at the same instant.
    fn run(&mut self, at: DateTime<Utc>, event: SessionEvent, out: &mut Output) -> Result<(), SessionError> {
        let mut queue = VecDeque::from([event]);
        while let Some(ev) = queue.pop_front() {
            let noop_frame = self.state.phase == Phase::Idle
                && matches!(&ev, SessionEvent::FrameIn { detections, .. } if detections.is_empty());
            if !noop_frame {
                self.trace.push(TimedEvent { at, event: ev.clone() });
            }
            let (next, fx) = step(&self.state, at, &ev, &self.cfg.session);
            self.state = next;
            for e in fx {
                self.execute(&e, &mut queue, out);
                self.effects.push((at, e));
            }
        }
        Ok(())
    }

    fn execute(&mut self, effect: &Effect, queue: &mut VecDeque<SessionEvent>, out: &mut Output) {
        match effect {
            Effect::SendLureOn => match safety_check(self.cfg.lure_current_a, &self.cfg.electrical) {
                Ok(()) => {
                    let payload = encode_lure_on(Some(self.cfg.lure_current_a));
                    let msg = self.message(MessageType::LureOn, payload);
                    out.to_bob.push(msg);
                }
                Err(v) => log::error!("lure not energized: {v:?}"),
            },
            Effect::SendLureOff => {
                let msg = self.message(MessageType::LureOff, Vec::new());
                out.to_bob.push(msg);
            }
            Effect::RequestDepth { frame_id, detection } => {
                let estimate = match &self.last_frame {
                    Some((id, img)) if id == frame_id => self
                        .depth
                        .depth_for(*frame_id, img)
                        .and_then(|map| estimate_length(detection, &map, &self.cfg.camera))
                        .map_err(|e| log::info!("no length for frame {frame_id}: {e}"))
                        .ok(),
                    _ => None,
                };
                queue.push_back(SessionEvent::MeasureDone {
                    frame_id: *frame_id,
                    estimate,
                });
            }
            Effect::Evaluate { frame_id, context } => {
                queue.push_back(SessionEvent::Verdict {
                    frame_id: *frame_id,
                    verdict: evaluate(context, &self.cfg.regs),
                });
            }
            Effect::AppendLog(rec) => out.records.push(rec.clone()),
            Effect::NotifyUi(msg) => out.to_ui.push(msg.clone()),
            Effect::Diagnostic(d) => log::debug!("{d}"),
        }
    }
}
