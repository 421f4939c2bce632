//! The simulated bob as a sans-io state machine: callers feed it inbound
//! messages and advance its clock; it returns what it would transmit.

use serde::{Deserialize, Serialize};

use super::battery::{BatteryModel, DrawMode};
use super::clock::NS_PER_SEC;
use super::payload::{self, BatteryReport, FramePayload, Nack, NackReason};
use super::source::FrameSource;
use super::{BobMessage, MessageType, ProtoError};
use crate::ems::{safety_check, ElectricalParams, LureState};

pub const HEARTBEAT_PERIOD_NS: u64 = NS_PER_SEC;
pub const BATTERY_PERIOD_NS: u64 = 10 * NS_PER_SEC;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    Virtual,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorConfig {
    pub fps: f64,
    pub clock: ClockMode,
    pub device_name: String,
    /// Current used when LURE_ON carries no explicit value.
    pub default_lure_current_a: f64,
    pub electrical: ElectricalParams,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            fps: 24.0,
            clock: ClockMode::Virtual,
            device_name: "bob-sim".into(),
            default_lure_current_a: 0.020,
            electrical: ElectricalParams::default(),
        }
    }
}

impl SimulatorConfig {
    pub fn validate(&self) -> Result<(), ProtoError> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(ProtoError::InvalidConfig(format!("fps must be > 0, got {}", self.fps)));
        }
        self.electrical
            .validate()
            .map_err(|e| ProtoError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DevicePhase {
    AwaitingHello,
    Streaming,
    Stopped,
}

pub struct BobDevice<S> {
    config: SimulatorConfig,
    source: S,
    battery: BatteryModel,
    lure: LureState,
    phase: DevicePhase,
    now_ns: u64,
    out_seq: u32,
    last_in_seq: Option<u32>,
    stream_start_ns: u64,
    frames_sent: u64,
    heartbeats_sent: u64,
    reports_sent: u64,
}

impl<S: FrameSource> BobDevice<S> {
    pub fn new(config: SimulatorConfig, battery: BatteryModel, source: S) -> Result<Self, ProtoError> {
        config.validate()?;
        Ok(Self {
            config,
            source,
            battery,
            lure: LureState::off(),
            phase: DevicePhase::AwaitingHello,
            now_ns: 0,
            out_seq: 0,
            last_in_seq: None,
            stream_start_ns: 0,
            frames_sent: 0,
            heartbeats_sent: 0,
            reports_sent: 0,
        })
    }

    pub fn phase(&self) -> DevicePhase {
        self.phase
    }

    pub fn now_ns(&self) -> u64 {
        self.now_ns
    }

    pub fn battery(&self) -> &BatteryModel {
        &self.battery
    }

    pub fn lure(&self) -> &LureState {
        &self.lure
    }

    pub fn frames_sent(&self) -> u64 {
        self.frames_sent
    }

    fn mode(&self) -> DrawMode {
        DrawMode {
            streaming: self.phase == DevicePhase::Streaming,
            lure: self.lure.is_active(),
        }
    }

    fn next_seq(&mut self) -> u32 {
        let s = self.out_seq;
        self.out_seq = self.out_seq.wrapping_add(1);
        s
    }

    fn message(&mut self, kind: MessageType, payload: Vec<u8>) -> BobMessage {
        let seq = self.next_seq();
        BobMessage::new(kind, seq, payload)
    }

    fn frame_due_ns(&self) -> u64 {
        self.stream_start_ns + (self.frames_sent as f64 * 1e9 / self.config.fps).round() as u64
    }

    fn heartbeat_due_ns(&self) -> u64 {
        self.stream_start_ns + (self.heartbeats_sent + 1) * HEARTBEAT_PERIOD_NS
    }

    fn report_due_ns(&self) -> u64 {
        self.stream_start_ns + (self.reports_sent + 1) * BATTERY_PERIOD_NS
    }

    fn next_timer(&self) -> Option<u64> {
        (self.phase == DevicePhase::Streaming).then(|| {
            self.frame_due_ns()
                .min(self.heartbeat_due_ns())
                .min(self.report_due_ns())
        })
    }

    fn depletion_ns(&self) -> Option<u64> {
        if self.phase == DevicePhase::Stopped {
            return None;
        }
        self.battery
            .time_to_empty_ns(self.mode())
            .map(|d| self.now_ns.saturating_add(d))
    }

    /// Earliest time at which the device will act on its own.
    pub fn next_deadline(&self) -> Option<u64> {
        match (self.next_timer(), self.depletion_ns()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn battery_report(&mut self) -> BobMessage {
        let report = BatteryReport::from_mah(self.battery.consumed_mah(), self.battery.capacity_mah);
        self.message(MessageType::Battery, report.encode())
    }

    /// Runs the device clock forward to `t_ns`, returning timestamped output.
    pub fn advance_to(&mut self, t_ns: u64) -> Result<Vec<(u64, BobMessage)>, ProtoError> {
        let mut out = Vec::new();
        while self.phase != DevicePhase::Stopped {
            let timer = self.next_timer();
            let depletion = self.depletion_ns();
            let event = match (timer, depletion) {
                (Some(a), Some(b)) => a.min(b),
                (a, b) => match a.or(b) {
                    Some(e) => e,
                    None => break,
                },
            };
            if event > t_ns {
                break;
            }
            let mode = self.mode();
            self.battery.accrue(mode, event - self.now_ns);
            self.now_ns = event;

            if depletion == Some(event) {
                let report = self.battery_report();
                out.push((event, report));
                let bye = self.message(MessageType::Bye, Vec::new());
                out.push((event, bye));
                self.lure = LureState::off();
                self.phase = DevicePhase::Stopped;
                break;
            }
            if self.heartbeat_due_ns() == event {
                self.heartbeats_sent += 1;
                let hb = self.message(MessageType::Heartbeat, Vec::new());
                out.push((event, hb));
            }
            if self.report_due_ns() == event {
                self.reports_sent += 1;
                let report = self.battery_report();
                out.push((event, report));
            }
            if self.frame_due_ns() == event {
                let frame_id = self.frames_sent as u32;
                self.frames_sent += 1;
                let png = self.source.frame(frame_id)?;
                let payload = FramePayload {
                    frame_id,
                    png: png.to_vec(),
                }
                .encode();
                let frame = self.message(MessageType::Frame, payload);
                out.push((event, frame));
            }
        }
        if t_ns > self.now_ns {
            if self.phase != DevicePhase::Stopped {
                let mode = self.mode();
                self.battery.accrue(mode, t_ns - self.now_ns);
            }
            self.now_ns = t_ns;
        }
        Ok(out)
    }

    fn nack(&mut self, seq: u32, reason: NackReason) -> Vec<BobMessage> {
        let payload = Nack { seq, reason }.encode();
        vec![self.message(MessageType::Nack, payload)]
    }

    fn ack(&mut self, seq: u32) -> Vec<BobMessage> {
        vec![self.message(MessageType::Ack, payload::encode_ack(seq))]
    }

    /// Handles one inbound message at the current device time.
    pub fn handle(&mut self, msg: &BobMessage) -> Vec<BobMessage> {
        if self.phase == DevicePhase::Stopped {
            return Vec::new();
        }
        if self.last_in_seq.is_some_and(|last| msg.seq <= last) {
            return self.nack(msg.seq, NackReason::OutOfOrder);
        }
        self.last_in_seq = Some(msg.seq);

        match (self.phase, msg.kind) {
            (DevicePhase::AwaitingHello, MessageType::Hello) => {
                self.phase = DevicePhase::Streaming;
                self.stream_start_ns = self.now_ns;
                let name = self.config.device_name.clone().into_bytes();
                vec![self.message(MessageType::Hello, name)]
            }
            (DevicePhase::AwaitingHello, MessageType::Bye) => {
                self.phase = DevicePhase::Stopped;
                Vec::new()
            }
            (DevicePhase::AwaitingHello, _) => self.nack(msg.seq, NackReason::NotReady),
            (_, MessageType::LureOn) => {
                let current = match payload::decode_lure_on(&msg.payload) {
                    Ok(c) => c.unwrap_or(self.config.default_lure_current_a),
                    Err(_) => return self.nack(msg.seq, NackReason::Malformed),
                };
                if safety_check(current, &self.config.electrical).is_err() {
                    return self.nack(msg.seq, NackReason::Unsafe);
                }
                match LureState::on(current, &self.config.electrical) {
                    Ok(state) => {
                        self.lure = state;
                        self.ack(msg.seq)
                    }
                    Err(_) => self.nack(msg.seq, NackReason::Malformed),
                }
            }
            (_, MessageType::LureOff) => {
                if !msg.payload.is_empty() {
                    return self.nack(msg.seq, NackReason::Malformed);
                }
                self.lure = LureState::off();
                self.ack(msg.seq)
            }
            (_, MessageType::Heartbeat) => Vec::new(),
            (_, MessageType::Bye) => {
                self.lure = LureState::off();
                self.phase = DevicePhase::Stopped;
                Vec::new()
            }
            _ => self.nack(msg.seq, NackReason::Unsupported),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bobproto::SceneScript;

    fn streaming() -> BobDevice<SceneScript> {
        let mut d = BobDevice::new(SimulatorConfig::default(), BatteryModel::default(), SceneScript::fish_pass("w")).unwrap();
        d.handle(&BobMessage::empty(MessageType::Hello, 0));
        d
    }

    #[test]
    fn idle_device_only_waits_on_the_battery() {
        let d = BobDevice::new(SimulatorConfig::default(), BatteryModel::default(), SceneScript::fish_pass("w")).unwrap();
        assert_eq!(d.phase(), DevicePhase::AwaitingHello);
        assert_eq!(d.next_deadline(), d.depletion_ns());
        assert!(d.next_deadline().is_some());
    }

    #[test]
    fn first_frame_is_due_at_hello() {
        let mut d = streaming();
        assert_eq!(d.next_deadline(), Some(0));
        let out = d.advance_to(0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1.kind, MessageType::Frame);
        assert_eq!(d.next_deadline(), Some((1e9f64 / 24.0).round() as u64));
    }

    #[test]
    fn heartbeat_every_second() {
        let mut d = streaming();
        let out = d.advance_to(3 * NS_PER_SEC).unwrap();
        let beats: Vec<u64> = out.iter().filter(|(_, m)| m.kind == MessageType::Heartbeat).map(|(t, _)| *t).collect();
        assert_eq!(beats, [NS_PER_SEC, 2 * NS_PER_SEC, 3 * NS_PER_SEC]);
    }

    #[test]
    fn stopped_device_is_silent() {
        let mut d = streaming();
        d.handle(&BobMessage::empty(MessageType::Bye, 1));
        assert_eq!(d.phase(), DevicePhase::Stopped);
        assert!(d.handle(&BobMessage::empty(MessageType::Hello, 2)).is_empty());
        assert!(d.advance_to(10 * NS_PER_SEC).unwrap().is_empty());
        assert_eq!(d.next_deadline(), None);
    }
}
