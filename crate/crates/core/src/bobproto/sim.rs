//! Driving a [`BobDevice`] against a script or a live byte stream.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::battery::BatteryModel;
use super::clock::{Clock, RealClock, VirtualClock, NS_PER_SEC};
use super::codec::{encode, FrameReader, StreamItem};
use super::device::{BobDevice, ClockMode, DevicePhase, SimulatorConfig};
use super::source::FrameSource;
use super::{BobMessage, MessageType, ProtoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Engine to bob.
    In,
    /// Bob to engine.
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub t_ns: u64,
    pub dir: Direction,
    pub kind: MessageType,
    pub seq: u32,
    pub payload_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_id: Option<u32>,
}

impl TraceEntry {
    pub fn of(t_ns: u64, dir: Direction, msg: &BobMessage) -> Self {
        let frame_id = (msg.kind == MessageType::Frame && msg.payload.len() >= 4)
            .then(|| u32::from_be_bytes([msg.payload[0], msg.payload[1], msg.payload[2], msg.payload[3]]));
        Self {
            t_ns,
            dir,
            kind: msg.kind,
            seq: msg.seq,
            payload_len: msg.payload.len(),
            frame_id,
        }
    }
}

/// Message log of one device session, without payload bodies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn push(&mut self, t_ns: u64, dir: Direction, msg: &BobMessage) {
        self.entries.push(TraceEntry::of(t_ns, dir, msg));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, dir: Direction, kind: MessageType) -> usize {
        self.entries.iter().filter(|e| e.dir == dir && e.kind == kind).count()
    }

    pub fn frame_times(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries
            .iter()
            .filter(|e| e.dir == Direction::Out && e.kind == MessageType::Frame)
            .map(|e| e.t_ns)
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("trace entry serializes"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<Self, ProtoError> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| ProtoError::Trace(format!("line {}: {e}", i + 1))))
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }
}

/// Achieved frame rate over `[first FRAME, first FRAME + window_s)`.
pub fn frame_rate_probe(trace: &Trace, window_s: f64) -> Result<f64, ProtoError> {
    let start = trace.frame_times().next().ok_or(ProtoError::EmptyWindow)?;
    frame_rate_probe_from(trace, start, window_s)
}

/// Achieved frame rate over `[start_ns, start_ns + window_s)`.
pub fn frame_rate_probe_from(trace: &Trace, start_ns: u64, window_s: f64) -> Result<f64, ProtoError> {
    if trace.is_empty() {
        return Err(ProtoError::Trace("empty trace".into()));
    }
    if !(window_s > 0.0 && window_s.is_finite()) {
        return Err(ProtoError::Trace(format!("window must be > 0 s, got {window_s}")));
    }
    let end = start_ns + (window_s * NS_PER_SEC as f64).round() as u64;
    let n = trace.frame_times().filter(|&t| t >= start_ns && t < end).count();
    if n == 0 {
        return Err(ProtoError::EmptyWindow);
    }
    Ok(n as f64 / window_s)
}

/// Feeds a timestamped inbound script to the device on a virtual clock,
/// calling `sink` for every message in either direction.
pub fn run_virtual_with<S, F>(
    device: &mut BobDevice<S>,
    script: &[(u64, BobMessage)],
    until_ns: u64,
    mut sink: F,
) -> Result<(), ProtoError>
where
    S: FrameSource,
    F: FnMut(u64, Direction, &BobMessage),
{
    if script.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(ProtoError::Trace("script timestamps must be non-decreasing".into()));
    }
    for (t, msg) in script {
        if *t > until_ns {
            break;
        }
        for (te, m) in device.advance_to(*t)? {
            sink(te, Direction::Out, &m);
        }
        sink(*t, Direction::In, msg);
        for m in device.handle(msg) {
            sink(device.now_ns(), Direction::Out, &m);
        }
    }
    for (te, m) in device.advance_to(until_ns)? {
        sink(te, Direction::Out, &m);
    }
    Ok(())
}

pub fn run_virtual<S: FrameSource>(
    device: &mut BobDevice<S>,
    script: &[(u64, BobMessage)],
    until_ns: u64,
) -> Result<Trace, ProtoError> {
    let mut trace = Trace::default();
    run_virtual_with(device, script, until_ns, |t, d, m| trace.push(t, d, m))?;
    Ok(trace)
}

pub enum Recv {
    Data(Vec<u8>),
    Timeout,
    Closed,
}

/// A reliable duplex byte stream.
pub trait Transport {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()>;
    /// `None` blocks; `Some(ZERO)` polls.
    fn recv(&mut self, timeout: Option<Duration>) -> io::Result<Recv>;
}

impl Transport for TcpStream {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.write_all(bytes)
    }

    fn recv(&mut self, timeout: Option<Duration>) -> io::Result<Recv> {
        let mut buf = vec![0u8; 64 * 1024];
        let poll = timeout == Some(Duration::ZERO);
        if poll {
            self.set_nonblocking(true)?;
        } else {
            self.set_read_timeout(timeout)?;
        }
        let res = self.read(&mut buf);
        if poll {
            self.set_nonblocking(false)?;
        }
        match res {
            Ok(0) => Ok(Recv::Closed),
            Ok(n) => {
                buf.truncate(n);
                Ok(Recv::Data(buf))
            }
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => Ok(Recv::Timeout),
            Err(e) if e.kind() == io::ErrorKind::ConnectionReset => Ok(Recv::Closed),
            Err(e) => Err(e),
        }
    }
}

/// In-process transport over channels.
pub struct MemoryPipe {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

impl MemoryPipe {
    pub fn pair() -> (Self, Self) {
        let (a_tx, b_rx) = mpsc::channel();
        let (b_tx, a_rx) = mpsc::channel();
        (Self { tx: a_tx, rx: a_rx }, Self { tx: b_tx, rx: b_rx })
    }
}

impl Transport for MemoryPipe {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.tx
            .send(bytes.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer dropped"))
    }

    fn recv(&mut self, timeout: Option<Duration>) -> io::Result<Recv> {
        let got = match timeout {
            None => self.rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
            Some(d) if d.is_zero() => self.rx.try_recv().map_err(|e| match e {
                TryRecvError::Empty => RecvTimeoutError::Timeout,
                TryRecvError::Disconnected => RecvTimeoutError::Disconnected,
            }),
            Some(d) => self.rx.recv_timeout(d),
        };
        Ok(match got {
            Ok(b) => Recv::Data(b),
            Err(RecvTimeoutError::Timeout) => Recv::Timeout,
            Err(RecvTimeoutError::Disconnected) => Recv::Closed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The device sent BYE (battery empty or engine said goodbye).
    Bye,
    PeerClosed,
    Deadline,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub trace: Trace,
    pub battery: BatteryModel,
    pub frames_sent: u64,
    pub stop: StopReason,
    /// Corrupt inbound frames that were skipped.
    pub corrupt_in: usize,
}

/// Runs the simulator over a live transport until BYE, disconnect, or
/// `until_ns` on the simulator clock.
pub fn simulate<S: FrameSource, T: Transport>(
    config: &SimulatorConfig,
    battery: BatteryModel,
    source: S,
    transport: &mut T,
    until_ns: Option<u64>,
) -> Result<SimReport, ProtoError> {
    let mut clock: Box<dyn Clock> = match config.clock {
        ClockMode::Virtual => Box::new(VirtualClock::new()),
        ClockMode::Real => Box::new(RealClock::new()),
    };
    let mut device = BobDevice::new(config.clone(), battery, source)?;
    let mut reader = FrameReader::new();
    let mut trace = Trace::default();
    let mut corrupt_in = 0;

    let emit = |trace: &mut Trace, transport: &mut T, t: u64, msg: &BobMessage| -> Result<bool, ProtoError> {
        trace.push(t, Direction::Out, msg);
        match transport.send(&encode(msg)?) {
            Ok(()) => Ok(true),
            Err(e) if matches!(e.kind(), io::ErrorKind::BrokenPipe | io::ErrorKind::ConnectionReset) => Ok(false),
            Err(e) => Err(e.into()),
        }
    };

    let stop = 'run: loop {
        if device.phase() == DevicePhase::Stopped {
            break StopReason::Bye;
        }
        let now = clock.now_ns();
        if let Some(u) = until_ns.filter(|&u| now >= u) {
            for (t, m) in device.advance_to(u)? {
                emit(&mut trace, transport, t, &m)?;
            }
            break StopReason::Deadline;
        }
        let target = match (device.next_deadline(), until_ns) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let timeout = if clock.is_virtual() {
            (device.phase() != DevicePhase::AwaitingHello).then_some(Duration::ZERO)
        } else {
            target.map(|t| Duration::from_nanos(t.saturating_sub(now)))
        };
        match transport.recv(timeout)? {
            Recv::Data(bytes) => {
                reader.push(&bytes);
                let now = clock.now_ns();
                for (t, m) in device.advance_to(now)? {
                    if !emit(&mut trace, transport, t, &m)? {
                        break 'run StopReason::PeerClosed;
                    }
                }
                while let Some(item) = reader.next_item() {
                    match item {
                        StreamItem::Message(msg) => {
                            trace.push(now, Direction::In, &msg);
                            for reply in device.handle(&msg) {
                                if !emit(&mut trace, transport, now, &reply)? {
                                    break 'run StopReason::PeerClosed;
                                }
                            }
                        }
                        StreamItem::Corrupt(kind) => {
                            corrupt_in += 1;
                            log::warn!("skipping corrupt inbound frame: {kind}");
                        }
                    }
                }
                continue;
            }
            Recv::Closed => break StopReason::PeerClosed,
            Recv::Timeout => {}
        }
        if let Some(t) = target {
            clock.wait_until(t);
            for (te, m) in device.advance_to(t)? {
                if !emit(&mut trace, transport, te, &m)? {
                    break 'run StopReason::PeerClosed;
                }
            }
        }
    };

    Ok(SimReport {
        frames_sent: device.frames_sent(),
        battery: device.battery().clone(),
        trace,
        stop,
        corrupt_in,
    })
}

/// Accepts one engine connection on `addr` and simulates until it ends.
pub fn serve_once<A: ToSocketAddrs, S: FrameSource>(
    addr: A,
    config: &SimulatorConfig,
    battery: BatteryModel,
    source: S,
    until_ns: Option<u64>,
) -> Result<SimReport, ProtoError> {
    let listener = TcpListener::bind(addr)?;
    log::info!("bob listening on {}", listener.local_addr()?);
    let (mut stream, peer) = listener.accept()?;
    stream.set_nodelay(true)?;
    log::info!("engine connected from {peer}");
    simulate(config, battery, source, &mut stream, until_ns)
}
