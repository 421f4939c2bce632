//! Threaded runtime around [`EngineCore`]: a bob reader thread and the UI
//! bridge feed one ordered queue that the engine thread drains.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::PathBuf;
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};

use super::core::{EngineCore, Input, Output};
use super::record::{CatchLog, CatchRecord};
use super::replay::{write_trace, TimedEvent};
use super::state::Effect;
use super::ui::UiBridge;
use super::SessionError;
use crate::bobproto::{encode, FrameReader, StreamItem};
use crate::vision::{DepthProvider, Detector};

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub bob: SocketAddr,
    pub log_path: PathBuf,
    pub ui_listen: Option<SocketAddr>,
    /// Where to write the session event trace on exit.
    pub trace_path: Option<PathBuf>,
    pub connect_timeout: Duration,
}

enum Msg {
    Input(Input),
    BobClosed,
    Stop,
}

#[derive(Debug, Clone)]
pub struct EngineSummary {
    pub records: Vec<CatchRecord>,
    pub effects: Vec<(DateTime<Utc>, Effect)>,
    pub trace: Vec<TimedEvent>,
    pub frames: u64,
}

pub struct RunningEngine {
    ui_addr: Option<SocketAddr>,
    tx: Sender<Msg>,
    join: JoinHandle<Result<EngineSummary, SessionError>>,
}

impl RunningEngine {
    pub fn ui_addr(&self) -> Option<SocketAddr> {
        self.ui_addr
    }

    /// Says BYE to the bob and waits for the engine to finish.
    pub fn stop(self) -> Result<EngineSummary, SessionError> {
        let _ = self.tx.send(Msg::Stop);
        self.wait()
    }

    /// Waits for the session to end on its own (bob BYE or disconnect).
    pub fn wait(self) -> Result<EngineSummary, SessionError> {
        self.join
            .join()
            .unwrap_or_else(|_| Err(SessionError::Runtime("engine thread panicked".into())))
    }
}

fn connect(addr: SocketAddr, timeout: Duration) -> Result<TcpStream, SessionError> {
    let deadline = Instant::now() + timeout;
    loop {
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() >= deadline => {
                return Err(SessionError::Runtime(format!("cannot reach bob at {addr}: {e}")))
            }
            Err(_) => thread::sleep(Duration::from_millis(50)),
        }
    }
}

/// Connects to the bob, starts the UI bridge and runs the session on a
/// background thread.
pub fn spawn_engine<D, P>(mut core: EngineCore<D, P>, opts: EngineOptions) -> Result<RunningEngine, SessionError>
where
    D: Detector + Send + 'static,
    P: DepthProvider + Send + 'static,
{
    let (mut log, _) = CatchLog::open(&opts.log_path)?;
    let stream = connect(opts.bob, opts.connect_timeout)?;
    stream.set_nodelay(true)?;
    let (tx, rx) = mpsc::channel::<Msg>();

    let bridge = match opts.ui_listen {
        Some(addr) => {
            let tx = tx.clone();
            Some(UiBridge::listen(addr, move |input| {
                let super::ui::UiInbound::Decision { value } = input;
                let _ = tx.send(Msg::Input(Input::Operator(value.into())));
            })?)
        }
        None => None,
    };
    let ui_addr = bridge.as_ref().map(UiBridge::local_addr);

    let mut reader_stream = stream.try_clone()?;
    let reader_tx = tx.clone();
    thread::Builder::new().name("bob-reader".into()).spawn(move || {
        let mut reader = FrameReader::new();
        let mut buf = vec![0u8; 64 * 1024];
        loop {
            match reader_stream.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => reader.push(&buf[..n]),
            }
            while let Some(item) = reader.next_item() {
                match item {
                    StreamItem::Message(m) => {
                        if reader_tx.send(Msg::Input(Input::Bob(m))).is_err() {
                            return;
                        }
                    }
                    StreamItem::Corrupt(kind) => log::warn!("dropping corrupt bob frame: {kind}"),
                }
            }
        }
        let _ = reader_tx.send(Msg::BobClosed);
    })?;

    let join = thread::Builder::new().name("engine".into()).spawn(move || {
        let mut writer = stream;
        let mut frames = 0u64;
        let send = |w: &mut TcpStream, m| -> Result<(), SessionError> {
            w.write_all(&encode(&m)?)?;
            Ok(())
        };
        let hello = core.hello();
        send(&mut writer, hello)?;
        let dispatch = |out: Output, writer: &mut TcpStream, log: &mut CatchLog| -> Result<bool, SessionError> {
            for m in out.to_bob {
                if let Err(e) = send(writer, m) {
                    log::warn!("bob write failed: {e}");
                }
            }
            if let Some(b) = &bridge {
                for m in &out.to_ui {
                    b.broadcast(m);
                }
            }
            for r in &out.records {
                log.append(r)?;
            }
            Ok(out.finished)
        };
        loop {
            let wait = core
                .next_timer()
                .map(|t| (t - Utc::now()).to_std().unwrap_or(Duration::ZERO))
                .unwrap_or(Duration::from_millis(250));
            let input = match rx.recv_timeout(wait) {
                Ok(Msg::Input(i)) => i,
                Ok(Msg::BobClosed) => break,
                Ok(Msg::Stop) => {
                    let bye = core.bye();
                    let _ = send(&mut writer, bye);
                    let _ = writer.shutdown(std::net::Shutdown::Write);
                    break;
                }
                Err(RecvTimeoutError::Timeout) => Input::Tick,
                Err(RecvTimeoutError::Disconnected) => break,
            };
            if matches!(&input, Input::Bob(m) if m.kind == crate::bobproto::MessageType::Frame) {
                frames += 1;
            }
            match core.handle(Utc::now(), input) {
                Ok(out) => {
                    if dispatch(out, &mut writer, &mut log)? {
                        break;
                    }
                }
                Err(e) => log::warn!("{e}"),
            }
        }
        if let Some(path) = &opts.trace_path {
            std::fs::write(path, write_trace(core.trace())).map_err(|e| SessionError::io(path, e))?;
        }
        Ok(EngineSummary {
            records: core
                .effects()
                .iter()
                .filter_map(|(_, e)| match e {
                    Effect::AppendLog(r) => Some(r.clone()),
                    _ => None,
                })
                .collect(),
            effects: core.effects().to_vec(),
            trace: core.trace().to_vec(),
            frames,
        })
    })?;

    Ok(RunningEngine { ui_addr, tx, join })
}
