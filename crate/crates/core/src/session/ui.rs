//! JSON messages exchanged with the operator UI, and the WebSocket bridge
//! that carries them.

use std::collections::BTreeMap;
use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tungstenite::{Message, WebSocket};

use super::state::{OperatorDecision, Phase};
use crate::regulations::{Decision, Reason};
use crate::vision::Detection;

/// Engine to UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum UiMessage {
    Frame {
        frame_id: u32,
        width: usize,
        height: usize,
        /// PNG, base64 (standard alphabet, padded).
        png: String,
        detections: Vec<Detection>,
    },
    Verdict {
        frame_id: u32,
        species: String,
        length_cm: Option<f64>,
        decision: Decision,
        reasons: Vec<Reason>,
        keep_enabled: bool,
    },
    State {
        phase: Phase,
        frame_id: Option<u32>,
        lure_on: bool,
        bag_counts: BTreeMap<String, u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        battery_remaining: Option<f64>,
    },
    Refusal {
        frame_id: u32,
        reason: String,
    },
}

impl UiMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ui message serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UiDecision {
    Keep,
    Release,
}

impl From<UiDecision> for OperatorDecision {
    fn from(d: UiDecision) -> Self {
        match d {
            UiDecision::Keep => OperatorDecision::Keep,
            UiDecision::Release => OperatorDecision::Release,
        }
    }
}

/// UI to engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum UiInbound {
    Decision { value: UiDecision },
}

impl UiInbound {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

type Clients = Arc<Mutex<Vec<Sender<Arc<str>>>>>;

/// WebSocket server fanning engine messages out to every connected UI.
pub struct UiBridge {
    addr: SocketAddr,
    clients: Clients,
}

const POLL: Duration = Duration::from_millis(10);

impl UiBridge {
    /// Binds and starts accepting. Each valid inbound message is passed to
    /// `on_input`; malformed ones are logged and dropped.
    pub fn listen<A, F>(addr: A, on_input: F) -> io::Result<Self>
    where
        A: ToSocketAddrs,
        F: Fn(UiInbound) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind(addr)?;
        let local = listener.local_addr()?;
        let clients: Clients = Arc::default();
        let on_input = Arc::new(on_input);
        let accept_clients = clients.clone();
        thread::Builder::new().name("ui-accept".into()).spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (tx, rx) = mpsc::channel();
                accept_clients.lock().unwrap().push(tx);
                let on_input = on_input.clone();
                let spawned = thread::Builder::new()
                    .name("ui-client".into())
                    .spawn(move || serve_client(stream, rx, &*on_input));
                if let Err(e) = spawned {
                    log::warn!("ui client thread: {e}");
                }
            }
        })?;
        log::info!("ui bridge on ws://{local}");
        Ok(Self { addr: local, clients })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn client_count(&self) -> usize {
        self.clients.lock().unwrap().len()
    }

    pub fn broadcast(&self, msg: &UiMessage) {
        let text: Arc<str> = msg.to_json().into();
        self.clients.lock().unwrap().retain(|c| c.send(text.clone()).is_ok());
    }
}

fn serve_client(stream: TcpStream, outbound: Receiver<Arc<str>>, on_input: &dyn Fn(UiInbound)) {
    let peer = stream.peer_addr().ok();
    let mut ws = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            log::warn!("ui handshake failed: {e}");
            return;
        }
    };
    if ws.get_ref().set_read_timeout(Some(POLL)).is_err() {
        return;
    }
    loop {
        loop {
            match outbound.try_recv() {
                Ok(text) => {
                    if ws.send(Message::text(&*text)).is_err() {
                        return;
                    }
                }
                Err(mpsc::TryRecvError::Empty) => break,
                Err(mpsc::TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    return;
                }
            }
        }
        match ws.read() {
            Ok(Message::Text(text)) => match UiInbound::parse(&text) {
                Ok(input) => on_input(input),
                Err(e) => log::warn!("ui {peer:?}: bad message: {e}"),
            },
            Ok(Message::Close(_)) => return,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(_) => return,
        }
    }
}

/// Minimal scripted UI client, for tests and headless operation.
pub struct UiClient {
    ws: WebSocket<tungstenite::stream::MaybeTlsStream<TcpStream>>,
}

impl UiClient {
    pub fn connect(addr: SocketAddr) -> Result<Self, tungstenite::Error> {
        let (ws, _) = tungstenite::connect(format!("ws://{addr}"))?;
        if let tungstenite::stream::MaybeTlsStream::Plain(s) = ws.get_ref() {
            s.set_read_timeout(Some(POLL))?;
        }
        Ok(Self { ws })
    }

    pub fn send_decision(&mut self, value: UiDecision) -> Result<(), tungstenite::Error> {
        let text = serde_json::to_string(&UiInbound::Decision { value }).expect("decision serializes");
        self.ws.send(Message::text(text))
    }

    /// Next parsed message, or `None` once `timeout` passes.
    pub fn next(&mut self, timeout: Duration) -> Result<Option<UiMessage>, tungstenite::Error> {
        let deadline = Instant::now() + timeout;
        while Instant::now() < deadline {
            match self.ws.read() {
                Ok(Message::Text(text)) => {
                    let msg = serde_json::from_str(&text).map_err(|e| {
                        tungstenite::Error::Io(io::Error::new(io::ErrorKind::InvalidData, e))
                    })?;
                    return Ok(Some(msg));
                }
                Ok(_) => {}
                Err(tungstenite::Error::Io(e))
                    if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }

    /// Reads until `pred` matches or `timeout` passes.
    pub fn wait_for(
        &mut self,
        timeout: Duration,
        mut pred: impl FnMut(&UiMessage) -> bool,
    ) -> Result<Option<UiMessage>, tungstenite::Error> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Ok(None);
            }
            match self.next(left)? {
                Some(m) if pred(&m) => return Ok(Some(m)),
                Some(_) => {}
                None => return Ok(None),
            }
        }
    }
}
