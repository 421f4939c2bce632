use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use catchwise::bobproto::{
    decode_ack, encode, encode_lure_on, frame_rate_probe, simulate, BatteryModel, BatteryReport, BobDevice,
    BobMessage, ClockMode, DevicePhase, FramePayload, FrameReader, MemoryPipe, MessageType, Nack, NackReason, Recv,
    SceneScript, SimulatorConfig, StopReason, StreamItem, Transport, NS_PER_SEC,
};

fn device() -> BobDevice<SceneScript> {
    BobDevice::new(SimulatorConfig::default(), BatteryModel::default(), SceneScript::fish_pass("walleye")).unwrap()
}

fn nack_of(replies: &[BobMessage]) -> Nack {
    assert_eq!(replies.len(), 1);
    assert_eq!(replies[0].kind, MessageType::Nack);
    Nack::decode(&replies[0].payload).unwrap()
}

#[test]
fn commands_before_hello_are_not_ready() {
    let mut d = device();
    let on = BobMessage::new(MessageType::LureOn, 1, encode_lure_on(Some(0.02)));
    assert_eq!(nack_of(&d.handle(&on)), Nack { seq: 1, reason: NackReason::NotReady });
    let hello = d.handle(&BobMessage::empty(MessageType::Hello, 2));
    assert_eq!(hello[0].kind, MessageType::Hello);
    assert_eq!(hello[0].payload, b"bob-sim");
    assert_eq!(d.phase(), DevicePhase::Streaming);
}

#[test]
fn stale_sequence_numbers_are_nacked() {
    let mut d = device();
    d.handle(&BobMessage::empty(MessageType::Hello, 5));
    let on = BobMessage::new(MessageType::LureOn, 5, vec![]);
    assert_eq!(nack_of(&d.handle(&on)), Nack { seq: 5, reason: NackReason::OutOfOrder });
    let on = BobMessage::new(MessageType::LureOn, 3, vec![]);
    assert_eq!(nack_of(&d.handle(&on)), Nack { seq: 3, reason: NackReason::OutOfOrder });
    assert!(!d.lure().is_active());
    let ok = d.handle(&BobMessage::new(MessageType::LureOn, 6, vec![]));
    assert_eq!(decode_ack(&ok[0].payload).unwrap(), 6);
    assert!(d.lure().is_active());
}

#[test]
fn unsafe_and_malformed_lure_commands() {
    let mut d = device();
    d.handle(&BobMessage::empty(MessageType::Hello, 0));
    let hot = BobMessage::new(MessageType::LureOn, 1, encode_lure_on(Some(5.0)));
    assert_eq!(nack_of(&d.handle(&hot)).reason, NackReason::Unsafe);
    let odd = BobMessage::new(MessageType::LureOn, 2, vec![1, 2]);
    assert_eq!(nack_of(&d.handle(&odd)).reason, NackReason::Malformed);
    let off = BobMessage::new(MessageType::LureOff, 3, vec![0]);
    assert_eq!(nack_of(&d.handle(&off)).reason, NackReason::Malformed);
    let frame = BobMessage::new(MessageType::Frame, 4, vec![0; 8]);
    assert_eq!(nack_of(&d.handle(&frame)).reason, NackReason::Unsupported);
}

#[test]
fn lure_draw_shortens_battery_life() {
    let run = |lure: bool| {
        let mut d = BobDevice::new(
            SimulatorConfig::default(),
            BatteryModel::default().with_capacity(5.0),
            SceneScript::fish_pass("walleye"),
        )
        .unwrap();
        d.handle(&BobMessage::empty(MessageType::Hello, 0));
        if lure {
            d.handle(&BobMessage::empty(MessageType::LureOn, 1));
        }
        let out = d.advance_to(3600 * NS_PER_SEC).unwrap();
        let (t_bye, _) = out.iter().find(|(_, m)| m.kind == MessageType::Bye).expect("battery runs out");
        let kinds: Vec<_> = out.iter().rev().take(2).map(|(_, m)| m.kind).collect();
        assert_eq!(kinds, [MessageType::Bye, MessageType::Battery]);
        assert_eq!(d.phase(), DevicePhase::Stopped);
        *t_bye
    };
    // 5 mAh at 400/3 mA is 135 s; with the 50 mA lure it is 5 / (550/3) h.
    let plain = run(false);
    let with_lure = run(true);
    assert!((plain as f64 / 1e9 - 135.0).abs() < 1e-3, "{plain}");
    assert!((with_lure as f64 / 1e9 - 5.0 / (550.0 / 3.0) * 3600.0).abs() < 1e-3, "{with_lure}");
}

/// Drains a transport until the peer closes or `deadline` passes.
fn collect<T: Transport>(t: &mut T, deadline: Duration) -> Vec<(Instant, BobMessage)> {
    let end = Instant::now() + deadline;
    let mut reader = FrameReader::new();
    let mut out = Vec::new();
    while Instant::now() < end {
        match t.recv(Some(Duration::from_millis(20))).unwrap() {
            Recv::Data(b) => {
                reader.push(&b);
                let now = Instant::now();
                while let Some(item) = reader.next_item() {
                    match item {
                        StreamItem::Message(m) => out.push((now, m)),
                        StreamItem::Corrupt(k) => panic!("corrupt frame from simulator: {k}"),
                    }
                }
            }
            Recv::Timeout => {}
            Recv::Closed => break,
        }
    }
    out
}

fn count(msgs: &[(Instant, BobMessage)], kind: MessageType) -> usize {
    msgs.iter().filter(|(_, m)| m.kind == kind).count()
}

#[test]
fn virtual_run_over_memory_pipe() {
    let (mut engine, mut bob) = MemoryPipe::pair();
    let sim = thread::spawn(move || {
        simulate(
            &SimulatorConfig::default(),
            BatteryModel::default(),
            SceneScript::fish_pass("walleye"),
            &mut bob,
            Some(12 * NS_PER_SEC),
        )
        .unwrap()
    });
    engine.send(&encode(&BobMessage::empty(MessageType::Hello, 0)).unwrap()).unwrap();
    let msgs = collect(&mut engine, Duration::from_secs(20));
    let report = sim.join().unwrap();
    assert_eq!(report.stop, StopReason::Deadline);
    assert_eq!(msgs[0].1.kind, MessageType::Hello);
    // The deadline is inclusive: frames at 0, 1/24, ..., 12 s.
    assert_eq!(count(&msgs, MessageType::Frame), 12 * 24 + 1);
    assert_eq!(count(&msgs, MessageType::Heartbeat), 12);
    assert_eq!(count(&msgs, MessageType::Battery), 1);
    let ids: Vec<u32> = msgs
        .iter()
        .filter(|(_, m)| m.kind == MessageType::Frame)
        .map(|(_, m)| FramePayload::decode(&m.payload).unwrap().frame_id)
        .collect();
    assert!(ids.iter().enumerate().all(|(i, &id)| id == i as u32));
    let seqs: Vec<u32> = msgs.iter().map(|(_, m)| m.seq).collect();
    assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1), "outbound seq must count up");
    assert_eq!(frame_rate_probe(&report.trace, 10.0).unwrap(), 24.0);
    let battery = msgs.iter().find(|(_, m)| m.kind == MessageType::Battery).unwrap();
    let r = BatteryReport::decode(&battery.1.payload).unwrap();
    assert!((r.consumed_mah() - 400.0 / 3.0 * 10.0 / 3600.0).abs() <= 0.05);
}

#[test]
fn engine_bye_stops_the_simulator() {
    let (mut engine, mut bob) = MemoryPipe::pair();
    let sim = thread::spawn(move || {
        simulate(&SimulatorConfig::default(), BatteryModel::default(), SceneScript::fish_pass("x"), &mut bob, None).unwrap()
    });
    let mut stream = encode(&BobMessage::empty(MessageType::Hello, 0)).unwrap();
    stream.extend(encode(&BobMessage::empty(MessageType::Bye, 1)).unwrap());
    engine.send(&stream).unwrap();
    let report = sim.join().unwrap();
    assert_eq!(report.stop, StopReason::Bye);
}

#[test]
fn corrupt_inbound_bytes_are_skipped() {
    let (mut engine, mut bob) = MemoryPipe::pair();
    let sim = thread::spawn(move || {
        simulate(&SimulatorConfig::default(), BatteryModel::default(), SceneScript::fish_pass("x"), &mut bob, Some(NS_PER_SEC))
            .unwrap()
    });
    let mut hello = encode(&BobMessage::empty(MessageType::Hello, 0)).unwrap();
    let mut garbage = hello.clone();
    garbage[6] ^= 0x10;
    garbage.append(&mut hello);
    engine.send(&garbage).unwrap();
    let msgs = collect(&mut engine, Duration::from_secs(10));
    let report = sim.join().unwrap();
    assert_eq!(report.corrupt_in, 1);
    assert_eq!(msgs[0].1.kind, MessageType::Hello);
}

#[test]
fn real_clock_over_tcp_holds_24_fps() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let sim = thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        stream.set_nodelay(true).unwrap();
        let cfg = SimulatorConfig { clock: ClockMode::Real, ..SimulatorConfig::default() };
        simulate(&cfg, BatteryModel::default(), SceneScript::fish_pass("walleye"), &mut stream, Some(3 * NS_PER_SEC)).unwrap()
    });
    let mut client = TcpStream::connect(addr).unwrap();
    client.send(&encode(&BobMessage::empty(MessageType::Hello, 0)).unwrap()).unwrap();
    let msgs = collect(&mut client, Duration::from_secs(15));
    let report = sim.join().unwrap();
    assert_eq!(report.stop, StopReason::Deadline);

    let device_fps = frame_rate_probe(&report.trace, 2.0).unwrap();
    assert!((device_fps - 24.0).abs() <= 24.0 * 0.05, "device clock: {device_fps} fps");

    let arrivals: Vec<Instant> = msgs.iter().filter(|(_, m)| m.kind == MessageType::Frame).map(|(t, _)| *t).collect();
    let span = arrivals.last().unwrap().duration_since(arrivals[0]).as_secs_f64();
    let observed = (arrivals.len() - 1) as f64 / span;
    assert!((observed - 24.0).abs() <= 24.0 * 0.05, "receiver saw {observed} fps over {span} s");
}
