//! A live session on the real clock: the simulated bob serves TCP, the
//! engine connects to it, and a headless UI client answers each verdict
//! over the WebSocket bridge.

use std::error::Error;
use std::net::TcpListener;
use std::path::Path;
use std::thread;
use std::time::Duration;

use catchwise::bobproto::{simulate, BatteryModel, ClockMode, SceneScript, SimulatorConfig, NS_PER_SEC};
use catchwise::ems::ElectricalParams;
use catchwise::regulations::{parse_regulations, Decision};
use catchwise::session::{spawn_engine, CoreConfig, EngineCore, EngineOptions, SessionConfig, UiClient, UiDecision, UiMessage};
use catchwise::vision::{BlobDetector, CameraIntrinsics, UniformDepth};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let bob = listener.local_addr()?;
    let sim = thread::spawn(move || {
        let (mut stream, _) = listener.accept()?;
        let cfg = SimulatorConfig { clock: ClockMode::Real, ..SimulatorConfig::default() };
        simulate(&cfg, BatteryModel::default(), SceneScript::fish_pass("walleye"), &mut stream, Some(15 * NS_PER_SEC))
            .map_err(|e| std::io::Error::other(e.to_string()))
    });

    let regs = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/regs/lake.json"))?;
    let core = EngineCore::new(
        CoreConfig {
            session: SessionConfig::default(),
            regs: parse_regulations(&regs)?,
            camera: CameraIntrinsics::pinhole(100.0, 80.0, 60.0)?,
            lure_current_a: 0.020,
            electrical: ElectricalParams::default(),
            forward_frames: false,
        },
        BlobDetector::new("walleye"),
        UniformDepth(1.0),
    );
    let dir = std::env::temp_dir().join(format!("catchwise-live-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let engine = spawn_engine(
        core,
        EngineOptions {
            bob,
            log_path: dir.join("catches.jsonl"),
            ui_listen: Some("127.0.0.1:0".parse()?),
            trace_path: None,
            connect_timeout: Duration::from_secs(5),
        },
    )?;

    let mut ui = UiClient::connect(engine.ui_addr().ok_or("no UI bridge")?)?;
    let verdict = ui.wait_for(Duration::from_secs(10), |m| matches!(m, UiMessage::Verdict { .. }))?;
    if let Some(UiMessage::Verdict { species, length_cm, decision, keep_enabled, .. }) = verdict {
        println!("{species} {length_cm:?} cm: {} (keep enabled: {keep_enabled})", decision.as_str());
        let answer = if decision == Decision::KeepAllowed { UiDecision::Keep } else { UiDecision::Release };
        ui.send_decision(answer)?;
        println!("operator: {answer:?}");
    }
    thread::sleep(Duration::from_millis(300));
    let summary = engine.stop()?;
    let report = sim.join().map_err(|_| "simulator panicked")??;
    for r in &summary.records {
        println!("logged {:?} {}", r.outcome, r.species);
    }
    println!("{} frames received; simulator stopped on {:?}", summary.frames, report.stop);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
