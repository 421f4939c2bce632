//! Runs a scripted catch end to end on a virtual clock: the simulated bob
//! streams a fish pass, the engine detects and measures it, and the
//! operator keeps it. Writes the session trace and catch log.
//!
//! ```text
//! cargo run --example record_session -- [OUT_DIR]
//! ```

use std::error::Error;
use std::path::{Path, PathBuf};

use catchwise::bobproto::{BatteryModel, BobDevice, SceneScript, SimulatorConfig, NS_PER_SEC};
use catchwise::ems::ElectricalParams;
use catchwise::regulations::parse_regulations;
use catchwise::session::{
    run_coupled, write_trace, CoreConfig, CoupledRun, EngineCore, OperatorDecision, SessionConfig, TimedEvent,
};
use catchwise::vision::{BlobDetector, BoundingBox, CameraIntrinsics, SceneSpec, UniformDepth};

pub const EPOCH: &str = "2026-06-01T05:30:00Z";

/// Two seconds of open water, a 60 x 15 px walleye at 1 m for three
/// seconds, then open water until the 30 s mark.
pub fn scene() -> SceneScript {
    let empty = SceneSpec::empty(5.0);
    let fish = SceneSpec::empty(5.0).with_object("walleye", 1.0, BoundingBox::new(50, 52, 60, 15).unwrap());
    SceneScript::new(160, 120, vec![(48, empty.clone()), (72, fish), (600, empty)]).unwrap()
}

pub fn record(regs_json: &str) -> Result<(Vec<TimedEvent>, CoupledRun), Box<dyn Error>> {
    let mut device = BobDevice::new(SimulatorConfig::default(), BatteryModel::default(), scene())?;
    let mut core = EngineCore::new(
        CoreConfig {
            session: SessionConfig::default(),
            regs: parse_regulations(regs_json)?,
            camera: CameraIntrinsics::pinhole(100.0, 80.0, 60.0)?,
            lure_current_a: 0.020,
            electrical: ElectricalParams::default(),
            forward_frames: false,
        },
        BlobDetector::new("walleye"),
        UniformDepth(1.0),
    );
    let operator = [(3 * NS_PER_SEC + NS_PER_SEC / 2, OperatorDecision::Keep)];
    let run = run_coupled(&mut device, &mut core, EPOCH.parse()?, &operator, 30 * NS_PER_SEC)?;
    Ok((core.trace().to_vec(), run))
}

fn regs_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/regs/lake.json")
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (trace, run) = record(&std::fs::read_to_string(regs_path())?)?;
    println!("{} session events, {} wire messages", trace.len(), run.wire.entries.len());
    for r in &run.records {
        println!("{:?} {} {:?} cm", r.outcome, r.species, r.length_cm);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    let Some(dir) = std::env::args().nth(1) else {
        return run_example();
    };
    let dir = PathBuf::from(dir);
    std::fs::create_dir_all(&dir)?;
    let (trace, run) = record(&std::fs::read_to_string(regs_path())?)?;
    std::fs::write(dir.join("happy_path.trace"), write_trace(&trace))?;
    let log: String = run.records.iter().map(|r| r.to_line()).collect();
    std::fs::write(dir.join("happy_path.log"), log)?;
    println!("wrote {} events and {} records to {}", trace.len(), run.records.len(), dir.display());
    Ok(())
}
