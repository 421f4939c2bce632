mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use catchwise::bobproto::{BatteryModel, BobDevice, SceneScript, SimulatorConfig, NS_PER_SEC};
use catchwise::ems::ElectricalParams;
use catchwise::regulations::{parse_regulations, serialize_regulations};
use catchwise::session::{
    run_coupled, write_trace, CoreConfig, EngineCore, OperatorDecision, SessionConfig, TimedEvent, UiDecision,
    UiInbound, UiMessage,
};
use catchwise::vision::{BlobDetector, BoundingBox, CameraIntrinsics, SceneSpec, SidecarDetector, UniformDepth};
use chrono::{DateTime, TimeDelta, Utc};
use jsonschema::{Registry, Validator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn validator(name: &str) -> Validator {
    let common = read_json(dir().join("schemas/common.schema.json"));
    let registry = Registry::new()
        .add("https://catchwise.local/schemas/common.schema.json", common)
        .unwrap()
        .prepare()
        .unwrap();
    jsonschema::options()
        .with_registry(&registry)
        .should_validate_formats(true)
        .build(&read_json(dir().join("schemas").join(name)))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assert_valid(v: &Validator, instance: &Value) {
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{instance}\n{errors:#?}");
}

fn lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn every_schema_compiles() {
    for entry in std::fs::read_dir(dir().join("schemas")).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        validator(&name);
    }
}

#[test]
fn ui_messages_from_a_real_session() {
    let scene = SceneScript::fish_pass("walleye");
    let mut device = BobDevice::new(SimulatorConfig::default(), BatteryModel::default(), scene).unwrap();
    let mut core = EngineCore::new(
        CoreConfig {
            session: SessionConfig::default(),
            regs: parse_regulations(&std::fs::read_to_string(dir().join("testdata/regs/strict.json")).unwrap()).unwrap(),
            camera: CameraIntrinsics::pinhole(100.0, 80.0, 60.0).unwrap(),
            lure_current_a: 0.020,
            electrical: ElectricalParams::default(),
            forward_frames: true,
        },
        BlobDetector::new("walleye"),
        UniformDepth(1.0),
    );
    let operator = [
        (3 * NS_PER_SEC, OperatorDecision::Keep),
        (3 * NS_PER_SEC + NS_PER_SEC / 2, OperatorDecision::Release),
    ];
    let epoch: DateTime<Utc> = "2026-06-01T05:30:00Z".parse().unwrap();
    let run = run_coupled(&mut device, &mut core, epoch, &operator, 12 * NS_PER_SEC).unwrap();

    let v = validator("ui_outbound.schema.json");
    let mut seen = BTreeMap::new();
    for m in &run.ui {
        let value: Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_valid(&v, &value);
        *seen.entry(value["type"].as_str().unwrap().to_string()).or_insert(0) += 1;
    }
    for kind in ["frame", "verdict", "state", "refusal"] {
        assert!(seen.contains_key(kind), "session produced no {kind} message: {seen:?}");
    }

    let with_battery = UiMessage::State {
        phase: catchwise::session::Phase::Idle,
        frame_id: None,
        lure_on: false,
        bag_counts: BTreeMap::from([("WALLEYE".into(), 2)]),
        battery_remaining: Some(0.5),
    };
    assert_valid(&v, &serde_json::from_str(&with_battery.to_json()).unwrap());
    assert!(!v.is_valid(&json!({"type": "refusal", "frame_id": 1})));
    assert!(!v.is_valid(&json!({"type": "verdict", "frame_id": 1, "species": "x", "length_cm": null,
        "decision": "MAYBE", "reasons": [], "keep_enabled": false})));
}

#[test]
fn ui_inbound_schema_agrees_with_the_parser() {
    let v = validator("ui_inbound.schema.json");
    for value in [UiDecision::Keep, UiDecision::Release] {
        assert_valid(&v, &serde_json::to_value(UiInbound::Decision { value }).unwrap());
    }
    for bad in [
        json!({"type": "decision", "value": "eat"}),
        json!({"type": "decision"}),
        json!({"type": "decision", "value": "keep", "extra": 1}),
        json!({"type": "vote", "value": "keep"}),
    ] {
        assert!(!v.is_valid(&bad), "{bad}");
        assert!(UiInbound::parse(&bad.to_string()).is_err(), "{bad}");
    }
}

#[test]
fn catch_log_and_trace_lines() {
    let log = validator("catch_record.schema.json");
    for line in lines(&std::fs::read_to_string(dir().join("testdata/golden/happy_path.log")).unwrap()) {
        assert_valid(&log, &line);
    }
    let lost = json!({"timestamp": "2026-06-01T05:30:12.000Z", "species": "walleye", "length_cm": null,
        "verdict": null, "outcome": "LOST", "frame_id": 48});
    assert_valid(&log, &lost);
    let bad_keep = json!({"timestamp": "2026-06-01T05:30:12.000Z", "species": "walleye", "length_cm": 30.0,
        "verdict": {"decision": "MUST_RELEASE", "reasons": ["UNDERSIZE"]}, "outcome": "KEPT", "frame_id": 48});
    assert!(!log.is_valid(&bad_keep));
    assert!(!log.is_valid(&json!({"timestamp": "yesterday", "species": "w", "length_cm": null,
        "verdict": null, "outcome": "LOST", "frame_id": 1})));

    let trace = validator("session_trace.schema.json");
    for line in lines(&std::fs::read_to_string(dir().join("testdata/golden/happy_path.trace")).unwrap()) {
        assert_valid(&trace, &line);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t0: DateTime<Utc> = "2026-06-01T05:30:00Z".parse().unwrap();
    let events: Vec<TimedEvent> = (0..400)
        .map(|i| TimedEvent { at: t0 + TimeDelta::milliseconds(i * 250), event: common::random_event(&mut rng) })
        .collect();
    let mut kinds = std::collections::BTreeSet::new();
    for line in lines(&write_trace(&events)) {
        assert_valid(&trace, &line);
        kinds.insert(line["event"]["type"].as_str().unwrap().to_string());
    }
    assert!(kinds.len() >= 5, "{kinds:?}");
}

#[test]
fn input_documents() {
    let regs = validator("regulations.schema.json");
    for name in ["lake.json", "inches.json", "strict.json", "bad_min_max.json"] {
        assert_valid(&regs, &read_json(dir().join("testdata/regs").join(name)));
    }
    let lake = parse_regulations(&std::fs::read_to_string(dir().join("testdata/regs/lake.json")).unwrap()).unwrap();
    assert_valid(&regs, &serde_json::from_str(&serialize_regulations(&lake)).unwrap());
    let typo = json!({"location": "x", "rules": [{"species": "w", "min_lenght": 3}]});
    assert!(!regs.is_valid(&typo));
    assert!(parse_regulations(&typo.to_string()).is_err());

    let scene = SceneSpec::empty(4.0).with_object("walleye", 1.2, BoundingBox::new(3, 4, 20, 6).unwrap());
    assert_valid(&validator("scene.schema.json"), &serde_json::to_value(&scene).unwrap());

    let frames = BTreeMap::from([(7u32, vec![common::detection("walleye", 4, 30)]), (9, vec![])]);
    let sidecar: Value = serde_json::from_str(&SidecarDetector::new(frames).to_json()).unwrap();
    let v = validator("sidecar.schema.json");
    assert_valid(&v, &sidecar);
    assert!(!v.is_valid(&json!({"seven": []})));
}
