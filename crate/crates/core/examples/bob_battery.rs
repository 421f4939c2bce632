//! Runs the simulated bob on a virtual clock with a small battery until
//! it shuts itself down.

use std::error::Error;

use catchwise::bobproto::{
    frame_rate_probe, run_virtual_with, BatteryModel, BatteryReport, BobDevice, BobMessage, Direction, MessageType,
    SceneScript, SimulatorConfig, Trace, NS_PER_SEC,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let battery = BatteryModel::default().with_capacity(5.0);
    let mut device = BobDevice::new(SimulatorConfig::default(), battery, SceneScript::fish_pass("walleye"))?;
    let script = [
        (0, BobMessage::empty(MessageType::Hello, 0)),
        (20 * NS_PER_SEC, BobMessage::empty(MessageType::LureOn, 1)),
    ];
    let mut trace = Trace::default();
    run_virtual_with(&mut device, &script, 600 * NS_PER_SEC, |t, dir, msg| {
        trace.push(t, dir, msg);
        if dir == Direction::In {
            return;
        }
        match msg.kind {
            MessageType::Battery => {
                if let Ok(r) = BatteryReport::decode(&msg.payload) {
                    println!("{:7.2} s battery {:5.1}% left", t as f64 / 1e9, 100.0 * r.remaining_fraction());
                }
            }
            MessageType::Bye => println!("{:7.2} s BYE", t as f64 / 1e9),
            _ => {}
        }
    })?;
    println!(
        "{} frames, {} heartbeats, {:.1} fps over the first 10 s",
        trace.count(Direction::Out, MessageType::Frame),
        trace.count(Direction::Out, MessageType::Heartbeat),
        frame_rate_probe(&trace, 10.0)?
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
