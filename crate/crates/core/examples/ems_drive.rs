//! Lure electrical model: drive voltage, transformer output, holding
//! tension and the safety ceiling.

use std::error::Error;

use catchwise::ems::{
    drive_waveform, holding_tension, required_voltage, safety_check, secondary_voltage, ElectricalParams, LureState,
    TensionCalibration,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = ElectricalParams::default();
    println!("20 mA through {} ohm needs {} V", params.jaw_resistance_ohm, required_voltage(0.020, params.jaw_resistance_ohm)?);
    println!("transformer delivers {} V", secondary_voltage(&params));

    let cal = TensionCalibration::default();
    for ma in [30.0, 60.0, 90.0, 120.0] {
        println!("{ma:5} mA holds a 200 g fish at {:.2} N", holding_tension(ma / 1000.0, 200.0, &cal)?);
    }
    for amps in [0.020, 0.030, 0.2] {
        println!("{amps} A: {:?}", safety_check(amps, &params));
    }

    let lure = LureState::on(0.020, &params)?;
    let wave = drive_waveform(&params, 0.01, 100_000.0)?;
    println!(
        "lure at {} V; 10 ms drive: {} samples, {} transitions, mean {:.1} V",
        lure.computed_voltage_v(),
        wave.samples.len(),
        wave.transitions(),
        wave.mean()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
