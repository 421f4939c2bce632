//! Loads a regulation file and checks a few catches against it.
//!
//! ```text
//! cargo run --example regulations_check -- [REGS.json]
//! ```

use std::error::Error;
use std::path::{Path, PathBuf};

use catchwise::regulations::{evaluate, parse_regulations, CatchContext};
use chrono::NaiveDate;

pub fn check_file(path: &Path) -> Result<(), Box<dyn Error>> {
    let regs = parse_regulations(&std::fs::read_to_string(path)?)?;
    println!("{}: {} rules", regs.location(), regs.rules().len());
    let june = NaiveDate::from_ymd_opt(2026, 6, 1).unwrap();
    let april = NaiveDate::from_ymd_opt(2026, 4, 1).unwrap();
    let catches = [
        ("walleye", Some(45.0), june, 0),
        ("walleye", Some(30.0), june, 0),
        ("Walleye", Some(45.0), april, 4),
        ("walleye", None, june, 0),
        ("carp", Some(60.0), june, 0),
    ];
    for (species, length_cm, date, bag) in catches {
        let ctx = CatchContext { species: species.into(), length_cm, date, bag_count_today: bag };
        println!("{species:8} {length_cm:?} cm on {date}, {bag} kept: {}", evaluate(&ctx, &regs));
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    check_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/regs/lake.json"))
}

fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args().nth(1) {
        Some(p) => check_file(&PathBuf::from(p)),
        None => run_example(),
    }
}
