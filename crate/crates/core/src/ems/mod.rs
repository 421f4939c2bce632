//! Electrical and mechanical model of the EMS lure drive.
//!
//! The published figures do not agree with each other: 90 mA holds a 200 g
//! perch at 2 N, 20 mA through the measured 21.8 kOhm jaw needs 436 V, and
//! the transformer is sized for 492 V. Ohm's law puts 90 mA at 1962 V, far
//! above the transformer output. The model keeps every figure as published
//! and lets [`safety_check`] expose the mismatch instead of reconciling it.
//!
//! Nothing here is a statement about biological safety.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EmsError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("current must be >= 0, got {0}")]
    NegativeCurrent(f64),
    #[error("calibration has no points")]
    EmptyCalibration,
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("sample rate {sample_rate_hz} Hz is below 10x the {drive_freq_hz} Hz drive")]
    Undersampled {
        sample_rate_hz: f64,
        drive_freq_hz: f64,
    },
    #[error("duration must be >= 0, got {0}")]
    NegativeDuration(f64),
    #[error("active lure requires current > 0 (and inactive requires 0)")]
    InconsistentLureState,
}

fn positive(name: &'static str, value: f64) -> Result<f64, EmsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(EmsError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalParams {
    pub jaw_resistance_ohm: f64,
    pub drive_freq_hz: f64,
    pub primary_voltage_v: f64,
    pub turns_ratio: f64,
    /// Simulation guard only.
    pub max_current_a: f64,
}

impl Default for ElectricalParams {
    fn default() -> Self {
        Self {
            jaw_resistance_ohm: 21_800.0,
            drive_freq_hz: 1_000.0,
            primary_voltage_v: 5.0,
            turns_ratio: 492.0 / 5.0,
            max_current_a: 0.1,
        }
    }
}

impl ElectricalParams {
    pub fn validate(&self) -> Result<(), EmsError> {
        positive("jaw_resistance_ohm", self.jaw_resistance_ohm)?;
        positive("drive_freq_hz", self.drive_freq_hz)?;
        positive("primary_voltage_v", self.primary_voltage_v)?;
        positive("turns_ratio", self.turns_ratio)?;
        positive("max_current_a", self.max_current_a)?;
        Ok(())
    }
}

/// Ohm's law, `V = I * R`.
pub fn required_voltage(current_a: f64, resistance_ohm: f64) -> Result<f64, EmsError> {
    positive("resistance_ohm", resistance_ohm)?;
    if !(current_a >= 0.0) || !current_a.is_finite() {
        return Err(EmsError::NegativeCurrent(current_a));
    }
    Ok(current_a * resistance_ohm)
}

/// Ideal (lossless) transformer output.
pub fn secondary_voltage(params: &ElectricalParams) -> f64 {
    params.primary_voltage_v * params.turns_ratio
}

/// Turns ratio that maps `primary_v` onto `secondary_v`.
pub fn turns_ratio_for(primary_v: f64, secondary_v: f64) -> Result<f64, EmsError> {
    Ok(positive("secondary_v", secondary_v)? / positive("primary_v", primary_v)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64, f64)>", into = "Vec<(f64, f64, f64)>")]
pub struct TensionCalibration {
    points: Vec<CalibrationPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub current_a: f64,
    pub fish_mass_g: f64,
    pub tension_n: f64,
}

impl Default for TensionCalibration {
    /// The single measured point: 90 mA holds a 200 g perch at 2 N.
    fn default() -> Self {
        Self::new(vec![(0.090, 200.0, 2.0)]).expect("default calibration is valid")
    }
}

impl TensionCalibration {
    /// Points are `(current_a, fish_mass_g, tension_n)`. Within one mass, currents
    /// must strictly increase and tensions must not decrease.
    pub fn new(points: Vec<(f64, f64, f64)>) -> Result<Self, EmsError> {
        if points.is_empty() {
            return Err(EmsError::EmptyCalibration);
        }
        let points: Vec<CalibrationPoint> = points
            .into_iter()
            .map(|(current_a, fish_mass_g, tension_n)| CalibrationPoint {
                current_a,
                fish_mass_g,
                tension_n,
            })
            .collect();
        for p in &points {
            positive("calibration current", p.current_a)?;
            positive("calibration mass", p.fish_mass_g)?;
            if !(p.tension_n >= 0.0 && p.tension_n.is_finite()) {
                return Err(EmsError::InvalidCalibration(format!(
                    "tension must be >= 0, got {}",
                    p.tension_n
                )));
            }
        }
        let cal = Self { points };
        for mass in cal.masses() {
            let group: Vec<_> = cal.group(mass).collect();
            for pair in group.windows(2) {
                if pair[1].current_a <= pair[0].current_a {
                    return Err(EmsError::InvalidCalibration(format!(
                        "currents for {mass} g must strictly increase"
                    )));
                }
                if pair[1].tension_n < pair[0].tension_n {
                    return Err(EmsError::InvalidCalibration(format!(
                        "tension for {mass} g decreases as current rises"
                    )));
                }
            }
        }
        Ok(cal)
    }

    pub fn load(path: &Path) -> Result<Self, EmsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EmsError::InvalidCalibration(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| EmsError::InvalidCalibration(e.to_string()))
    }

    pub fn points(&self) -> &[CalibrationPoint] {
        &self.points
    }

    fn masses(&self) -> Vec<f64> {
        let mut masses: Vec<f64> = self.points.iter().map(|p| p.fish_mass_g).collect();
        masses.sort_by(f64::total_cmp);
        masses.dedup();
        masses
    }

    fn group(&self, mass: f64) -> impl Iterator<Item = &CalibrationPoint> {
        self.points.iter().filter(move |p| p.fish_mass_g == mass)
    }

    /// Calibrated mass closest to `mass_g`; ties go to the lighter one.
    pub fn nearest_mass(&self, mass_g: f64) -> f64 {
        self.masses()
            .into_iter()
            .min_by(|a, b| (a - mass_g).abs().total_cmp(&(b - mass_g).abs()))
            .expect("calibration is non-empty")
    }
}

impl TryFrom<Vec<(f64, f64, f64)>> for TensionCalibration {
    type Error = EmsError;

    fn try_from(points: Vec<(f64, f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<TensionCalibration> for Vec<(f64, f64, f64)> {
    fn from(cal: TensionCalibration) -> Self {
        cal.points
            .iter()
            .map(|p| (p.current_a, p.fish_mass_g, p.tension_n))
            .collect()
    }
}

/// Holding tension for the nearest calibrated mass: piecewise linear through
/// `(0 A, 0 N)` and the calibration points, flat beyond the last point.
pub fn holding_tension(current_a: f64, fish_mass_g: f64, cal: &TensionCalibration) -> Result<f64, EmsError> {
    if !(current_a >= 0.0) || !current_a.is_finite() {
        return Err(EmsError::NegativeCurrent(current_a));
    }
    positive("fish_mass_g", fish_mass_g)?;
    let mass = cal.nearest_mass(fish_mass_g);
    let mut prev = (0.0, 0.0);
    for p in cal.group(mass) {
        if current_a <= p.current_a {
            if current_a == p.current_a {
                return Ok(p.tension_n);
            }
            let t = (current_a - prev.0) / (p.current_a - prev.0);
            return Ok(prev.1 + t * (p.tension_n - prev.1));
        }
        prev = (p.current_a, p.tension_n);
    }
    Ok(prev.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyViolation {
    OverCurrent,
    OverVoltage,
    InvalidCurrent,
}

/// Rejects currents above the configured ceiling, or currents whose
/// Ohm's-law voltage exceeds what the transformer can deliver. Both bounds
/// are inclusive.
pub fn safety_check(current_a: f64, params: &ElectricalParams) -> Result<(), SafetyViolation> {
    if current_a.is_nan() {
        return Err(SafetyViolation::InvalidCurrent);
    }
    if current_a > params.max_current_a {
        return Err(SafetyViolation::OverCurrent);
    }
    if current_a * params.jaw_resistance_ohm > secondary_voltage(params) {
        return Err(SafetyViolation::OverVoltage);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LureState {
    active: bool,
    commanded_current_a: f64,
    computed_voltage_v: f64,
}

impl LureState {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn on(current_a: f64, params: &ElectricalParams) -> Result<Self, EmsError> {
        if !(current_a > 0.0) {
            return Err(EmsError::InconsistentLureState);
        }
        Ok(Self {
            active: true,
            commanded_current_a: current_a,
            computed_voltage_v: required_voltage(current_a, params.jaw_resistance_ohm)?,
        })
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn commanded_current_a(&self) -> f64 {
        self.commanded_current_a
    }

    pub fn computed_voltage_v(&self) -> f64 {
        self.computed_voltage_v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl Waveform {
    /// Level changes, counting the initial rise from an idle (zero) line.
    pub fn transitions(&self) -> usize {
        let mut prev = 0.0;
        let mut count = 0;
        for &s in &self.samples {
            if s != prev {
                count += 1;
            }
            prev = s;
        }
        count
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// 50% duty square wave at the drive frequency with the secondary voltage as
/// amplitude.
pub fn drive_waveform(params: &ElectricalParams, duration_s: f64, sample_rate_hz: f64) -> Result<Waveform, EmsError> {
    params.validate()?;
    if !(duration_s >= 0.0) {
        return Err(EmsError::NegativeDuration(duration_s));
    }
    if !(sample_rate_hz >= 10.0 * params.drive_freq_hz) {
        return Err(EmsError::Undersampled {
            sample_rate_hz,
            drive_freq_hz: params.drive_freq_hz,
        });
    }
    let amplitude = secondary_voltage(params);
    let n = (duration_s * sample_rate_hz).round() as usize;
    let samples = (0..n)
        .map(|k| {
            let phase = (k as f64 * params.drive_freq_hz / sample_rate_hz).fract();
            if phase < 0.5 {
                amplitude
            } else {
                0.0
            }
        })
        .collect();
    Ok(Waveform {
        sample_rate_hz,
        samples,
    })
}
