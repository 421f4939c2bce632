//! Independent reference implementations and generators shared by the
//! integration tests. Everything here is written the slow, obvious way.
#![allow(dead_code)]

use std::collections::BTreeSet;

use catchwise::augment::ImageBuffer;
use catchwise::regulations::{Decision, Reason, Rule};
use catchwise::session::{DeviceEvent, OperatorDecision, SessionEvent, TimeoutKind};
use catchwise::vision::{BoundingBox, Detection, LengthEstimate, LensModel};
use chrono::{Datelike, NaiveDate};
use rand::Rng;

// ---------------------------------------------------------------- images

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize, ch: usize) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, ch, |_, _, _| rng.gen())
}

pub fn ssd_oracle(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    let mut total = 0.0;
    for y in 0..a.height() {
        for x in 0..a.width() {
            for c in 0..a.channels() {
                let d = a.get(x, y, c) as f64 - b.get(x, y, c) as f64;
                total += d * d;
            }
        }
    }
    total
}

/// Mean structural similarity over whole non-overlapping tiles, with the
/// usual K1 = 0.01, K2 = 0.03 constants for 8-bit data.
pub fn ssim_oracle(a: &ImageBuffer, b: &ImageBuffer, window: usize) -> f64 {
    let c1 = (0.01 * 255.0_f64) * (0.01 * 255.0);
    let c2 = (0.03 * 255.0_f64) * (0.03 * 255.0);
    let mut scores = Vec::new();
    for ty in 0..a.height() / window {
        for tx in 0..a.width() / window {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for y in ty * window..(ty + 1) * window {
                for x in tx * window..(tx + 1) * window {
                    for c in 0..a.channels() {
                        xs.push(a.get(x, y, c) as f64);
                        ys.push(b.get(x, y, c) as f64);
                    }
                }
            }
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let vx = xs.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / n;
            let vy = ys.iter().map(|v| (v - my).powi(2)).sum::<f64>() / n;
            let cov = xs.iter().zip(&ys).map(|(p, q)| (p - mx) * (q - my)).sum::<f64>() / n;
            scores.push(((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2)));
        }
    }
    scores.iter().sum::<f64>() / scores.len() as f64
}

pub fn patch_distance_oracle(a: &ImageBuffer, b: &ImageBuffer, patch: usize) -> f64 {
    let mut cells = Vec::new();
    let mut py = 0;
    while py < a.height() {
        let mut px = 0;
        while px < a.width() {
            let mut sum = 0.0;
            let mut n = 0.0;
            for y in py..(py + patch).min(a.height()) {
                for x in px..(px + patch).min(a.width()) {
                    for c in 0..a.channels() {
                        sum += (a.get(x, y, c) as f64 - b.get(x, y, c) as f64).powi(2);
                        n += 1.0;
                    }
                }
            }
            cells.push(sum / n);
            px += patch;
        }
        py += patch;
    }
    cells.iter().sum::<f64>() / cells.len() as f64
}

// ---------------------------------------------------------------- wire

/// Bit-at-a-time CRC-32 (reflected, polynomial 0xEDB88320).
pub fn crc32_oracle(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            crc = if crc & 1 == 1 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
        }
    }
    !crc
}

/// Frame layout written out by hand: magic, version, type, seq, 24-bit
/// length, payload, CRC over everything after the magic.
pub fn encode_oracle(type_code: u8, seq: u32, payload: &[u8]) -> Vec<u8> {
    let mut out = vec![0xF1, 0x5B, 0x01, type_code];
    out.push((seq >> 24) as u8);
    out.push((seq >> 16) as u8);
    out.push((seq >> 8) as u8);
    out.push(seq as u8);
    let len = payload.len();
    out.push((len >> 16) as u8);
    out.push((len >> 8) as u8);
    out.push(len as u8);
    out.extend_from_slice(payload);
    let crc = crc32_oracle(&out[2..]);
    out.extend_from_slice(&crc.to_be_bytes());
    out
}

// ---------------------------------------------------------------- rules

fn days_in_month(m: u32) -> u32 {
    let next_year = if m == 12 { 2025 } else { 2024 };
    NaiveDate::from_ymd_opt(next_year, m % 12 + 1, 1)
        .unwrap()
        .pred_opt()
        .unwrap()
        .day()
}

/// Every calendar day from `open` to `close` inclusive, walking forward
/// through a leap year and wrapping at New Year.
pub fn season_days(open: (u32, u32), close: (u32, u32)) -> BTreeSet<(u32, u32)> {
    let mut days = BTreeSet::new();
    let (mut m, mut d) = open;
    loop {
        days.insert((m, d));
        if (m, d) == close {
            return days;
        }
        d += 1;
        if d > days_in_month(m) {
            d = 1;
            m = m % 12 + 1;
        }
    }
}

/// Expected decision and reason set for one catch under one rule.
pub fn rule_oracle(rule: &Rule, length_cm: Option<f64>, date: NaiveDate, bag: u32) -> (Decision, BTreeSet<Reason>) {
    let mut reasons = BTreeSet::new();
    match length_cm {
        None => {
            if rule.min_length_cm.is_some() || rule.max_length_cm.is_some() {
                reasons.insert(Reason::LengthUnknown);
            }
        }
        Some(l) => {
            if let Some(min) = rule.min_length_cm {
                if !(l >= min) {
                    reasons.insert(Reason::Undersize);
                }
            }
            if let Some(max) = rule.max_length_cm {
                if !(l <= max) {
                    reasons.insert(Reason::Oversize);
                }
            }
        }
    }
    if let Some(s) = rule.season {
        let open = (s.open.month() as u32, s.open.day() as u32);
        let close = (s.close.month() as u32, s.close.day() as u32);
        if !season_days(open, close).contains(&(date.month(), date.day())) {
            reasons.insert(Reason::OutOfSeason);
        }
    }
    if let Some(limit) = rule.bag_limit {
        if bag + 1 > limit {
            reasons.insert(Reason::BagLimitReached);
        }
    }
    let decision = if reasons.is_empty() { Decision::KeepAllowed } else { Decision::MustRelease };
    (decision, reasons)
}

// ---------------------------------------------------------------- sessions

pub fn detection(species: &str, x: u32, w: u32) -> Detection {
    Detection::new(species, 0.9, BoundingBox::new(x, 10, w, 8).unwrap()).unwrap()
}

/// Random session events over a small frame-id range so ids often match the
/// catch in progress.
pub fn random_event(rng: &mut impl Rng) -> SessionEvent {
    let frame_id = rng.gen_range(0..4);
    match rng.gen_range(0..10) {
        0..=2 => {
            let n = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..3) };
            let detections = (0..n)
                .map(|_| detection(["walleye", "yellow perch"][rng.gen_range(0..2)], rng.gen_range(0..50), rng.gen_range(5..40)))
                .collect();
            SessionEvent::FrameIn { frame_id, detections }
        }
        3 => SessionEvent::MeasureDone {
            frame_id,
            estimate: rng.gen_bool(0.85).then(|| LengthEstimate {
                length_cm: rng.gen_range(10.0..80.0),
                depth_used_m: 1.0,
                method: LensModel::Pinhole,
            }),
        },
        4 | 5 => {
            let verdict = if rng.gen_bool(0.5) {
                catchwise::regulations::Verdict { decision: Decision::KeepAllowed, reasons: vec![] }
            } else {
                catchwise::regulations::Verdict { decision: Decision::MustRelease, reasons: vec![Reason::Undersize] }
            };
            SessionEvent::Verdict { frame_id, verdict }
        }
        6 | 7 => SessionEvent::Operator {
            decision: if rng.gen_bool(0.5) { OperatorDecision::Keep } else { OperatorDecision::Release },
            frame_id: None,
        },
        8 => SessionEvent::Device {
            event: match rng.gen_range(0..4) {
                0 => DeviceEvent::Bye,
                1 => DeviceEvent::Ack { seq: rng.gen() },
                2 => DeviceEvent::Nack { seq: rng.gen(), reason: rng.gen_range(1..6) },
                _ => DeviceEvent::Battery { consumed_mah: 12.0, capacity_mah: 2600.0 },
            },
        },
        _ => SessionEvent::Timeout {
            kind: [TimeoutKind::Measure, TimeoutKind::Verdict, TimeoutKind::Decision][rng.gen_range(0..3)],
            frame_id,
        },
    }
}
