//! Per-location fishing rules and the keep/release verdicts they imply.
//!
//! Length semantics: a fish exactly at the minimum length is legal; only a
//! strictly shorter fish is undersize. Season endpoints are inclusive and a
//! season whose close day precedes its open day wraps over the new year.
//! Bag limits count fish kept on the same calendar day.

mod parse;

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{CatchOutcome, CatchRecord};

pub use self::parse::{parse_regulations, serialize_regulations, RawRegulationDoc, RawRule, RawSeason};

#[derive(Debug, Error, PartialEq)]
pub enum RegulationError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation in {field}: {message}")]
    Schema { field: String, message: String },
    #[error("duplicate rule for species {0:?}")]
    DuplicateSpecies(String),
    #[error("species {species:?}: min_length {min} must be below max_length {max}")]
    MinNotBelowMax { species: String, min: f64, max: f64 },
    #[error("invalid month-day {0:?}")]
    InvalidMonthDay(String),
    #[error("catch log is not chronologically ordered at record {index}")]
    UnorderedLog { index: usize },
}

/// Calendar day of the year, e.g. `05-01`. February 29 is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthDay {
    month: u8,
    day: u8,
}

impl MonthDay {
    pub fn new(month: u8, day: u8) -> Result<Self, RegulationError> {
        const DAYS: [u8; 12] = [31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
        if !(1..=12).contains(&month) || day == 0 || day > DAYS[month as usize - 1] {
            return Err(RegulationError::InvalidMonthDay(format!("{month:02}-{day:02}")));
        }
        Ok(Self { month, day })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            month: date.month() as u8,
            day: date.day() as u8,
        }
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn day(&self) -> u8 {
        self.day
    }
}

impl FromStr for MonthDay {
    type Err = RegulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RegulationError::InvalidMonthDay(s.to_string());
        let (m, d) = s.split_once('-').ok_or_else(bad)?;
        if m.len() != 2 || d.len() != 2 {
            return Err(bad());
        }
        let month: u8 = m.parse().map_err(|_| bad())?;
        let day: u8 = d.parse().map_err(|_| bad())?;
        Self::new(month, day).map_err(|_| bad())
    }
}

impl fmt::Display for MonthDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}-{:02}", self.month, self.day)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Season {
    pub open: MonthDay,
    pub close: MonthDay,
}

impl Season {
    pub fn contains(&self, day: MonthDay) -> bool {
        if self.open <= self.close {
            self.open <= day && day <= self.close
        } else {
            day >= self.open || day <= self.close
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub species: String,
    pub min_length_cm: Option<f64>,
    pub max_length_cm: Option<f64>,
    pub bag_limit: Option<u32>,
    pub season: Option<Season>,
}

impl Rule {
    pub fn for_species(species: &str) -> Self {
        Self {
            species: species.to_string(),
            min_length_cm: None,
            max_length_cm: None,
            bag_limit: None,
            season: None,
        }
    }

    pub fn has_length_constraint(&self) -> bool {
        self.min_length_cm.is_some() || self.max_length_cm.is_some()
    }

    pub fn validate(&self) -> Result<(), RegulationError> {
        let field = |name: &str| format!("rules[{}].{name}", self.species);
        if self.species.trim().is_empty() {
            return Err(RegulationError::Schema {
                field: "rules[].species".into(),
                message: "must be non-empty".into(),
            });
        }
        for (name, value) in [("min_length", self.min_length_cm), ("max_length", self.max_length_cm)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(RegulationError::Schema {
                        field: field(name),
                        message: format!("must be a positive length, got {v}"),
                    });
                }
            }
        }
        if let (Some(min), Some(max)) = (self.min_length_cm, self.max_length_cm) {
            if min >= max {
                return Err(RegulationError::MinNotBelowMax {
                    species: self.species.clone(),
                    min,
                    max,
                });
            }
        }
        Ok(())
    }
}

/// Species keys compare case-insensitively.
pub fn species_key(species: &str) -> String {
    species.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegulationSet {
    location: String,
    rules: Vec<Rule>,
}

impl RegulationSet {
    pub fn new(location: impl Into<String>, rules: Vec<Rule>) -> Result<Self, RegulationError> {
        let location = location.into();
        if location.trim().is_empty() {
            return Err(RegulationError::Schema {
                field: "location".into(),
                message: "must be non-empty".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for rule in &rules {
            rule.validate()?;
            if !seen.insert(species_key(&rule.species)) {
                return Err(RegulationError::DuplicateSpecies(rule.species.clone()));
            }
        }
        Ok(Self { location, rules })
    }

    pub fn location(&self) -> &str {
        &self.location
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_for(&self, species: &str) -> Option<&Rule> {
        let key = species_key(species);
        self.rules.iter().find(|r| species_key(&r.species) == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatchContext {
    pub species: String,
    pub length_cm: Option<f64>,
    pub date: NaiveDate,
    pub bag_count_today: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    KeepAllowed,
    MustRelease,
    NoRule,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::KeepAllowed => "KEEP_ALLOWED",
            Decision::MustRelease => "MUST_RELEASE",
            Decision::NoRule => "NO_RULE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    Undersize,
    Oversize,
    OutOfSeason,
    BagLimitReached,
    LengthUnknown,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::Undersize => "UNDERSIZE",
            Reason::Oversize => "OVERSIZE",
            Reason::OutOfSeason => "OUT_OF_SEASON",
            Reason::BagLimitReached => "BAG_LIMIT_REACHED",
            Reason::LengthUnknown => "LENGTH_UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub reasons: Vec<Reason>,
}

impl Verdict {
    pub fn no_rule() -> Self {
        Self {
            decision: Decision::NoRule,
            reasons: Vec::new(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.decision.as_str())?;
        for (i, r) in self.reasons.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { "," })?;
            f.write_str(r.as_str())?;
        }
        Ok(())
    }
}

pub fn evaluate(ctx: &CatchContext, regs: &RegulationSet) -> Verdict {
    let Some(rule) = regs.rule_for(&ctx.species) else {
        return Verdict::no_rule();
    };
    let mut reasons = Vec::new();
    match ctx.length_cm {
        Some(len) => {
            if rule.min_length_cm.is_some_and(|min| len < min) {
                reasons.push(Reason::Undersize);
            }
            if rule.max_length_cm.is_some_and(|max| len > max) {
                reasons.push(Reason::Oversize);
            }
        }
        None if rule.has_length_constraint() => reasons.push(Reason::LengthUnknown),
        None => {}
    }
    if let Some(season) = rule.season {
        if !season.contains(MonthDay::of(ctx.date)) {
            reasons.push(Reason::OutOfSeason);
        }
    }
    if rule.bag_limit.is_some_and(|limit| ctx.bag_count_today >= limit) {
        reasons.push(Reason::BagLimitReached);
    }
    let decision = if reasons.is_empty() {
        Decision::KeepAllowed
    } else {
        Decision::MustRelease
    };
    Verdict { decision, reasons }
}

/// Fish of `species` kept on `date`. The log must be in timestamp order.
pub fn bag_counter(log: &[CatchRecord], species: &str, date: NaiveDate) -> Result<u32, RegulationError> {
    if let Some(i) = log.windows(2).position(|w| w[1].timestamp < w[0].timestamp) {
        return Err(RegulationError::UnorderedLog { index: i + 1 });
    }
    let key = species_key(species);
    Ok(log
        .iter()
        .filter(|r| {
            r.outcome == CatchOutcome::Kept
                && r.timestamp.date_naive() == date
                && species_key(&r.species) == key
        })
        .count() as u32)
}
