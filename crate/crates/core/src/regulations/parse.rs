use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{MonthDay, RegulationError, RegulationSet, Rule, Season};

const CM_PER_INCH: f64 = 2.54;

/// On-disk shape of a regulation document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRegulationDoc {
    pub location: String,
    #[serde(default = "default_units")]
    pub units: String,
    pub rules: Vec<RawRule>,
}

fn default_units() -> String {
    "cm".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRule {
    pub species: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bag_limit: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub season: Option<RawSeason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeason {
    pub open: String,
    pub close: String,
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> RegulationError {
    RegulationError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

fn expect_object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>, RegulationError> {
    v.as_object().ok_or_else(|| schema(field, "expected an object"))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], field: &str) -> Result<(), RegulationError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{field}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn opt_length(obj: &Map<String, Value>, key: &str, field: &str, scale: f64) -> Result<Option<f64>, RegulationError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let n = v
                .as_f64()
                .ok_or_else(|| schema(format!("{field}.{key}"), "expected a number"))?;
            if !(n > 0.0) {
                return Err(schema(format!("{field}.{key}"), format!("must be > 0, got {n}")));
            }
            Ok(Some(n * scale))
        }
    }
}

fn parse_rule(v: &Value, index: usize, scale: f64) -> Result<Rule, RegulationError> {
    let field = format!("rules[{index}]");
    let obj = expect_object(v, &field)?;
    check_keys(obj, &["species", "min_length", "max_length", "bag_limit", "season"], &field)?;
    let species = obj
        .get("species")
        .ok_or_else(|| schema(format!("{field}.species"), "missing"))?
        .as_str()
        .ok_or_else(|| schema(format!("{field}.species"), "expected a string"))?;
    if species.trim().is_empty() {
        return Err(schema(format!("{field}.species"), "must be non-empty"));
    }
    // Name the species in later messages; it reads better than an index.
    let field = format!("rules[{species}]");
    let bag_limit = match obj.get("bag_limit") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .and_then(|n| u32::try_from(n).ok())
                .ok_or_else(|| schema(format!("{field}.bag_limit"), "expected a non-negative integer"))?,
        ),
    };
    let season = match obj.get("season") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let sf = format!("{field}.season");
            let s = expect_object(v, &sf)?;
            check_keys(s, &["open", "close"], &sf)?;
            let day = |key: &str| -> Result<MonthDay, RegulationError> {
                s.get(key)
                    .and_then(Value::as_str)
                    .ok_or_else(|| schema(format!("{sf}.{key}"), "expected \"MM-DD\""))?
                    .parse()
            };
            Some(Season {
                open: day("open")?,
                close: day("close")?,
            })
        }
    };
    let rule = Rule {
        species: species.to_string(),
        min_length_cm: opt_length(obj, "min_length", &field, scale)?,
        max_length_cm: opt_length(obj, "max_length", &field, scale)?,
        bag_limit,
        season,
    };
    rule.validate()?;
    Ok(rule)
}

/// Parses and validates a regulation document. Lengths are converted to
/// centimeters when `units` is `"in"`.
pub fn parse_regulations(doc: &str) -> Result<RegulationSet, RegulationError> {
    let root: Value = serde_json::from_str(doc).map_err(|e| RegulationError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = expect_object(&root, "$")?;
    check_keys(obj, &["location", "units", "rules"], "$")?;
    let location = obj
        .get("location")
        .ok_or_else(|| schema("location", "missing"))?
        .as_str()
        .ok_or_else(|| schema("location", "expected a string"))?;
    let scale = match obj.get("units") {
        None => 1.0,
        Some(Value::String(u)) if u == "cm" => 1.0,
        Some(Value::String(u)) if u == "in" => CM_PER_INCH,
        Some(other) => return Err(schema("units", format!("expected \"cm\" or \"in\", got {other}"))),
    };
    let rules = obj
        .get("rules")
        .ok_or_else(|| schema("rules", "missing"))?
        .as_array()
        .ok_or_else(|| schema("rules", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_rule(v, i, scale))
        .collect::<Result<Vec<_>, _>>()?;
    RegulationSet::new(location, rules)
}

/// Canonical document (always in centimeters).
pub fn serialize_regulations(regs: &RegulationSet) -> String {
    let doc = RawRegulationDoc {
        location: regs.location().to_string(),
        units: "cm".into(),
        rules: regs
            .rules()
            .iter()
            .map(|r| RawRule {
                species: r.species.clone(),
                min_length: r.min_length_cm,
                max_length: r.max_length_cm,
                bag_limit: r.bag_limit,
                season: r.season.map(|s| RawSeason {
                    open: s.open.to_string(),
                    close: s.close.to_string(),
                }),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("regulations serialize")
}
