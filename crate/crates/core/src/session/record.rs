//! Catch records and the append-only JSONL catch log.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SessionError;
use crate::regulations::{Decision, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CatchOutcome {
    Kept,
    Released,
    Lost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatchRecord {
    #[serde(serialize_with = "ser_ts", deserialize_with = "de_ts")]
    pub timestamp: DateTime<Utc>,
    pub species: String,
    pub length_cm: Option<f64>,
    /// Absent when the fish was lost before a verdict.
    pub verdict: Option<Verdict>,
    pub outcome: CatchOutcome,
    pub frame_id: u32,
}

fn ser_ts<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Millis, true))
}

fn de_ts<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
    let s = String::deserialize(d)?;
    DateTime::parse_from_rfc3339(&s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(serde::de::Error::custom)
}

impl CatchRecord {
    /// Record timestamps carry millisecond precision on disk.
    pub fn stamp(at: DateTime<Utc>) -> DateTime<Utc> {
        at.trunc_subsecs(3)
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        if self.outcome == CatchOutcome::Kept
            && self.verdict.as_ref().map(|v| v.decision) != Some(Decision::KeepAllowed)
        {
            return Err(SessionError::InvalidRecord(
                "KEPT requires a KEEP_ALLOWED verdict".into(),
            ));
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("record serializes");
        line.push('\n');
        line
    }
}

/// Result of reading a catch log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedLog {
    pub records: Vec<CatchRecord>,
    /// Incomplete trailing lines that were dropped (0 or 1).
    pub truncated: usize,
    /// Byte length of the complete-line prefix.
    pub valid_len: usize,
}

/// Parses log text. A line without its newline is torn, even if its JSON
/// happens to be complete.
pub fn parse_log(text: &str) -> Result<LoadedLog, SessionError> {
    let mut out = LoadedLog::default();
    let mut offset = 0;
    for (i, chunk) in text.split_inclusive('\n').enumerate() {
        let complete = chunk.ends_with('\n');
        let line = chunk.trim_end_matches(['\n', '\r']);
        if !complete {
            out.truncated = 1;
            break;
        }
        offset += chunk.len();
        if line.trim().is_empty() {
            out.valid_len = offset;
            continue;
        }
        let rec = serde_json::from_str::<CatchRecord>(line).map_err(|e| SessionError::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.records.push(rec);
        out.valid_len = offset;
    }
    Ok(out)
}

pub fn load_log(path: &Path) -> Result<LoadedLog, SessionError> {
    let bytes = match std::fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(LoadedLog::default()),
        Err(e) => return Err(SessionError::io(path, e)),
    };
    // A torn tail may end inside a multi-byte character; only complete
    // lines have to be valid UTF-8.
    let cut = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let head = std::str::from_utf8(&bytes[..cut]).map_err(|e| SessionError::Format {
        line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        message: e.to_string(),
    })?;
    let mut loaded = parse_log(head)?;
    if cut < bytes.len() {
        loaded.truncated = 1;
    }
    Ok(loaded)
}

/// Writes one record as a single `write_all` of a complete line.
pub fn append_record<W: Write>(w: &mut W, rec: &CatchRecord) -> io::Result<()> {
    w.write_all(rec.to_line().as_bytes())?;
    w.flush()
}

/// Append-only handle; opening repairs a torn final line.
#[derive(Debug)]
pub struct CatchLog {
    path: PathBuf,
    file: File,
}

impl CatchLog {
    pub fn open(path: &Path) -> Result<(Self, LoadedLog), SessionError> {
        let loaded = load_log(path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| SessionError::io(path, e))?;
        if loaded.truncated > 0 {
            file.set_len(loaded.valid_len as u64)
                .map_err(|e| SessionError::io(path, e))?;
            log::warn!("{}: dropped a torn final line", path.display());
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            loaded,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, rec: &CatchRecord) -> Result<(), SessionError> {
        append_record(&mut self.file, rec).map_err(|e| SessionError::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| SessionError::io(&self.path, e))
    }
}
