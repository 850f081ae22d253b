//! Session log: one JSON object per line, `{"tick","t","type","data"}` in
//! that key order, payload keys sorted.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub tick: u64,
    pub t: f64,
    #[serde(rename = "type")]
    pub kind: String,
    pub data: Value,
}

impl LogLine {
    pub fn new(tick: u64, t: f64, kind: impl Into<String>, data: Value) -> Self {
        Self { tick, t, kind: kind.into(), data }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log lines always serialize")
    }

    /// Parses one line; `number` is 1-based for error messages.
    pub fn parse(text: &str, number: usize) -> Result<Self, HarnessError> {
        let line: LogLine =
            serde_json::from_str(text).map_err(|e| HarnessError::Log { line: number, message: e.to_string() })?;
        if !line.t.is_finite() || !line.data.is_object() {
            return Err(HarnessError::Log { line: number, message: "t must be finite and data an object".into() });
        }
        Ok(line)
    }
}

/// Parses a whole log, checking tick order and the session header.
pub fn read_log<R: BufRead>(input: R) -> Result<Vec<LogLine>, HarnessError> {
    let mut lines = Vec::new();
    for (i, text) in input.lines().enumerate() {
        let text = text?;
        let line = LogLine::parse(&text, i + 1)?;
        if let Some(prev) = lines.last().map(|l: &LogLine| l.tick) {
            if line.tick < prev {
                return Err(HarnessError::Log {
                    line: i + 1,
                    message: format!("tick {} after tick {prev}", line.tick),
                });
            }
        } else if line.kind != "session_start" {
            return Err(HarnessError::Log { line: 1, message: "log must open with session_start".into() });
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(HarnessError::Log { line: 1, message: "empty log".into() });
    }
    Ok(lines)
}
