use std::sync::Arc;

use serde_json::Value;

use super::session::{run_scenario, InputSource, SessionOptions};
use super::{HarnessError, Scenario, LOG_VERSION};
use crate::gestures::LstmModel;

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayOutcome {
    Pass { lines: usize },
    /// First differing line (1-based); `None` where one side has ended.
    Diverged { line: usize, expected: Option<String>, actual: Option<String> },
}

impl ReplayOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ReplayOutcome::Pass { .. })
    }
}

/// Re-runs the session described by the log header on `script` and
/// compares the result with the log byte for byte.
pub fn replay_verify(
    log: &str,
    script: InputSource,
    gestures: Option<Arc<LstmModel>>,
) -> Result<ReplayOutcome, HarnessError> {
    let first = log.lines().next().ok_or(HarnessError::Log { line: 1, message: "empty log".into() })?;
    let header: Value =
        serde_json::from_str(first).map_err(|e| HarnessError::Log { line: 1, message: e.to_string() })?;
    if header.get("type").and_then(Value::as_str) != Some("session_start") {
        return Err(HarnessError::Log { line: 1, message: "log must open with session_start".into() });
    }
    let data = &header["data"];
    let version = data.get("version").and_then(Value::as_u64).unwrap_or(0);
    if version != LOG_VERSION {
        return Err(HarnessError::Version { found: version, expected: LOG_VERSION });
    }
    let field = |k: &str| HarnessError::Log { line: 1, message: format!("session_start lacks {k}") };
    let scenario = Scenario::parse(data.get("scenario").and_then(Value::as_str).ok_or_else(|| field("scenario"))?)?;
    let seed = data.get("seed").and_then(Value::as_u64).ok_or_else(|| field("seed"))?;
    let dt = data.get("dt").and_then(Value::as_f64).ok_or_else(|| field("dt"))?;
    if data.get("gestures").and_then(Value::as_bool) == Some(true) && gestures.is_none() {
        return Err(HarnessError::Input("log was recorded with gesture recognition; a model is needed".into()));
    }
    let options = SessionOptions { seed, dt, gestures, ..Default::default() };
    let rerun = run_scenario(scenario, script, &options)?.text();

    let mut expected = log.lines();
    let mut actual = rerun.lines();
    let mut n = 0;
    loop {
        n += 1;
        match (expected.next(), actual.next()) {
            (None, None) => break,
            (e, a) if e == a => {}
            (e, a) => {
                return Ok(ReplayOutcome::Diverged {
                    line: n,
                    expected: e.map(str::to_string),
                    actual: a.map(str::to_string),
                })
            }
        }
    }
    if log.len() != rerun.len() {
        // Same lines but different trailing bytes (line endings).
        return Ok(ReplayOutcome::Diverged { line: n, expected: None, actual: None });
    }
    Ok(ReplayOutcome::Pass { lines: n - 1 })
}
