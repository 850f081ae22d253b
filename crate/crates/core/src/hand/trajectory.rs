//! Newline-delimited JSON trajectory records.
//!
//! One record per tick:
//! `{"t": <seconds>, "hands": [{"side": "right", "landmarks": [[x,y,z], ...], "confidence": [...]}]}`
//! Dataset files add a trailing `"label"` field. Keys are written in exactly
//! that order and floats use shortest round-trip formatting.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::frame::{HandFrame, Side};
use super::HandError;
use crate::geometry::{from_array, to_array};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandRecord {
    pub side: Side,
    pub landmarks: Vec<[f64; 3]>,
    pub confidence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub hands: Vec<HandRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl HandRecord {
    pub fn from_frame(frame: &HandFrame) -> Self {
        Self {
            side: frame.side,
            landmarks: frame.landmarks.iter().map(to_array).collect(),
            confidence: frame.confidence.to_vec(),
        }
    }

    pub fn to_frame(&self, t: f64) -> Result<HandFrame, HandError> {
        let lm: Vec<_> = self.landmarks.iter().map(|a| from_array(*a)).collect();
        HandFrame::from_slices(self.side, &lm, &self.confidence, t)
    }
}

impl TrajectoryRecord {
    pub fn from_frames(t: f64, frames: &[HandFrame]) -> Self {
        Self { t, hands: frames.iter().map(HandRecord::from_frame).collect(), label: None }
    }

    pub fn frames(&self) -> Result<Vec<HandFrame>, HandError> {
        self.hands.iter().map(|h| h.to_frame(self.t)).collect()
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trajectory records always serialize")
    }
}

pub fn write_records<W: Write>(mut out: W, records: &[TrajectoryRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<TrajectoryRecord>, TrajectoryError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrajectoryRecord = serde_json::from_str(&line)
            .map_err(|e| TrajectoryError::Parse { line: i + 1, message: e.to_string() })?;
        rec.frames().map_err(|e| TrajectoryError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::HandPose;

    #[test]
    fn key_order_is_fixed() {
        let f = HandPose::open(Side::Right).frame(0.25);
        let line = TrajectoryRecord::from_frames(0.25, &[f]).to_line();
        assert!(line.starts_with(r#"{"t":0.25,"hands":[{"side":"right","landmarks":[[0.0,0.0,0.0],"#), "{line}");
        let conf = line.find("\"confidence\"").unwrap();
        assert!(conf > line.find("\"landmarks\"").unwrap());
    }

    #[test]
    fn lines_round_trip_exactly() {
        let f = HandPose::open(Side::Left).frame(1.0 / 3.0).translated(&crate::geometry::Vec3::new(0.1, 1.3, -0.7));
        let rec = TrajectoryRecord::from_frames(1.0 / 3.0, &[f.clone()]);
        let mut buf = Vec::new();
        write_records(&mut buf, &[rec.clone()]).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back[0].frames().unwrap()[0], f);
    }

    #[test]
    fn bad_line_reports_line_number() {
        let text = "{\"t\":0.0,\"hands\":[]}\nnot json\n";
        match read_records(text.as_bytes()) {
            Err(TrajectoryError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
