//! Sensor adapters: unit scale, axis mapping and landmark permutation from a
//! source's native layout into the canonical hand model.

use serde::{Deserialize, Serialize};

use super::frame::{HandFrame, Side, LANDMARK_COUNT, WRIST};
use super::HandError;
use crate::geometry::Vec3;

/// A frame as delivered by some tracking source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSensorFrame {
    pub source_id: String,
    pub side: Side,
    pub timestamp: f64,
    /// Positions in source units and axes, in source index order.
    pub landmarks: Vec<[f64; 3]>,
    pub valid: Vec<bool>,
}

/// Canonical axis `c` takes `source[source_axis]`, optionally negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisMap {
    pub source_axis: usize,
    pub negate: bool,
}

impl AxisMap {
    pub const fn new(source_axis: usize, negate: bool) -> Self {
        Self { source_axis, negate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorAdapter {
    /// Meters per source unit.
    pub scale: f64,
    pub axes: [AxisMap; 3],
    /// `index_map[canonical] = source index`.
    pub index_map: Vec<usize>,
}

impl SensorAdapter {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            axes: [AxisMap::new(0, false), AxisMap::new(1, false), AxisMap::new(2, false)],
            index_map: (0..LANDMARK_COUNT).collect(),
        }
    }

    /// Source reports millimeters in canonical axes.
    pub fn millimeters() -> Self {
        Self { scale: 0.001, ..Self::identity() }
    }

    /// Checks that the mapping is a bijection onto `source_len` landmarks.
    pub fn validate(&self, source_len: usize) -> Result<(), HandError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(HandError::Config(format!("scale must be positive, got {}", self.scale)));
        }
        let mut seen_axes = [false; 3];
        for a in &self.axes {
            if a.source_axis > 2 || std::mem::replace(&mut seen_axes[a.source_axis], true) {
                return Err(HandError::Config("axis mapping is not a permutation of x, y, z".into()));
            }
        }
        if self.index_map.len() != LANDMARK_COUNT {
            return Err(HandError::Config(format!(
                "index map covers {} of {LANDMARK_COUNT} canonical landmarks",
                self.index_map.len()
            )));
        }
        let mut seen = vec![false; source_len];
        for (canon, &src) in self.index_map.iter().enumerate() {
            if src >= source_len {
                return Err(HandError::Config(format!(
                    "canonical landmark {canon} maps to source index {src}, source has {source_len}"
                )));
            }
            if std::mem::replace(&mut seen[src], true) {
                return Err(HandError::Config(format!("source index {src} mapped twice")));
            }
        }
        Ok(())
    }

    fn to_canonical(&self, p: &[f64; 3]) -> Vec3 {
        let mut out = [0.0; 3];
        for (c, a) in self.axes.iter().enumerate() {
            let v = p[a.source_axis] * self.scale;
            out[c] = if a.negate { -v } else { v };
        }
        Vec3::from(out)
    }

    fn to_source(&self, p: &Vec3) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, a) in self.axes.iter().enumerate() {
            let v = if a.negate { -p[c] } else { p[c] };
            out[a.source_axis] = v / self.scale;
        }
        out
    }

    /// Inverse of [`normalize_frame`]: expresses a canonical frame the way
    /// this source would report it. `source_len` may exceed 21 for sources
    /// with extra joints; unmapped slots are reported invalid at the origin.
    pub fn encode(&self, frame: &HandFrame, source_id: &str, source_len: usize) -> RawSensorFrame {
        let mut landmarks = vec![[0.0; 3]; source_len];
        let mut valid = vec![false; source_len];
        for (canon, &src) in self.index_map.iter().enumerate() {
            landmarks[src] = self.to_source(&frame.landmarks[canon]);
            valid[src] = frame.confidence[canon] > 0.0;
        }
        RawSensorFrame {
            source_id: source_id.to_string(),
            side: frame.side,
            timestamp: frame.timestamp,
            landmarks,
            valid,
        }
    }
}

/// Maps a raw source frame into the canonical hand model.
///
/// Invalid landmarks hold the previous frame's position (or the wrist when
/// there is no previous frame) with confidence 0.
pub fn normalize_frame(
    raw: &RawSensorFrame,
    adapter: &SensorAdapter,
    prev: Option<&HandFrame>,
) -> Result<HandFrame, HandError> {
    if raw.valid.len() != raw.landmarks.len() {
        return Err(HandError::Decode(format!(
            "{} validity flags for {} landmarks",
            raw.valid.len(),
            raw.landmarks.len()
        )));
    }
    adapter.validate(raw.landmarks.len())?;
    if !raw.timestamp.is_finite() {
        return Err(HandError::Decode("non-finite timestamp".into()));
    }
    if let Some(i) = raw.landmarks.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
        return Err(HandError::Decode(format!("source landmark {i} has non-finite coordinates")));
    }

    let mut landmarks = [Vec3::zeros(); LANDMARK_COUNT];
    let mut confidence = [0.0; LANDMARK_COUNT];
    let mut missing = Vec::new();
    for (canon, &src) in adapter.index_map.iter().enumerate() {
        if raw.valid[src] {
            landmarks[canon] = adapter.to_canonical(&raw.landmarks[src]);
            confidence[canon] = 1.0;
        } else {
            missing.push(canon);
        }
    }
    let fallback_wrist = landmarks[WRIST];
    for canon in missing {
        landmarks[canon] = match prev {
            Some(p) => p.landmarks[canon],
            None => fallback_wrist,
        };
    }
    HandFrame::new(raw.side, landmarks, confidence, raw.timestamp)
}
