use serde::{Deserialize, Serialize};

use super::HandError;
use crate::geometry::{is_finite, Pose, Vec3};

pub const LANDMARK_COUNT: usize = 21;
pub const WRIST: usize = 0;

/// Landmarks that make up the palm contact region: wrist and the four
/// non-thumb finger bases.
pub const PALM_LANDMARKS: [usize; 5] = [0, 5, 9, 13, 17];
/// Fingertips, thumb first.
pub const TIP_LANDMARKS: [usize; 5] = [4, 8, 12, 16, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

pub const FINGERS: [Finger; 5] = [Finger::Thumb, Finger::Index, Finger::Middle, Finger::Ring, Finger::Little];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Joint {
    Base,
    Proximal,
    Intermediate,
    Tip,
}

impl Finger {
    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn landmark(self, joint: Joint) -> usize {
        1 + 4 * self.ordinal() + joint as usize
    }

    pub fn tip(self) -> usize {
        self.landmark(Joint::Tip)
    }

    pub fn base(self) -> usize {
        self.landmark(Joint::Base)
    }
}

/// One tracked hand at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct HandFrame {
    pub side: Side,
    pub landmarks: [Vec3; LANDMARK_COUNT],
    pub confidence: [f64; LANDMARK_COUNT],
    pub timestamp: f64,
}

impl HandFrame {
    pub fn new(
        side: Side,
        landmarks: [Vec3; LANDMARK_COUNT],
        confidence: [f64; LANDMARK_COUNT],
        timestamp: f64,
    ) -> Result<Self, HandError> {
        let frame = Self { side, landmarks, confidence, timestamp };
        frame.validate()?;
        Ok(frame)
    }

    /// Builds a frame from slices, checking the landmark count.
    pub fn from_slices(side: Side, landmarks: &[Vec3], confidence: &[f64], timestamp: f64) -> Result<Self, HandError> {
        if landmarks.len() != LANDMARK_COUNT || confidence.len() != LANDMARK_COUNT {
            return Err(HandError::Invalid(format!(
                "expected {LANDMARK_COUNT} landmarks and confidences, got {} and {}",
                landmarks.len(),
                confidence.len()
            )));
        }
        let mut lm = [Vec3::zeros(); LANDMARK_COUNT];
        lm.copy_from_slice(landmarks);
        let mut conf = [0.0; LANDMARK_COUNT];
        conf.copy_from_slice(confidence);
        Self::new(side, lm, conf, timestamp)
    }

    pub fn validate(&self) -> Result<(), HandError> {
        if !self.timestamp.is_finite() {
            return Err(HandError::Invalid("non-finite timestamp".into()));
        }
        if let Some(i) = self.landmarks.iter().position(|p| !is_finite(p)) {
            return Err(HandError::Invalid(format!("landmark {i} is not finite")));
        }
        if let Some(i) = self.confidence.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(HandError::Invalid(format!("confidence {i} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn wrist(&self) -> Vec3 {
        self.landmarks[WRIST]
    }

    /// Centroid of the wrist and the four non-thumb finger bases.
    pub fn palm_center(&self) -> Vec3 {
        PALM_LANDMARKS.iter().map(|&i| self.landmarks[i]).sum::<Vec3>() / PALM_LANDMARKS.len() as f64
    }

    pub fn translated(&self, offset: &Vec3) -> HandFrame {
        let mut out = self.clone();
        for p in out.landmarks.iter_mut() {
            *p += offset;
        }
        out
    }

    /// Applies a rigid transform to every landmark.
    pub fn transformed(&self, pose: &Pose) -> HandFrame {
        let mut out = self.clone();
        for p in out.landmarks.iter_mut() {
            *p = pose.to_world(p);
        }
        out
    }

    pub fn with_timestamp(mut self, timestamp: f64) -> HandFrame {
        self.timestamp = timestamp;
        self
    }
}
