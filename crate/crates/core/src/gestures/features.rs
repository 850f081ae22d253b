use super::GestureError;
use crate::hand::{pose_metrics, HandFrame, PoseMetrics, TIP_LANDMARKS};
use crate::geometry::Vec3;

/// Per-step feature width: wrist velocity (3), mean wrist-relative fingertip
/// velocity (3), aperture, spread, palm normal (3).
pub const FEATURE_DIM: usize = 11;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSeq {
    rows: Vec<[f64; FEATURE_DIM]>,
}

impl FeatureSeq {
    pub fn from_rows(rows: Vec<[f64; FEATURE_DIM]>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    pub fn row(&self, i: usize) -> &[f64; FEATURE_DIM] {
        &self.rows[i]
    }
}

fn mean_tip_offset(f: &HandFrame) -> Vec3 {
    let w = f.wrist();
    TIP_LANDMARKS.iter().map(|&i| f.landmarks[i] - w).sum::<Vec3>() / TIP_LANDMARKS.len() as f64
}

/// Finite-difference motion features, one row per consecutive frame pair.
///
/// Only relative geometry and velocities enter, so a globally translated
/// window featurizes identically.
pub fn featurize(frames: &[HandFrame]) -> Result<FeatureSeq, GestureError> {
    if frames.len() < 2 {
        return Err(GestureError::TooFewFrames(frames.len()));
    }
    let mut rows = Vec::with_capacity(frames.len() - 1);
    let mut last_metrics: Option<PoseMetrics> = None;
    let mut metrics_for = |f: &HandFrame| -> Result<PoseMetrics, GestureError> {
        match pose_metrics(f) {
            Ok(m) => {
                last_metrics = Some(m);
                Ok(m)
            }
            Err(e) => last_metrics.ok_or(GestureError::Hand(e)),
        }
    };
    metrics_for(&frames[0])?;
    for pair in frames.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.timestamp - a.timestamp;
        if !(dt > 0.0) {
            return Err(GestureError::Stream(format!(
                "timestamps must increase ({} then {})",
                a.timestamp, b.timestamp
            )));
        }
        let wrist_v = (b.wrist() - a.wrist()) / dt;
        let tip_v = (mean_tip_offset(b) - mean_tip_offset(a)) / dt;
        let m = metrics_for(b)?;
        let row = [
            wrist_v.x,
            wrist_v.y,
            wrist_v.z,
            tip_v.x,
            tip_v.y,
            tip_v.z,
            m.aperture,
            m.spread,
            m.palm_normal.x,
            m.palm_normal.y,
            m.palm_normal.z,
        ];
        if row.iter().any(|v| !v.is_finite()) {
            return Err(GestureError::Shape("non-finite feature".into()));
        }
        rows.push(row);
    }
    Ok(FeatureSeq { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand::{HandPose, Side};

    fn still(n: usize) -> Vec<HandFrame> {
        (0..n).map(|i| HandPose::open(Side::Right).frame(i as f64 / 60.0)).collect()
    }

    #[test]
    fn stationary_hand_has_zero_velocity() {
        let seq = featurize(&still(10)).unwrap();
        assert_eq!(seq.len(), 9);
        for r in seq.rows() {
            assert!(r[..6].iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn uniform_translation_velocity() {
        let frames: Vec<_> = (0..5)
            .map(|i| {
                HandPose::open(Side::Right)
                    .frame(i as f64 / 60.0)
                    .translated(&Vec3::new(0.01 * i as f64, 0.0, 0.0))
            })
            .collect();
        for r in featurize(&frames).unwrap().rows() {
            assert!((r[0] - 0.6).abs() < 1e-9 && r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_frames() {
        assert_eq!(featurize(&still(1)), Err(GestureError::TooFewFrames(1)));
    }
}
