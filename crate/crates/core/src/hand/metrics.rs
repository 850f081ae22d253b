use super::frame::{Finger, HandFrame, Side};
use super::template::template;
use super::HandError;
use crate::geometry::Vec3;

/// Pose summary derived from relative landmark geometry only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseMetrics {
    /// 0 = fist, 1 = fully open.
    pub aperture: f64,
    /// Unit vector out of the palm.
    pub palm_normal: Vec3,
    /// Unit vector from the wrist toward the middle-finger base.
    pub palm_direction: Vec3,
    /// 0 = fingers together, 1 = fully splayed.
    pub spread: f64,
}

const NON_THUMB: [Finger; 4] = [Finger::Index, Finger::Middle, Finger::Ring, Finger::Little];

/// Computes aperture, spread and the palm frame for one hand.
pub fn pose_metrics(frame: &HandFrame) -> Result<PoseMetrics, HandError> {
    let lm = &frame.landmarks;
    let wrist = lm[0];
    let to_middle = lm[Finger::Middle.base()] - wrist;
    if to_middle.norm() < 1e-9 {
        return Err(HandError::Degenerate("wrist and middle base coincide"));
    }
    let palm_direction = to_middle.normalize();

    let across = (lm[Finger::Little.base()] - wrist).cross(&(lm[Finger::Index.base()] - wrist));
    let raw_normal = match frame.side {
        Side::Right => across,
        Side::Left => -across,
    };
    let orthogonal = raw_normal - palm_direction * raw_normal.dot(&palm_direction);
    if orthogonal.norm() < 1e-12 {
        return Err(HandError::Degenerate("palm landmarks are collinear"));
    }
    let palm_normal = orthogonal.normalize();

    let tpl = template();
    let pc = frame.palm_center();
    let aperture = NON_THUMB
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let d = (lm[f.tip()] - pc).norm();
            ((d - tpl.d_fist[k]) / (tpl.d_open[k] - tpl.d_fist[k])).clamp(0.0, 1.0)
        })
        .sum::<f64>()
        / 4.0;

    // Finger directions projected onto the palm plane.
    let dirs: Vec<Option<Vec3>> = NON_THUMB
        .iter()
        .map(|f| {
            let v = lm[f.tip()] - lm[f.base()];
            let p = v - palm_normal * v.dot(&palm_normal);
            (p.norm() > 1e-9).then(|| p.normalize())
        })
        .collect();
    let mut total = 0.0;
    let mut pairs = 0;
    for w in dirs.windows(2) {
        if let (Some(a), Some(b)) = (w[0], w[1]) {
            total += a.dot(&b).clamp(-1.0, 1.0).acos();
            pairs += 1;
        }
    }
    let spread = if pairs == 0 { 0.0 } else { (total / pairs as f64 / tpl.splay_open).clamp(0.0, 1.0) };

    Ok(PoseMetrics { aperture, palm_normal, palm_direction, spread })
}
