//! Parametric hand pose generator and the canonical template the pose
//! metrics are normalized against.
//!
//! Hand-local frame (right hand): +y runs from the wrist along the fingers,
//! +z points out of the palm, and the thumb sits on the -x side. The left
//! hand mirrors x. Fingers flex toward +z.

use std::sync::OnceLock;

use super::frame::{Finger, HandFrame, Side, LANDMARK_COUNT};
use crate::geometry::{Quat, Vec3};

/// Maximum angle between adjacent fingers at full spread (radians).
pub const SPLAY_MAX: f64 = 10.0 * std::f64::consts::PI / 180.0;

/// Per-joint flexion at a full fist (radians), base joint first.
pub const FINGER_FLEX_MAX: [f64; 3] = [
    80.0 * std::f64::consts::PI / 180.0,
    100.0 * std::f64::consts::PI / 180.0,
    65.0 * std::f64::consts::PI / 180.0,
];

/// Joint flexion is `FINGER_FLEX_MAX * curl^CURL_EXPONENT`, which keeps
/// aperture close to linear in the openness parameter.
pub const CURL_EXPONENT: f64 = 0.72;

const THUMB_FLEX_MAX: [f64; 3] = [
    35.0 * std::f64::consts::PI / 180.0,
    45.0 * std::f64::consts::PI / 180.0,
    55.0 * std::f64::consts::PI / 180.0,
];

// Right-hand local base positions and phalanx lengths (meters), index..little.
const FINGER_BASES: [[f64; 3]; 4] = [
    [-0.030, 0.085, 0.0],
    [-0.010, 0.088, 0.0],
    [0.010, 0.084, 0.0],
    [0.029, 0.076, 0.0],
];
const FINGER_LENGTHS: [[f64; 3]; 4] = [
    [0.040, 0.024, 0.019],
    [0.045, 0.028, 0.021],
    [0.042, 0.026, 0.020],
    [0.033, 0.019, 0.017],
];
// Abduction multipliers of SPLAY_MAX * spread, index..little.
const SPLAY_STEPS: [f64; 4] = [-1.5, -0.5, 0.5, 1.5];

const THUMB_BASE: [f64; 3] = [-0.022, 0.022, 0.006];
const THUMB_LENGTHS: [f64; 3] = [0.045, 0.032, 0.025];

/// Joint positions of one non-thumb finger in the right-hand local frame:
/// base, proximal, intermediate and tip. `finger` is 0 (index) to 3 (little).
///
/// Each phalanx points along `cos(phi) * d + sin(phi) * z`, where `d` is the
/// in-plane finger direction and `phi` the cumulative flexion, with
/// `curl = (1 - openness)^CURL_EXPONENT`.
pub fn finger_chain(finger: usize, openness: f64, spread: f64) -> [Vec3; 4] {
    let base = Vec3::from(FINGER_BASES[finger]);
    let abduction = SPLAY_STEPS[finger] * SPLAY_MAX * spread;
    let dir = Vec3::new(abduction.sin(), abduction.cos(), 0.0);
    let curl = (1.0 - openness).powf(CURL_EXPONENT);
    let mut joints = [base; 4];
    let mut phi = 0.0;
    for k in 0..3 {
        phi += curl * FINGER_FLEX_MAX[k];
        let seg = dir * phi.cos() + Vec3::z() * phi.sin();
        joints[k + 1] = joints[k] + seg * FINGER_LENGTHS[finger][k];
    }
    joints
}

fn thumb_chain(openness: f64, spread: f64) -> [Vec3; 4] {
    let base = Vec3::from(THUMB_BASE);
    let abduction = -(35.0_f64.to_radians() + 15.0_f64.to_radians() * spread);
    let dir = Vec3::new(abduction.sin(), abduction.cos(), 0.0);
    // The thumb folds across the palm.
    let fold = Vec3::new(0.45, 0.0, 0.89).normalize();
    let curl = (1.0 - openness).powf(CURL_EXPONENT);
    let mut joints = [base; 4];
    let mut phi = 0.0;
    for k in 0..3 {
        phi += curl * THUMB_FLEX_MAX[k];
        let seg = dir * phi.cos() + fold * phi.sin();
        joints[k + 1] = joints[k] + seg * THUMB_LENGTHS[k];
    }
    joints
}

/// A parametric hand pose: wrist placement plus openness and spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandPose {
    pub side: Side,
    /// Wrist position in the world.
    pub position: Vec3,
    /// Rotation from hand-local to world axes.
    pub orientation: Quat,
    /// 0 = fist, 1 = fully extended fingers.
    pub openness: f64,
    /// 0 = fingers parallel, 1 = fully splayed.
    pub spread: f64,
}

impl HandPose {
    pub fn new(side: Side, position: Vec3, orientation: Quat, openness: f64, spread: f64) -> Self {
        Self { side, position, orientation, openness, spread }
    }

    /// Open hand at the origin, palm toward +z, fingers up.
    pub fn open(side: Side) -> Self {
        Self::new(side, Vec3::zeros(), Quat::identity(), 1.0, 1.0)
    }

    pub fn fist(side: Side) -> Self {
        Self::new(side, Vec3::zeros(), Quat::identity(), 0.0, 0.0)
    }

    /// Landmarks in the hand-local frame (mirrored for the left hand).
    pub fn local_landmarks(&self) -> [Vec3; LANDMARK_COUNT] {
        let openness = self.openness.clamp(0.0, 1.0);
        let spread = self.spread.clamp(0.0, 1.0);
        let mut lm = [Vec3::zeros(); LANDMARK_COUNT];
        let thumb = thumb_chain(openness, spread);
        lm[1..5].copy_from_slice(&thumb);
        for f in 0..4 {
            let chain = finger_chain(f, openness, spread);
            let start = Finger::Index.base() + 4 * f;
            lm[start..start + 4].copy_from_slice(&chain);
        }
        if self.side == Side::Left {
            for p in lm.iter_mut() {
                p.x = -p.x;
            }
        }
        lm
    }

    pub fn frame(&self, timestamp: f64) -> HandFrame {
        let local = self.local_landmarks();
        let mut landmarks = [Vec3::zeros(); LANDMARK_COUNT];
        for (w, l) in landmarks.iter_mut().zip(local.iter()) {
            *w = self.position + self.orientation * l;
        }
        HandFrame {
            side: self.side,
            landmarks,
            confidence: [1.0; LANDMARK_COUNT],
            timestamp,
        }
    }

    /// Palm center in the hand-local frame (independent of openness).
    pub fn local_palm_center(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        for b in FINGER_BASES.iter() {
            c += Vec3::from(*b);
        }
        c /= 5.0;
        if self.side == Side::Left {
            c.x = -c.x;
        }
        c
    }

    /// Wrist position that puts the palm center at `palm`.
    pub fn with_palm_at(mut self, palm: Vec3) -> Self {
        self.position = palm - self.orientation * self.local_palm_center();
        self
    }
}

/// Reference distances used to normalize aperture and spread.
#[derive(Debug, Clone, PartialEq)]
pub struct HandTemplate {
    /// Fingertip-to-palm-center distance at a full fist, index..little.
    pub d_fist: [f64; 4],
    /// Fingertip-to-palm-center distance with the hand fully open.
    pub d_open: [f64; 4],
    /// Mean adjacent-finger angle at full spread (radians).
    pub splay_open: f64,
}

fn tip_distances(pose: &HandPose) -> [f64; 4] {
    let frame = pose.frame(0.0);
    let pc = frame.palm_center();
    let mut d = [0.0; 4];
    for (f, out) in d.iter_mut().enumerate() {
        *out = (frame.landmarks[Finger::Index.tip() + 4 * f] - pc).norm();
    }
    d
}

/// The canonical template, derived once from the generator's rest pose.
pub fn template() -> &'static HandTemplate {
    static TEMPLATE: OnceLock<HandTemplate> = OnceLock::new();
    TEMPLATE.get_or_init(|| HandTemplate {
        d_fist: tip_distances(&HandPose::fist(Side::Right)),
        d_open: tip_distances(&HandPose::open(Side::Right)),
        splay_open: SPLAY_MAX,
    })
}
