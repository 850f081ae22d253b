//! Synthetic optical sensor with a geometric occlusion model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::adapter::{RawSensorFrame, SensorAdapter};
use super::frame::{HandFrame, Joint, FINGERS, PALM_LANDMARKS};
use super::metrics::pose_metrics;
use crate::geometry::Vec3;

/// A hand whose palm normal is within this cosine of perpendicular to the
/// view axis is treated as edge-on.
pub const EDGE_ON_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CameraPreset {
    HeadMounted,
    ChestLanyard,
    Desktop,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: Vec3,
    /// Unit viewing direction.
    pub view_axis: Vec3,
    pub preset: CameraPreset,
}

impl CameraPose {
    pub fn new(position: Vec3, view_axis: Vec3, preset: CameraPreset) -> Self {
        Self { position, view_axis: view_axis.normalize(), preset }
    }

    pub fn looking_at(position: Vec3, target: Vec3, preset: CameraPreset) -> Self {
        Self::new(position, target - position, preset)
    }

    /// Front of a head-mounted display, user facing +z.
    pub fn head_mounted() -> Self {
        Self::new(Vec3::new(0.0, 1.65, 0.08), Vec3::new(0.0, -0.5, 1.0), CameraPreset::HeadMounted)
    }

    /// Sensor on a lanyard at chest height.
    pub fn chest_lanyard() -> Self {
        Self::new(Vec3::new(0.0, 1.35, 0.12), Vec3::new(0.0, -0.35, 1.0), CameraPreset::ChestLanyard)
    }

    /// Monitor-mounted sensor facing the user.
    pub fn desktop() -> Self {
        Self::new(Vec3::new(0.0, 1.0, 0.6), Vec3::new(0.0, 0.0, -1.0), CameraPreset::Desktop)
    }

    pub fn source_id(&self) -> String {
        let tag = match self.preset {
            CameraPreset::HeadMounted => "head-mounted",
            CameraPreset::ChestLanyard => "chest-lanyard",
            CameraPreset::Desktop => "desktop",
            CameraPreset::Custom => "custom",
        };
        format!("synthetic-camera/{tag}")
    }
}

// Segment/triangle intersection strictly between the endpoints.
fn segment_hits_triangle(origin: &Vec3, end: &Vec3, tri: [&Vec3; 3]) -> bool {
    let dir = end - origin;
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-15 {
        return false;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let t = e2.dot(&q) * inv;
    t > 1e-9 && t < 1.0 - 1e-9
}

fn palm_blocks(frame: &HandFrame, camera: &Vec3, landmark: usize) -> bool {
    let lm = &frame.landmarks;
    let fan = PALM_LANDMARKS;
    fan.windows(2)
        .skip(1)
        .any(|w| segment_hits_triangle(camera, &lm[landmark], [&lm[fan[0]], &lm[w[0]], &lm[w[1]]]))
}

/// Occlusion mask for a frame seen from `camera` (true = visible).
pub fn visibility(frame: &HandFrame, camera: &CameraPose) -> [bool; 21] {
    let mut visible = [true; 21];
    for (i, v) in visible.iter_mut().enumerate() {
        if !PALM_LANDMARKS.contains(&i) && palm_blocks(frame, &camera.position, i) {
            *v = false;
        }
    }
    if let Ok(m) = pose_metrics(frame) {
        if m.palm_normal.dot(&camera.view_axis).abs() <= EDGE_ON_THRESHOLD {
            // Fingers stack up behind the finger nearest the camera.
            let nearest = FINGERS
                .iter()
                .min_by(|a, b| {
                    let da = (frame.landmarks[a.base()] - camera.position).norm();
                    let db = (frame.landmarks[b.base()] - camera.position).norm();
                    da.total_cmp(&db)
                })
                .copied()
                .expect("five fingers");
            for f in FINGERS.iter().filter(|f| **f != nearest) {
                visible[f.landmark(Joint::Intermediate)] = false;
                visible[f.landmark(Joint::Tip)] = false;
            }
        }
    }
    visible
}

/// Simulates what an optical sensor at `camera` reports for `true_frame`.
///
/// Output is in canonical meters (the identity adapter decodes it). Occluded
/// landmarks are flagged invalid; valid ones get seeded Gaussian noise.
pub fn observe(true_frame: &HandFrame, camera: &CameraPose, noise_sigma: f64, seed: u64) -> RawSensorFrame {
    let mut raw = SensorAdapter::identity().encode(true_frame, &camera.source_id(), 21);
    let visible = visibility(true_frame, camera);
    for (flag, vis) in raw.valid.iter_mut().zip(visible) {
        *flag = vis;
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma).expect("finite sigma");
        for (p, valid) in raw.landmarks.iter_mut().zip(&raw.valid) {
            // Draw for every landmark so the noise stream does not depend on occlusion.
            let n = [normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng)];
            if *valid {
                for k in 0..3 {
                    p[k] += n[k];
                }
            }
        }
    }
    raw
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Quat};
    use crate::hand::{normalize_frame, HandPose, Side};

    #[test]
    fn facing_palm_without_noise_is_lossless() {
        let f = HandPose::open(Side::Right).frame(0.0).translated(&Vec3::new(0.0, 1.0, 0.0));
        let raw = observe(&f, &CameraPose::desktop(), 0.0, 1);
        assert!(raw.valid.iter().all(|v| *v));
        let back = normalize_frame(&raw, &SensorAdapter::identity(), None).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn edge_on_hand_drops_far_fingers() {
        // Palm normal at |dot| = 0.1 with the desktop view axis (0, 0, -1).
        let tilt = (0.1f64).acos();
        let q = Quat::from_axis_angle(&Vec3::y_axis(), tilt);
        let f = HandPose::open(Side::Right).frame(0.0).transformed(&Pose::new(Vec3::new(0.0, 1.0, 0.0), q));
        let m = pose_metrics(&f).unwrap();
        assert!((m.palm_normal.dot(&CameraPose::desktop().view_axis).abs() - 0.1).abs() < 1e-9);
        let raw = observe(&f, &CameraPose::desktop(), 0.0, 1);
        let invalid = raw.valid.iter().filter(|v| !**v).count();
        assert!(invalid >= 8, "{invalid}");
    }

    #[test]
    fn back_of_fist_hides_curled_tips() {
        // Palm facing away from the camera, fingers curled behind the palm.
        let q = Quat::from_axis_angle(&Vec3::y_axis(), std::f64::consts::PI);
        let pose = HandPose::new(Side::Right, Vec3::new(0.0, 1.0, 0.0), q, 0.2, 0.0);
        let raw = observe(&pose.frame(0.0), &CameraPose::desktop(), 0.0, 1);
        assert!(!raw.valid[12] && !raw.valid[16]);
    }

    #[test]
    fn noise_is_seeded() {
        let f = HandPose::open(Side::Right).frame(0.0);
        let a = observe(&f, &CameraPose::desktop(), 0.002, 9);
        let b = observe(&f, &CameraPose::desktop(), 0.002, 9);
        let c = observe(&f, &CameraPose::desktop(), 0.002, 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
