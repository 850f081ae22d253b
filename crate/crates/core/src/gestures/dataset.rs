//! Parametric generators for the gesture vocabulary.
//!
//! Each class is a hand motion in the same words people use for the task:
//! wrap circles a limb, twist rolls the wrist about the forearm, cut slides
//! along a straight line while snipping, push moves the open palm forward,
//! wave oscillates sideways, and null is low-amplitude drift.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Rotation3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GestureClass;
use crate::geometry::{Quat, Vec3};
use crate::hand::{HandFrame, HandPose, Side};

pub const FRAME_RATE: f64 = 60.0;
const MIN_FRAMES: usize = 60;
const MAX_FRAMES: usize = 180;
const MAX_LEAD: usize = 60;
const MAX_TAIL: usize = 30;

/// Per-sample randomization, recorded with each sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    /// Tempo multiplier (gesture duration = nominal / speed).
    pub speed: f64,
    /// Primary size of the motion in the class's own unit (m or rad).
    pub amplitude: f64,
    /// Rotation of the motion plane about world up (rad).
    pub plane_yaw: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureSample {
    pub label: GestureClass,
    pub frames: Vec<HandFrame>,
    pub params: GeneratorParams,
    /// Time of the first and last gesture frame (equal margins for null).
    pub gesture_start: f64,
    pub gesture_end: f64,
}

fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

fn frame_from_basis(fingers: Vec3, normal: Vec3) -> Quat {
    // Hand-local axes: x across the palm, y along the fingers, z out of the palm.
    let y = fingers.normalize();
    let z = (normal - y * normal.dot(&y)).normalize();
    let x = y.cross(&z);
    Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z])))
}

fn yaw(angle: f64) -> Quat {
    Quat::from_axis_angle(&Vec3::y_axis(), angle)
}

/// One concrete gesture motion: a class plus every randomized quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub class: GestureClass,
    pub side: Side,
    /// Palm center at the start of the motion.
    pub anchor: Vec3,
    pub frames: usize,
    pub params: GeneratorParams,
    cycles: f64,
    phase: f64,
    tilt: f64,
    openness: f64,
}

impl Motion {
    pub fn random<R: Rng>(class: GestureClass, anchor: Vec3, rng: &mut R) -> Self {
        let speed = rng.random_range(0.8..1.25);
        let plane_yaw = rng.random_range(-25f64..25.0).to_radians();
        let (nominal, amplitude, cycles) = match class {
            GestureClass::Wrap => (100.0, rng.random_range(0.07..0.12), rng.random_range(330f64..400.0).to_radians()),
            GestureClass::Twist => (90.0, rng.random_range(50f64..85.0).to_radians(), rng.random_range(1.5..2.5)),
            GestureClass::Cut => (90.0, rng.random_range(0.15..0.30), rng.random_range(2.0..4.0)),
            GestureClass::Push => (36.0, rng.random_range(0.08..0.16), 1.0),
            GestureClass::Wave => (90.0, rng.random_range(0.05..0.10), rng.random_range(2.0..3.5)),
            GestureClass::Null => (120.0, rng.random_range(0.002..0.008), rng.random_range(0.1..0.4)),
        };
        let phase = rng.random_range(0.0..TAU);
        let tilt = rng.random_range(-15f64..15.0).to_radians();
        let openness = rng.random_range(0.2..1.0);
        Self {
            class,
            side: Side::Right,
            anchor,
            frames: ((nominal / speed) as f64).round() as usize,
            params: GeneratorParams { speed, amplitude, plane_yaw, seed: 0 },
            cycles,
            phase,
            tilt,
            openness,
        }
    }

    /// Nominal pose before the gesture starts.
    pub fn start_pose(&self) -> HandPose {
        self.pose_at(0.0)
    }

    pub fn end_pose(&self) -> HandPose {
        self.pose_at(1.0)
    }

    /// Hand pose at progress `s` in [0, 1].
    pub fn pose_at(&self, s: f64) -> HandPose {
        let a = self.params.amplitude;
        let turn = yaw(self.params.plane_yaw);
        let palm_forward = Quat::identity();
        let (palm, orientation, openness, spread) = match self.class {
            GestureClass::Wrap => {
                // Circle about a limb lying left-right; palm faces the limb.
                let axis = turn * Vec3::x();
                let (v1, v2) = (turn * Vec3::y(), turn * Vec3::z());
                let theta = self.phase + self.cycles * smoothstep(s);
                let radial = v1 * theta.cos() + v2 * theta.sin();
                let center = self.anchor - v1 * a * self.phase.cos() - v2 * a * self.phase.sin();
                (center + radial * a, frame_from_basis(axis, -radial), 0.5, 0.2)
            }
            GestureClass::Twist => {
                let base = turn * frame_from_basis(Vec3::z(), -Vec3::y());
                let roll = a * (TAU * self.cycles * s).sin();
                let q = base * Quat::from_axis_angle(&Vec3::y_axis(), roll);
                return HandPose::new(self.side, self.anchor, q, 0.3, 0.2);
            }
            GestureClass::Cut => {
                let q = turn * frame_from_basis(Vec3::z(), -Vec3::x());
                let dir = turn * Quat::from_axis_angle(&Vec3::x_axis(), self.tilt) * Vec3::z();
                let open = 0.55 + 0.35 * (TAU * self.cycles * s).cos();
                (self.anchor + dir * a * smoothstep(s), q, open, 0.1)
            }
            GestureClass::Push => {
                let dir = turn * Vec3::z();
                (self.anchor + dir * a * smoothstep(s), turn * palm_forward, 1.0, 0.6)
            }
            GestureClass::Wave => {
                let lateral = turn * Vec3::x();
                let phase = TAU * self.cycles * s;
                let wag = Quat::from_axis_angle(&Vec3::z_axis(), 0.25 * phase.sin());
                (self.anchor + lateral * a * phase.sin(), turn * palm_forward * wag, 1.0, 0.8)
            }
            GestureClass::Null => {
                let q = turn * Quat::from_axis_angle(&Vec3::x_axis(), self.tilt * 3.0);
                (self.anchor, q, self.openness, 0.5)
            }
        };
        HandPose::new(self.side, palm, orientation, openness, spread).with_palm_at(palm)
    }

    fn drift(&self) -> Drift {
        Drift { amplitude: self.params.amplitude.min(0.008), omega: TAU * self.cycles.min(0.4), phase: self.phase }
    }
}

#[derive(Debug, Clone, Copy)]
struct Drift {
    amplitude: f64,
    omega: f64,
    phase: f64,
}

impl Drift {
    fn offset(&self, t: f64) -> Vec3 {
        let f = |k: f64| (self.omega * (1.0 + 0.3 * k) * t + self.phase + k).sin() - (self.phase + k).sin();
        Vec3::new(f(0.0), 0.6 * f(1.0), 0.8 * f(2.0)) * self.amplitude
    }
}

/// `n` frames of a hand idling around `pose`, starting at `t0`.
///
/// With `ends_at_pose` the drift converges onto `pose` at the last frame;
/// otherwise it departs from `pose` at the first frame.
pub fn idle_frames(pose: &HandPose, t0: f64, n: usize, amplitude: f64, seed: u64, ends_at_pose: bool) -> Vec<HandFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drift = Drift {
        amplitude: amplitude.min(0.01),
        omega: TAU * rng.random_range(0.1..0.4),
        phase: rng.random_range(0.0..TAU),
    };
    let first = (t0 * FRAME_RATE).round() as i64;
    (0..n)
        .map(|i| {
            let rel = if ends_at_pose { i as f64 - (n as f64 - 1.0) } else { i as f64 } / FRAME_RATE;
            let mut p = *pose;
            p.position += drift.offset(rel);
            p.frame((first + i as i64) as f64 / FRAME_RATE)
        })
        .collect()
}

/// The gesture's own frames starting at `t0` (progress 0 through 1).
pub fn gesture_frames(motion: &Motion, t0: f64) -> Vec<HandFrame> {
    let n = motion.frames.max(2);
    let first = (t0 * FRAME_RATE).round() as i64;
    (0..n)
        .map(|i| motion.pose_at(i as f64 / (n - 1) as f64).frame((first + i as i64) as f64 / FRAME_RATE))
        .collect()
}

/// A stream holding one gesture: idle from `start`, the motion ending
/// exactly at `end`, then `tail` idle frames.
pub fn scripted_gesture(motion: &Motion, start: f64, end: f64, tail: usize, seed: u64) -> Vec<HandFrame> {
    let g0 = end - (motion.frames.max(2) - 1) as f64 / FRAME_RATE;
    let lead = ((g0 - start) * FRAME_RATE).round().max(0.0) as usize;
    let mut frames = idle_frames(&motion.start_pose(), start, lead, 0.004, seed, true);
    frames.extend(gesture_frames(motion, g0));
    frames.extend(idle_frames(&motion.end_pose(), end + 1.0 / FRAME_RATE, tail, 0.004, seed + 1, false));
    frames
}

fn sample_one(class: GestureClass, seed: u64) -> GestureSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = Vec3::new(
        rng.random_range(-0.05..0.05),
        1.2 + rng.random_range(-0.05..0.05),
        0.35 + rng.random_range(-0.05..0.05),
    );
    let mut motion = Motion::random(class, anchor, &mut rng);
    motion.params.seed = seed;

    if class == GestureClass::Null {
        // Rest in a pose some gesture would start or end in, so that static
        // hand shape alone never identifies a class.
        let other = GestureClass::ALL[rng.random_range(1..GestureClass::ALL.len())];
        let host = Motion::random(other, anchor, &mut rng);
        let pose = if rng.random_bool(0.5) { host.start_pose() } else { host.end_pose() };
        let n = rng.random_range(MIN_FRAMES..=MAX_FRAMES);
        let drift = motion.drift();
        let frames: Vec<_> = (0..n)
            .map(|i| {
                let mut p = pose;
                p.position += drift.offset(i as f64 / FRAME_RATE);
                p.frame(i as f64 / FRAME_RATE)
            })
            .collect();
        let end = frames.last().map(|f| f.timestamp).unwrap_or(0.0);
        return GestureSample { label: class, frames, params: motion.params, gesture_start: 0.0, gesture_end: end };
    }

    motion.frames = motion.frames.clamp(2, MAX_FRAMES - MAX_TAIL);
    let mut tail = rng.random_range(0..=MAX_TAIL);
    let lead = rng.random_range(0..=MAX_LEAD.min(MAX_FRAMES - motion.frames - tail));
    if lead + motion.frames + tail < MIN_FRAMES {
        tail = MIN_FRAMES - lead - motion.frames;
    }
    let idle_amp = rng.random_range(0.002..0.008);
    let idle_seed: u64 = rng.random();

    let mut frames = idle_frames(&motion.start_pose(), 0.0, lead, idle_amp, idle_seed, true);
    let start = lead as f64 / FRAME_RATE;
    let body = gesture_frames(&motion, start);
    let end = body.last().expect("gesture has frames").timestamp;
    frames.extend(body);
    frames.extend(idle_frames(&motion.end_pose(), end + 1.0 / FRAME_RATE, tail, idle_amp, idle_seed ^ 1, false));
    GestureSample { label: class, frames, params: motion.params, gesture_start: start, gesture_end: end }
}

/// Class-balanced synthetic corpus, deterministic in `seed`.
pub fn generate_dataset(seed: u64, per_class_count: usize) -> Vec<GestureSample> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class_count * GestureClass::ALL.len());
    for _ in 0..per_class_count {
        for class in GestureClass::ALL {
            out.push(sample_one(class, master.random()));
        }
    }
    out
}
