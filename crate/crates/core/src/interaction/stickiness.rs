use std::collections::{BTreeMap, BTreeSet};

use super::{region_landmarks, AttachState, DetachReason, InteractionConfig, WorldEvent};
use crate::geometry::{Pose, Vec3};
use crate::hand::{HandFrame, Side};
use crate::objects::{Primitive, SmartObject, SurfaceHit};

/// Per-hand memory the attach rule needs beyond the state itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StickyMemory {
    /// Objects the palm center has been inside since it was last beyond
    /// the overshoot tolerance from them.
    pub passed: BTreeSet<String>,
}

pub struct StickyInput<'a> {
    pub side: Side,
    /// Raw (uncorrected) frame.
    pub frame: &'a HandFrame,
    /// Raw palm center.
    pub palm: Vec3,
    pub previous_palm: Option<Vec3>,
    pub hand_pose: Pose,
    pub aperture: f64,
    pub previous_aperture: Option<f64>,
    pub dt: f64,
    pub objects: &'a BTreeMap<String, SmartObject>,
    /// Object grasped by the other hand; never a snap target.
    pub held_elsewhere: Option<&'a str>,
}

impl StickyInput<'_> {
    pub fn closing(&self, config: &InteractionConfig) -> bool {
        self.previous_aperture.is_some_and(|p| (p - self.aperture) / self.dt > config.closing_rate)
    }
}

/// One tick of the attach state machine.
pub fn stickiness_update(
    state: &AttachState,
    memory: &mut StickyMemory,
    input: &StickyInput,
    config: &InteractionConfig,
) -> (AttachState, Vec<WorldEvent>) {
    let side = input.side;
    let mut events = Vec::new();
    let mut state = state.clone();

    if let AttachState::Detached = state {
        let closing = input.closing(config);
        let mut best: Option<(f64, &SmartObject, Vec3)> = None;
        for (id, obj) in input.objects {
            if !obj.graspable || input.held_elsewhere == Some(id.as_str()) {
                continue;
            }
            let palm = obj.surface_query(&input.palm).distance;
            if palm > config.overshoot_tolerance {
                memory.passed.remove(id);
            } else if palm < 0.0 || swept_through(obj, input) {
                memory.passed.insert(id.clone());
            }
            let (distance, point) = hand_distance(obj, input.frame);
            let reachable = distance <= config.snap_distance
                || (memory.passed.contains(id) && distance <= config.overshoot_tolerance);
            if closing && reachable && best.is_none_or(|b| distance < b.0) {
                best = Some((distance, obj, point));
            }
        }
        memory.passed.retain(|id| input.objects.contains_key(id));
        if let Some((_, obj, point)) = best {
            memory.passed.remove(&obj.id);
            events.push(WorldEvent::Stuck { side, object: obj.id.clone(), anchor: point });
            state = AttachState::Stuck { object: obj.id.clone(), anchor: obj.pose.to_local(&point) };
        } else if crossed_grab(input, config) {
            if let Some((distance, obj)) = nearest_graspable(input) {
                if distance <= config.grab_fail_radius {
                    events.push(WorldEvent::GrabFailed { side, object: obj.id.clone(), distance });
                }
            }
        }
    }

    let object = state.object().map(str::to_string);
    let Some(id) = object else {
        return (state, events);
    };
    let Some(obj) = input.objects.get(&id) else {
        events.push(WorldEvent::Warning { message: format!("{} hand attached to missing object {id}", side.as_str()) });
        events.push(WorldEvent::Detached { side, object: id, reason: DetachReason::Missing });
        return (AttachState::Detached, events);
    };

    match &state {
        AttachState::Stuck { .. } => {
            if hand_distance(obj, input.frame).0 > config.release_distance {
                events.push(WorldEvent::Detached { side, object: id, reason: DetachReason::Retreat });
                state = AttachState::Detached;
            } else if input.aperture <= config.grab_aperture && input.held_elsewhere != Some(id.as_str()) {
                events.push(WorldEvent::Grasped { side, object: id.clone() });
                state = AttachState::Grasped { object: id, grip: input.hand_pose.inverse().compose(&obj.pose) };
            }
        }
        AttachState::Grasped { .. } => {
            if !obj.kind().is_instrument() && input.aperture >= config.release_aperture {
                let (_, point) = hand_distance(obj, input.frame);
                events.push(WorldEvent::Released { side, object: id.clone(), velocity: Vec3::zeros() });
                state = AttachState::Stuck { object: id, anchor: obj.pose.to_local(&point) };
            }
        }
        AttachState::Detached => {}
    }
    (state, events)
}

/// Distance from the hand to an object: the nearest of the palm center
/// and the region landmarks, with that point's surface projection. A
/// closing hand reaches an object with its fingers first.
pub fn hand_distance(obj: &SmartObject, frame: &HandFrame) -> (f64, Vec3) {
    let shape = obj.shape();
    let (_, hit) = closest_point(obj, &shape, frame);
    (hit.distance, hit.point)
}

/// Hand point nearest to the object and its surface hit.
pub(super) fn closest_point(obj: &SmartObject, shape: &[Primitive], frame: &HandFrame) -> (Vec3, SurfaceHit) {
    let mut best = (frame.palm_center(), obj.surface_query_in(shape, &frame.palm_center()));
    for i in region_landmarks() {
        let hit = obj.surface_query_in(shape, &frame.landmarks[i]);
        if hit.distance < best.1.distance {
            best = (frame.landmarks[i], hit);
        }
    }
    best
}

/// Samples along the palm's path this tick, so a fast hand cannot skip
/// over a small object between frames.
const SWEEP_SAMPLES: usize = 8;

fn swept_through(obj: &SmartObject, input: &StickyInput) -> bool {
    let Some(p0) = input.previous_palm else {
        return false;
    };
    (1..SWEEP_SAMPLES).any(|k| {
        let p = p0.lerp(&input.palm, k as f64 / SWEEP_SAMPLES as f64);
        obj.surface_query(&p).distance < 0.0
    })
}

fn crossed_grab(input: &StickyInput, config: &InteractionConfig) -> bool {
    input.previous_aperture.is_some_and(|p| p > config.grab_aperture) && input.aperture <= config.grab_aperture
}

fn nearest_graspable<'a>(input: &StickyInput<'a>) -> Option<(f64, &'a SmartObject)> {
    input
        .objects
        .values()
        .filter(|o| o.graspable)
        .map(|o| (hand_distance(o, input.frame).0, o))
        .fold(None, |best, c| if best.is_none_or(|b: (f64, &SmartObject)| c.0 < b.0) { Some(c) } else { best })
}
