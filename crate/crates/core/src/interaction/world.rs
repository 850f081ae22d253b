use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix3, Rotation3};
use serde_json::{json, Value};

use super::contacts::{project_frame, resolve_contacts, Touch};
use super::physics::{apply_impulse, integrate};
use super::stickiness::{closest_point, stickiness_update, StickyInput, StickyMemory};
use super::tool::{tool_update, ToolInput};
use super::{AttachState, DetachReason, InteractionConfig, InteractionError, Region, ToolState, WorldEvent};
use crate::geometry::{quat_to_array, to_array, Pose, Quat, Vec3};
use crate::hand::{pose_metrics, HandFrame, PoseMetrics, Side};
use crate::objects::{Drive, ObjectKind, Primitive, SmartObject};

/// Scissors blade tip and syringe needle tip in their object frames.
const BLADE_TIP: [f64; 3] = [0.0, 0.0, 0.1];
const NEEDLE_TIP: [f64; 3] = [0.0, 0.0, 0.07];
/// How close a blade or needle tip must be to its target.
const TOOL_REACH: f64 = 0.03;

/// Hand frame from the palm: origin at the palm center, +y toward the
/// middle-finger base, +z out of the palm.
pub fn hand_pose(frame: &HandFrame, metrics: &PoseMetrics) -> Pose {
    let y = metrics.palm_direction;
    let z = metrics.palm_normal;
    let x = y.cross(&z);
    let r = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    Pose::new(frame.palm_center(), Quat::from_rotation_matrix(&r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandState {
    pub attach: AttachState,
    pub tool: ToolState,
    pub memory: StickyMemory,
    pub touching: BTreeSet<(Region, String)>,
    pub metrics: Option<PoseMetrics>,
    /// Last raw frame, for landmark velocities.
    pub raw: Option<HandFrame>,
    /// Last frame after surface correction and stickiness.
    pub corrected: Option<HandFrame>,
    pub pose: Option<Pose>,
    pub velocity: Vec3,
}

impl Default for HandState {
    fn default() -> Self {
        Self {
            attach: AttachState::Detached,
            tool: ToolState::FreeHand,
            memory: StickyMemory::default(),
            touching: BTreeSet::new(),
            metrics: None,
            raw: None,
            corrected: None,
            pose: None,
            velocity: Vec3::zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub tick: u64,
    pub t: f64,
    pub events: Vec<WorldEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub tick: u64,
    pub dt: f64,
    pub objects: BTreeMap<String, SmartObject>,
    pub hands: BTreeMap<Side, HandState>,
    pub config: InteractionConfig,
    /// Free objects whose next ground impact is reported as a drop.
    pub fall_watch: BTreeSet<String>,
}

impl World {
    pub fn new(objects: Vec<SmartObject>, config: InteractionConfig, dt: f64) -> Result<Self, InteractionError> {
        config.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(InteractionError::Config(format!("dt must be positive, got {dt}")));
        }
        let mut map = BTreeMap::new();
        for o in objects {
            o.validate()?;
            if map.contains_key(&o.id) {
                return Err(InteractionError::Config(format!("duplicate object id {}", o.id)));
            }
            map.insert(o.id.clone(), o);
        }
        Ok(Self { tick: 0, dt, objects: map, hands: BTreeMap::new(), config, fall_watch: BTreeSet::new() })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.dt
    }

    pub fn gravity(&self) -> Vec3 {
        Vec3::new(0.0, -self.config.gravity, 0.0)
    }

    pub fn hand(&self, side: Side) -> Option<&HandState> {
        self.hands.get(&side)
    }

    /// Advances one tick. On failure the world keeps its previous state,
    /// the tick still advances, and the failure is reported as an error
    /// event.
    pub fn step(&mut self, frames: &[HandFrame]) -> StepOutput {
        let tick = self.tick + 1;
        let mut next = self.clone();
        next.tick = tick;
        let t = next.time();
        match next.advance(frames) {
            Ok(events) => {
                *self = next;
                StepOutput { tick, t, events }
            }
            Err(e) => {
                self.tick = tick;
                StepOutput { tick, t, events: vec![WorldEvent::Error { message: e.to_string() }] }
            }
        }
    }

    fn advance(&mut self, frames: &[HandFrame]) -> Result<Vec<WorldEvent>, InteractionError> {
        let dt = self.dt;
        let t = self.time();
        let cfg = self.config.clone();

        // normalize + metrics
        let mut input: BTreeMap<Side, (HandFrame, PoseMetrics)> = BTreeMap::new();
        for f in frames {
            f.validate()?;
            let m = pose_metrics(f)?;
            if input.insert(f.side, (f.clone(), m)).is_some() {
                return Err(InteractionError::Input(format!("two {} hands in one tick", f.side.as_str())));
            }
        }
        for (side, hand) in self.hands.iter_mut() {
            if !input.contains_key(side) {
                hand.touching.clear();
                hand.raw = None;
                hand.corrected = None;
                hand.pose = None;
                hand.velocity = Vec3::zeros();
            }
        }

        let mut events = Vec::new();

        // contacts
        let mut corrected: BTreeMap<Side, HandFrame> = BTreeMap::new();
        let mut touches: Vec<(Side, Touch)> = Vec::new();
        for (side, (frame, _)) in &input {
            let hand = self.hands.entry(*side).or_default();
            let res = resolve_contacts(frame, hand.raw.as_ref(), &self.objects, &hand.touching, &cfg, dt, t);
            events.extend(res.events.into_iter().map(WorldEvent::Contact));
            touches.extend(res.touches.into_iter().map(|tc| (*side, tc)));
            hand.touching = res.touching;
            corrected.insert(*side, res.frame);
        }

        let poses: BTreeMap<Side, Pose> = input.iter().map(|(s, (f, m))| (*s, hand_pose(f, m))).collect();
        let velocities: BTreeMap<Side, Vec3> = input
            .iter()
            .map(|(s, (f, _))| {
                let prev = self.hands[s].raw.as_ref();
                (*s, prev.map_or_else(Vec3::zeros, |p| (f.palm_center() - p.palm_center()) / dt))
            })
            .collect();

        // stickiness
        for (side, (frame, metrics)) in &input {
            let held_elsewhere = self.hands.get(&side.other()).and_then(|h| match &h.attach {
                AttachState::Grasped { object, .. } => Some(object.clone()),
                _ => None,
            });
            let hand = self.hands.get_mut(side).expect("hand state created above");
            let sticky = StickyInput {
                side: *side,
                frame,
                palm: frame.palm_center(),
                previous_palm: hand.raw.as_ref().map(|f| f.palm_center()),
                hand_pose: poses[side],
                aperture: metrics.aperture,
                previous_aperture: hand.metrics.map(|m| m.aperture),
                dt,
                objects: &self.objects,
                held_elsewhere: held_elsewhere.as_deref(),
            };
            let (attach, evs) = stickiness_update(&hand.attach, &mut hand.memory, &sticky, &cfg);
            hand.attach = attach;
            for ev in evs {
                events.push(match ev {
                    WorldEvent::Released { side, object, .. } => {
                        let v = velocities[&side];
                        if let Some(o) = self.objects.get_mut(&object) {
                            o.dynamic = true;
                            o.velocity = v;
                            o.angular_velocity = Vec3::zeros();
                            self.fall_watch.insert(object.clone());
                        }
                        WorldEvent::Released { side, object, velocity: v }
                    }
                    other => other,
                });
            }
        }

        // tool
        let mut drives: BTreeMap<String, Drive> = BTreeMap::new();
        for (side, (_, metrics)) in &input {
            let other_palm = input.get(&side.other()).map(|(f, _)| f.palm_center());
            let hand = &self.hands[side];
            let outcome = tool_update(
                &hand.tool,
                &ToolInput {
                    side: *side,
                    attach: &hand.attach,
                    metrics,
                    objects: &self.objects,
                    hand_pose: poses[side],
                    previous_hand_pose: hand.pose,
                    palm: poses[side].position,
                    other_palm,
                    dt,
                },
                &cfg,
            );
            if let Some((id, d)) = outcome.drive {
                drives.insert(id, d);
            }
            let v = velocities[side];
            for ev in outcome.events {
                events.push(match ev {
                    WorldEvent::ToolDropped { side, object, .. } => WorldEvent::ToolDropped { side, object, velocity: v },
                    other => other,
                });
            }
            let hand = self.hands.get_mut(side).expect("hand state exists");
            hand.tool = outcome.state;
            if let Some(id) = outcome.dropped {
                hand.attach = AttachState::Detached;
                events.push(WorldEvent::Detached { side: *side, object: id.clone(), reason: DetachReason::Drop });
                if let Some(o) = self.objects.get_mut(&id) {
                    o.dynamic = true;
                    o.velocity = v;
                    o.angular_velocity = Vec3::zeros();
                }
            }
        }

        // grasped objects track the hand
        for (side, hand) in &self.hands {
            let (Some(pose), AttachState::Grasped { object, grip }) = (poses.get(side), &hand.attach) else {
                continue;
            };
            let grip = match &hand.tool {
                ToolState::Holding { instrument, grip, .. } if instrument == object => grip,
                _ => grip,
            };
            if let Some(o) = self.objects.get_mut(object) {
                o.pose = pose.compose(grip);
                o.pose.orientation = Quat::new_normalize(*o.pose.orientation.quaternion());
                o.velocity = velocities[side];
                o.angular_velocity = Vec3::zeros();
                o.dynamic = false;
                self.fall_watch.remove(object);
            }
        }

        // articulate
        let ids: Vec<String> = self.objects.keys().cloned().collect();
        for id in &ids {
            let drive = drives.get(id).copied().or_else(|| anchored_drive(&self.objects[id], &touches, dt));
            let obj = self.objects.get_mut(id).expect("id from keys");
            for ev in obj.articulate(drive.as_ref(), dt)? {
                let derived = self.tool_effect(&ev.kind, id);
                events.push(WorldEvent::Articulation(ev));
                events.extend(derived);
            }
        }

        // forces
        let attached: BTreeSet<String> =
            self.hands.values().filter_map(|h| h.attach.object().map(str::to_string)).collect();
        for (_, touch) in &touches {
            if touch.depth <= 0.0 || attached.contains(&touch.object) {
                continue;
            }
            let obj = self.objects.get_mut(&touch.object).expect("touch on existing object");
            let was_dynamic = obj.dynamic;
            if apply_impulse(obj, &touch.point, &touch.normal, &(touch.displacement / dt)).is_some()
                && !was_dynamic
                && obj.graspable
            {
                self.fall_watch.insert(touch.object.clone());
            }
        }

        // integrate
        let gravity = self.gravity();
        for (id, obj) in self.objects.iter_mut() {
            if let Some(hit) = integrate(obj, &gravity, dt, cfg.restitution) {
                if self.fall_watch.remove(id) {
                    events.push(WorldEvent::ObjectDropped { object: id.clone(), speed: hit.impact_speed });
                }
            }
        }

        // final hand rendering against the updated objects
        let shapes: Vec<(&SmartObject, Vec<Primitive>)> = self.objects.values().map(|o| (o, o.shape())).collect();
        for (side, frame) in corrected.iter_mut() {
            if let AttachState::Stuck { object, anchor } = &self.hands[side].attach {
                if let Some(o) = self.objects.get(object) {
                    let (point, _) = closest_point(o, &o.shape(), &input[side].0);
                    let offset = o.pose.to_world(anchor) - point;
                    *frame = frame.translated(&offset);
                }
            }
            *frame = project_frame(frame, &shapes);
        }
        drop(shapes);

        for (side, (frame, metrics)) in input {
            let hand = self.hands.get_mut(&side).expect("hand state exists");
            hand.raw = Some(frame);
            hand.corrected = corrected.remove(&side);
            hand.metrics = Some(metrics);
            hand.pose = Some(poses[&side]);
            hand.velocity = velocities[&side];
        }

        for o in self.objects.values() {
            o.validate()?;
        }
        Ok(events)
    }

    /// Medic effects of an instrument event: a cut or an injection when the
    /// working end is at its target.
    fn tool_effect(&self, kind: &crate::objects::ArticulationEventKind, id: &str) -> Option<WorldEvent> {
        use crate::objects::ArticulationEventKind as K;
        let (tip, target) = match kind {
            K::ScissorsClosed => (BLADE_TIP, ObjectKind::Bandage),
            K::PlungerDepressed => (NEEDLE_TIP, ObjectKind::PatientLimb),
            _ => return None,
        };
        let side = self.hands.iter().find(|(_, h)| h.tool.instrument() == Some(id)).map(|(s, _)| *s)?;
        let tip = self.objects[id].pose.to_world(&Vec3::from(tip));
        let near = self
            .objects
            .values()
            .any(|o| o.kind() == target && o.surface_query(&tip).distance <= TOOL_REACH);
        near.then(|| match target {
            ObjectKind::Bandage => WorldEvent::BandageCut { side },
            _ => WorldEvent::InjectionGiven { side },
        })
    }

    /// Loggable summary of objects and hands.
    pub fn snapshot(&self) -> Value {
        let objects: serde_json::Map<String, Value> = self
            .objects
            .iter()
            .map(|(id, o)| {
                (
                    id.clone(),
                    json!({
                        "position": to_array(&o.pose.position),
                        "orientation": quat_to_array(&o.pose.orientation),
                        "value": o.articulation.value(),
                        "dynamic": o.dynamic,
                    }),
                )
            })
            .collect();
        let hands: serde_json::Map<String, Value> = self
            .hands
            .iter()
            .map(|(side, h)| {
                let attach = match &h.attach {
                    AttachState::Detached => json!(null),
                    AttachState::Stuck { object, .. } => json!({ "stuck": object }),
                    AttachState::Grasped { object, .. } => json!({ "grasped": object }),
                };
                let tool = match &h.tool {
                    ToolState::FreeHand => json!(null),
                    ToolState::Holding { instrument, actuation, .. } => {
                        json!({ "instrument": instrument, "actuation": actuation })
                    }
                };
                let palm = h.corrected.as_ref().map(|f| to_array(&f.palm_center()));
                (
                    side.as_str().to_string(),
                    json!({
                        "attach": attach,
                        "tool": tool,
                        "palm": palm,
                        "aperture": h.metrics.map(|m| m.aperture),
                    }),
                )
            })
            .collect();
        json!({ "objects": objects, "hands": hands })
    }
}

/// Rotation (radians) about `axis` through `pivot` produced by moving
/// `point` by `displacement`.
fn hinge_angle(point: &Vec3, displacement: &Vec3, pivot: &Vec3, axis: &Vec3) -> f64 {
    let r = point - pivot;
    let r_perp = r - axis * r.dot(axis);
    let r2 = r_perp.norm_squared();
    if r2 < 1e-8 {
        return 0.0;
    }
    r.cross(displacement).dot(axis) / r2
}

/// Index of the primitive nearest to a world point.
fn part_at(obj: &SmartObject, shape: &[Primitive], point: &Vec3) -> usize {
    let local = obj.pose.to_local(point);
    let mut best = (0, f64::INFINITY);
    for (i, p) in shape.iter().enumerate() {
        let d = p.query(&local).distance;
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Anchored fixtures take the fingers' push as articulation drive. A
/// touch keeps the fixture driven even when it adds no motion, so a held
/// button stays down and a held lever keeps its offset.
fn anchored_drive(obj: &SmartObject, touches: &[(Side, Touch)], _dt: f64) -> Option<Drive> {
    if !obj.is_anchored() {
        return None;
    }
    let shape = obj.shape();
    let on_part: Vec<&Touch> = touches
        .iter()
        .map(|(_, t)| t)
        .filter(|t| t.object == obj.id && part_at(obj, &shape, &t.point) == 1)
        .collect();
    if on_part.is_empty() {
        return None;
    }
    let push = |t: &Touch| -t.normal * t.depth;
    let local_axis = |v: Vec3| obj.pose.orientation * v;
    let amount = match obj.kind() {
        ObjectKind::PushButton => {
            let up = local_axis(Vec3::y());
            on_part.iter().map(|t| push(t).dot(&-up).max(0.0)).fold(0.0, f64::max)
        }
        ObjectKind::LeverSwitch => {
            let pivot = obj.pose.to_world(&Vec3::new(0.0, 0.03, 0.0));
            let axis = local_axis(Vec3::x());
            on_part.iter().map(|t| hinge_angle(&t.point, &push(t), &pivot, &axis)).sum::<f64>().to_degrees()
        }
        ObjectKind::RotaryDial => {
            let center = obj.pose.position;
            let axis = local_axis(Vec3::y());
            let sum: f64 = on_part.iter().map(|t| hinge_angle(&t.point, &t.displacement, &center, &axis)).sum();
            (sum / on_part.len() as f64).to_degrees()
        }
        ObjectKind::PatientLimb => {
            let elbow = obj.pose.to_world(&Vec3::new(0.33, 0.0, 0.0));
            let axis = local_axis(Vec3::z());
            on_part.iter().map(|t| hinge_angle(&t.point, &push(t), &elbow, &axis)).sum::<f64>().to_degrees()
        }
        _ => return None,
    };
    Some(Drive::Increment { amount })
}
