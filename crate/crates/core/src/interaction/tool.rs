use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use super::{AttachState, InteractionConfig, ToolState, WorldEvent};
use crate::geometry::{down, Pose, Quat, Vec3};
use crate::hand::{PoseMetrics, Side};
use crate::objects::{Drive, ObjectKind, SmartObject, PLUNGER_MAX, SCISSORS_MAX};

/// Inter-palm distance that counts as an unstretched bandage.
pub const BANDAGE_REST: f64 = 0.2;

/// Slack on the dwell comparison so nine 1/60 s ticks make 0.15 s.
const DWELL_EPS: f64 = 1e-9;

/// 0 with the hand open past `a_open`, 1 when closed past `a_closed`,
/// linear in between.
pub fn actuation(aperture: f64, config: &InteractionConfig) -> f64 {
    ((config.a_open - aperture) / (config.a_open - config.a_closed)).clamp(0.0, 1.0)
}

pub fn is_drop_pose(metrics: &PoseMetrics, config: &InteractionConfig) -> bool {
    metrics.palm_normal.dot(&down()) >= config.drop_normal_down
        && metrics.aperture >= config.drop_aperture
        && metrics.spread >= config.drop_spread
}

/// Instrument pose in the hand frame (palm center origin, +y along the
/// fingers, +z out of the palm).
pub fn canonical_grip(kind: ObjectKind) -> Pose {
    let rx = |a: f64| Quat::from_axis_angle(&Vec3::x_axis(), a);
    let rz = |a: f64| Quat::from_axis_angle(&Vec3::z_axis(), a);
    match kind {
        // Blades and needle point along the fingers.
        ObjectKind::Scissors => Pose::new(Vec3::new(0.0, 0.03, 0.035), rx(-FRAC_PI_2)),
        ObjectKind::Syringe => Pose::new(Vec3::new(0.0, 0.02, 0.03), rx(-FRAC_PI_2)),
        // Handle across the palm, barrel out past the thumb side.
        ObjectKind::Bat => Pose::new(Vec3::new(0.0, 0.02, 0.03), rz(-FRAC_PI_2)),
        ObjectKind::Bandage => Pose::new(Vec3::new(0.0, 0.03, 0.04), Quat::identity()),
        _ => Pose::at(Vec3::new(0.0, 0.0, 0.04)),
    }
}

pub struct ToolInput<'a> {
    pub side: Side,
    pub attach: &'a AttachState,
    pub metrics: &'a PoseMetrics,
    pub objects: &'a BTreeMap<String, SmartObject>,
    pub hand_pose: Pose,
    pub previous_hand_pose: Option<Pose>,
    pub palm: Vec3,
    pub other_palm: Option<Vec3>,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolOutcome {
    pub state: ToolState,
    pub drive: Option<(String, Drive)>,
    pub events: Vec<WorldEvent>,
    /// Instrument let go by the drop pose this tick.
    pub dropped: Option<String>,
}

pub fn tool_update(tool: &ToolState, input: &ToolInput, config: &InteractionConfig) -> ToolOutcome {
    let mut events = Vec::new();
    let held = match (tool, input.attach) {
        (ToolState::FreeHand, AttachState::Grasped { object, .. }) => input
            .objects
            .get(object)
            .filter(|o| o.graspable && o.kind().is_instrument())
            .map(|o| {
                events.push(WorldEvent::ToolPicked { side: input.side, object: object.clone() });
                (o, 0.0)
            }),
        (ToolState::Holding { instrument, dwell, .. }, attach) if attach.is_grasping(instrument) => {
            input.objects.get(instrument).map(|o| (o, *dwell))
        }
        _ => None,
    };
    let Some((obj, dwell)) = held else {
        return ToolOutcome { state: ToolState::FreeHand, drive: None, events, dropped: None };
    };

    let kind = obj.kind();
    let act = actuation(input.metrics.aperture, config);
    let drive = match kind {
        ObjectKind::Scissors => Some(Drive::Set { value: SCISSORS_MAX * (1.0 - act) }),
        ObjectKind::Syringe => Some(Drive::Set { value: PLUNGER_MAX * act }),
        ObjectKind::Bandage => Some(bandage_drive(obj, input)),
        _ => None,
    };
    let drive = drive.map(|d| (obj.id.clone(), d));

    let dwell = if is_drop_pose(input.metrics, config) { dwell + input.dt } else { 0.0 };
    if dwell >= config.drop_dwell - DWELL_EPS {
        events.push(WorldEvent::ToolDropped { side: input.side, object: obj.id.clone(), velocity: Vec3::zeros() });
        return ToolOutcome { state: ToolState::FreeHand, drive, events, dropped: Some(obj.id.clone()) };
    }
    let state = ToolState::Holding { instrument: obj.id.clone(), grip: canonical_grip(kind), actuation: act, dwell };
    ToolOutcome { state, drive, events, dropped: None }
}

/// Stretch from the distance to the other palm, wrap from hand roll about
/// the roll axis since the previous tick.
fn bandage_drive(obj: &SmartObject, input: &ToolInput) -> Drive {
    let stretch_ratio = input.other_palm.map_or(1.0, |o| (o - input.palm).norm() / BANDAGE_REST);
    let axis = obj.pose.orientation * Vec3::x();
    let wrap_angle = input.previous_hand_pose.map_or(0.0, |prev| {
        let delta = input.hand_pose.orientation * prev.orientation.inverse();
        delta.scaled_axis().dot(&axis)
    });
    Drive::Bandage { stretch_ratio, wrap_angle }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn actuation_endpoints_are_exact() {
        let c = InteractionConfig::default();
        assert_eq!(actuation(c.a_open, &c), 0.0);
        assert_eq!(actuation(c.a_closed, &c), 1.0);
        assert_eq!(actuation(1.0, &c), 0.0);
        assert_eq!(actuation(0.0, &c), 1.0);
    }

    #[test]
    fn grips_point_blades_along_fingers() {
        let g = canonical_grip(ObjectKind::Scissors);
        assert!((g.dir_to_world(&Vec3::z()) - Vec3::y()).norm() < 1e-12);
        let b = canonical_grip(ObjectKind::Bat);
        assert!((b.dir_to_world(&Vec3::y()) - Vec3::x()).norm() < 1e-12);
    }
}
