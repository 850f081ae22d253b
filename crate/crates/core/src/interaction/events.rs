use serde_json::{json, Value};

use super::ContactEvent;
use crate::geometry::{to_array, Vec3};
use crate::hand::Side;
use crate::objects::ArticulationEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetachReason {
    Retreat,
    Drop,
    Missing,
}

impl DetachReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DetachReason::Retreat => "retreat",
            DetachReason::Drop => "drop",
            DetachReason::Missing => "missing",
        }
    }
}

/// Everything the world reports for one tick, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub enum WorldEvent {
    Contact(ContactEvent),
    Stuck { side: Side, object: String, anchor: Vec3 },
    Grasped { side: Side, object: String },
    /// A plain object let go by re-opening the hand.
    Released { side: Side, object: String, velocity: Vec3 },
    Detached { side: Side, object: String, reason: DetachReason },
    ToolPicked { side: Side, object: String },
    ToolDropped { side: Side, object: String, velocity: Vec3 },
    GrabFailed { side: Side, object: String, distance: f64 },
    Articulation(ArticulationEvent),
    /// Scissors closed with the blade on the bandage.
    BandageCut { side: Side },
    /// Plunger fully depressed with the needle at the limb.
    InjectionGiven { side: Side },
    /// A free graspable object reached the ground.
    ObjectDropped { object: String, speed: f64 },
    Warning { message: String },
    Error { message: String },
}

impl WorldEvent {
    pub fn type_name(&self) -> &'static str {
        match self {
            WorldEvent::Contact(_) => "contact",
            WorldEvent::Stuck { .. } => "stuck",
            WorldEvent::Grasped { .. } => "grasped",
            WorldEvent::Released { .. } => "released",
            WorldEvent::Detached { .. } => "detached",
            WorldEvent::ToolPicked { .. } => "tool_picked",
            WorldEvent::ToolDropped { .. } => "tool_dropped",
            WorldEvent::GrabFailed { .. } => "grab_failed",
            WorldEvent::Articulation(a) => a.kind.as_str(),
            WorldEvent::BandageCut { .. } => "bandage_cut",
            WorldEvent::InjectionGiven { .. } => "injection_given",
            WorldEvent::ObjectDropped { .. } => "object_dropped",
            WorldEvent::Warning { .. } => "warning",
            WorldEvent::Error { .. } => "error",
        }
    }

    /// Payload object; serde_json maps keep keys sorted.
    pub fn data(&self) -> Value {
        match self {
            WorldEvent::Contact(c) => json!({
                "side": c.side.as_str(),
                "region": c.region.as_str(),
                "object": c.object,
                "point": to_array(&c.point),
                "normal": to_array(&c.normal),
                "approach_speed": c.approach_speed,
                "penetration": c.penetration,
            }),
            WorldEvent::Stuck { side, object, anchor } => {
                json!({ "side": side.as_str(), "object": object, "anchor": to_array(anchor) })
            }
            WorldEvent::Grasped { side, object } | WorldEvent::ToolPicked { side, object } => {
                json!({ "side": side.as_str(), "object": object })
            }
            WorldEvent::Released { side, object, velocity } | WorldEvent::ToolDropped { side, object, velocity } => {
                json!({ "side": side.as_str(), "object": object, "velocity": to_array(velocity) })
            }
            WorldEvent::Detached { side, object, reason } => {
                json!({ "side": side.as_str(), "object": object, "reason": reason.as_str() })
            }
            WorldEvent::GrabFailed { side, object, distance } => {
                json!({ "side": side.as_str(), "object": object, "distance": distance })
            }
            WorldEvent::Articulation(a) => json!({ "object": a.object, "value": a.value }),
            WorldEvent::BandageCut { side } | WorldEvent::InjectionGiven { side } => json!({ "side": side.as_str() }),
            WorldEvent::ObjectDropped { object, speed } => json!({ "object": object, "speed": speed }),
            WorldEvent::Warning { message } | WorldEvent::Error { message } => json!({ "message": message }),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, WorldEvent::Error { .. })
    }
}
