use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::log::LogLine;
use super::HarnessError;
use crate::geometry::{Pose, Vec3};
use crate::objects::{ObjectKind, SmartObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Panel,
    Juggle,
    Catch,
    Medic,
}

/// Completion rule for one checklist entry, checked against log lines.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskPredicate {
    /// A line of this type, optionally about this object.
    Event { kind: &'static str, object: Option<&'static str> },
    /// `released` of the object moving up faster than `min_vy`.
    ReleasedUpward { object: &'static str, min_vy: f64 },
    /// `grasped` of the object by the hand that did not complete the
    /// previous task.
    GraspedByOtherHand { object: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: &'static str,
    pub predicate: TaskPredicate,
}

impl Task {
    /// `previous_side` is the hand that completed the task before this one.
    /// Returns the completing side ("" when the line names none).
    /// Whether `line` completes the task. `previous_side` is the hand that
    /// completed the task before this one.
    pub fn check(&self, line: &LogLine, previous_side: Option<&str>) -> bool {
        let side = || line.data.get("side").and_then(Value::as_str);
        let object_is = |o: &str| line.data.get("object").and_then(Value::as_str) == Some(o);
        let hit = match &self.predicate {
            TaskPredicate::Event { kind, object } => line.kind == *kind && object.is_none_or(object_is),
            TaskPredicate::ReleasedUpward { object, min_vy } => {
                line.kind == "released"
                    && object_is(object)
                    && line.data.pointer("/velocity/1").and_then(Value::as_f64).is_some_and(|vy| vy > *min_vy)
            }
            TaskPredicate::GraspedByOtherHand { object } => {
                line.kind == "grasped" && object_is(object) && previous_side.is_some_and(|p| side().is_some_and(|s| s != p))
            }
        };
        hit
    }
}

/// Virtual pitcher and the catch rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatchConfig {
    pub pitcher: [f64; 3],
    /// Velocity of the first pitch; later pitches are scaled and nudged
    /// sideways from the seed.
    pub first_velocity: [f64; 3],
    pub speed_jitter: f64,
    pub lateral_jitter: f64,
    /// Ball center to palm center distance that counts as in the hand.
    pub catch_radius: f64,
    /// The aperture crossing and the ball being in the hand must fall
    /// within this many seconds of each other.
    pub catch_window: f64,
    pub catch_aperture: f64,
    /// A return throw must cross the pitcher's plane this close to the pitcher.
    pub return_radius: f64,
    /// Seconds between a resolved pitch and the next.
    pub pitch_delay: f64,
    /// A pitch is missed once the ball is this far behind the catcher.
    pub behind_z: f64,
}

impl Default for CatchConfig {
    fn default() -> Self {
        Self {
            pitcher: [0.0, 1.5, 8.0],
            first_velocity: [0.0, 2.0, -16.0],
            speed_jitter: 0.1,
            lateral_jitter: 0.3,
            catch_radius: 0.06,
            catch_window: 0.1,
            catch_aperture: 0.4,
            return_radius: 1.0,
            pitch_delay: 1.0,
            behind_z: -2.0,
        }
    }
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Panel, Scenario::Juggle, Scenario::Catch, Scenario::Medic];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Panel => "panel",
            Scenario::Juggle => "juggle",
            Scenario::Catch => "catch",
            Scenario::Medic => "medic",
        }
    }

    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| HarnessError::Input(format!("unknown scenario {s:?} (panel, juggle, catch, medic)")))
    }

    /// Object layout. The user stands at the origin facing +z; the desk
    /// top is at 0.9 m.
    pub fn objects(self) -> Vec<SmartObject> {
        let at = |x: f64, y: f64, z: f64| Pose::at(Vec3::new(x, y, z));
        match self {
            Scenario::Panel => vec![
                SmartObject::new("button", ObjectKind::PushButton, at(-0.3, 0.9, 0.4)),
                SmartObject::new("lever", ObjectKind::LeverSwitch, at(0.0, 0.9, 0.4)),
                SmartObject::new("dial", ObjectKind::RotaryDial, at(0.25, 0.9, 0.4)),
            ],
            Scenario::Juggle => vec![SmartObject::new("ball", ObjectKind::Ball, at(0.1, 0.9335, 0.35))],
            Scenario::Catch => {
                let p = CatchConfig::default().pitcher;
                vec![SmartObject::new("ball", ObjectKind::Ball, at(p[0], p[1], p[2]))]
            }
            Scenario::Medic => vec![
                SmartObject::new("limb", ObjectKind::PatientLimb, at(-0.05, 0.945, 0.5)),
                SmartObject::new("bandage", ObjectKind::Bandage, at(-0.22, 0.925, 0.5)),
                SmartObject::new("scissors", ObjectKind::Scissors, at(-0.3, 0.906, 0.25)),
                SmartObject::new("syringe", ObjectKind::Syringe, at(0.25, 0.912, 0.25)),
            ],
        }
    }

    /// Ordered checklist; each task starts when the previous one completes.
    pub fn tasks(self) -> Vec<Task> {
        use TaskPredicate::*;
        let event = |name, kind| Task { name, predicate: Event { kind, object: None } };
        match self {
            Scenario::Panel => {
                vec![event("press_button", "button_pressed"), event("flip_lever", "lever_toggled"), event("set_dial", "dial_set")]
            }
            Scenario::Juggle => vec![
                Task { name: "pick_up", predicate: Event { kind: "grasped", object: Some("ball") } },
                Task { name: "toss", predicate: ReleasedUpward { object: "ball", min_vy: 0.5 } },
                Task { name: "hand_over", predicate: GraspedByOtherHand { object: "ball" } },
            ],
            Scenario::Catch => vec![event("catch", "catch_success"), event("return_throw", "throw_returned")],
            Scenario::Medic => vec![
                Task { name: "palpate", predicate: Event { kind: "contact", object: Some("limb") } },
                event("cut_bandage", "bandage_cut"),
                event("inject", "injection_given"),
            ],
        }
    }

    pub fn catch_config(self) -> Option<CatchConfig> {
        (self == Scenario::Catch).then(CatchConfig::default)
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::parse(s)
    }
}
