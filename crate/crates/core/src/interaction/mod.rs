//! Mediation between tracked hands and smart objects.
//!
//! The hand never drives objects directly. Each tick the raw landmarks are
//! corrected against object surfaces, intent rules decide whether a hand is
//! stuck to or grasping an object, held instruments are actuated by the hand
//! aperture, and only then do contact impulses and gravity move free bodies.

mod contacts;
mod events;
mod physics;
mod stickiness;
mod tool;
mod world;

pub use contacts::{resolve_contacts, ContactResolution, Touch};
pub use events::{DetachReason, WorldEvent};
pub use physics::{apply_impulse, bounding_radius, integrate, GroundContact, GROUND_FRICTION, SETTLE_SPEED};
pub use stickiness::{hand_distance, stickiness_update, StickyInput, StickyMemory};
pub use tool::{actuation, canonical_grip, is_drop_pose, tool_update, ToolInput, ToolOutcome};
pub use world::{hand_pose, HandState, StepOutput, World};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Pose, Vec3};
use crate::hand::{Side, PALM_LANDMARKS, TIP_LANDMARKS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteractionError {
    #[error("invalid interaction config: {0}")]
    Config(String),
    #[error("invalid step input: {0}")]
    Input(String),
    #[error(transparent)]
    Object(#[from] crate::objects::ObjectError),
    #[error(transparent)]
    Hand(#[from] crate::hand::HandError),
}

/// Hand regions that can touch objects. Finger regions are the tips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Palm,
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

impl Region {
    pub const ALL: [Region; 6] = [Region::Palm, Region::Thumb, Region::Index, Region::Middle, Region::Ring, Region::Little];

    pub fn landmarks(self) -> &'static [usize] {
        match self {
            Region::Palm => &PALM_LANDMARKS,
            Region::Thumb => &TIP_LANDMARKS[0..1],
            Region::Index => &TIP_LANDMARKS[1..2],
            Region::Middle => &TIP_LANDMARKS[2..3],
            Region::Ring => &TIP_LANDMARKS[3..4],
            Region::Little => &TIP_LANDMARKS[4..5],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Palm => "palm",
            Region::Thumb => "thumb",
            Region::Index => "index",
            Region::Middle => "middle",
            Region::Ring => "ring",
            Region::Little => "little",
        }
    }
}

/// Every landmark that belongs to some contact region.
pub fn region_landmarks() -> impl Iterator<Item = usize> {
    PALM_LANDMARKS.into_iter().chain(TIP_LANDMARKS)
}

/// First-contact report for one hand region against one object.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactEvent {
    pub side: Side,
    pub region: Region,
    pub object: String,
    pub point: Vec3,
    /// Outward object normal at the contact point.
    pub normal: Vec3,
    /// Closing speed along the normal at first contact, m/s.
    pub approach_speed: f64,
    /// Depth below the surface before correction, m.
    pub penetration: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttachState {
    Detached,
    /// Hand rendered on the surface at `anchor` (object frame).
    Stuck { object: String, anchor: Vec3 },
    /// Object slaved to the hand frame through `grip` (object pose in the
    /// hand frame).
    Grasped { object: String, grip: Pose },
}

impl AttachState {
    pub fn object(&self) -> Option<&str> {
        match self {
            AttachState::Detached => None,
            AttachState::Stuck { object, .. } | AttachState::Grasped { object, .. } => Some(object),
        }
    }

    pub fn is_grasping(&self, id: &str) -> bool {
        matches!(self, AttachState::Grasped { object, .. } if object == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ToolState {
    FreeHand,
    Holding { instrument: String, grip: Pose, actuation: f64, dwell: f64 },
}

impl ToolState {
    pub fn instrument(&self) -> Option<&str> {
        match self {
            ToolState::FreeHand => None,
            ToolState::Holding { instrument, .. } => Some(instrument),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InteractionConfig {
    pub snap_distance: f64,
    pub release_distance: f64,
    pub overshoot_tolerance: f64,
    /// Aperture at or below which a stuck hand grasps.
    pub grab_aperture: f64,
    /// Aperture at or above which a grasped plain object is let go.
    pub release_aperture: f64,
    /// Aperture must fall faster than this (1/s) to count as closing.
    pub closing_rate: f64,
    pub drop_normal_down: f64,
    pub drop_aperture: f64,
    pub drop_spread: f64,
    pub drop_dwell: f64,
    pub a_open: f64,
    pub a_closed: f64,
    /// Landmarks within this distance of a surface keep a contact alive.
    pub contact_margin: f64,
    /// A closing hand this far from a graspable object without attaching
    /// counts as a failed grab.
    pub grab_fail_radius: f64,
    pub restitution: f64,
    pub gravity: f64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self {
            snap_distance: 0.02,
            release_distance: 0.06,
            overshoot_tolerance: 0.10,
            grab_aperture: 0.4,
            release_aperture: 0.6,
            closing_rate: 0.01,
            drop_normal_down: 0.8,
            drop_aperture: 0.85,
            drop_spread: 0.7,
            drop_dwell: 0.15,
            a_open: 0.8,
            a_closed: 0.2,
            contact_margin: 0.003,
            grab_fail_radius: 0.15,
            restitution: 0.3,
            gravity: 9.81,
        }
    }
}

impl InteractionConfig {
    pub fn validate(&self) -> Result<(), InteractionError> {
        let fail = |m: &str| Err(InteractionError::Config(m.to_string()));
        let all = [
            self.snap_distance,
            self.release_distance,
            self.overshoot_tolerance,
            self.grab_aperture,
            self.release_aperture,
            self.closing_rate,
            self.drop_normal_down,
            self.drop_aperture,
            self.drop_spread,
            self.drop_dwell,
            self.a_open,
            self.a_closed,
            self.contact_margin,
            self.grab_fail_radius,
            self.restitution,
            self.gravity,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("non-finite value");
        }
        if !(0.0 < self.snap_distance && self.snap_distance < self.release_distance) {
            return fail("need 0 < snap < release");
        }
        if self.release_distance >= self.overshoot_tolerance {
            return fail("need release < overshoot");
        }
        if self.a_closed >= self.a_open {
            return fail("need a_closed < a_open");
        }
        if self.grab_aperture >= self.release_aperture {
            return fail("need grab aperture < release aperture");
        }
        if self.drop_dwell <= 0.0 || self.contact_margin < 0.0 || !(0.0..=1.0).contains(&self.restitution) {
            return fail("dwell, margin or restitution out of range");
        }
        Ok(())
    }
}
