//! Smart objects: articulated virtual objects with exact surface queries.
//!
//! Geometry is a union of disjoint primitives in the object frame. Movable
//! parts (button cap, lever arm, plunger rest, forearm) are placed from the
//! articulation state, so what the fingers touch follows the mechanism.

mod articulation;
mod catalog;
mod shape;

pub use articulation::{
    Articulation, ArticulationEvent, ArticulationEventKind, Drive, ObjectKind, BUTTON_RETURN_SPEED, BUTTON_TRAVEL,
    DIAL_MAX, LIMB_LIFTED, LIMB_MAX, PLUNGER_MAX, SCISSORS_MAX, STRETCH_MAX, STRETCH_MIN, WRAP_TURNS,
};
pub use catalog::{catalog, catalog_from_json, catalog_to_json, BALL_RADIUS};
pub use shape::{Primitive, SurfaceHit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{quat_from_array, quat_to_array, Pose, Quat, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectError {
    #[error("dispatch error: {0}")]
    Dispatch(String),
    #[error("invalid object: {0}")]
    Invalid(String),
    #[error("object spec parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObjectSpec", into = "ObjectSpec")]
pub struct SmartObject {
    pub id: String,
    pub articulation: Articulation,
    pub pose: Pose,
    /// `None` for anchored objects (infinite mass).
    pub mass: Option<f64>,
    pub hardness: f64,
    pub graspable: bool,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    /// Free bodies integrate under gravity; others rest on implicit supports
    /// until struck or released.
    pub dynamic: bool,
}

/// Serialized form: same field names, arrays for vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ObjectSpec {
    id: String,
    #[serde(flatten)]
    articulation: Articulation,
    position: [f64; 3],
    #[serde(default = "identity_quat")]
    orientation: [f64; 4],
    mass: Option<f64>,
    hardness: f64,
    graspable: bool,
    #[serde(default)]
    velocity: [f64; 3],
    #[serde(default)]
    angular_velocity: [f64; 3],
    #[serde(default)]
    dynamic: bool,
}

fn identity_quat() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl TryFrom<ObjectSpec> for SmartObject {
    type Error = ObjectError;

    fn try_from(s: ObjectSpec) -> Result<Self, ObjectError> {
        let norm = s.orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= 1e-6) {
            return Err(ObjectError::Invalid(format!("{}: orientation norm {norm} is not 1", s.id)));
        }
        let obj = SmartObject {
            id: s.id,
            articulation: s.articulation,
            pose: Pose::new(s.position.into(), quat_from_array(s.orientation)),
            mass: s.mass,
            hardness: s.hardness,
            graspable: s.graspable,
            velocity: s.velocity.into(),
            angular_velocity: s.angular_velocity.into(),
            dynamic: s.dynamic,
        };
        obj.validate()?;
        Ok(obj)
    }
}

impl From<SmartObject> for ObjectSpec {
    fn from(o: SmartObject) -> Self {
        ObjectSpec {
            id: o.id,
            articulation: o.articulation,
            position: o.pose.position.into(),
            orientation: quat_to_array(&o.pose.orientation),
            mass: o.mass,
            hardness: o.hardness,
            graspable: o.graspable,
            velocity: o.velocity.into(),
            angular_velocity: o.angular_velocity.into(),
            dynamic: o.dynamic,
        }
    }
}

impl SmartObject {
    /// An object of `kind` in its rest articulation with catalog physical constants.
    pub fn new(id: impl Into<String>, kind: ObjectKind, pose: Pose) -> Self {
        let (mass, hardness, graspable) = catalog::physical(kind);
        SmartObject {
            id: id.into(),
            articulation: Articulation::rest(kind),
            pose,
            mass,
            hardness,
            graspable,
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            dynamic: false,
        }
    }

    pub fn kind(&self) -> ObjectKind {
        self.articulation.kind()
    }

    pub fn is_anchored(&self) -> bool {
        self.mass.is_none()
    }

    pub fn validate(&self) -> Result<(), ObjectError> {
        let fail = |m: String| Err(ObjectError::Invalid(format!("{}: {m}", self.id)));
        if self.id.is_empty() {
            return fail("empty id".into());
        }
        if let Some(m) = self.mass {
            if !(m > 0.0 && m.is_finite()) {
                return fail(format!("mass {m} must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.hardness) {
            return fail(format!("hardness {} outside [0, 1]", self.hardness));
        }
        if (self.pose.orientation.norm() - 1.0).abs() > 1e-9 {
            return fail("orientation is not a unit quaternion".into());
        }
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if !finite(&self.pose.position) || !finite(&self.velocity) || !finite(&self.angular_velocity) {
            return fail("non-finite state".into());
        }
        if self.is_anchored() && self.dynamic {
            return fail("anchored objects cannot be dynamic".into());
        }
        self.articulation.validate()
    }

    /// Primitives in the object frame for the current articulation.
    pub fn shape(&self) -> Vec<Primitive> {
        catalog::shape(&self.articulation)
    }

    /// Signed distance, closest surface point and outward normal, in world
    /// coordinates. Union of primitives: the nearest one owns the answer.
    pub fn surface_query(&self, p: &Vec3) -> SurfaceHit {
        self.surface_query_in(&self.shape(), p)
    }

    /// Same as [`surface_query`](Self::surface_query) with a precomputed shape.
    pub fn surface_query_in(&self, shape: &[Primitive], p: &Vec3) -> SurfaceHit {
        let local = self.pose.to_local(p);
        let mut best: Option<SurfaceHit> = None;
        for prim in shape {
            let hit = prim.query(&local);
            if best.is_none_or(|b| hit.distance < b.distance) {
                best = Some(hit);
            }
        }
        let hit = best.expect("object geometry is never empty");
        SurfaceHit {
            distance: hit.distance,
            point: self.pose.to_world(&hit.point),
            normal: self.pose.dir_to_world(&hit.normal),
        }
    }

    pub fn project_to_surface(&self, p: &Vec3) -> Vec3 {
        self.surface_query(p).point
    }

    /// Lowest world height of the geometry.
    pub fn lowest_point(&self) -> f64 {
        self.shape().iter().map(|p| p.lowest(&self.pose)).fold(f64::INFINITY, f64::min)
    }

    /// Applies a drive (or none) for one tick.
    pub fn articulate(&mut self, drive: Option<&Drive>, dt: f64) -> Result<Vec<ArticulationEvent>, ObjectError> {
        let kinds = self.articulation.step(drive, dt)?;
        let value = match &self.articulation {
            Articulation::LeverSwitch { index, .. } => *index as f64,
            a => a.value().unwrap_or(0.0),
        };
        Ok(kinds.into_iter().map(|kind| ArticulationEvent { object: self.id.clone(), kind, value }).collect())
    }

    pub fn orientation(&self) -> Quat {
        self.pose.orientation
    }
}
