//! The default object set, per-kind constants and geometry.

use super::articulation::{Articulation, ObjectKind, PLUNGER_MAX};
use super::shape::Primitive;
use super::{ObjectError, SmartObject};
use crate::geometry::{Pose, Quat, Vec3};

/// (mass, hardness, graspable) per kind. Mass `None` means anchored.
pub(super) fn physical(kind: ObjectKind) -> (Option<f64>, f64, bool) {
    match kind {
        ObjectKind::PushButton | ObjectKind::LeverSwitch | ObjectKind::RotaryDial => (None, 1.0, false),
        ObjectKind::Ball => (Some(0.057), 0.6, true),
        ObjectKind::Bat => (Some(0.9), 0.9, true),
        ObjectKind::Scissors => (Some(0.05), 1.0, true),
        ObjectKind::Syringe => (Some(0.02), 0.8, true),
        ObjectKind::Bandage => (Some(0.01), 0.1, true),
        ObjectKind::PatientLimb => (None, 0.3, false),
    }
}

pub const BALL_RADIUS: f64 = 0.0335;

fn rotate_x(deg: f64, v: [f64; 3]) -> [f64; 3] {
    let (s, c) = deg.to_radians().sin_cos();
    [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]]
}

fn rotate_z(deg: f64, v: [f64; 3]) -> [f64; 3] {
    let (s, c) = deg.to_radians().sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Object-frame geometry. Parts never overlap, so the union's closest point
/// is always on the outer surface. Local +y is up for anchored fixtures.
pub(super) fn shape(a: &Articulation) -> Vec<Primitive> {
    use Primitive::*;
    match a {
        Articulation::PushButton { travel, .. } => vec![
            Box { center: [0.0, 0.01, 0.0], half_extents: [0.03, 0.01, 0.03] },
            Box { center: [0.0, 0.033 - travel, 0.0], half_extents: [0.012, 0.005, 0.012] },
        ],
        Articulation::LeverSwitch { detents, index, offset } => {
            let pivot = [0.0, 0.03, 0.0];
            let tip = add(pivot, rotate_x(detents[*index] + offset, [0.0, 0.07, 0.0]));
            vec![
                Box { center: [0.0, 0.01, 0.0], half_extents: [0.025, 0.01, 0.04] },
                Capsule { a: pivot, b: tip, radius: 0.006 },
            ]
        }
        Articulation::RotaryDial { .. } => vec![
            Box { center: [0.0, 0.005, 0.0], half_extents: [0.035, 0.005, 0.035] },
            Cylinder { a: [0.0, 0.015, 0.0], b: [0.0, 0.04, 0.0], radius: 0.02 },
        ],
        Articulation::Ball => vec![Sphere { center: [0.0; 3], radius: BALL_RADIUS }],
        // Origin at the grip; the barrel extends along +y.
        Articulation::Bat => vec![
            Capsule { a: [0.0, -0.1, 0.0], b: [0.0, 0.19, 0.0], radius: 0.016 },
            Capsule { a: [0.0, 0.25, 0.0], b: [0.0, 0.72, 0.0], radius: 0.033 },
        ],
        // Finger loops around the origin, blades along +z.
        Articulation::Scissors { .. } => vec![
            Box { center: [0.0, 0.0, -0.02], half_extents: [0.03, 0.006, 0.025] },
            Box { center: [0.0, 0.0, 0.055], half_extents: [0.01, 0.003, 0.045] },
        ],
        // Barrel along z, needle toward +z, plunger rest behind.
        Articulation::Syringe { plunger_depth, .. } => {
            let rest = -0.045 - (PLUNGER_MAX - plunger_depth);
            vec![
                Cylinder { a: [0.0, 0.0, -0.04], b: [0.0, 0.0, 0.04], radius: 0.008 },
                Capsule { a: [0.0, 0.0, 0.045], b: [0.0, 0.0, 0.07], radius: 0.001 },
                Cylinder { a: [0.0, 0.0, rest - 0.004], b: [0.0, 0.0, rest], radius: 0.012 },
            ]
        }
        Articulation::Bandage { .. } => {
            vec![Cylinder { a: [-0.04, 0.0, 0.0], b: [0.04, 0.0, 0.0], radius: 0.025 }]
        }
        // Shoulder at the origin, arm along +x; the forearm lifts about the
        // elbow toward +y.
        Articulation::PatientLimb { lift_angle, .. } => {
            let elbow = [0.33, 0.0, 0.0];
            vec![
                Capsule { a: [0.0, 0.0, 0.0], b: [0.28, 0.0, 0.0], radius: 0.045 },
                Capsule {
                    a: add(elbow, rotate_z(*lift_angle, [0.05, 0.0, 0.0])),
                    b: add(elbow, rotate_z(*lift_angle, [0.31, 0.0, 0.0])),
                    radius: 0.04,
                },
            ]
        }
    }
}

/// The nine default objects laid out on a desk in front of the user.
pub fn catalog() -> Vec<SmartObject> {
    let at = |x: f64, y: f64, z: f64| Pose::at(Vec3::new(x, y, z));
    vec![
        SmartObject::new("button", ObjectKind::PushButton, at(-0.25, 0.9, 0.45)),
        SmartObject::new("lever", ObjectKind::LeverSwitch, at(-0.1, 0.9, 0.45)),
        SmartObject::new("dial", ObjectKind::RotaryDial, at(0.05, 0.9, 0.45)),
        SmartObject::new("ball", ObjectKind::Ball, at(0.2, 0.9335, 0.45)),
        SmartObject::new(
            "bat",
            ObjectKind::Bat,
            Pose::new(Vec3::new(0.45, 0.933, 0.5), Quat::from_axis_angle(&Vec3::z_axis(), -std::f64::consts::FRAC_PI_2)),
        ),
        SmartObject::new("scissors", ObjectKind::Scissors, at(-0.25, 0.906, 0.3)),
        SmartObject::new("syringe", ObjectKind::Syringe, at(-0.1, 0.912, 0.3)),
        SmartObject::new("bandage", ObjectKind::Bandage, at(0.05, 0.925, 0.3)),
        SmartObject::new("limb", ObjectKind::PatientLimb, at(0.15, 0.945, 0.3)),
    ]
}

/// Parses a JSON array of object specs and validates every object.
pub fn catalog_from_json(text: &str) -> Result<Vec<SmartObject>, ObjectError> {
    let objects: Vec<SmartObject> = serde_json::from_str(text).map_err(|e| ObjectError::Parse(e.to_string()))?;
    let mut ids: Vec<&str> = objects.iter().map(|o| o.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ObjectError::Invalid(format!("duplicate object id {}", w[0])));
    }
    Ok(objects)
}

pub fn catalog_to_json(objects: &[SmartObject]) -> String {
    serde_json::to_string_pretty(objects).expect("objects serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_every_kind_once() {
        let c = catalog();
        assert_eq!(c.len(), 9);
        for kind in ObjectKind::ALL {
            assert_eq!(c.iter().filter(|o| o.kind() == kind).count(), 1, "{kind:?}");
        }
        for o in &c {
            o.validate().unwrap();
        }
    }

    #[test]
    fn json_catalog_round_trip() {
        let text = catalog_to_json(&catalog());
        assert_eq!(catalog_from_json(&text).unwrap(), catalog());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut c = catalog();
        c[1].id = c[0].id.clone();
        assert!(catalog_from_json(&catalog_to_json(&c)).is_err());
    }
}
