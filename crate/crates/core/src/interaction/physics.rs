use crate::geometry::{Quat, Vec3};
use crate::objects::{Primitive, SmartObject};

/// Horizontal and angular velocity kept per tick of ground contact.
pub const GROUND_FRICTION: f64 = 0.8;
/// Bounce speeds below this are absorbed; a body slower than this on the
/// ground comes to rest.
pub const SETTLE_SPEED: f64 = 0.1;

/// Pushing-only contact impulse. Sets the object's velocity along the
/// inward normal to the hand's when the hand is closing on it; returns the
/// impulse, or `None` for anchored objects and separating contacts.
pub fn apply_impulse(obj: &mut SmartObject, point: &Vec3, normal: &Vec3, hand_velocity: &Vec3) -> Option<Vec3> {
    let m = obj.mass?;
    let inward = -normal;
    let closing = (hand_velocity - obj.velocity).dot(&inward);
    if closing <= 0.0 {
        return None;
    }
    let j = inward * (m * closing);
    obj.velocity += j / m;
    let radius = bounding_radius(&obj.shape());
    let inertia = 0.4 * m * radius * radius;
    let r = point - obj.pose.position;
    obj.angular_velocity += r.cross(&j) / inertia;
    obj.dynamic = true;
    Some(j)
}

/// Radius of a sphere about the object origin that encloses the geometry.
pub fn bounding_radius(shape: &[Primitive]) -> f64 {
    let norm = |a: &[f64; 3]| Vec3::from(*a).norm();
    shape
        .iter()
        .map(|p| match p {
            Primitive::Sphere { center, radius } => norm(center) + radius,
            Primitive::Box { center, half_extents } => norm(center) + norm(half_extents),
            Primitive::Capsule { a, b, radius } | Primitive::Cylinder { a, b, radius } => {
                norm(a).max(norm(b)) + radius
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundContact {
    /// Speed into the ground before the bounce.
    pub impact_speed: f64,
    pub settled: bool,
}

/// One closed-form constant-acceleration step for a free body, then the
/// ground plane at y = 0.
pub fn integrate(obj: &mut SmartObject, gravity: &Vec3, dt: f64, restitution: f64) -> Option<GroundContact> {
    if !obj.dynamic {
        return None;
    }
    obj.pose.position += obj.velocity * dt + gravity * (0.5 * dt * dt);
    obj.velocity += gravity * dt;
    let spin = obj.angular_velocity * dt;
    if spin.norm() > 0.0 {
        obj.pose.orientation = Quat::from_scaled_axis(spin) * obj.pose.orientation;
    }

    let lowest = obj.lowest_point();
    if lowest >= 0.0 {
        return None;
    }
    obj.pose.position.y -= lowest;
    let impact_speed = (-obj.velocity.y).max(0.0);
    obj.velocity.y = restitution * impact_speed;
    if obj.velocity.y < SETTLE_SPEED {
        obj.velocity.y = 0.0;
    }
    obj.velocity.x *= GROUND_FRICTION;
    obj.velocity.z *= GROUND_FRICTION;
    obj.angular_velocity *= GROUND_FRICTION;
    let settled = obj.velocity.norm() < SETTLE_SPEED && obj.angular_velocity.norm() < SETTLE_SPEED;
    if settled {
        obj.velocity = Vec3::zeros();
        obj.angular_velocity = Vec3::zeros();
        obj.dynamic = false;
    }
    Some(GroundContact { impact_speed, settled })
}
