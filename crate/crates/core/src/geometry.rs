//! Small linear-algebra vocabulary shared by every module.

use nalgebra::{UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// World "down" (gravity direction).
pub fn down() -> Vec3 {
    Vec3::new(0.0, -1.0, 0.0)
}

pub fn to_array(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn from_array(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Quaternion as `[w, x, y, z]`.
pub fn quat_to_array(q: &Quat) -> [f64; 4] {
    let q = q.quaternion();
    [q.w, q.i, q.j, q.k]
}

pub fn quat_from_array(a: [f64; 4]) -> Quat {
    UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(a[0], a[1], a[2], a[3]))
}

pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Rigid placement of a body in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Self { position, orientation }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::zeros(), Quat::identity())
    }

    pub fn at(position: Vec3) -> Self {
        Self::new(position, Quat::identity())
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.position + self.orientation * local
    }

    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        self.orientation.inverse() * (world - self.position)
    }

    pub fn dir_to_world(&self, local: &Vec3) -> Vec3 {
        self.orientation * local
    }

    pub fn compose(&self, child: &Pose) -> Pose {
        Pose::new(self.to_world(&child.position), self.orientation * child.orientation)
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose::new(-(inv * self.position), inv)
    }
}

/// Builds an orthonormal basis around `axis` (returned as the third column).
pub fn basis_from_axis(axis: &Vec3) -> (Vec3, Vec3, Vec3) {
    let w = axis.normalize();
    let helper = if w.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = helper.cross(&w).normalize();
    let v = w.cross(&u);
    (u, v, w)
}
