//! Exact signed-distance primitives in an object's local frame.

use serde::{Deserialize, Serialize};

use crate::geometry::{basis_from_axis, Pose, Vec3};

/// Result of a surface query. `distance` is negative inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub distance: f64,
    pub point: Vec3,
    pub normal: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    Sphere { center: [f64; 3], radius: f64 },
    /// Axis-aligned in the object frame.
    Box { center: [f64; 3], half_extents: [f64; 3] },
    /// Segment `a`-`b` swept by `radius`.
    Capsule { a: [f64; 3], b: [f64; 3], radius: f64 },
    /// Flat-capped cylinder between cap centers `a` and `b`.
    Cylinder { a: [f64; 3], b: [f64; 3], radius: f64 },
}

fn v(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Unit vector orthogonal to `axis`, used where the normal is undefined.
fn any_perpendicular(axis: &Vec3) -> Vec3 {
    basis_from_axis(axis).0
}

fn outside_hit(p: &Vec3, closest: Vec3) -> SurfaceHit {
    let d = p - closest;
    let distance = d.norm();
    SurfaceHit { distance, point: closest, normal: d / distance }
}

impl Primitive {
    pub fn query(&self, p: &Vec3) -> SurfaceHit {
        match *self {
            Primitive::Sphere { center, radius } => sphere(p, &v(center), radius),
            Primitive::Box { center, half_extents } => cuboid(p, &v(center), &v(half_extents)),
            Primitive::Capsule { a, b, radius } => capsule(p, &v(a), &v(b), radius),
            Primitive::Cylinder { a, b, radius } => cylinder(p, &v(a), &v(b), radius),
        }
    }

    /// Lowest world height of the primitive when its object sits at `pose`.
    pub fn lowest(&self, pose: &Pose) -> f64 {
        let y = |local: [f64; 3]| pose.to_world(&v(local)).y;
        match *self {
            Primitive::Sphere { center, radius } => y(center) - radius,
            Primitive::Capsule { a, b, radius } => y(a).min(y(b)) - radius,
            Primitive::Box { center, half_extents: h } => {
                let reach: f64 = (0..3).map(|k| pose.dir_to_world(&Vec3::ith(k, h[k])).y.abs()).sum();
                y(center) - reach
            }
            Primitive::Cylinder { a, b, radius } => {
                let axis = pose.dir_to_world(&(v(b) - v(a)).normalize());
                let rim = radius * (1.0 - axis.y * axis.y).max(0.0).sqrt();
                y(a).min(y(b)) - rim
            }
        }
    }

    /// Surface area, for sampling.
    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Primitive::Sphere { radius, .. } => 4.0 * PI * radius * radius,
            Primitive::Box { half_extents: h, .. } => 8.0 * (h[0] * h[1] + h[1] * h[2] + h[0] * h[2]),
            Primitive::Capsule { a, b, radius } => {
                2.0 * PI * radius * (v(b) - v(a)).norm() + 4.0 * PI * radius * radius
            }
            Primitive::Cylinder { a, b, radius } => {
                2.0 * PI * radius * (v(b) - v(a)).norm() + 2.0 * PI * radius * radius
            }
        }
    }
}

fn sphere(p: &Vec3, c: &Vec3, r: f64) -> SurfaceHit {
    let d = p - c;
    let n = d.norm();
    let normal = if n > 0.0 { d / n } else { Vec3::y() };
    let point = c + normal * r;
    if n > r {
        // Same closest point; normal recomputed from it for exact continuity.
        return outside_hit(p, point);
    }
    SurfaceHit { distance: n - r, point, normal }
}

fn cuboid(p: &Vec3, c: &Vec3, h: &Vec3) -> SurfaceHit {
    let q = p - c;
    let clamped = Vec3::from_fn(|k, _| q[k].clamp(-h[k], h[k]));
    if clamped != q {
        return outside_hit(p, c + clamped);
    }
    // Inside (or on the surface): leave through the nearest face.
    let mut best = 0;
    let mut gap = f64::INFINITY;
    for k in 0..3 {
        let g = h[k] - q[k].abs();
        if g < gap {
            gap = g;
            best = k;
        }
    }
    let sign = if q[best] >= 0.0 { 1.0 } else { -1.0 };
    let mut point = q;
    point[best] = sign * h[best];
    SurfaceHit { distance: -gap, point: c + point, normal: Vec3::ith(best, sign) }
}

fn capsule(p: &Vec3, a: &Vec3, b: &Vec3, r: f64) -> SurfaceHit {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let on_axis = a + ab * t;
    let d = p - on_axis;
    let n = d.norm();
    let normal = if n > 0.0 {
        d / n
    } else if len2 > 0.0 {
        any_perpendicular(&ab)
    } else {
        Vec3::y()
    };
    let point = on_axis + normal * r;
    if n > r {
        return outside_hit(p, point);
    }
    SurfaceHit { distance: n - r, point, normal }
}

fn cylinder(p: &Vec3, a: &Vec3, b: &Vec3, r: f64) -> SurfaceHit {
    let axis_full = b - a;
    let half = axis_full.norm() / 2.0;
    let axis = axis_full / (2.0 * half);
    let center = a + axis_full / 2.0;
    let q = p - center;
    let h = q.dot(&axis);
    let radial_vec = q - axis * h;
    let rho = radial_vec.norm();
    let radial = if rho > 0.0 { radial_vec / rho } else { any_perpendicular(&axis) };
    let cap_sign = if h >= 0.0 { 1.0 } else { -1.0 };

    let outside_side = rho > r;
    let outside_cap = h.abs() > half;
    if outside_side || outside_cap {
        let hh = h.clamp(-half, half);
        let rr = rho.min(r);
        return outside_hit(p, center + axis * hh + radial * rr);
    }
    let side_gap = r - rho;
    let cap_gap = half - h.abs();
    if side_gap <= cap_gap {
        SurfaceHit { distance: -side_gap, point: center + axis * h + radial * r, normal: radial }
    } else {
        SurfaceHit {
            distance: -cap_gap,
            point: center + axis * (cap_sign * half) + radial * rho,
            normal: axis * cap_sign,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_outside_point() {
        let s = Primitive::Sphere { center: [0.0; 3], radius: 0.0335 };
        let hit = s.query(&Vec3::new(0.1, 0.0, 0.0));
        assert_relative_eq!(hit.distance, 0.0665, epsilon = 1e-15);
        assert_relative_eq!(hit.normal, Vec3::x(), epsilon = 1e-15);
    }

    #[test]
    fn box_center_is_min_half_extent_deep() {
        let b = Primitive::Box { center: [1.0, 2.0, 3.0], half_extents: [0.3, 0.1, 0.2] };
        let hit = b.query(&Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(hit.distance, -0.1);
        assert_eq!(hit.normal.y.abs(), 1.0);
    }

    #[test]
    fn cylinder_regions() {
        let c = Primitive::Cylinder { a: [0.0, 0.0, 0.0], b: [0.0, 0.2, 0.0], radius: 0.05 };
        // Beside the side wall.
        let hit = c.query(&Vec3::new(0.08, 0.1, 0.0));
        assert_relative_eq!(hit.distance, 0.03, epsilon = 1e-15);
        // Above the cap.
        let hit = c.query(&Vec3::new(0.01, 0.25, 0.0));
        assert_relative_eq!(hit.distance, 0.05, epsilon = 1e-15);
        assert_relative_eq!(hit.normal, Vec3::y(), epsilon = 1e-15);
        // Beyond the rim edge.
        let hit = c.query(&Vec3::new(0.08, 0.24, 0.0));
        assert_relative_eq!(hit.distance, 0.05, epsilon = 1e-15);
        // Inside near the bottom cap.
        let hit = c.query(&Vec3::new(0.0, 0.01, 0.0));
        assert_relative_eq!(hit.distance, -0.01, epsilon = 1e-15);
        assert_relative_eq!(hit.normal, -Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn capsule_on_axis_has_unit_normal() {
        let c = Primitive::Capsule { a: [0.0; 3], b: [0.0, 0.0, 1.0], radius: 0.1 };
        let hit = c.query(&Vec3::new(0.0, 0.0, 0.5));
        assert_relative_eq!(hit.distance, -0.1);
        assert_relative_eq!(hit.normal.norm(), 1.0, epsilon = 1e-12);
    }
}
