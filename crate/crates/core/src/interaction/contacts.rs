use std::collections::{BTreeMap, BTreeSet};

use super::{region_landmarks, ContactEvent, InteractionConfig, Region};
use crate::geometry::Vec3;
use crate::hand::HandFrame;
use crate::objects::{Primitive, SmartObject};

/// A region landmark at or near an object surface this tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Touch {
    pub region: Region,
    pub object: String,
    pub landmark: usize,
    pub point: Vec3,
    pub normal: Vec3,
    /// Penetration before correction; 0 when merely within the margin.
    pub depth: f64,
    /// Raw landmark displacement since the previous tick.
    pub displacement: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactResolution {
    pub frame: HandFrame,
    pub events: Vec<ContactEvent>,
    pub touches: Vec<Touch>,
    /// (region, object) pairs in contact after this tick.
    pub touching: BTreeSet<(Region, String)>,
}

const PROJECTION_PASSES: usize = 4;
/// Rounding left by projecting onto a surface.
const ESCAPE_TOLERANCE: f64 = 1e-9;

/// Pushes every region landmark out of every object and reports first
/// contacts. `touching` is the contact set from the previous tick. A pair
/// enters it on penetration and stays while any of its landmarks is within
/// the margin, so a finger resting on a surface does not retrigger.
pub fn resolve_contacts(
    frame: &HandFrame,
    previous: Option<&HandFrame>,
    objects: &BTreeMap<String, SmartObject>,
    touching: &BTreeSet<(Region, String)>,
    config: &InteractionConfig,
    dt: f64,
    t: f64,
) -> ContactResolution {
    let shapes: Vec<(&SmartObject, Vec<Primitive>)> = objects.values().map(|o| (o, o.shape())).collect();
    let mut events = Vec::new();
    let mut touches = Vec::new();
    let mut now = BTreeSet::new();

    for region in Region::ALL {
        for (obj, shape) in &shapes {
            let mut deepest: Option<(usize, f64, Vec3, Vec3)> = None;
            for &i in region.landmarks() {
                let p = frame.landmarks[i];
                let hit = obj.surface_query_in(shape, &p);
                if hit.distance >= config.contact_margin {
                    continue;
                }
                let displacement = previous.map_or_else(Vec3::zeros, |prev| p - prev.landmarks[i]);
                touches.push(Touch {
                    region,
                    object: obj.id.clone(),
                    landmark: i,
                    point: hit.point,
                    normal: hit.normal,
                    depth: (-hit.distance).max(0.0),
                    displacement,
                });
                if hit.distance < 0.0 && deepest.is_none_or(|d| hit.distance < d.1) {
                    deepest = Some((i, hit.distance, hit.point, hit.normal));
                }
            }
            let key = (region, obj.id.clone());
            let near = touches.last().is_some_and(|t| t.region == region && t.object == obj.id);
            if deepest.is_some() || (near && touching.contains(&key)) {
                now.insert(key.clone());
            }
            if let Some((i, distance, point, normal)) = deepest {
                if !touching.contains(&key) {
                    let v_hand = previous.map_or_else(Vec3::zeros, |prev| (frame.landmarks[i] - prev.landmarks[i]) / dt);
                    let relative = v_hand - obj.velocity;
                    events.push(ContactEvent {
                        side: frame.side,
                        region,
                        object: obj.id.clone(),
                        point,
                        normal,
                        approach_speed: (-relative.dot(&normal)).max(0.0),
                        penetration: -distance,
                        t,
                    });
                }
            }
        }
    }

    ContactResolution { frame: project_frame(frame, &shapes), events, touches, touching: now }
}

/// Moves penetrating region landmarks to the surface they are inside.
pub(super) fn project_frame(frame: &HandFrame, shapes: &[(&SmartObject, Vec<Primitive>)]) -> HandFrame {
    let mut out = frame.clone();
    for i in region_landmarks() {
        for _ in 0..PROJECTION_PASSES {
            let mut moved = false;
            for (obj, shape) in shapes {
                let hit = obj.surface_query_in(shape, &out.landmarks[i]);
                if hit.distance < 0.0 {
                    out.landmarks[i] = hit.point;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        if deepest(shapes, &out.landmarks[i]) < -ESCAPE_TOLERANCE {
            out.landmarks[i] = escape(shapes, &frame.landmarks[i]);
        }
    }
    out
}

/// Most negative signed distance to any of the objects.
fn deepest(shapes: &[(&SmartObject, Vec<Primitive>)], p: &Vec3) -> f64 {
    shapes.iter().map(|(obj, shape)| obj.surface_query_in(shape, p).distance).fold(f64::INFINITY, f64::min)
}

/// Nearest way out of overlapping objects, where projecting onto one
/// surface lands inside another: march along the penetrated surfaces'
/// normals and the 26 lattice directions, keep the shortest exit.
fn escape(shapes: &[(&SmartObject, Vec<Primitive>)], p: &Vec3) -> Vec3 {
    let mut dirs: Vec<Vec3> = shapes
        .iter()
        .map(|(obj, shape)| obj.surface_query_in(shape, p))
        .filter(|hit| hit.distance < 0.0)
        .map(|hit| hit.normal)
        .collect();
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if (x, y, z) != (0, 0, 0) {
                    dirs.push(Vec3::new(x as f64, y as f64, z as f64).normalize());
                }
            }
        }
    }
    let mut best: Option<(f64, Vec3)> = None;
    for dir in dirs {
        let mut t = 0.0;
        while t < 1.0 && best.is_none_or(|(b, _)| t < b) {
            let q = p + dir * t;
            let d = deepest(shapes, &q);
            if d >= -ESCAPE_TOLERANCE {
                best = Some((t, q));
                break;
            }
            t += (-d).max(1e-4);
        }
    }
    best.map_or(*p, |(_, q)| q)
}
