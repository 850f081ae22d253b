use omg_core::objects::{
    catalog, catalog_from_json, Articulation, ArticulationEventKind, Drive, ObjectKind, Primitive, SmartObject,
    BUTTON_TRAVEL,
};
use omg_core::{Pose, Quat, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 1.0 / 60.0;
const GOLDEN: f64 = 2.399_963_229_728_653; // pi * (3 - sqrt 5)

fn v(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn perpendicular_pair(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = helper.cross(axis).normalize();
    (u, axis.cross(&u))
}

/// Sunflower-lattice points on a hemisphere (`dir` pole) or full sphere.
fn fibonacci(center: Vec3, r: f64, n: usize, pole: Option<Vec3>, out: &mut Vec<Vec3>) {
    for k in 0..n {
        let z = if pole.is_some() { 1.0 - (k as f64 + 0.5) / n as f64 } else { 1.0 - 2.0 * (k as f64 + 0.5) / n as f64 };
        let rho = (1.0 - z * z).sqrt();
        let th = k as f64 * GOLDEN;
        let local = Vec3::new(rho * th.cos(), rho * th.sin(), z);
        let p = match pole {
            None => local,
            Some(axis) => {
                let (u, w) = perpendicular_pair(&axis);
                u * local.x + w * local.y + axis * local.z
            }
        };
        out.push(center + p * r);
    }
}

fn disk(center: Vec3, normal: Vec3, r: f64, n: usize, out: &mut Vec<Vec3>) {
    let (u, w) = perpendicular_pair(&normal);
    for k in 0..n {
        let rho = r * ((k as f64 + 0.5) / n as f64).sqrt();
        let th = k as f64 * GOLDEN;
        out.push(center + (u * th.cos() + w * th.sin()) * rho);
    }
}

fn tube(a: Vec3, b: Vec3, r: f64, spacing: f64, out: &mut Vec<Vec3>) {
    let axis = (b - a).normalize();
    let (u, w) = perpendicular_pair(&axis);
    let len = (b - a).norm();
    let n_len = (len / spacing).ceil() as usize;
    let n_ang = (std::f64::consts::TAU * r / spacing).ceil() as usize;
    for i in 0..n_len {
        for j in 0..n_ang {
            let t = (i as f64 + 0.5) / n_len as f64;
            let th = std::f64::consts::TAU * (j as f64 + 0.5) / n_ang as f64;
            out.push(a + (b - a) * t + (u * th.cos() + w * th.sin()) * r);
        }
    }
}

/// Dense stratified samples of a primitive's surface at roughly `spacing`.
fn sample(prim: &Primitive, spacing: f64, out: &mut Vec<Vec3>) {
    let count = |area: f64| (area / (spacing * spacing)).ceil() as usize;
    match *prim {
        Primitive::Sphere { center, radius } => fibonacci(v(center), radius, count(prim.area()), None, out),
        Primitive::Box { center, half_extents: h } => {
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let (ni, nj) = ((2.0 * h[i] / spacing).ceil() as usize, (2.0 * h[j] / spacing).ceil() as usize);
                for sign in [-1.0, 1.0] {
                    for a in 0..ni {
                        for b in 0..nj {
                            let mut p = v(center);
                            p[k] += sign * h[k];
                            p[i] += -h[i] + 2.0 * h[i] * (a as f64 + 0.5) / ni as f64;
                            p[j] += -h[j] + 2.0 * h[j] * (b as f64 + 0.5) / nj as f64;
                            out.push(p);
                        }
                    }
                }
            }
        }
        Primitive::Capsule { a, b, radius } => {
            let (a, b) = (v(a), v(b));
            let axis = (b - a).normalize();
            tube(a, b, radius, spacing, out);
            let cap = count(2.0 * std::f64::consts::PI * radius * radius);
            fibonacci(a, radius, cap, Some(-axis), out);
            fibonacci(b, radius, cap, Some(axis), out);
        }
        Primitive::Cylinder { a, b, radius } => {
            let (a, b) = (v(a), v(b));
            let axis = (b - a).normalize();
            tube(a, b, radius, spacing, out);
            let cap = count(std::f64::consts::PI * radius * radius);
            disk(a, -axis, radius, cap, out);
            disk(b, axis, radius, cap, out);
        }
    }
}

/// ~10^5 surface samples in world coordinates.
fn surface_samples(obj: &SmartObject) -> Vec<Vec3> {
    let shape = obj.shape();
    let area: f64 = shape.iter().map(|p| p.area()).sum();
    let spacing = (area / 1e5).sqrt();
    let mut local = Vec::new();
    for p in &shape {
        sample(p, spacing, &mut local);
    }
    local.iter().map(|p| obj.pose.to_world(p)).collect()
}

fn posed_catalog() -> Vec<SmartObject> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut objects = catalog();
    for o in &mut objects {
        o.pose.orientation = Quat::from_euler_angles(rng.random(), rng.random(), rng.random());
        if let Articulation::PushButton { travel, .. } = &mut o.articulation {
            *travel = 0.004;
        }
        if let Articulation::PatientLimb { lift_angle, .. } = &mut o.articulation {
            *lift_angle = 30.0;
        }
    }
    objects
}

#[test]
fn signed_distance_matches_surface_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for obj in posed_catalog() {
        let samples = surface_samples(&obj);
        assert!(samples.len() >= 100_000);
        let (mut lo, mut hi) = (samples[0], samples[0]);
        for s in &samples {
            lo = lo.inf(s);
            hi = hi.sup(s);
        }
        let margin = Vec3::repeat(0.03);
        let (lo, hi) = (lo - margin, hi + margin);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let p = Vec3::from_fn(|k, _| rng.random_range(lo[k]..hi[k]));
            let oracle = samples.iter().map(|s| (s - p).norm_squared()).fold(f64::INFINITY, f64::min).sqrt();
            worst = worst.max((obj.surface_query(&p).distance.abs() - oracle).abs());
        }
        assert!(worst <= 1e-3, "{}: worst |sd| error {worst}", obj.id);
    }
}

#[test]
fn ball_distance_example() {
    let ball = SmartObject::new("ball", ObjectKind::Ball, Pose::identity());
    let hit = ball.surface_query(&Vec3::new(0.1, 0.0, 0.0));
    assert!((hit.distance - 0.0665).abs() <= 1e-15);
    assert!((hit.normal - Vec3::x()).norm() <= 1e-15);
}

#[test]
fn box_center_example() {
    let b = Primitive::Box { center: [0.0; 3], half_extents: [0.04, 0.01, 0.02] };
    assert_eq!(b.query(&Vec3::zeros()).distance, -0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn projection_is_idempotent(idx in 0usize..9, x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.5) {
        let obj = &posed_catalog()[idx];
        let p = obj.pose.position + Vec3::new(x, y, z);
        let hit = obj.surface_query(&p);
        prop_assert!((hit.normal.norm() - 1.0).abs() <= 1e-9);
        let again = obj.surface_query(&hit.point);
        prop_assert!(again.distance.abs() <= 1e-9, "{} at {:?}: {}", obj.id, p, again.distance);
    }

    #[test]
    fn outside_normal_points_from_closest(idx in 0usize..9, x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.5) {
        let obj = &posed_catalog()[idx];
        let p = obj.pose.position + Vec3::new(x, y, z);
        let hit = obj.surface_query(&p);
        prop_assume!(hit.distance > 1e-6);
        let expect = (p - hit.point) / hit.distance;
        prop_assert!((hit.normal - expect).norm() <= 1e-9);
        prop_assert!(((p - hit.point).norm() - hit.distance).abs() <= 1e-12);
    }
}

fn random_drive(kind: ObjectKind, rng: &mut ChaCha8Rng) -> Option<Drive> {
    if rng.random_bool(0.2) {
        return None;
    }
    let big = rng.random_range(-500.0..500.0);
    match kind {
        ObjectKind::Ball | ObjectKind::Bat => None,
        ObjectKind::LeverSwitch => Some(Drive::Increment { amount: big / 10.0 }),
        ObjectKind::Bandage => Some(Drive::Bandage { stretch_ratio: big / 100.0, wrap_angle: big / 100.0 }),
        _ if rng.random_bool(0.5) => Some(Drive::Increment { amount: big / 1000.0 }),
        _ => Some(Drive::Set { value: big / 5.0 }),
    }
}

#[test]
fn articulation_stays_in_range_under_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for mut obj in catalog() {
        for _ in 0..10_000 {
            let drive = random_drive(obj.kind(), &mut rng);
            obj.articulate(drive.as_ref(), rng.random_range(1e-4..0.1)).unwrap();
            obj.validate().unwrap();
        }
    }
}

#[test]
fn held_button_presses_once() {
    let mut button = SmartObject::new("b", ObjectKind::PushButton, Pose::identity());
    let mut events = button.articulate(Some(&Drive::Increment { amount: BUTTON_TRAVEL }), DT).unwrap();
    for _ in 0..120 {
        events.extend(button.articulate(Some(&Drive::Increment { amount: 0.0 }), DT).unwrap());
    }
    let pressed: Vec<_> = events.iter().filter(|e| e.kind == ArticulationEventKind::ButtonPressed).collect();
    assert_eq!(pressed.len(), 1);
    assert_eq!(pressed[0].object, "b");
}

#[test]
fn two_detent_lever_toggles_once() {
    let mut lever = SmartObject::new("l", ObjectKind::LeverSwitch, Pose::identity());
    let mut events = Vec::new();
    for _ in 0..40 {
        events.extend(lever.articulate(Some(&Drive::Increment { amount: 2.0 }), DT).unwrap());
    }
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].kind, ArticulationEventKind::LeverToggled);
    assert_eq!(events[0].value, 1.0);
}

#[test]
fn zero_dt_is_rejected() {
    let mut dial = SmartObject::new("d", ObjectKind::RotaryDial, Pose::identity());
    assert!(dial.articulate(None, 0.0).is_err());
}

#[test]
fn catalog_names_the_paper_examples() {
    let c = catalog();
    assert!(c.len() >= 9);
    for kind in [
        ObjectKind::Scissors,
        ObjectKind::Ball,
        ObjectKind::RotaryDial,
        ObjectKind::LeverSwitch,
        ObjectKind::Syringe,
        ObjectKind::Bandage,
        ObjectKind::PatientLimb,
    ] {
        assert!(c.iter().any(|o| o.kind() == kind), "{kind:?}");
    }
    let expect = [("ball", 0.057, 0.6), ("bat", 0.9, 0.9), ("scissors", 0.05, 1.0), ("syringe", 0.02, 0.8), ("bandage", 0.01, 0.1)];
    for (id, mass, hardness) in expect {
        let o = c.iter().find(|o| o.id == id).unwrap();
        assert_eq!((o.mass, o.hardness), (Some(mass), hardness));
    }
    for o in c.iter().filter(|o| matches!(o.kind(), ObjectKind::PushButton | ObjectKind::LeverSwitch | ObjectKind::RotaryDial)) {
        assert_eq!((o.mass, o.hardness), (None, 1.0));
    }
    let limb = c.iter().find(|o| o.kind() == ObjectKind::PatientLimb).unwrap();
    assert_eq!((limb.mass, limb.hardness), (None, 0.3));
}

#[test]
fn catalog_loads_from_spec_file() {
    let text = r#"[
        {"id": "knob", "kind": "rotary_dial", "angle": 45.0, "position": [0, 1, 0.4],
         "mass": null, "hardness": 1.0, "graspable": false},
        {"id": "ball2", "kind": "ball", "position": [0.1, 1, 0.4], "orientation": [1, 0, 0, 0],
         "mass": 0.057, "hardness": 0.6, "graspable": true, "dynamic": true}
    ]"#;
    let objects = catalog_from_json(text).unwrap();
    assert_eq!(objects[0].articulation.value(), Some(45.0));
    assert!(objects[1].dynamic);
    let bad = text.replace("45.0", "300.0");
    assert!(catalog_from_json(&bad).is_err());
}
