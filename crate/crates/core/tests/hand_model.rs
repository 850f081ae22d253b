use omg_core::hand::{
    normalize_frame, observe, pose_metrics, template, CameraPose, CameraPreset, HandPose, SensorAdapter, Side,
    CURL_EXPONENT, FINGER_FLEX_MAX, SPLAY_MAX,
};
use omg_core::{Pose, Quat, Vec3};
use proptest::prelude::*;

/// Planar forward kinematics for one finger, written with complex numbers:
/// segment k points at angle `sum(flex[..=k])` from the finger's in-plane
/// direction toward the palm normal.
fn planar_tip(lengths: [f64; 3], curl: f64) -> (f64, f64) {
    let (mut along, mut up, mut phi) = (0.0, 0.0, 0.0);
    for k in 0..3 {
        phi += curl * FINGER_FLEX_MAX[k];
        along += lengths[k] * phi.cos();
        up += lengths[k] * phi.sin();
    }
    (along, up)
}

/// Expected aperture from measured bone lengths and joint angles only.
fn oracle_aperture(openness: f64) -> f64 {
    let open = HandPose::open(Side::Right).frame(0.0);
    let pc = open.palm_center();
    let mut total = 0.0;
    for f in 0..4 {
        let b = 5 + 4 * f;
        let lengths = [
            (open.landmarks[b + 1] - open.landmarks[b]).norm(),
            (open.landmarks[b + 2] - open.landmarks[b + 1]).norm(),
            (open.landmarks[b + 3] - open.landmarks[b + 2]).norm(),
        ];
        let abduction = [-1.5, -0.5, 0.5, 1.5][f] * SPLAY_MAX;
        let dir = Vec3::new(abduction.sin(), abduction.cos(), 0.0);
        let dist = |curl: f64, dir: Vec3| {
            let (along, up) = planar_tip(lengths, curl);
            (open.landmarks[b] + dir * along + Vec3::z() * up - pc).norm()
        };
        let d_open = dist(0.0, dir);
        let d_fist = dist(1.0, Vec3::y());
        total += ((dist((1.0 - openness).powf(CURL_EXPONENT), dir) - d_fist) / (d_open - d_fist)).clamp(0.0, 1.0);
    }
    total / 4.0
}

#[test]
fn half_curl_aperture_matches_kinematic_oracle() {
    let expected = oracle_aperture(0.5);
    assert!((expected - 0.5).abs() <= 0.05, "oracle {expected}");
    let pose = HandPose::new(Side::Right, Vec3::zeros(), Quat::identity(), 0.5, 1.0);
    let got = pose_metrics(&pose.frame(0.0)).unwrap().aperture;
    assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
}

#[test]
fn template_distances_match_oracle_endpoints() {
    let t = template();
    for k in 0..4 {
        assert!(t.d_open[k] > t.d_fist[k] + 0.03);
    }
    assert!((oracle_aperture(1.0) - 1.0).abs() < 1e-12);
}

#[test]
fn aperture_is_monotone_in_openness() {
    for side in [Side::Left, Side::Right] {
        let mut last = -1.0;
        for step in 0..=20 {
            let o = step as f64 * 0.05;
            let a = pose_metrics(&HandPose::new(side, Vec3::zeros(), Quat::identity(), o, 0.5).frame(0.0))
                .unwrap()
                .aperture;
            assert!(a >= last, "aperture dropped at openness {o}: {a} < {last}");
            last = a;
        }
    }
}

fn rigid() -> impl Strategy<Value = Pose> {
    (
        prop::array::uniform3(-5.0f64..5.0),
        prop::array::uniform3(-1.0f64..1.0),
        0.0f64..std::f64::consts::TAU,
    )
        .prop_filter("axis", |(_, a, _)| Vec3::from(*a).norm() > 1e-3)
        .prop_map(|(t, a, angle)| {
            let axis = nalgebra::Unit::new_normalize(Vec3::from(a));
            Pose::new(Vec3::from(t), Quat::from_axis_angle(&axis, angle))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metrics_invariant_under_rigid_motion(pose in rigid(), openness in 0.0f64..1.0, spread in 0.0f64..1.0) {
        let base = HandPose::new(Side::Right, Vec3::zeros(), Quat::identity(), openness, spread).frame(0.0);
        let moved = base.transformed(&pose);
        let a = pose_metrics(&base).unwrap();
        let b = pose_metrics(&moved).unwrap();
        prop_assert!((a.aperture - b.aperture).abs() < 1e-9);
        prop_assert!((a.spread - b.spread).abs() < 1e-9);
        prop_assert!((pose.orientation * a.palm_normal - b.palm_normal).norm() < 1e-9);
        prop_assert!((b.palm_normal.norm() - 1.0).abs() < 1e-9);
        prop_assert!(b.palm_normal.dot(&b.palm_direction).abs() < 1e-6);
    }

    #[test]
    fn adapter_encode_then_normalize_is_identity(
        perm in Just((0..21usize).collect::<Vec<_>>()).prop_shuffle(),
        axis_perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
        negate in prop::array::uniform3(any::<bool>()),
        scale_exp in -3i32..=0,
        pose in rigid(),
    ) {
        let adapter = SensorAdapter {
            scale: 10f64.powi(scale_exp),
            axes: [
                omg_core::hand::AxisMap::new(axis_perm[0], negate[0]),
                omg_core::hand::AxisMap::new(axis_perm[1], negate[1]),
                omg_core::hand::AxisMap::new(axis_perm[2], negate[2]),
            ],
            index_map: perm,
        };
        let frame = HandPose::open(Side::Left).frame(0.0).transformed(&pose);
        let back = normalize_frame(&adapter.encode(&frame, "prop", 21), &adapter, None).unwrap();
        for i in 0..21 {
            prop_assert!((back.landmarks[i] - frame.landmarks[i]).norm() <= 1e-12 * (1.0 + frame.landmarks[i].norm()));
            prop_assert_eq!(back.confidence[i], 1.0);
        }
    }
}

/// Hands working low in front of the torso, palms turned toward the body and
/// down, while the user looks down at them.
fn look_down_trajectory() -> Vec<omg_core::HandFrame> {
    let palm_down = Quat::from_axis_angle(&Vec3::x_axis(), 143f64.to_radians());
    (0..120)
        .map(|i| {
            let s = i as f64 / 119.0;
            let palm = Vec3::new(0.15 * (s * 6.0).sin(), 1.2 - 0.2 * s, 0.35 + 0.1 * s);
            let openness = 0.3 + 0.4 * (s * 9.0).sin().abs();
            HandPose::new(Side::Right, Vec3::zeros(), palm_down, openness, 0.5)
                .with_palm_at(palm)
                .frame(i as f64 / 60.0)
        })
        .collect()
}

#[test]
fn chest_lanyard_sees_at_least_as_much_as_head_mount_looking_down() {
    let frames = look_down_trajectory();
    let count = |make: &dyn Fn(&omg_core::HandFrame) -> CameraPose| -> usize {
        frames
            .iter()
            .map(|f| observe(f, &make(f), 0.0, 0).valid.iter().filter(|v| **v).count())
            .sum()
    };
    let head = count(&|f| {
        let eye = CameraPose::head_mounted().position;
        CameraPose::looking_at(eye, f.palm_center(), CameraPreset::HeadMounted)
    });
    let chest = count(&|_| CameraPose::chest_lanyard());
    assert!(chest >= head, "chest {chest} < head {head}");
    assert!(head < 21 * frames.len(), "head-mounted view should lose some landmarks");
}
