use std::collections::{BTreeMap, BTreeSet};

use omg_core::geometry::Pose;
use omg_core::hand::{HandFrame, HandPose, Side, PALM_LANDMARKS, TIP_LANDMARKS};
use omg_core::interaction::{
    apply_impulse, hand_distance, resolve_contacts, AttachState, InteractionConfig, Region, ToolState, World, WorldEvent,
};
use omg_core::objects::{catalog, Articulation, ArticulationEventKind, ObjectKind, SmartObject};
use omg_core::{Quat, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 1.0 / 60.0;
const R: f64 = 0.0335;

fn hand(side: Side, palm: Vec3, facing: Vec3, up: Vec3, openness: f64) -> HandFrame {
    let q = Quat::face_towards(&facing, &up);
    HandPose::new(side, Vec3::zeros(), q, openness, 1.0).with_palm_at(palm).frame(0.0)
}

/// Right hand facing -z with fingers up.
fn facing_ball(palm: Vec3, openness: f64) -> HandFrame {
    hand(Side::Right, palm, -Vec3::z(), Vec3::y(), openness)
}

fn world_with(objects: Vec<SmartObject>) -> World {
    World::new(objects, InteractionConfig::default(), DT).unwrap()
}

fn ball_world() -> World {
    world_with(vec![SmartObject::new("ball", ObjectKind::Ball, Pose::at(Vec3::new(0.0, 1.0, 0.0)))])
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

fn count(events: &[WorldEvent], name: &str) -> usize {
    events.iter().filter(|e| e.type_name() == name).count()
}

fn run(world: &mut World, frames: &[HandFrame]) -> Vec<WorldEvent> {
    let mut all = Vec::new();
    for f in frames {
        all.extend(world.step(std::slice::from_ref(f)).events);
    }
    all
}

/// Palm slides along z in front of the ball, ending at `end_z`, while
/// openness goes from `o0` to `o1`.
fn approach(start_z: f64, end_z: f64, o0: f64, o1: f64, ticks: usize) -> Vec<HandFrame> {
    (1..=ticks)
        .map(|k| {
            let s = k as f64 / ticks as f64;
            facing_ball(Vec3::new(0.0, 1.0, lerp(start_z, end_z, s)), lerp(o0, o1, s))
        })
        .collect()
}

// ---- contacts ----

#[test]
fn tip_inside_ball_is_projected_to_surface() {
    let w = ball_world();
    let mut frame = facing_ball(Vec3::new(0.0, 1.0, 0.5), 1.0);
    let center = Vec3::new(0.0, 1.0, 0.0);
    frame.landmarks[8] = center + Vec3::new(0.0, R - 0.005, 0.0);
    let res = resolve_contacts(&frame, None, &w.objects, &BTreeSet::new(), &w.config, DT, 0.0);
    assert!(((res.frame.landmarks[8] - center).norm() - R).abs() < 1e-12);
    assert_eq!(res.events.len(), 1);
    let e = &res.events[0];
    assert_eq!((e.region, e.object.as_str()), (Region::Index, "ball"));
    assert!((e.penetration - 0.005).abs() < 1e-12);
    assert!((e.normal - Vec3::y()).norm() < 1e-12);
}

#[test]
fn distant_hand_is_untouched() {
    let w = ball_world();
    let frame = facing_ball(Vec3::new(0.0, 1.0, 0.5), 1.0);
    let res = resolve_contacts(&frame, None, &w.objects, &BTreeSet::new(), &w.config, DT, 0.0);
    assert_eq!(res.frame, frame);
    assert!(res.events.is_empty() && res.touches.is_empty());
}

#[test]
fn approach_speed_from_finite_difference() {
    let w = ball_world();
    let top = Vec3::new(0.0, 1.0 + R, 0.0);
    let base = facing_ball(Vec3::new(0.0, 1.0, 0.5), 1.0);
    let frames: Vec<HandFrame> = (0..12)
        .map(|k| {
            let mut f = base.clone();
            f.landmarks[8] = top + Vec3::new(0.0, 0.05 - 0.8 * DT * k as f64 - 0.001, 0.0);
            f
        })
        .collect();
    let mut touching = BTreeSet::new();
    let mut first = None;
    for k in 1..frames.len() {
        let res = resolve_contacts(&frames[k], Some(&frames[k - 1]), &w.objects, &touching, &w.config, DT, 0.0);
        touching = res.touching;
        if let Some(e) = res.events.into_iter().next() {
            first = Some((k, e));
            break;
        }
    }
    let (k, e) = first.expect("tip reaches the ball");
    let oracle = (frames[k - 1].landmarks[8].y - frames[k].landmarks[8].y) / DT;
    assert!((e.approach_speed - oracle).abs() < 1e-12);
    assert!((e.approach_speed - 0.8).abs() <= 9.81 / 60.0);
    assert!(e.penetration >= 0.0);
}

// ---- stickiness ----

#[test]
fn closing_overshoot_of_one_cm_sticks() {
    let mut w = ball_world();
    let events = run(&mut w, &approach(R + 0.2, R - 0.01, 1.0, 0.6, 20));
    assert_eq!(count(&events, "stuck"), 1);
    assert!(matches!(&w.hands[&Side::Right].attach, AttachState::Stuck { object, .. } if object == "ball"));
    let AttachState::Stuck { anchor, .. } = &w.hands[&Side::Right].attach else { unreachable!() };
    assert!((anchor.norm() - R).abs() < 1e-6, "anchor off the surface");
    let rendered = w.hands[&Side::Right].corrected.as_ref().unwrap();
    assert!(nearest(rendered).abs() < 1e-3, "hand not on surface: {}", nearest(rendered));
}

#[test]
fn fast_pass_through_within_tolerance_sticks() {
    let mut w = ball_world();
    let mut frames = vec![facing_ball(Vec3::new(0.0, 1.0, 0.3), 1.0)];
    frames.push(facing_ball(Vec3::new(0.0, 1.0, -R - 0.05), 0.8));
    let events = run(&mut w, &frames);
    assert_eq!(count(&events, "stuck"), 1);
}

#[test]
fn pass_by_at_fifteen_cm_stays_detached() {
    let mut w = ball_world();
    let frames: Vec<HandFrame> = (0..=60)
        .map(|k| {
            let s = k as f64 / 60.0;
            facing_ball(Vec3::new(lerp(-0.5, 0.5, s), 1.0, R + 0.15), lerp(1.0, 0.5, s))
        })
        .collect();
    let events = run(&mut w, &frames);
    assert_eq!(count(&events, "stuck"), 0);

    // Straight through the ball in one tick, then closing 15 cm beyond it.
    let mut w = ball_world();
    let mut frames = vec![facing_ball(Vec3::new(0.0, 1.0, 0.3), 1.0)];
    for k in 0..30 {
        frames.push(facing_ball(Vec3::new(0.0, 1.0, -R - 0.15), lerp(1.0, 0.5, k as f64 / 29.0)));
    }
    let events = run(&mut w, &frames);
    assert_eq!(count(&events, "stuck"), 0);
    assert_eq!(w.hands[&Side::Right].attach, AttachState::Detached);
}

/// Hand-to-ball distance as the attach rule measures it.
fn ball_distance(f: &HandFrame) -> f64 {
    let ball = SmartObject::new("ball", ObjectKind::Ball, Pose::at(Vec3::new(0.0, 1.0, 0.0)));
    hand_distance(&ball, f).0
}

/// Hand facing the ball with its nearest point `sd` from the surface.
fn at_distance(sd: f64, openness: f64) -> HandFrame {
    let (mut lo, mut hi) = (R + sd - 0.15, R + sd + 0.15);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ball_distance(&facing_ball(Vec3::new(0.0, 1.0, mid), openness)) < sd {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    facing_ball(Vec3::new(0.0, 1.0, 0.5 * (lo + hi)), openness)
}

/// Independent nearest-point distance from the hand to the ball.
fn nearest(f: &HandFrame) -> f64 {
    let c = Vec3::new(0.0, 1.0, 0.0);
    let mut d = (f.palm_center() - c).norm() - R;
    for &i in PALM_LANDMARKS.iter().chain(TIP_LANDMARKS.iter()) {
        d = d.min((f.landmarks[i] - c).norm() - R);
    }
    d
}

fn sweep(d0: f64, d1: f64, openness: f64, ticks: usize) -> Vec<HandFrame> {
    (1..=ticks).map(|k| at_distance(lerp(d0, d1, k as f64 / ticks as f64), openness)).collect()
}

#[test]
fn retreat_hysteresis() {
    let mut w = ball_world();
    run(&mut w, &approach(R + 0.2, R + 0.01, 1.0, 0.7, 20));
    assert!(matches!(w.hands[&Side::Right].attach, AttachState::Stuck { .. }));
    let events = run(&mut w, &sweep(0.01, 0.04, 0.7, 10));
    assert_eq!(count(&events, "detached"), 0);
    assert!(matches!(w.hands[&Side::Right].attach, AttachState::Stuck { .. }));

    let retreat = sweep(0.04, 0.07, 0.7, 30);
    let mut detach_tick = None;
    for (k, f) in retreat.iter().enumerate() {
        let out = w.step(std::slice::from_ref(f));
        if count(&out.events, "detached") > 0 {
            detach_tick = Some(k);
        }
    }
    let expected = retreat.iter().position(|f| nearest(f) > 0.06);
    assert!(expected.is_some());
    assert_eq!(detach_tick, expected);
    assert_eq!(w.hands[&Side::Right].attach, AttachState::Detached);
}

fn jitter(base_sd: f64, o0: f64, o1: f64, ticks: usize) -> Vec<HandFrame> {
    (0..ticks)
        .map(|k| {
            let sd = base_sd + if k % 2 == 0 { 0.001 } else { -0.001 };
            let f = at_distance(sd, lerp(o0, o1, k as f64 / ticks as f64));
            assert!((nearest(&f) - sd).abs() < 1e-9);
            f
        })
        .collect()
}

#[test]
fn jitter_at_snap_boundary_never_oscillates() {
    let mut w = ball_world();
    let events = run(&mut w, &jitter(0.02, 0.9, 0.9, 600));
    assert_eq!(count(&events, "stuck") + count(&events, "detached"), 0);

    let mut w = ball_world();
    let events = run(&mut w, &jitter(0.02, 1.0, 0.5, 600));
    assert_eq!(count(&events, "stuck"), 1);
    assert_eq!(count(&events, "detached"), 0);

    // And at the release boundary once stuck.
    let mut w = ball_world();
    run(&mut w, &approach(R + 0.2, R + 0.01, 1.0, 0.7, 20));
    let events = run(&mut w, &jitter(0.06, 0.7, 0.7, 600));
    assert_eq!(count(&events, "detached"), 1);
    assert_eq!(count(&events, "stuck"), 0);
}

#[test]
fn stuck_hand_grasps_and_carries_then_releases() {
    let mut w = ball_world();
    let mut events = run(&mut w, &approach(R + 0.2, R + 0.01, 1.0, 0.3, 30));
    assert_eq!(count(&events, "grasped"), 1);
    // Carry the ball up 20 cm, then open to throw it.
    let carry: Vec<HandFrame> =
        (1..=20).map(|k| facing_ball(Vec3::new(0.0, 1.0 + 0.01 * k as f64, R + 0.01), 0.3)).collect();
    events.extend(run(&mut w, &carry));
    let ball = &w.objects["ball"];
    assert!((ball.pose.position.y - 1.2).abs() < 1e-9);
    assert!((ball.velocity - Vec3::new(0.0, 0.6, 0.0)).norm() < 1e-9);
    let out = w.step(&[facing_ball(Vec3::new(0.0, 1.21, R + 0.01), 0.9)]);
    let released = out.events.iter().find(|e| e.type_name() == "released").expect("release");
    let WorldEvent::Released { velocity, .. } = released else { unreachable!() };
    assert!((velocity - Vec3::new(0.0, 0.6, 0.0)).norm() < 1e-9);
    assert!(w.objects["ball"].dynamic);
}

#[test]
fn other_hands_object_is_not_snapped() {
    let mut w = ball_world();
    run(&mut w, &approach(R + 0.2, R + 0.01, 1.0, 0.3, 30));
    assert!(w.hands[&Side::Right].attach.is_grasping("ball"));
    let right = facing_ball(Vec3::new(0.0, 1.0, R + 0.01), 0.3);
    for k in 0..20 {
        let left = hand(Side::Left, Vec3::new(0.0, 1.0, -R - 0.01), Vec3::z(), Vec3::y(), lerp(1.0, 0.3, k as f64 / 19.0));
        w.step(&[left, right.clone()]);
    }
    assert_eq!(w.hands[&Side::Left].attach, AttachState::Detached);
}

// ---- tools ----

fn palm_down(palm: Vec3, openness: f64) -> HandFrame {
    hand(Side::Right, palm, -Vec3::y(), -Vec3::z(), openness)
}

/// Lowers a closing palm-down hand onto an instrument at (0, 1, 0) until
/// it is held.
fn pick_up(kind: ObjectKind) -> World {
    let mut w = world_with(vec![SmartObject::new("tool", kind, Pose::at(Vec3::new(0.0, 1.0, 0.0)))]);
    let top = w.objects["tool"].surface_query(&Vec3::new(0.0, 2.0, 0.0)).point.y;
    let frames: Vec<HandFrame> = (1..=30)
        .map(|k| {
            let s = k as f64 / 30.0;
            palm_down(Vec3::new(0.0, lerp(top + 0.1, top + 0.015, s.min(0.5) * 2.0), 0.0), lerp(1.0, 0.3, s))
        })
        .collect();
    let events = run(&mut w, &frames);
    assert_eq!(count(&events, "tool_picked"), 1, "{kind:?} not picked up");
    w
}

fn oracle_actuation(a: f64) -> f64 {
    if a >= 0.8 {
        0.0
    } else if a <= 0.2 {
        1.0
    } else {
        (0.8 - a) / 0.6
    }
}

#[test]
fn scissors_actuation_is_monotone_with_exact_endpoints() {
    let mut w = pick_up(ObjectKind::Scissors);
    let palm = w.hands[&Side::Right].raw.as_ref().unwrap().palm_center();
    // Turn the palm to face away from the floor so opening is not a drop.
    let side_on = |o: f64| hand(Side::Right, palm, -Vec3::z(), Vec3::y(), o);
    run(&mut w, &(0..30).map(|k| side_on(lerp(0.3, 0.9, k as f64 / 29.0))).collect::<Vec<_>>());

    let mut trace = Vec::new();
    let mut closed = 0;
    for k in 0..=80 {
        let out = w.step(&[side_on(lerp(0.9, 0.1, k as f64 / 80.0))]);
        closed += count(&out.events, "scissors_closed");
        let hand = &w.hands[&Side::Right];
        let ToolState::Holding { actuation, .. } = hand.tool else { panic!("dropped the scissors") };
        let Articulation::Scissors { blade_angle, .. } = w.objects["tool"].articulation else { unreachable!() };
        trace.push((hand.metrics.unwrap().aperture, actuation, blade_angle));
    }
    for &(a, act, blade) in &trace {
        assert!((act - oracle_actuation(a)).abs() < 1e-12, "aperture {a}");
        assert!((blade - 30.0 * (1.0 - act)).abs() < 1e-9);
    }
    assert!(trace.windows(2).all(|p| p[1].1 >= p[0].1));
    assert_eq!(trace[0].1, 0.0);
    assert_eq!(trace.last().unwrap().1, 1.0);
    assert_eq!(closed, 1);
}

#[test]
fn syringe_drop_pose_releases_within_dwell() {
    let mut w = pick_up(ObjectKind::Syringe);
    let palm = w.hands[&Side::Right].raw.as_ref().unwrap().palm_center();
    let v = Vec3::new(0.3, 0.0, 0.0);
    let frames: Vec<HandFrame> = (1..=20).map(|k| palm_down(palm + v * (k as f64 * DT), 1.0)).collect();
    let mut dropped_at = None;
    for (k, f) in frames.iter().enumerate() {
        let out = w.step(std::slice::from_ref(f));
        if let Some(WorldEvent::ToolDropped { velocity, .. }) = out.events.iter().find(|e| e.type_name() == "tool_dropped") {
            assert!((velocity - v).norm() < 1e-9);
            dropped_at = Some(k + 1);
            break;
        }
    }
    let ticks = dropped_at.expect("drop pose released the syringe");
    assert!(ticks as f64 * DT <= 0.15 + DT + 1e-12, "took {ticks} ticks");
    assert_eq!(ticks, 9);
    assert_eq!(w.hands[&Side::Right].tool, ToolState::FreeHand);
    assert_eq!(w.hands[&Side::Right].attach, AttachState::Detached);
    assert!(w.objects["tool"].dynamic);
}

#[test]
fn brief_drop_pose_does_not_release() {
    let mut w = pick_up(ObjectKind::Syringe);
    let palm = w.hands[&Side::Right].raw.as_ref().unwrap().palm_center();
    let mut frames: Vec<HandFrame> = (0..8).map(|_| palm_down(palm, 1.0)).collect();
    frames.extend((0..20).map(|_| palm_down(palm, 0.3)));
    let events = run(&mut w, &frames);
    assert_eq!(count(&events, "tool_dropped"), 0);
    assert!(matches!(w.hands[&Side::Right].tool, ToolState::Holding { .. }));
}

// ---- forces ----

#[test]
fn palm_strike_pushes_ball_no_faster_than_the_palm() {
    let mut w = ball_world();
    let probe = facing_ball(Vec3::zeros(), 1.0);
    // Put the middle-finger base in line with the ball center.
    let offset = Vec3::new(0.0, 1.0, 0.0) - probe.landmarks[9];
    let frames: Vec<HandFrame> = (0..30)
        .map(|k| {
            let z = 0.2 - 1.0 * DT * k as f64;
            probe.translated(&(offset + Vec3::new(0.0, 0.0, z)))
        })
        .collect();
    let mut hit = false;
    for f in &frames {
        let out = w.step(std::slice::from_ref(f));
        if out.events.iter().any(|e| e.type_name() == "contact") {
            let ball = &w.objects["ball"];
            // Remove this tick's gravity before reading the push.
            let push = ball.velocity.z;
            assert!(push < 0.0 && -push <= 1.0 + 1e-12, "push {push}");
            assert!(ball.dynamic);
            hit = true;
            break;
        }
    }
    assert!(hit);
}

proptest! {
    #[test]
    fn impulse_never_adds_closing_speed(
        n in prop::array::uniform3(-1.0f64..1.0),
        vh in prop::array::uniform3(-3.0f64..3.0),
        vo in prop::array::uniform3(-3.0f64..3.0),
    ) {
        let n = Vec3::from(n);
        prop_assume!(n.norm() > 0.1);
        let n = n.normalize();
        let mut ball = SmartObject::new("ball", ObjectKind::Ball, Pose::at(Vec3::zeros()));
        ball.velocity = Vec3::from(vo);
        ball.dynamic = true;
        let vh = Vec3::from(vh);
        let before = (vh - ball.velocity).dot(&-n);
        let point = n * R;
        match apply_impulse(&mut ball, &point, &n, &vh) {
            None => prop_assert!(before <= 0.0),
            Some(j) => {
                prop_assert!(j.dot(&n) < 0.0);
                let after = (vh - ball.velocity).dot(&-n);
                prop_assert!(after.abs() <= 1e-9 * (1.0 + before.abs()));
                prop_assert!(after <= before);
            }
        }
    }
}

#[test]
fn resting_ball_on_ground_is_unchanged() {
    let mut w = world_with(vec![SmartObject::new("ball", ObjectKind::Ball, Pose::at(Vec3::new(0.0, R, 0.0)))]);
    let before = w.objects.clone();
    for _ in 0..100 {
        assert!(w.step(&[]).events.is_empty());
    }
    assert_eq!(w.objects, before);
}

#[test]
fn ballistic_flight_matches_closed_form_every_tick() {
    let mut ball = SmartObject::new("ball", ObjectKind::Ball, Pose::at(Vec3::new(0.0, 1.5, 8.0)));
    ball.velocity = Vec3::new(0.0, 2.0, -16.0);
    ball.dynamic = true;
    let mut w = world_with(vec![ball]);
    let (p0, v0, g) = (Vec3::new(0.0, 1.5, 8.0), Vec3::new(0.0, 2.0, -16.0), Vec3::new(0.0, -9.81, 0.0));
    for k in 1..=30 {
        w.step(&[]);
        let t = k as f64 / 60.0;
        let expected = p0 + v0 * t + g * (0.5 * t * t);
        let got = w.objects["ball"].pose.position;
        assert!((got - expected).norm() <= 1e-9 * expected.norm(), "tick {k}: {got} vs {expected}");
    }
    let p = w.objects["ball"].pose.position;
    assert!((p.y - 1.27375).abs() < 1e-9 && p.x.abs() < 1e-12 && p.z.abs() < 1e-9);
    // Three-decimal figure for the same point.
    assert!((p.y - 1.274).abs() < 5e-4);
}

// ---- anchored fixtures ----

#[test]
fn finger_press_clicks_button_once() {
    let mut w = world_with(vec![SmartObject::new("button", ObjectKind::PushButton, Pose::at(Vec3::new(0.0, 1.0, 0.0)))]);
    let probe = palm_down(Vec3::zeros(), 1.0);
    let cap_top = Vec3::new(0.0, 1.038, 0.0);
    let at = |depth: f64| probe.translated(&(cap_top - probe.landmarks[8] + Vec3::new(0.0, 0.01 - depth, 0.0)));
    let mut frames: Vec<HandFrame> = (0..40).map(|k| at(0.0005 * k as f64)).collect();
    frames.extend((0..40).map(|k| at(0.0195 - 0.0005 * k as f64)));
    frames.extend((0..30).map(|_| at(-0.05)));
    let events = run(&mut w, &frames);
    assert_eq!(count(&events, "button_pressed"), 1);
    assert_eq!(count(&events, "button_released"), 1);
}

#[test]
fn sideways_push_toggles_lever_once() {
    let mut w = world_with(vec![SmartObject::new("lever", ObjectKind::LeverSwitch, Pose::at(Vec3::new(0.0, 1.0, 0.0)))]);
    let probe = hand(Side::Right, Vec3::zeros(), Vec3::z(), Vec3::x(), 1.0);
    // Index tip level with the middle of the arm, starting behind it.
    let target = Vec3::new(0.0, 1.0 + 0.03 + 0.035 * 30f64.to_radians().cos(), -0.06);
    let frames: Vec<HandFrame> = (0..60)
        .map(|k| probe.translated(&(target - probe.landmarks[8] + Vec3::new(0.0, 0.0, 0.003 * k as f64))))
        .collect();
    let mut toggles = Vec::new();
    for f in &frames {
        for e in w.step(std::slice::from_ref(f)).events {
            if let WorldEvent::Articulation(a) = e {
                if a.kind == ArticulationEventKind::LeverToggled {
                    toggles.push(a.value);
                }
            }
        }
    }
    assert_eq!(toggles, vec![1.0]);
}

// ---- world step ----

#[test]
fn empty_world_only_counts_ticks() {
    let mut w = world_with(vec![]);
    let before = w.clone();
    for _ in 0..1000 {
        assert!(w.step(&[]).events.is_empty());
    }
    assert_eq!(w.tick, 1000);
    w.tick = 0;
    assert_eq!(w, before);
}

#[test]
fn failed_step_leaves_world_untouched() {
    let mut w = ball_world();
    run(&mut w, &approach(R + 0.2, R + 0.1, 1.0, 0.9, 5));
    let before = w.clone();
    let mut bad = facing_ball(Vec3::new(0.0, 1.0, 0.2), 1.0);
    bad.landmarks[3].x = f64::NAN;
    let out = w.step(&[bad]);
    assert_eq!(out.tick, before.tick + 1);
    assert_eq!(out.events.len(), 1);
    assert!(out.events[0].is_error());
    let twice = facing_ball(Vec3::new(0.0, 1.0, 0.2), 1.0);
    assert!(w.step(&[twice.clone(), twice]).events[0].is_error());
    w.tick = before.tick;
    assert_eq!(w, before);
}

fn scripted_session() -> (Vec<String>, World) {
    let mut w = world_with(catalog());
    let ball = w.objects["ball"].pose.position;
    let mut frames = approach(0.0, 0.0, 1.0, 1.0, 1);
    frames.clear();
    for k in 0..90 {
        let s = k as f64 / 89.0;
        frames.push(hand(Side::Right, ball + Vec3::new(0.0, lerp(0.2, 0.045, s), 0.0), -Vec3::y(), -Vec3::z(), lerp(1.0, 0.3, s)));
    }
    for k in 0..60 {
        let s = k as f64 / 59.0;
        frames.push(hand(Side::Right, ball + Vec3::new(0.0, 0.045 + 0.3 * s, 0.1 * s), -Vec3::y(), -Vec3::z(), lerp(0.3, 0.9, s)));
    }
    let mut log = Vec::new();
    for f in &frames {
        let out = w.step(std::slice::from_ref(f));
        for e in out.events {
            log.push(format!("{} {} {}", out.tick, e.type_name(), e.data()));
        }
    }
    for _ in 0..120 {
        let out = w.step(&[]);
        for e in out.events {
            log.push(format!("{} {} {}", out.tick, e.type_name(), e.data()));
        }
    }
    (log, w)
}

#[test]
fn identical_inputs_give_identical_logs() {
    let (a, wa) = scripted_session();
    let (b, wb) = scripted_session();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(wa, wb);
}

/// Random two-hand trajectories around the catalog; returns the worst
/// signed distance of any corrected region landmark after any step.
pub fn fuzz_penetration(trajectories: usize, ticks: usize, seed: u64) -> f64 {
    let base = world_with(catalog());
    let targets: Vec<Vec3> = base.objects.values().map(|o| o.pose.position).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let regions: Vec<usize> = PALM_LANDMARKS.iter().chain(TIP_LANDMARKS.iter()).copied().collect();
    for _ in 0..trajectories {
        let mut w = base.clone();
        let mut state: BTreeMap<Side, (Vec3, Vec3, Vec3, f64)> = BTreeMap::new();
        for side in [Side::Left, Side::Right] {
            let target = targets[rng.random_range(0..targets.len())];
            let jitter = Vec3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.05..0.15), rng.random_range(-0.1..0.1));
            let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let facing = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            state.insert(side, (target + jitter, v, facing, rng.random_range(0.0..1.0)));
        }
        for _ in 0..ticks {
            let mut frames = Vec::new();
            for (side, (p, v, facing, o)) in state.iter_mut() {
                *p += *v * DT;
                *o = (*o + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0);
                let facing = if facing.norm() < 1e-3 { Vec3::z() } else { *facing };
                let up = if facing.normalize().y.abs() > 0.9 { Vec3::z() } else { Vec3::y() };
                frames.push(hand(*side, *p, facing, up, *o));
            }
            let out = w.step(&frames);
            assert!(!out.events.iter().any(|e| e.is_error()), "{:?}", out.events);
            for hand in w.hands.values() {
                let Some(f) = &hand.corrected else { continue };
                for &i in &regions {
                    for o in w.objects.values() {
                        worst = worst.min(o.surface_query(&f.landmarks[i]).distance);
                    }
                }
            }
        }
    }
    worst
}

#[test]
fn no_penetration_under_fuzz() {
    let worst = fuzz_penetration(1000, 8, 11);
    assert!(worst >= -1e-3, "worst signed distance {worst}");
}
