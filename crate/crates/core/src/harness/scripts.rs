//! Built-in input scripts: keyframed hand motion that completes each
//! scenario's checklist. The shipped script files are these, written out.

use crate::geometry::Vec3;
use crate::hand::trajectory::{HandRecord, TrajectoryRecord};
use crate::hand::{HandPose, Side};
use crate::Quat;

use super::scenario::{CatchConfig, Scenario};
use crate::interaction::{InteractionConfig, World};

/// Script coordinates are rounded to 10 micrometres so the files stay
/// small and the in-memory script equals its file.
const ROUNDING: f64 = 1e5;

fn round(x: f64) -> f64 {
    (x * ROUNDING).round() / ROUNDING
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    palm: Vec3,
    rot: Quat,
    open: f64,
    spread: f64,
}

impl Key {
    fn new(palm: Vec3, rot: Quat, open: f64) -> Self {
        Self { palm, rot, open, spread: 0.5 }
    }

    fn pose(&self, side: Side) -> HandPose {
        HandPose::new(side, Vec3::zeros(), self.rot, self.open, self.spread).with_palm_at(self.palm)
    }

    fn at(self, palm: Vec3) -> Self {
        Self { palm, ..self }
    }

    fn shifted(self, d: Vec3) -> Self {
        Self { palm: self.palm + d, ..self }
    }

    fn open(self, open: f64) -> Self {
        Self { open, ..self }
    }

    fn lerp(&self, other: &Key, s: f64) -> Key {
        Key {
            palm: self.palm.lerp(&other.palm, s),
            rot: self.rot.slerp(&other.rot, s),
            open: self.open + (other.open - self.open) * s,
            spread: self.spread + (other.spread - self.spread) * s,
        }
    }
}

/// Palm normal along `facing`, fingers along `up`.
fn orient(facing: Vec3, up: Vec3) -> Quat {
    Quat::face_towards(&facing, &up)
}

/// Palm center that puts landmark `i` of the posed hand at `target`.
fn palm_for(side: Side, key: Key, i: usize, target: Vec3) -> Vec3 {
    let f = key.pose(side).frame(0.0);
    target - (f.landmarks[i] - f.palm_center())
}

/// One hand's timeline, one entry per tick.
struct Track {
    side: Side,
    ticks: Vec<Option<Key>>,
    current: Option<Key>,
}

impl Track {
    fn new(side: Side) -> Self {
        Self { side, ticks: Vec::new(), current: None }
    }

    fn len(&self) -> usize {
        self.ticks.len()
    }

    /// Puts the hand in view at `key` without spending a tick.
    fn show(&mut self, key: Key) -> &mut Self {
        self.current = Some(key);
        self
    }

    fn hide(&mut self) -> &mut Self {
        self.current = None;
        self
    }

    /// Holds the current pose (or stays out of view) for `n` ticks.
    fn hold(&mut self, n: usize) -> &mut Self {
        self.ticks.extend(std::iter::repeat_n(self.current, n));
        self
    }

    /// Moves linearly to `key`, arriving on the `n`th tick.
    fn to(&mut self, n: usize, key: Key) -> &mut Self {
        let from = self.current.expect("hand shown before it moves");
        for k in 1..=n {
            self.ticks.push(Some(from.lerp(&key, k as f64 / n as f64)));
        }
        self.current = Some(key);
        self
    }

    fn until(&mut self, tick: usize) -> &mut Self {
        let n = tick.saturating_sub(self.len());
        self.hold(n)
    }

    fn key(&self) -> Key {
        self.current.expect("hand is shown")
    }
}

fn records(tracks: &[&Track], dt: f64) -> Vec<TrajectoryRecord> {
    let n = tracks.iter().map(|t| t.len()).max().unwrap_or(0);
    (0..n)
        .map(|i| {
            let t = (i + 1) as f64 * dt;
            let hands = tracks
                .iter()
                .filter_map(|tr| tr.ticks.get(i).copied().flatten().map(|k| (tr.side, k)))
                .map(|(side, k)| {
                    let mut rec = HandRecord::from_frame(&k.pose(side).frame(t));
                    for p in rec.landmarks.iter_mut() {
                        for c in p.iter_mut() {
                            *c = round(*c);
                        }
                    }
                    rec
                })
                .collect();
            TrajectoryRecord { t: round(t), hands, label: None }
        })
        .collect()
}

pub fn generate(scenario: Scenario, dt: f64) -> Vec<TrajectoryRecord> {
    match scenario {
        Scenario::Panel => panel(dt),
        Scenario::Juggle => juggle(dt),
        Scenario::Catch => catch(dt),
        Scenario::Medic => medic(dt),
    }
}

const INDEX_TIP: usize = 8;

fn panel(dt: f64) -> Vec<TrajectoryRecord> {
    let side = Side::Right;
    let mut r = Track::new(side);
    let down = Key::new(Vec3::zeros(), orient(-Vec3::y(), Vec3::z()), 1.0);

    // Button: index tip pressed 19.5 mm into the cap top and back.
    let cap_top = Vec3::new(-0.3, 0.938, 0.4);
    let press = |depth: f64| down.at(palm_for(side, down, INDEX_TIP, cap_top + Vec3::new(0.0, 0.01 - depth, 0.0)));
    r.show(press(-0.1)).hold(10).to(20, press(0.0)).to(39, press(0.0195)).to(39, press(0.0)).to(20, press(-0.1));

    // Lever: palm forward, fingers toward +x, index tip pushing the middle
    // of the arm from behind.
    let side_on = Key::new(Vec3::zeros(), orient(Vec3::z(), Vec3::x()), 1.0);
    let arm = Vec3::new(0.0, 0.9 + 0.03 + 0.035 * 30f64.to_radians().cos(), 0.34);
    let push = |dz: f64| side_on.at(palm_for(side, side_on, INDEX_TIP, arm + Vec3::new(0.0, 0.0, dz)));
    let above = push(0.0).shifted(Vec3::new(0.0, 0.2, 0.0));
    r.to(40, above).to(30, push(0.0)).hold(5).to(60, push(0.18)).to(30, push(0.18).shifted(Vec3::new(0.0, 0.2, 0.0)));

    // Dial: fingers down, index tip on the knob side, swept along an arc
    // around the knob axis.
    let point = Key::new(Vec3::zeros(), orient(Vec3::z(), -Vec3::y()), 1.0);
    let knob = Vec3::new(0.25, 0.935, 0.4);
    let on_knob = |deg: f64, radius: f64| {
        let a = deg.to_radians();
        point.at(palm_for(side, point, INDEX_TIP, knob + Vec3::new(radius * a.sin(), 0.0, -radius * a.cos())))
    };
    let r_touch = 0.0205;
    r.to(40, on_knob(35.0, 0.05).shifted(Vec3::new(0.0, 0.15, 0.0)))
        .to(30, on_knob(35.0, 0.05))
        .to(20, on_knob(35.0, r_touch))
        .hold(5);
    let sweep = 40;
    for k in 1..=sweep {
        r.to(1, on_knob(35.0 - 70.0 * k as f64 / sweep as f64, r_touch));
    }
    r.to(20, on_knob(-35.0, 0.05)).to(30, on_knob(-35.0, 0.05).shifted(Vec3::new(0.0, 0.15, 0.0))).hold(20);
    records(&[&r], dt)
}

fn juggle(dt: f64) -> Vec<TrajectoryRecord> {
    let ball = Vec3::new(0.1, 0.9335, 0.35);
    let mut r = Track::new(Side::Right);
    let down = Key::new(ball + Vec3::new(0.0, 0.15, 0.0), orient(-Vec3::y(), Vec3::z()), 1.0);
    // Settle onto the ball top while starting to close, then grip.
    r.show(down).hold(10).to(40, down.at(ball + Vec3::new(0.0, 0.045, 0.0)).open(0.7)).hold(5);
    r.to(10, r.key().open(0.3)).hold(5);
    // Lift and turn palm up.
    let lifted = r.key().shifted(Vec3::new(0.0, 0.2, 0.0));
    r.to(30, lifted).to(30, Key { rot: orient(Vec3::y(), Vec3::z()), ..lifted }).hold(10);
    // Toss up and to the left, letting go on the last tick of the swing.
    let v = Vec3::new(-1.2, 1.5, 0.0);
    let swing = 6;
    for _ in 0..swing - 1 {
        r.to(1, r.key().shifted(v * dt));
    }
    r.to(1, r.key().shifted(v * dt).open(1.0));
    let release = r.len();
    let release_palm = r.key().palm;
    let away = r.key().shifted(Vec3::new(0.15, -0.1, 0.0));
    r.hold(20).to(30, away).hold(60);

    // The left hand waits palm up under the landing point and closes
    // as the ball reaches it.
    let mut l = Track::new(Side::Left);
    let catch_tick = release + JUGGLE_CATCH_TICKS;
    let wait = Key::new(release_palm + JUGGLE_CATCH_OFFSET, orient(Vec3::y(), Vec3::z()), 1.0);
    l.until(release).show(wait).until(catch_tick - 1);
    l.to(1, wait.open(0.9)).to(1, wait.open(0.3)).hold(30);
    l.to(30, l.key().shifted(Vec3::new(0.0, 0.1, 0.0))).hold(30);
    records(&[&r, &l], dt)
}

const JUGGLE_CATCH_TICKS: usize = 21;
const JUGGLE_CATCH_OFFSET: Vec3 = Vec3::new(-0.435, -0.1, 0.0);

/// Where the first pitch is at the start of tick `k`, from the engine.
fn first_pitch_at(k: u64, dt: f64) -> Vec3 {
    let cfg = CatchConfig::default();
    let mut world = World::new(Scenario::Catch.objects(), InteractionConfig::default(), dt).expect("catch scene is valid");
    let ball = world.objects.get_mut("ball").expect("catch scenario has a ball");
    ball.pose.position = Vec3::from(cfg.pitcher);
    ball.velocity = Vec3::from(cfg.first_velocity);
    ball.dynamic = true;
    for _ in 1..k {
        world.step(&[]);
    }
    world.objects["ball"].pose.position
}

fn catch(dt: f64) -> Vec<TrajectoryRecord> {
    let cfg = CatchConfig::default();
    // Palm facing the pitcher where the ball will be as the hand closes.
    let close_tick = (0.5 / dt).round() as usize;
    let at = first_pitch_at(close_tick as u64, dt);
    let mut r = Track::new(Side::Right);
    let ready = Key::new(at, orient(Vec3::z(), Vec3::y()), 0.6);
    r.show(ready).until(close_tick - 1).to(1, ready.open(0.3)).to(10, ready.open(0.2)).hold(20);

    // Wind up, then throw back at the pitcher, letting go on the last
    // tick of the swing.
    let back = ready.open(0.2).shifted(Vec3::new(0.0, 0.05, -0.3));
    r.to(30, back).hold(10);
    let v_z = 8.0;
    let swing = 4;
    let release = back.palm + Vec3::new(0.0, 0.0, v_z * dt * swing as f64);
    let flight = (cfg.pitcher[2] - release.z) / v_z;
    let g = InteractionConfig::default().gravity;
    let v = Vec3::new(0.0, (cfg.pitcher[1] - release.y + 0.5 * g * flight * flight) / flight, v_z);
    for k in 1..=swing {
        let key = back.shifted(v * dt * k as f64);
        r.to(1, if k == swing { key.open(1.0) } else { key });
    }
    r.hold(20).hide().hold(60);
    records(&[&r], dt)
}

/// Working ends in the hand frame once an instrument is held.
const BLADE_IN_HAND: Vec3 = Vec3::new(0.0, 0.13, 0.035);
const NEEDLE_IN_HAND: Vec3 = Vec3::new(0.0, 0.09, 0.03);

fn medic(dt: f64) -> Vec<TrajectoryRecord> {
    let mut r = Track::new(Side::Right);
    let flat = Key::new(Vec3::new(0.1, 1.15, 0.4), orient(-Vec3::y(), Vec3::z()), 1.0);
    let up = |k: Key, h: f64| k.shifted(Vec3::new(0.0, h, 0.0));
    // Palm down, fingertips lowered onto the upper arm.
    let feel = flat.at(Vec3::new(0.1, 0.99 - 0.003, 0.4));
    r.show(flat).hold(10).to(40, up(feel, 0.04)).to(20, feel).hold(10).to(20, up(feel, 0.1));

    // Scissors: settle over the finger loops while closing.
    let loops = Vec3::new(-0.3, 0.912, 0.23);
    let grip = flat.at(loops + Vec3::new(0.0, 0.015, 0.0)).open(0.6);
    r.to(40, up(grip, 0.1).open(1.0)).to(40, grip).to(10, grip.open(0.3)).hold(10);
    // Blade tip just above the bandage, then close the blades.
    let blade_at = Vec3::new(-0.22, 0.96, 0.5);
    let cut = grip.open(0.3).at(blade_at - flat.rot * BLADE_IN_HAND);
    r.to(30, up(grip.open(0.3), 0.1)).to(40, up(cut, 0.1)).to(30, cut).hold(5).to(10, cut.open(0.15)).hold(10);
    // Drop the scissors off to the side with the open, spread, palm-down
    // hand.
    let aside = up(cut, 0.1).shifted(Vec3::new(-0.25, 0.0, -0.1));
    r.to(30, up(cut.open(0.15), 0.1)).to(30, aside.open(0.15)).to(10, Key { spread: 1.0, ..aside.open(1.0) }).hold(20);

    // Syringe: same grip, then the needle just above the upper arm and
    // the plunger pressed home.
    let barrel = Vec3::new(0.25, 0.92, 0.25);
    let hold = flat.at(barrel + Vec3::new(0.0, 0.015, 0.0)).open(0.6);
    r.to(50, up(hold, 0.1).open(1.0)).to(40, hold).to(10, hold.open(0.3)).hold(10);
    let needle_at = Vec3::new(0.1, 1.005, 0.5);
    let inject = hold.open(0.3).at(needle_at - flat.rot * NEEDLE_IN_HAND);
    r.to(30, up(hold.open(0.3), 0.1)).to(40, up(inject, 0.1)).to(30, inject).hold(5).to(10, inject.open(0.15)).hold(20);
    r.to(30, up(inject.open(0.15), 0.1)).hold(20);
    records(&[&r], dt)
}
