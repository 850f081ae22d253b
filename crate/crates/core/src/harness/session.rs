use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::log::LogLine;
use super::scenario::{CatchConfig, Scenario, Task};
use super::{scripts, HarnessError, LOG_VERSION};
use crate::geometry::{to_array, Vec3};
use crate::gestures::{LstmModel, StreamClassifier, StreamConfig};
use crate::hand::trajectory::{read_records, TrajectoryError, TrajectoryRecord};
use crate::hand::{HandFrame, Side};
use crate::interaction::{InteractionConfig, World, WorldEvent};
use crate::objects::BALL_RADIUS;
use crate::synesthesia::{event_for_contact, AudioEvent, ToneMapping};

pub const DEFAULT_DT: f64 = 1.0 / 60.0;
/// A `state` line is logged every this many ticks.
pub const STATE_EVERY: u64 = 15;

#[derive(Debug, Clone)]
pub struct SessionOptions {
    pub seed: u64,
    pub dt: f64,
    pub config: InteractionConfig,
    pub tones: ToneMapping,
    /// Runs a streaming recognizer per hand and logs `gesture` lines.
    pub gestures: Option<Arc<LstmModel>>,
    pub stream: StreamConfig,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            dt: DEFAULT_DT,
            config: InteractionConfig::default(),
            tones: ToneMapping::default(),
            gestures: None,
            stream: StreamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PitchPhase {
    Flight { caught: bool },
    Waiting { until: u64 },
}

/// The virtual pitcher of the catch scenario and its catch referee.
#[derive(Debug, Clone)]
struct Pitcher {
    cfg: CatchConfig,
    dt: f64,
    rng: ChaCha8Rng,
    count: u64,
    phase: PitchPhase,
    near: BTreeMap<Side, Vec<f64>>,
    closes: BTreeMap<Side, Vec<f64>>,
    apertures: BTreeMap<Side, f64>,
    last_ball: Vec3,
}

impl Pitcher {
    fn new(cfg: CatchConfig, seed: u64, dt: f64) -> Self {
        let last_ball = Vec3::from(cfg.pitcher);
        Self {
            cfg,
            dt,
            rng: ChaCha8Rng::seed_from_u64(seed),
            count: 0,
            phase: PitchPhase::Waiting { until: 0 },
            near: BTreeMap::new(),
            closes: BTreeMap::new(),
            apertures: BTreeMap::new(),
            last_ball,
        }
    }

    fn pitch(&mut self, world: &mut World, tick: u64, t: f64) -> LogLine {
        let base = Vec3::from(self.cfg.first_velocity);
        let velocity = if self.count == 0 {
            base
        } else {
            let scale = 1.0 + self.rng.random_range(-self.cfg.speed_jitter..=self.cfg.speed_jitter);
            let lateral = self.rng.random_range(-self.cfg.lateral_jitter..=self.cfg.lateral_jitter);
            base * scale + Vec3::new(lateral, 0.0, 0.0)
        };
        self.count += 1;
        let ball = world.objects.get_mut("ball").expect("catch scenario has a ball");
        ball.pose.position = Vec3::from(self.cfg.pitcher);
        ball.velocity = velocity;
        ball.angular_velocity = Vec3::zeros();
        ball.dynamic = true;
        self.last_ball = ball.pose.position;
        self.phase = PitchPhase::Flight { caught: false };
        self.near.clear();
        self.closes.clear();
        LogLine::new(
            tick,
            t,
            "pitch",
            json!({ "pitch": self.count, "position": self.cfg.pitcher, "velocity": to_array(&velocity) }),
        )
    }

    fn update(&mut self, world: &mut World, tick: u64, t: f64) -> Vec<LogLine> {
        // A pitch that is not caught is a catch_missed, not a drop.
        world.fall_watch.remove("ball");
        let mut out = Vec::new();
        let ball = world.objects["ball"].pose.position;
        let held = world.hands.values().any(|h| h.attach.object() == Some("ball"));

        for (side, hand) in &world.hands {
            let (Some(raw), Some(m)) = (&hand.raw, &hand.metrics) else {
                self.apertures.remove(side);
                continue;
            };
            if (ball - raw.palm_center()).norm() <= self.cfg.catch_radius {
                self.near.entry(*side).or_default().push(t);
            }
            let prev = self.apertures.insert(*side, m.aperture);
            if prev.is_some_and(|p| p >= self.cfg.catch_aperture) && m.aperture < self.cfg.catch_aperture {
                self.closes.entry(*side).or_default().push(t);
            }
        }

        let window = self.cfg.catch_window + 1e-9;
        match self.phase {
            PitchPhase::Flight { caught: false } => {
                let catcher = self.near.iter().find_map(|(side, near)| {
                    let closes = self.closes.get(side)?;
                    near.iter().any(|n| closes.iter().any(|c| (n - c).abs() <= window)).then_some(*side)
                });
                let on_ground = !held && ball.y <= BALL_RADIUS + 1e-3;
                let recently_near = self.near.values().flatten().any(|n| t - n <= window);
                if let Some(side) = catcher {
                    self.phase = PitchPhase::Flight { caught: true };
                    out.push(LogLine::new(tick, t, "catch_success", json!({ "side": side.as_str(), "pitch": self.count })));
                } else if (ball.z < self.cfg.behind_z || on_ground) && !recently_near {
                    out.push(LogLine::new(tick, t, "catch_missed", json!({ "pitch": self.count })));
                    self.wait(tick);
                }
            }
            PitchPhase::Flight { caught: true } => {
                let plane = self.cfg.pitcher[2];
                if !held && self.last_ball.z < plane && ball.z >= plane {
                    let s = (plane - self.last_ball.z) / (ball.z - self.last_ball.z);
                    let crossing = self.last_ball.lerp(&ball, s);
                    let distance = (crossing - Vec3::from(self.cfg.pitcher)).norm();
                    if distance <= self.cfg.return_radius {
                        out.push(LogLine::new(
                            tick,
                            t,
                            "throw_returned",
                            json!({ "pitch": self.count, "distance": distance }),
                        ));
                    }
                    self.wait(tick);
                } else if !held && ball.y <= BALL_RADIUS + 1e-3 {
                    self.wait(tick);
                }
            }
            PitchPhase::Waiting { until } => {
                if tick >= until && !held {
                    out.push(self.pitch(world, tick, t));
                }
            }
        }
        self.last_ball = world.objects["ball"].pose.position;
        out
    }

    fn wait(&mut self, tick: u64) {
        let delay = (self.cfg.pitch_delay / self.dt).round() as u64;
        self.phase = PitchPhase::Waiting { until: tick + delay };
    }
}

/// One scenario run: the world, the task checklist and everything that
/// writes the log. Scripted runs and live sessions both drive it one tick
/// at a time, so identical input gives identical logs.
#[derive(Debug, Clone)]
pub struct Session {
    scenario: Scenario,
    world: World,
    tasks: Vec<Task>,
    active: usize,
    previous_side: Option<String>,
    pitcher: Option<Pitcher>,
    tones: ToneMapping,
    stream: StreamConfig,
    model: Option<Arc<LstmModel>>,
    classifiers: BTreeMap<Side, StreamClassifier>,
    audio: Vec<AudioEvent>,
}

impl Session {
    /// Returns the session and its opening lines (all at tick 0).
    pub fn new(scenario: Scenario, options: &SessionOptions) -> Result<(Self, Vec<LogLine>), HarnessError> {
        options.tones.validate(crate::synesthesia::SAMPLE_RATE)?;
        let world = World::new(scenario.objects(), options.config.clone(), options.dt)?;
        let tasks = scenario.tasks();
        let mut session = Session {
            scenario,
            world,
            tasks,
            active: 0,
            previous_side: None,
            pitcher: scenario.catch_config().map(|c| Pitcher::new(c, options.seed, options.dt)),
            tones: options.tones.clone(),
            stream: options.stream,
            model: options.gestures.clone(),
            classifiers: BTreeMap::new(),
            audio: Vec::new(),
        };
        let names: Vec<&str> = session.tasks.iter().map(|t| t.name).collect();
        let mut lines = vec![LogLine::new(
            0,
            0.0,
            "session_start",
            json!({
                "version": LOG_VERSION,
                "scenario": scenario.as_str(),
                "seed": options.seed,
                "dt": options.dt,
                "tasks": names,
                "gestures": options.gestures.is_some(),
            }),
        )];
        lines.push(LogLine::new(0, 0.0, "task_started", json!({ "task": session.tasks[0].name })));
        if let Some(p) = session.pitcher.as_mut() {
            lines.push(p.pitch(&mut session.world, 0, 0.0));
        }
        lines.push(LogLine::new(0, 0.0, "state", session.world.snapshot()));
        Ok((session, lines))
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn tick(&self) -> u64 {
        self.world.tick
    }

    /// Checklist with completion flags.
    pub fn checklist(&self) -> Vec<(&'static str, bool)> {
        self.tasks.iter().enumerate().map(|(i, t)| (t.name, i < self.active)).collect()
    }

    pub fn completed(&self) -> usize {
        self.active
    }

    pub fn audio_events(&self) -> &[AudioEvent] {
        &self.audio
    }

    /// Advances one tick and returns the lines it logged.
    pub fn step(&mut self, frames: &[HandFrame]) -> Vec<LogLine> {
        let out = self.world.step(frames);
        let (tick, t) = (out.tick, out.t);
        let mut lines = Vec::new();
        for event in out.events {
            let tone = match &event {
                WorldEvent::Contact(c) => Some(self.tone(c)),
                _ => None,
            };
            lines.push(LogLine::new(tick, t, event.type_name(), event.data()));
            if let Some(tone) = tone {
                lines.push(LogLine::new(tick, t, tone.0, tone.1));
            }
        }
        if let Some(p) = self.pitcher.as_mut() {
            lines.extend(p.update(&mut self.world, tick, t));
        }
        lines.extend(self.recognize(frames, tick, t));

        let mut logged = Vec::with_capacity(lines.len() + 2);
        for line in lines {
            let done = self.tasks.get(self.active).is_some_and(|task| task.check(&line, self.previous_side.as_deref()));
            let side = line.data.get("side").and_then(Value::as_str).map(str::to_string);
            logged.push(line);
            if done {
                let name = self.tasks[self.active].name;
                logged.push(LogLine::new(tick, t, "task_completed", json!({ "task": name, "side": side })));
                self.previous_side = side;
                self.active += 1;
                if let Some(next) = self.tasks.get(self.active) {
                    logged.push(LogLine::new(tick, t, "task_started", json!({ "task": next.name })));
                }
            }
        }
        if tick % STATE_EVERY == 0 {
            logged.push(LogLine::new(tick, t, "state", self.world.snapshot()));
        }
        logged
    }

    /// Closing line of the log.
    pub fn finish(&self) -> LogLine {
        LogLine::new(
            self.world.tick,
            self.world.time(),
            "session_end",
            json!({ "ticks": self.world.tick, "tasks_completed": self.active, "tasks_total": self.tasks.len() }),
        )
    }

    fn tone(&mut self, contact: &crate::interaction::ContactEvent) -> (&'static str, Value) {
        let hardness = self.world.objects.get(&contact.object).map_or(0.5, |o| o.hardness);
        match event_for_contact(contact, hardness, &self.tones) {
            Ok(a) => {
                self.audio.push(a);
                (
                    "tone",
                    json!({
                        "side": contact.side.as_str(),
                        "region": contact.region.as_str(),
                        "object": contact.object,
                        "frequency": a.frequency,
                        "attack_ms": a.attack_ms,
                        "decay_ms": a.decay_ms,
                        "amplitude": a.amplitude,
                    }),
                )
            }
            Err(e) => ("warning", json!({ "message": e.to_string() })),
        }
    }

    fn recognize(&mut self, frames: &[HandFrame], tick: u64, t: f64) -> Vec<LogLine> {
        let Some(model) = &self.model else {
            return Vec::new();
        };
        self.classifiers.retain(|side, _| frames.iter().any(|f| f.side == *side));
        let mut out = Vec::new();
        for f in frames {
            let classifier = match self.classifiers.entry(f.side) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(v) => match StreamClassifier::new(model.clone(), self.stream) {
                    Ok(c) => v.insert(c),
                    Err(e) => {
                        out.push(LogLine::new(tick, t, "warning", json!({ "message": e.to_string() })));
                        continue;
                    }
                },
            };
            match classifier.push(f.clone().with_timestamp(t)) {
                Ok(Some(ev)) => out.push(LogLine::new(
                    tick,
                    t,
                    "gesture",
                    json!({
                        "side": f.side.as_str(),
                        "label": ev.label.as_str(),
                        "confidence": ev.confidence,
                        "gesture_end": ev.gesture_end_time,
                        "emit": ev.emit_time,
                    }),
                )),
                Ok(None) => {}
                Err(e) => out.push(LogLine::new(tick, t, "warning", json!({ "message": e.to_string() }))),
            }
        }
        out
    }
}

/// Where a run's hand input comes from.
#[derive(Debug, Clone, Copy)]
pub enum InputSource<'a> {
    /// A trajectory file, one record per tick.
    File(&'a Path),
    Records(&'a [TrajectoryRecord]),
    /// The built-in script for the scenario.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub lines: Vec<LogLine>,
    pub audio: Vec<AudioEvent>,
    pub ticks: u64,
    pub dt: f64,
    pub completed: usize,
    pub tasks: usize,
}

impl SessionLog {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&l.to_line());
            s.push('\n');
        }
        s
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.text().as_bytes())
    }

    /// Mixes every tone into a buffer covering the session plus the last
    /// tone's tail.
    pub fn render_audio(&self, sample_rate: u32) -> Result<Vec<f64>, HarnessError> {
        let duration = self.ticks as f64 * self.dt + 0.5;
        Ok(crate::synesthesia::render_pcm(&self.audio, sample_rate, duration)?)
    }

    pub fn all_completed(&self) -> bool {
        self.completed == self.tasks
    }
}

pub fn load_script(path: &Path) -> Result<Vec<TrajectoryRecord>, HarnessError> {
    let file = File::open(path)?;
    read_records(BufReader::new(file)).map_err(|e| match e {
        TrajectoryError::Io(e) => HarnessError::Io(e),
        TrajectoryError::Parse { line, message } => {
            HarnessError::Input(format!("{}: line {line}: {message}", path.display()))
        }
    })
}

/// Runs a scenario to the end of its input. The input is fully read and
/// checked before the first tick.
pub fn run_scenario(
    scenario: Scenario,
    input: InputSource,
    options: &SessionOptions,
) -> Result<SessionLog, HarnessError> {
    let owned;
    let records: &[TrajectoryRecord] = match input {
        InputSource::File(path) => {
            owned = load_script(path)?;
            &owned
        }
        InputSource::Records(r) => r,
        InputSource::Synthetic => {
            owned = scripts::generate(scenario, options.dt);
            &owned
        }
    };
    let frames: Vec<Vec<HandFrame>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| r.frames().map_err(|e| HarnessError::Input(format!("record {}: {e}", i + 1))))
        .collect::<Result<_, _>>()?;

    let (mut session, mut lines) = Session::new(scenario, options)?;
    for f in &frames {
        lines.extend(session.step(f));
    }
    lines.push(session.finish());
    Ok(SessionLog {
        lines,
        audio: session.audio.clone(),
        ticks: session.tick(),
        dt: options.dt,
        completed: session.completed(),
        tasks: session.tasks.len(),
    })
}
