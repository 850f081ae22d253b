//! Live session server: newline-delimited JSON over TCP, one session per
//! connection at a time. Every connection writes the same log a scripted
//! run of its recorded input would.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::PathBuf;

use serde::Deserialize;
use serde_json::{json, Value};

use super::log::LogLine;
use super::scenario::Scenario;
use super::session::{Session, SessionOptions};
use super::{HarnessError, PROTOCOL_VERSION};
use crate::geometry::{from_array, quat_from_array};
use crate::hand::trajectory::{HandRecord, TrajectoryRecord};
use crate::hand::{HandFrame, HandPose, Side};
use crate::objects::{catalog, SmartObject};

/// A `snapshot` message goes out every this many ticks.
pub const SNAPSHOT_EVERY: u64 = 2;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub scenario: Scenario,
    pub session: SessionOptions,
    /// Where logs and recorded scripts go; nothing is written when unset.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { scenario: Scenario::Panel, session: SessionOptions::default(), log_dir: None }
    }
}

/// What one connection did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ServerSummary {
    pub sessions: usize,
    pub ticks: u64,
    pub snapshots: u64,
    pub errors: u64,
    pub logs: Vec<PathBuf>,
    pub scripts: Vec<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ClientMessage {
    Hello {
        version: u64,
    },
    Input {
        #[serde(default)]
        tick: Option<u64>,
        #[serde(default)]
        hands: Vec<InputHand>,
    },
    Command {
        command: String,
        #[serde(default)]
        scenario: Option<String>,
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InputHand {
    Landmarks {
        side: Side,
        landmarks: Vec<[f64; 3]>,
        #[serde(default)]
        confidence: Option<Vec<f64>>,
    },
    /// Controller-style input: the palm pose plus grip, posed on the
    /// template hand.
    Pose {
        side: Side,
        position: [f64; 3],
        #[serde(default = "identity")]
        orientation: [f64; 4],
        aperture: f64,
        #[serde(default)]
        spread: Option<f64>,
    },
}

fn identity() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl InputHand {
    fn frame(&self, t: f64) -> Result<HandFrame, String> {
        match self {
            InputHand::Landmarks { side, landmarks, confidence } => {
                let lm: Vec<_> = landmarks.iter().map(|a| from_array(*a)).collect();
                let conf = confidence.clone().unwrap_or_else(|| vec![1.0; lm.len()]);
                HandFrame::from_slices(*side, &lm, &conf, t).map_err(|e| e.to_string())
            }
            InputHand::Pose { side, position, orientation, aperture, spread } => {
                let norm = orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !norm.is_finite() || (norm - 1.0).abs() > 1e-3 {
                    return Err(format!("orientation must be a unit quaternion [w,x,y,z], norm is {norm}"));
                }
                if !(0.0..=1.0).contains(aperture) {
                    return Err(format!("aperture {aperture} outside [0, 1]"));
                }
                let spread = spread.unwrap_or(0.5);
                if !(0.0..=1.0).contains(&spread) {
                    return Err(format!("spread {spread} outside [0, 1]"));
                }
                let palm = from_array(*position);
                if !palm.iter().all(|c| c.is_finite()) {
                    return Err("position is not finite".into());
                }
                let pose = HandPose::new(*side, palm, quat_from_array(*orientation), *aperture, spread);
                let frame = pose.with_palm_at(palm).frame(t);
                frame.validate().map_err(|e| e.to_string())?;
                Ok(frame)
            }
        }
    }
}

/// A running session plus its files.
struct Live {
    session: Session,
    log: Option<BufWriter<File>>,
    script: Option<BufWriter<File>>,
    task_started: f64,
}

impl Live {
    fn write_lines(&mut self, lines: &[LogLine]) -> std::io::Result<()> {
        if let Some(f) = self.log.as_mut() {
            for l in lines {
                writeln!(f, "{}", l.to_line())?;
            }
            f.flush()?;
        }
        Ok(())
    }

    fn close(mut self) -> std::io::Result<()> {
        let end = self.session.finish();
        self.write_lines(&[end])?;
        if let Some(f) = self.script.as_mut() {
            f.flush()?;
        }
        Ok(())
    }
}

struct Connection<'a, W: Write> {
    out: W,
    options: &'a ServeOptions,
    id: usize,
    summary: ServerSummary,
    live: Option<Live>,
}

impl<W: Write> Connection<'_, W> {
    fn send(&mut self, message: Value) -> std::io::Result<()> {
        writeln!(self.out, "{message}")?;
        self.out.flush()
    }

    fn error(&mut self, message: impl Into<String>) -> std::io::Result<()> {
        self.summary.errors += 1;
        self.send(json!({ "type": "error", "message": message.into() }))
    }

    fn forward(&mut self, lines: &[LogLine]) -> std::io::Result<()> {
        for l in lines {
            if l.kind == "state" {
                continue;
            }
            self.send(json!({ "type": "event", "tick": l.tick, "t": l.t, "event": l.kind, "data": l.data }))?;
            let Some(live) = self.live.as_mut() else { continue };
            match l.kind.as_str() {
                "task_completed" => {
                    let elapsed = l.t - live.task_started;
                    let task = l.data["task"].clone();
                    self.send(json!({ "type": "metric", "task": task, "time_to_complete": elapsed }))?;
                }
                "task_started" => live.task_started = l.t,
                _ => {}
            }
        }
        Ok(())
    }

    fn snapshot(&mut self) -> std::io::Result<()> {
        let Some(live) = &self.live else { return Ok(()) };
        let s = &live.session;
        let mut msg = s.world().snapshot();
        msg["type"] = json!("snapshot");
        msg["tick"] = json!(s.tick());
        msg["t"] = json!(s.world().time());
        msg["tasks"] = s.checklist().iter().map(|(task, done)| json!({ "task": task, "done": done })).collect();
        self.summary.snapshots += 1;
        self.send(msg)
    }

    fn stop(&mut self) -> std::io::Result<()> {
        if let Some(live) = self.live.take() {
            live.close()?;
        }
        Ok(())
    }

    fn start(&mut self, scenario: Scenario, seed: u64) -> Result<(), HarnessError> {
        self.stop()?;
        let options = SessionOptions { seed, ..self.options.session.clone() };
        let (session, lines) = Session::new(scenario, &options)?;
        let (mut log, mut script) = (None, None);
        if let Some(dir) = &self.options.log_dir {
            std::fs::create_dir_all(dir)?;
            let stem = format!("{}-{}-{}", scenario.as_str(), self.id, self.summary.sessions + 1);
            let log_path = dir.join(format!("{stem}.log.jsonl"));
            let script_path = dir.join(format!("{stem}.script.jsonl"));
            log = Some(BufWriter::new(File::create(&log_path)?));
            script = Some(BufWriter::new(File::create(&script_path)?));
            self.summary.logs.push(log_path);
            self.summary.scripts.push(script_path);
        }
        self.summary.sessions += 1;
        let mut live = Live { session, log, script, task_started: 0.0 };
        live.write_lines(&lines)?;
        self.live = Some(live);
        self.forward(&lines)?;
        Ok(())
    }

    fn input(&mut self, tick: Option<u64>, hands: &[InputHand]) -> Result<(), HarnessError> {
        let Some(live) = self.live.as_mut() else {
            self.error("no session running")?;
            return Ok(());
        };
        let next = live.session.tick() + 1;
        if let Some(tick) = tick.filter(|&k| k != next) {
            self.error(format!("input for tick {tick}, expected tick {next}"))?;
            return Ok(());
        }
        let t = next as f64 * live.session.world().dt;
        let frames: Result<Vec<HandFrame>, String> = hands.iter().map(|h| h.frame(t)).collect();
        let frames = match frames {
            Ok(f) => f,
            Err(e) => {
                self.error(format!("invalid hand frame: {e}"))?;
                return Ok(());
            }
        };
        if let Some(f) = live.script.as_mut() {
            writeln!(f, "{}", TrajectoryRecord { t, hands: frames.iter().map(HandRecord::from_frame).collect(), label: None }.to_line())?;
        }
        let lines = live.session.step(&frames);
        live.write_lines(&lines)?;
        self.summary.ticks += 1;
        self.forward(&lines)?;
        if next % SNAPSHOT_EVERY == 0 {
            self.snapshot()?;
        }
        Ok(())
    }
}

/// Serves one client until it disconnects or speaks the wrong protocol
/// version. The first message must be `hello`; the default scenario
/// starts right after the `welcome`.
pub fn handle_connection<R: BufRead, W: Write>(
    input: R,
    output: W,
    options: &ServeOptions,
    id: usize,
) -> Result<ServerSummary, HarnessError> {
    let mut c = Connection { out: output, options, id, summary: ServerSummary::default(), live: None };
    let mut greeted = false;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                c.error(format!("malformed JSON: {e}"))?;
                continue;
            }
        };
        let message: ClientMessage = match serde_json::from_value(value) {
            Ok(m) => m,
            Err(e) => {
                c.error(format!("unrecognized message: {e}"))?;
                continue;
            }
        };
        match message {
            ClientMessage::Hello { version } if !greeted => {
                if version != PROTOCOL_VERSION {
                    c.error(format!("protocol version {version} is not supported; this server speaks {PROTOCOL_VERSION}"))?;
                    break;
                }
                greeted = true;
                let objects: Vec<SmartObject> = catalog();
                let scenarios: Vec<&str> = Scenario::ALL.iter().map(|s| s.as_str()).collect();
                c.send(json!({
                    "type": "welcome",
                    "version": PROTOCOL_VERSION,
                    "catalog": objects,
                    "scenarios": scenarios,
                    "scenario": options.scenario.as_str(),
                }))?;
                c.start(options.scenario, options.session.seed)?;
            }
            _ if !greeted => c.error("say hello first")?,
            ClientMessage::Hello { .. } => c.error("already greeted")?,
            ClientMessage::Input { tick, hands } => c.input(tick, &hands)?,
            ClientMessage::Command { command, scenario, seed } => {
                let current = c.live.as_ref().map_or(options.scenario, |l| l.session.scenario());
                let seed = seed.unwrap_or(options.session.seed);
                match command.as_str() {
                    "start" | "reset" => {
                        let target = match scenario.as_deref().map(Scenario::parse).transpose() {
                            Ok(s) => s.unwrap_or(current),
                            Err(e) => {
                                c.error(e.to_string())?;
                                continue;
                            }
                        };
                        c.start(target, seed)?;
                    }
                    "stop" => c.stop()?,
                    other => c.error(format!("unknown command {other:?}"))?,
                }
            }
        }
    }
    c.stop()?;
    Ok(c.summary)
}

/// Accepts connections one after another, `max_connections` of them when
/// given, otherwise forever.
pub fn serve(listener: TcpListener, options: &ServeOptions, max_connections: Option<usize>) -> Result<(), HarnessError> {
    let mut id = 0;
    for stream in listener.incoming() {
        let stream = stream?;
        id += 1;
        let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
        log::info!("connection {id} from {peer}");
        let reader = BufReader::new(stream.try_clone()?);
        match handle_connection(reader, stream, options, id) {
            Ok(s) => log::info!("connection {id} closed: {} ticks, {} errors", s.ticks, s.errors),
            Err(e) => log::warn!("connection {id} ended with an error: {e}"),
        }
        if max_connections.is_some_and(|m| id >= m) {
            break;
        }
    }
    Ok(())
}
