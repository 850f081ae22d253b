use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use omg_core::gestures::{
    argmax, featurize, forward, generate_dataset, scripted_gesture, split_holdout, train, GestureClass, LstmModel,
    Motion, StreamClassifier, StreamConfig, TrainConfig, NUM_CLASSES,
};
use omg_core::harness::{
    compute_metrics, replay_verify, run_scenario, scripts, serve, InputSource, LatencyStats, ReplayOutcome, Scenario,
    ServeOptions, SessionOptions, DEFAULT_DT,
};
use omg_core::hand::trajectory::write_records;
use omg_core::synesthesia::{write_wav, ToneMapping, SAMPLE_RATE};
use omg_core::Vec3;

#[derive(Parser)]
#[command(name = "omg", version, about = "Hand interaction engine: scenarios, replay, metrics, gestures, live server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario on a script (the built-in one by default) and write its log.
    Run {
        scenario: Scenario,
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Session log (JSONL); printed to stdout when omitted.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Render the contact tones to a 48 kHz WAV file.
        #[arg(long)]
        audio: Option<PathBuf>,
        /// Gesture model; adds streaming recognition to the run.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Region-to-frequency table (JSON object of region -> Hz).
        #[arg(long)]
        tones: Option<PathBuf>,
    },
    /// Re-run the session a log describes and compare byte for byte.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Usability metrics from a session log.
    Metrics {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a scenario's built-in input script.
    Script {
        scenario: Scenario,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the gesture classifier on the synthetic corpus.
    TrainGestures {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 40)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        hidden: usize,
    },
    /// Held-out accuracy and streaming latency of a gesture model.
    EvalGestures {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Dataset and holdout seed used for training.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        /// Scripted streams for the latency measurement.
        #[arg(long, default_value_t = 50)]
        streams: usize,
    },
    /// Serve live sessions over newline-delimited JSON on TCP.
    Serve {
        #[arg(long, default_value_t = 7321)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "panel")]
        scenario: Scenario,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for session logs and recorded input scripts.
        #[arg(long, default_value = "sessions")]
        log_dir: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Stop after this many connections.
        #[arg(long)]
        max_sessions: Option<usize>,
    },
}

fn load_model(path: &Path) -> Result<Arc<LstmModel>> {
    let file = File::open(path).with_context(|| format!("opening model {}", path.display()))?;
    Ok(Arc::new(LstmModel::read_json(BufReader::new(file))?))
}

fn session_options(seed: u64, model: Option<&Path>, tones: Option<&Path>) -> Result<SessionOptions> {
    let mut options = SessionOptions { seed, ..Default::default() };
    if let Some(m) = model {
        options.gestures = Some(load_model(m)?);
    }
    if let Some(t) = tones {
        let text = fs::read_to_string(t).with_context(|| format!("reading {}", t.display()))?;
        options.tones = ToneMapping::from_json(&text)?;
    }
    Ok(options)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { scenario, script, seed, log, audio, model, tones } => {
            let options = session_options(seed, model.as_deref(), tones.as_deref())?;
            let input = script.as_deref().map_or(InputSource::Synthetic, InputSource::File);
            let session = run_scenario(scenario, input, &options)?;
            match &log {
                Some(path) => {
                    let mut out = create(path)?;
                    session.write_to(&mut out)?;
                    out.flush()?;
                }
                None => session.write_to(std::io::stdout().lock())?,
            }
            if let Some(path) = &audio {
                let pcm = session.render_audio(SAMPLE_RATE)?;
                write_wav(create(path)?, &pcm, SAMPLE_RATE)?;
            }
            eprintln!(
                "{scenario}: {}/{} tasks in {} ticks, {} tones",
                session.completed,
                session.tasks,
                session.ticks,
                session.audio.len()
            );
        }
        Command::Replay { log, script, model } => {
            let text = fs::read_to_string(&log).with_context(|| format!("reading {}", log.display()))?;
            let model = model.as_deref().map(load_model).transpose()?;
            match replay_verify(&text, InputSource::File(&script), model)? {
                ReplayOutcome::Pass { lines } => println!("pass: {lines} lines identical"),
                ReplayOutcome::Diverged { line, expected, actual } => {
                    println!("fail: first difference at line {line}");
                    println!("  log:    {}", expected.as_deref().unwrap_or("<end of log>"));
                    println!("  replay: {}", actual.as_deref().unwrap_or("<end of replay>"));
                    std::process::exit(1);
                }
            }
        }
        Command::Metrics { log, json } => {
            let file = File::open(&log).with_context(|| format!("opening {}", log.display()))?;
            let report = compute_metrics(BufReader::new(file))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
        }
        Command::Script { scenario, out } => {
            let records = scripts::generate(scenario, DEFAULT_DT);
            let mut f = create(&out)?;
            write_records(&mut f, &records)?;
            f.flush()?;
            eprintln!("{} records written to {}", records.len(), out.display());
        }
        Command::TrainGestures { seed, out, per_class, epochs, hidden } => {
            let started = Instant::now();
            let data = generate_dataset(seed, per_class);
            let config = TrainConfig { seed, epochs, hidden, ..Default::default() };
            let outcome = train(&data, &config)?;
            for e in &outcome.curve {
                log::info!(
                    "epoch {:>3} loss {:.4} train {:.3} holdout {:.3}",
                    e.epoch,
                    e.mean_loss,
                    e.train_accuracy,
                    e.holdout_accuracy
                );
            }
            let mut f = create(&out)?;
            outcome.model.write_json(&mut f)?;
            f.flush()?;
            let last = outcome.curve.last().map_or(0.0, |e| e.holdout_accuracy);
            eprintln!("holdout accuracy {last:.4}, {:.1} s, model written to {}", started.elapsed().as_secs_f64(), out.display());
        }
        Command::EvalGestures { model, report, seed, per_class, streams } => {
            let model = load_model(&model)?;
            let value = evaluate_model(&model, seed, per_class, streams)?;
            let text = serde_json::to_string_pretty(&value)?;
            match &report {
                Some(path) => {
                    let mut f = create(path)?;
                    writeln!(f, "{text}")?;
                    eprintln!(
                        "holdout accuracy {}, stream latency median {} ms",
                        value["holdout_accuracy"], value["latency"]["median_ms"]
                    );
                }
                None => println!("{text}"),
            }
        }
        Command::Serve { port, host, scenario, seed, log_dir, model, max_sessions } => {
            let session = session_options(seed, model.as_deref(), None)?;
            let listener = TcpListener::bind((host.as_str(), port)).with_context(|| format!("binding {host}:{port}"))?;
            log::info!("serving {scenario} on {}", listener.local_addr()?);
            let options = ServeOptions { scenario, session, log_dir: Some(log_dir) };
            serve(listener, &options, max_sessions)?;
        }
    }
    Ok(())
}

/// Holdout accuracy with a confusion matrix, plus latency over scripted
/// single-gesture streams.
fn evaluate_model(model: &Arc<LstmModel>, seed: u64, per_class: usize, streams: usize) -> Result<serde_json::Value> {
    let data = generate_dataset(seed, per_class);
    let labels: Vec<GestureClass> = data.iter().map(|s| s.label).collect();
    let (_, holdout) = split_holdout(&labels, TrainConfig::default().holdout, seed);
    let mut confusion = vec![vec![0usize; NUM_CLASSES]; NUM_CLASSES];
    for &i in &holdout {
        let predicted = argmax(&forward(&featurize(&data[i].frames)?, model)?);
        confusion[data[i].label.index()][predicted] += 1;
    }
    let correct: usize = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
    if holdout.is_empty() {
        bail!("holdout is empty; raise --per-class");
    }

    let mut latencies = Vec::new();
    let mut clean = 0;
    let end = 2.0;
    for k in 0..streams {
        let class = GestureClass::ALL[1 + k % (GestureClass::ALL.len() - 1)];
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(k as u64));
        let motion = Motion::random(class, Vec3::new(0.0, 1.2, 0.35), &mut rng);
        let mut classifier = StreamClassifier::new(model.clone(), StreamConfig::default())?;
        let mut events = Vec::new();
        for f in scripted_gesture(&motion, 0.0, end, 90, k as u64) {
            if let Some(e) = classifier.push(f)? {
                events.push(e);
            }
        }
        if events.len() == 1 && events[0].label == class {
            clean += 1;
        }
        if let Some(e) = events.iter().find(|e| e.label == class) {
            latencies.push((e.emit_time - end) * 1000.0);
        }
    }
    let names: Vec<&str> = GestureClass::ALL.iter().map(|c| c.as_str()).collect();
    Ok(json!({
        "holdout_accuracy": correct as f64 / holdout.len() as f64,
        "holdout_samples": holdout.len(),
        "classes": names,
        "confusion": confusion,
        "streams": streams,
        "streams_single_correct_event": clean,
        "latency": LatencyStats::from_ms(&latencies),
    }))
}
