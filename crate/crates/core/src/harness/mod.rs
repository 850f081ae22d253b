//! Scenario playground: the four demo scenarios, scripted and live runs,
//! the session log, replay verification, usability metrics and the live
//! session server.

pub mod log;
mod metrics;
mod replay;
mod scenario;
pub mod scripts;
mod serve;
mod session;

pub use log::{read_log, LogLine};
pub use metrics::{compute_metrics, ErrorCounts, LatencyStats, MetricsReport, TaskMetrics};
pub use replay::{replay_verify, ReplayOutcome};
pub use scenario::{CatchConfig, Scenario, Task, TaskPredicate};
pub use serve::{handle_connection, serve, ServeOptions, ServerSummary};
pub use session::{
    load_script, run_scenario, InputSource, Session, SessionLog, SessionOptions, DEFAULT_DT, STATE_EVERY,
};

use thiserror::Error;

/// Version stamped in every session log header.
pub const LOG_VERSION: u64 = 1;
/// Live session protocol version.
pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad input: {0}")]
    Input(String),
    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("log version {found} is incompatible with this build (version {expected})")]
    Version { found: u64, expected: u64 },
    #[error(transparent)]
    Interaction(#[from] crate::interaction::InteractionError),
    #[error(transparent)]
    Gesture(#[from] crate::gestures::GestureError),
    #[error(transparent)]
    Audio(#[from] crate::synesthesia::SynesthesiaError),
}
