//! Usability metrics recomputed from a session log.

use std::io::BufRead;

use serde::Serialize;
use serde_json::Value;

use super::log::{read_log, LogLine};
use super::{HarnessError, LOG_VERSION};

/// Log line types that count as user errors.
pub const ERROR_EVENTS: [&str; 3] = ["grab_failed", "catch_missed", "object_dropped"];

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ErrorCounts {
    pub grab_failed: u64,
    pub catch_missed: u64,
    pub object_dropped: u64,
    pub total: u64,
}

impl ErrorCounts {
    fn add(&mut self, kind: &str) {
        match kind {
            "grab_failed" => self.grab_failed += 1,
            "catch_missed" => self.catch_missed += 1,
            "object_dropped" => self.object_dropped += 1,
            _ => return,
        }
        self.total += 1;
    }
}

/// Recognition latency in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub median_ms: f64,
    /// Nearest-rank 95th percentile.
    pub p95_ms: f64,
}

impl LatencyStats {
    pub fn from_ms(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Self { count: n, median_ms: median, p95_ms: v[rank - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskMetrics {
    pub task: String,
    pub started_at: f64,
    pub completed_at: Option<f64>,
    pub time_to_complete: Option<f64>,
    pub errors: ErrorCounts,
    pub latency: Option<LatencyStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub seed: u64,
    pub tasks: Vec<TaskMetrics>,
    pub tasks_completed: usize,
    pub tasks_total: usize,
    /// From session start to the last completion, when every task is done.
    pub total_time: Option<f64>,
    pub errors: ErrorCounts,
    pub latency: Option<LatencyStats>,
    pub ticks: u64,
    pub duration: f64,
}

fn text(line: &LogLine, key: &str) -> Result<String, String> {
    line.data.get(key).and_then(Value::as_str).map(str::to_string).ok_or_else(|| format!("{} needs a string {key}", line.kind))
}

fn number(line: &LogLine, key: &str) -> Result<f64, String> {
    line.data.get(key).and_then(Value::as_f64).ok_or_else(|| format!("{} needs a numeric {key}", line.kind))
}

/// Parses the log and derives the report from it alone.
pub fn compute_metrics<R: BufRead>(log: R) -> Result<MetricsReport, HarnessError> {
    metrics_from_lines(&read_log(log)?)
}

pub fn metrics_from_lines(lines: &[LogLine]) -> Result<MetricsReport, HarnessError> {
    let header = &lines[0];
    let version = header.data.get("version").and_then(Value::as_u64).unwrap_or(0);
    if version != LOG_VERSION {
        return Err(HarnessError::Version { found: version, expected: LOG_VERSION });
    }
    let bad = |i: usize, message: String| HarnessError::Log { line: i + 1, message };
    let scenario = text(header, "scenario").map_err(|m| bad(0, m))?;
    let seed = header.data.get("seed").and_then(Value::as_u64).unwrap_or(0);
    let tasks_total = header.data.get("tasks").and_then(Value::as_array).map_or(0, Vec::len);

    let mut tasks: Vec<TaskMetrics> = Vec::new();
    let mut latencies: Vec<Vec<f64>> = Vec::new();
    let mut all_latencies = Vec::new();
    let mut errors = ErrorCounts::default();
    let mut active: Option<usize> = None;
    for (i, line) in lines.iter().enumerate() {
        match line.kind.as_str() {
            "task_started" => {
                let task = text(line, "task").map_err(|m| bad(i, m))?;
                tasks.push(TaskMetrics {
                    task,
                    started_at: line.t,
                    completed_at: None,
                    time_to_complete: None,
                    errors: ErrorCounts::default(),
                    latency: None,
                });
                latencies.push(Vec::new());
                active = Some(tasks.len() - 1);
            }
            "task_completed" => {
                let task = text(line, "task").map_err(|m| bad(i, m))?;
                let k = active
                    .filter(|&k| tasks[k].task == task)
                    .ok_or_else(|| bad(i, format!("task_completed for {task}, which is not running")))?;
                tasks[k].completed_at = Some(line.t);
                tasks[k].time_to_complete = Some(line.t - tasks[k].started_at);
                active = None;
            }
            "gesture" => {
                let end = number(line, "gesture_end").map_err(|m| bad(i, m))?;
                let emit = number(line, "emit").map_err(|m| bad(i, m))?;
                let ms = (emit - end) * 1000.0;
                all_latencies.push(ms);
                if let Some(k) = active {
                    latencies[k].push(ms);
                }
            }
            kind if ERROR_EVENTS.contains(&kind) => {
                errors.add(kind);
                if let Some(k) = active {
                    tasks[k].errors.add(kind);
                }
            }
            _ => {}
        }
    }
    for (task, lat) in tasks.iter_mut().zip(&latencies) {
        task.latency = LatencyStats::from_ms(lat);
    }
    let tasks_completed = tasks.iter().filter(|t| t.completed_at.is_some()).count();
    let total_time = (tasks_total > 0 && tasks_completed == tasks_total)
        .then(|| tasks.iter().filter_map(|t| t.completed_at).fold(0.0, f64::max));
    let last = lines.last().expect("read_log rejects empty logs");
    Ok(MetricsReport {
        scenario,
        seed,
        tasks,
        tasks_completed,
        tasks_total,
        total_time,
        errors,
        latency: LatencyStats::from_ms(&all_latencies),
        ticks: last.tick,
        duration: last.t,
    })
}

impl MetricsReport {
    /// Plain-text table for terminals.
    pub fn render(&self) -> String {
        let mut s = format!(
            "scenario {} (seed {}): {}/{} tasks, {} ticks, {:.3} s\n",
            self.scenario, self.seed, self.tasks_completed, self.tasks_total, self.ticks, self.duration
        );
        for t in &self.tasks {
            let time = t.time_to_complete.map_or("not completed".to_string(), |v| format!("{v:.3} s"));
            s.push_str(&format!("  {:<14} {:>14}  errors {}", t.task, time, t.errors.total));
            if let Some(l) = &t.latency {
                s.push_str(&format!("  latency median {:.0} ms p95 {:.0} ms", l.median_ms, l.p95_ms));
            }
            s.push('\n');
        }
        let e = &self.errors;
        s.push_str(&format!(
            "errors: {} grab_failed, {} catch_missed, {} object_dropped\n",
            e.grab_failed, e.catch_missed, e.object_dropped
        ));
        if let Some(total) = self.total_time {
            s.push_str(&format!("all tasks done at {total:.3} s\n"));
        }
        if let Some(l) = &self.latency {
            s.push_str(&format!("gesture latency: n={} median {:.0} ms p95 {:.0} ms\n", l.count, l.median_ms, l.p95_ms));
        }
        s
    }
}
