//! Sliding-window recognizer over a live frame stream.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::features::featurize;
use super::lstm::{argmax, forward, softmax, LstmModel};
use super::{GestureClass, GestureError};
use crate::hand::{HandFrame, TIP_LANDMARKS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    /// Frames in the classification window.
    pub window: usize,
    /// Frames between classifications.
    pub stride: usize,
    pub threshold: f64,
    /// A latched label re-arms once its probability falls below this.
    pub rearm: f64,
    /// Seconds after an event during which no new event is emitted.
    pub refractory: f64,
    /// Frames buffered before the first classification.
    pub min_frames: usize,
    /// Combined wrist and fingertip speed (m/s) above which a frame counts as moving.
    pub motion_threshold: f64,
    /// Events are only emitted while the hand moved within this many seconds.
    pub motion_recency: f64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            window: 90,
            stride: 15,
            threshold: 0.8,
            rearm: 0.2,
            refractory: 0.5,
            min_frames: 30,
            motion_threshold: 0.05,
            motion_recency: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecognitionEvent {
    pub label: GestureClass,
    pub confidence: f64,
    pub emit_time: f64,
    /// Estimated end of the recognized motion: the last moving frame in the window.
    pub gesture_end_time: f64,
}

impl RecognitionEvent {
    pub fn latency(&self) -> f64 {
        self.emit_time - self.gesture_end_time
    }
}

/// Per-stream state. Events are edge-triggered per label: once a label fires
/// it stays latched until its probability falls under `rearm` or the hand
/// comes to rest. A hand that has been still for longer than
/// `motion_recency` emits nothing.
#[derive(Debug, Clone)]
pub struct StreamClassifier {
    model: Arc<LstmModel>,
    config: StreamConfig,
    buffer: VecDeque<HandFrame>,
    since_eval: usize,
    last_emit: Option<f64>,
    latched: Option<GestureClass>,
    last_probs: Option<Vec<f64>>,
}

impl StreamClassifier {
    pub fn new(model: Arc<LstmModel>, config: StreamConfig) -> Result<Self, GestureError> {
        if config.window < 2 || config.stride == 0 || config.min_frames < 2 || config.min_frames > config.window {
            return Err(GestureError::Stream(format!("invalid stream config {config:?}")));
        }
        Ok(Self {
            model,
            config,
            buffer: VecDeque::with_capacity(config.window),
            since_eval: 0,
            last_emit: None,
            latched: None,
            last_probs: None,
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    /// Class probabilities from the most recent classification.
    pub fn last_probabilities(&self) -> Option<&[f64]> {
        self.last_probs.as_deref()
    }

    pub fn reset(&mut self) {
        self.buffer.clear();
        self.since_eval = 0;
        self.last_emit = None;
        self.latched = None;
        self.last_probs = None;
    }

    pub fn push(&mut self, frame: HandFrame) -> Result<Option<RecognitionEvent>, GestureError> {
        if let Some(prev) = self.buffer.back() {
            if !(frame.timestamp > prev.timestamp) {
                return Err(GestureError::Stream(format!(
                    "out-of-order timestamp {} after {}",
                    frame.timestamp, prev.timestamp
                )));
            }
        }
        if self.buffer.len() == self.config.window {
            self.buffer.pop_front();
        }
        self.buffer.push_back(frame);
        self.since_eval += 1;
        if self.buffer.len() < self.config.min_frames || self.since_eval < self.config.stride {
            return Ok(None);
        }
        self.since_eval = 0;
        self.classify()
    }

    fn classify(&mut self) -> Result<Option<RecognitionEvent>, GestureError> {
        let frames: Vec<HandFrame> = self.buffer.iter().cloned().collect();
        let probs = softmax(&forward(&featurize(&frames)?, &self.model)?);
        let now = frames[frames.len() - 1].timestamp;
        let best = argmax(&probs);
        let gesture_end_time = last_moving_time(&frames, self.config.motion_threshold);
        let still = now - gesture_end_time > self.config.motion_recency;
        if let Some(l) = self.latched {
            if still || probs[l.index()] < self.config.rearm {
                self.latched = None;
            }
        }
        let label = GestureClass::from_index(best).expect("softmax has one entry per class");
        let confidence = probs[best];
        self.last_probs = Some(probs);
        if label == GestureClass::Null || confidence < self.config.threshold || self.latched == Some(label) {
            return Ok(None);
        }
        if let Some(t) = self.last_emit {
            if now - t < self.config.refractory {
                return Ok(None);
            }
        }
        if still {
            return Ok(None);
        }
        self.latched = Some(label);
        self.last_emit = Some(now);
        Ok(Some(RecognitionEvent {
            label,
            confidence,
            emit_time: now,
            gesture_end_time,
        }))
    }
}

fn tip_centroid(f: &HandFrame) -> crate::geometry::Vec3 {
    let w = f.wrist();
    TIP_LANDMARKS.iter().map(|&i| f.landmarks[i] - w).sum::<crate::geometry::Vec3>() / TIP_LANDMARKS.len() as f64
}

/// Timestamp of the last frame moving faster than `threshold`, or of the
/// first frame if the hand never moved.
fn last_moving_time(frames: &[HandFrame], threshold: f64) -> f64 {
    for pair in frames.windows(2).rev() {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.timestamp - a.timestamp;
        let speed = ((b.wrist() - a.wrist()).norm() + (tip_centroid(b) - tip_centroid(a)).norm()) / dt;
        if speed > threshold {
            return b.timestamp;
        }
    }
    frames[0].timestamp
}
