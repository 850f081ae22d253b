//! Dynamic gesture recognition: synthetic training corpus, hand-motion
//! features, a single-layer LSTM classifier trained with full BPTT, and a
//! streaming recognizer.

mod dataset;
mod features;
mod lstm;
mod stream;
mod train;

pub use dataset::{
    gesture_frames, generate_dataset, idle_frames, scripted_gesture, GeneratorParams, GestureSample, Motion, FRAME_RATE,
};
pub use features::{featurize, FeatureSeq, FEATURE_DIM};
pub use lstm::{
    argmax, forward, loss, softmax, Gradients, LstmModel, LstmState, ModelFile, Trace, GATE_NAMES, NUM_CLASSES,
};
pub use stream::{RecognitionEvent, StreamClassifier, StreamConfig};
pub use train::{evaluate, split_holdout, train, train_features, EpochStats, TrainConfig, TrainOutcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dynamic gesture vocabulary. `Null` (no gesture) is index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestureClass {
    Null = 0,
    Wrap = 1,
    Twist = 2,
    Cut = 3,
    Push = 4,
    Wave = 5,
}

impl GestureClass {
    pub const ALL: [GestureClass; 6] = [
        GestureClass::Null,
        GestureClass::Wrap,
        GestureClass::Twist,
        GestureClass::Cut,
        GestureClass::Push,
        GestureClass::Wave,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GestureClass::Null => "null",
            GestureClass::Wrap => "wrap",
            GestureClass::Twist => "twist",
            GestureClass::Cut => "cut",
            GestureClass::Push => "push",
            GestureClass::Wave => "wave",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.as_str() == s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GestureError {
    #[error("need at least two frames, got {0}")]
    TooFewFrames(usize),
    #[error("empty feature sequence")]
    EmptySequence,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged in epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("stream error: {0}")]
    Stream(String),
    #[error("model file error: {0}")]
    ModelFile(String),
    #[error(transparent)]
    Hand(#[from] crate::hand::HandError),
}
