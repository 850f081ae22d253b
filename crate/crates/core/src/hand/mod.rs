//! The universal hand model.
//!
//! Every sensor is normalized into a [`HandFrame`]: 21 landmarks in meters
//! (wrist, then base/proximal/intermediate/tip for thumb through little
//! finger), world axes with x right, y up and z toward the default viewer.
//! Pose metrics, the synthetic camera and the trajectory file format all
//! build on that one representation.

mod adapter;
mod camera;
mod frame;
mod metrics;
mod template;
pub mod trajectory;

pub use adapter::{normalize_frame, AxisMap, RawSensorFrame, SensorAdapter};
pub use camera::{observe, CameraPose, CameraPreset, EDGE_ON_THRESHOLD};
pub use frame::{Finger, HandFrame, Joint, Side, FINGERS, LANDMARK_COUNT, PALM_LANDMARKS, TIP_LANDMARKS, WRIST};
pub use metrics::{pose_metrics, PoseMetrics};
pub use template::{finger_chain, template, HandPose, HandTemplate, CURL_EXPONENT, FINGER_FLEX_MAX, SPLAY_MAX};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HandError {
    #[error("adapter configuration error: {0}")]
    Config(String),
    #[error("frame decode error: {0}")]
    Decode(String),
    #[error("invalid hand frame: {0}")]
    Invalid(String),
    #[error("degenerate hand frame: {0}")]
    Degenerate(&'static str),
}
