//! Hand-interaction engine.
//!
//! Streams of hand-skeleton frames go in; mediated interactions with
//! articulated virtual objects, recognized dynamic gestures and tonal touch
//! feedback come out. Everything runs at a fixed tick and is deterministic,
//! so sessions can be logged and replayed byte for byte.

pub mod geometry;
pub mod gestures;
pub mod hand;
pub mod harness;
pub mod interaction;
pub mod objects;
pub mod synesthesia;

pub use geometry::{Pose, Quat, Vec3};
pub use hand::{HandFrame, HandPose, PoseMetrics, Side};
