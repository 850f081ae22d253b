//! Per-kind articulation state and its response to drives.

use serde::{Deserialize, Serialize};

use super::ObjectError;

/// Full push-button travel (m).
pub const BUTTON_TRAVEL: f64 = 0.006;
/// Spring-return speed of an undriven button (m/s).
pub const BUTTON_RETURN_SPEED: f64 = 0.05;
pub const DIAL_MAX: f64 = 270.0;
pub const SCISSORS_MAX: f64 = 30.0;
/// Full plunger depth (m).
pub const PLUNGER_MAX: f64 = 0.04;
pub const STRETCH_MIN: f64 = 1.0;
pub const STRETCH_MAX: f64 = 1.6;
/// Full turns of wrap-axis rotation that complete a bandage wrap.
pub const WRAP_TURNS: f64 = 2.0;
pub const LIMB_MAX: f64 = 45.0;
/// Lift angle (degrees) reported as `limb_lifted`.
pub const LIMB_LIFTED: f64 = 30.0;

/// Articulation state; the variant is the object kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Articulation {
    PushButton {
        /// Axial displacement (m).
        travel: f64,
        #[serde(default)]
        pressed: bool,
    },
    LeverSwitch {
        /// Detent angles (degrees), ascending.
        detents: Vec<f64>,
        index: usize,
        /// Driven deflection from the current detent (degrees).
        #[serde(default)]
        offset: f64,
    },
    RotaryDial {
        /// Degrees.
        angle: f64,
        #[serde(default)]
        turning: bool,
    },
    Ball,
    Bat,
    Scissors {
        /// Blade opening (degrees).
        blade_angle: f64,
        #[serde(default)]
        closed: bool,
    },
    Syringe {
        /// Plunger depth (m).
        plunger_depth: f64,
        #[serde(default)]
        depressed: bool,
    },
    Bandage {
        stretch: f64,
        wrap_progress: f64,
    },
    PatientLimb {
        /// Degrees.
        lift_angle: f64,
        #[serde(default)]
        lifted: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    PushButton,
    LeverSwitch,
    RotaryDial,
    Ball,
    Bat,
    Scissors,
    Syringe,
    Bandage,
    PatientLimb,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 9] = [
        ObjectKind::PushButton,
        ObjectKind::LeverSwitch,
        ObjectKind::RotaryDial,
        ObjectKind::Ball,
        ObjectKind::Bat,
        ObjectKind::Scissors,
        ObjectKind::Syringe,
        ObjectKind::Bandage,
        ObjectKind::PatientLimb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::PushButton => "push_button",
            ObjectKind::LeverSwitch => "lever_switch",
            ObjectKind::RotaryDial => "rotary_dial",
            ObjectKind::Ball => "ball",
            ObjectKind::Bat => "bat",
            ObjectKind::Scissors => "scissors",
            ObjectKind::Syringe => "syringe",
            ObjectKind::Bandage => "bandage",
            ObjectKind::PatientLimb => "patient_limb",
        }
    }

    /// Kinds the hand turns into when grasped.
    pub fn is_instrument(self) -> bool {
        matches!(self, ObjectKind::Scissors | ObjectKind::Syringe | ObjectKind::Bat | ObjectKind::Bandage)
    }
}

/// Input from the mediation layer for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Drive {
    /// Relative displacement (m) or rotation (degrees) this tick.
    Increment { amount: f64 },
    /// Absolute value of the articulation scalar.
    Set { value: f64 },
    /// Two-handed bandage handling: inter-hand distance over rest length,
    /// and rotation about the wrap axis this tick (radians).
    Bandage { stretch_ratio: f64, wrap_angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticulationEventKind {
    ButtonPressed,
    ButtonReleased,
    LeverToggled,
    DialSet,
    ScissorsClosed,
    PlungerDepressed,
    BandageWrapped,
    LimbLifted,
}

impl ArticulationEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArticulationEventKind::ButtonPressed => "button_pressed",
            ArticulationEventKind::ButtonReleased => "button_released",
            ArticulationEventKind::LeverToggled => "lever_toggled",
            ArticulationEventKind::DialSet => "dial_set",
            ArticulationEventKind::ScissorsClosed => "scissors_closed",
            ArticulationEventKind::PlungerDepressed => "plunger_depressed",
            ArticulationEventKind::BandageWrapped => "bandage_wrapped",
            ArticulationEventKind::LimbLifted => "limb_lifted",
        }
    }
}

/// An edge-triggered articulation event. `value` is the articulation scalar
/// after the step (detent index for levers).
#[derive(Debug, Clone, PartialEq)]
pub struct ArticulationEvent {
    pub object: String,
    pub kind: ArticulationEventKind,
    pub value: f64,
}

fn mismatch(kind: ObjectKind, drive: &Drive) -> ObjectError {
    ObjectError::Dispatch(format!("{} cannot take drive {drive:?}", kind.as_str()))
}

/// Scalar drive for kinds driven by a single value.
fn scalar(current: f64, drive: &Drive, kind: ObjectKind) -> Result<f64, ObjectError> {
    match *drive {
        Drive::Increment { amount } => Ok(current + amount),
        Drive::Set { value } => Ok(value),
        Drive::Bandage { .. } => Err(mismatch(kind, drive)),
    }
}

impl Articulation {
    pub fn kind(&self) -> ObjectKind {
        match self {
            Articulation::PushButton { .. } => ObjectKind::PushButton,
            Articulation::LeverSwitch { .. } => ObjectKind::LeverSwitch,
            Articulation::RotaryDial { .. } => ObjectKind::RotaryDial,
            Articulation::Ball => ObjectKind::Ball,
            Articulation::Bat => ObjectKind::Bat,
            Articulation::Scissors { .. } => ObjectKind::Scissors,
            Articulation::Syringe { .. } => ObjectKind::Syringe,
            Articulation::Bandage { .. } => ObjectKind::Bandage,
            Articulation::PatientLimb { .. } => ObjectKind::PatientLimb,
        }
    }

    /// Rest state of a kind.
    pub fn rest(kind: ObjectKind) -> Self {
        match kind {
            ObjectKind::PushButton => Articulation::PushButton { travel: 0.0, pressed: false },
            ObjectKind::LeverSwitch => Articulation::LeverSwitch { detents: vec![-30.0, 30.0], index: 0, offset: 0.0 },
            ObjectKind::RotaryDial => Articulation::RotaryDial { angle: 0.0, turning: false },
            ObjectKind::Ball => Articulation::Ball,
            ObjectKind::Bat => Articulation::Bat,
            ObjectKind::Scissors => Articulation::Scissors { blade_angle: SCISSORS_MAX, closed: false },
            ObjectKind::Syringe => Articulation::Syringe { plunger_depth: 0.0, depressed: false },
            ObjectKind::Bandage => Articulation::Bandage { stretch: STRETCH_MIN, wrap_progress: 0.0 },
            ObjectKind::PatientLimb => Articulation::PatientLimb { lift_angle: 0.0, lifted: false },
        }
    }

    /// Primary articulation scalar (none for rigid bodies).
    pub fn value(&self) -> Option<f64> {
        match self {
            Articulation::PushButton { travel, .. } => Some(*travel),
            Articulation::LeverSwitch { detents, index, offset } => Some(detents[*index] + offset),
            Articulation::RotaryDial { angle, .. } => Some(*angle),
            Articulation::Ball | Articulation::Bat => None,
            Articulation::Scissors { blade_angle, .. } => Some(*blade_angle),
            Articulation::Syringe { plunger_depth, .. } => Some(*plunger_depth),
            Articulation::Bandage { stretch, .. } => Some(*stretch),
            Articulation::PatientLimb { lift_angle, .. } => Some(*lift_angle),
        }
    }

    /// Checks every scalar against its declared range.
    pub fn validate(&self) -> Result<(), ObjectError> {
        let within = |name: &str, v: f64, lo: f64, hi: f64| {
            if v.is_finite() && v >= lo && v <= hi {
                Ok(())
            } else {
                Err(ObjectError::Invalid(format!("{name} {v} outside [{lo}, {hi}]")))
            }
        };
        match self {
            Articulation::PushButton { travel, .. } => within("travel", *travel, 0.0, BUTTON_TRAVEL),
            Articulation::LeverSwitch { detents, index, offset } => {
                if detents.len() < 2 || detents.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(ObjectError::Invalid("lever needs two or more ascending detents".into()));
                }
                if *index >= detents.len() {
                    return Err(ObjectError::Invalid(format!("detent index {index} out of range")));
                }
                let pos = detents[*index] + offset;
                within("lever angle", pos, detents[0], detents[detents.len() - 1])
            }
            Articulation::RotaryDial { angle, .. } => within("dial angle", *angle, 0.0, DIAL_MAX),
            Articulation::Ball | Articulation::Bat => Ok(()),
            Articulation::Scissors { blade_angle, .. } => within("blade angle", *blade_angle, 0.0, SCISSORS_MAX),
            Articulation::Syringe { plunger_depth, .. } => within("plunger depth", *plunger_depth, 0.0, PLUNGER_MAX),
            Articulation::Bandage { stretch, wrap_progress } => {
                within("stretch", *stretch, STRETCH_MIN, STRETCH_MAX)?;
                within("wrap progress", *wrap_progress, 0.0, 1.0)
            }
            Articulation::PatientLimb { lift_angle, .. } => within("lift angle", *lift_angle, 0.0, LIMB_MAX),
        }
    }

    /// Advances the articulation by one tick. `None` means undriven.
    /// Returns the kinds of the events raised.
    pub fn step(&mut self, drive: Option<&Drive>, dt: f64) -> Result<Vec<ArticulationEventKind>, ObjectError> {
        if !(dt > 0.0) {
            return Err(ObjectError::Invalid(format!("dt must be positive, got {dt}")));
        }
        if let Some(d) = drive {
            let finite = match *d {
                Drive::Increment { amount } => amount.is_finite(),
                Drive::Set { value } => value.is_finite(),
                Drive::Bandage { stretch_ratio, wrap_angle } => stretch_ratio.is_finite() && wrap_angle.is_finite(),
            };
            if !finite {
                return Err(ObjectError::Invalid(format!("non-finite drive {d:?}")));
            }
        }
        let kind = self.kind();
        let mut events = Vec::new();
        match self {
            Articulation::PushButton { travel, pressed } => {
                *travel = match drive {
                    Some(d) => scalar(*travel, d, kind)?.clamp(0.0, BUTTON_TRAVEL),
                    None => (*travel - BUTTON_RETURN_SPEED * dt).max(0.0),
                };
                if !*pressed && *travel >= BUTTON_TRAVEL {
                    *pressed = true;
                    events.push(ArticulationEventKind::ButtonPressed);
                } else if *pressed && drive.is_none() && *travel < BUTTON_TRAVEL / 2.0 {
                    *pressed = false;
                    events.push(ArticulationEventKind::ButtonReleased);
                }
            }
            Articulation::LeverSwitch { detents, index, offset } => match drive {
                None => *offset = 0.0,
                Some(Drive::Increment { amount }) => {
                    let lo = detents[0];
                    let hi = detents[detents.len() - 1];
                    let pos = (detents[*index] + *offset + amount).clamp(lo, hi);
                    let nearest = nearest_detent(detents, pos);
                    if nearest != *index {
                        *index = nearest;
                        *offset = 0.0;
                        events.push(ArticulationEventKind::LeverToggled);
                    } else {
                        *offset = pos - detents[*index];
                    }
                }
                Some(d) => return Err(mismatch(kind, d)),
            },
            Articulation::RotaryDial { angle, turning } => match drive {
                Some(d) => {
                    *angle = scalar(*angle, d, kind)?.clamp(0.0, DIAL_MAX);
                    *turning = true;
                }
                None => {
                    if *turning {
                        *turning = false;
                        events.push(ArticulationEventKind::DialSet);
                    }
                }
            },
            Articulation::Ball | Articulation::Bat => {
                if let Some(d) = drive {
                    return Err(mismatch(kind, d));
                }
            }
            Articulation::Scissors { blade_angle, closed } => {
                if let Some(d) = drive {
                    *blade_angle = scalar(*blade_angle, d, kind)?.clamp(0.0, SCISSORS_MAX);
                }
                if !*closed && *blade_angle <= 0.0 {
                    *closed = true;
                    events.push(ArticulationEventKind::ScissorsClosed);
                } else if *closed && *blade_angle >= SCISSORS_MAX / 2.0 {
                    *closed = false;
                }
            }
            Articulation::Syringe { plunger_depth, depressed } => {
                if let Some(d) = drive {
                    *plunger_depth = scalar(*plunger_depth, d, kind)?.clamp(0.0, PLUNGER_MAX);
                }
                if !*depressed && *plunger_depth >= PLUNGER_MAX {
                    *depressed = true;
                    events.push(ArticulationEventKind::PlungerDepressed);
                } else if *depressed && *plunger_depth <= PLUNGER_MAX / 2.0 {
                    *depressed = false;
                }
            }
            Articulation::Bandage { stretch, wrap_progress } => match drive {
                None => *stretch = STRETCH_MIN,
                Some(Drive::Bandage { stretch_ratio, wrap_angle }) => {
                    *stretch = stretch_ratio.clamp(STRETCH_MIN, STRETCH_MAX);
                    let before = *wrap_progress;
                    let turns = wrap_angle.abs() / std::f64::consts::TAU;
                    *wrap_progress = (*wrap_progress + turns / WRAP_TURNS).min(1.0);
                    if before < 1.0 && *wrap_progress >= 1.0 {
                        events.push(ArticulationEventKind::BandageWrapped);
                    }
                }
                Some(d) => return Err(mismatch(kind, d)),
            },
            Articulation::PatientLimb { lift_angle, lifted } => {
                if let Some(d) = drive {
                    *lift_angle = scalar(*lift_angle, d, kind)?.clamp(0.0, LIMB_MAX);
                }
                if !*lifted && *lift_angle >= LIMB_LIFTED {
                    *lifted = true;
                    events.push(ArticulationEventKind::LimbLifted);
                } else if *lifted && *lift_angle < LIMB_LIFTED / 2.0 {
                    *lifted = false;
                }
            }
        }
        Ok(events)
    }
}

fn nearest_detent(detents: &[f64], pos: f64) -> usize {
    let mut best = 0;
    for (i, d) in detents.iter().enumerate() {
        if (d - pos).abs() < (detents[best] - pos).abs() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 1.0 / 60.0;

    #[test]
    fn dial_clamps() {
        let mut a = Articulation::rest(ObjectKind::RotaryDial);
        a.step(Some(&Drive::Increment { amount: 90.0 }), DT).unwrap();
        assert_eq!(a.value(), Some(90.0));
        a.step(Some(&Drive::Increment { amount: 300.0 }), DT).unwrap();
        assert_eq!(a.value(), Some(270.0));
        assert_eq!(a.step(None, DT).unwrap(), vec![ArticulationEventKind::DialSet]);
        assert!(a.step(None, DT).unwrap().is_empty());
    }

    #[test]
    fn button_press_is_edge_triggered_and_springs_back() {
        let mut a = Articulation::rest(ObjectKind::PushButton);
        let full = Drive::Increment { amount: BUTTON_TRAVEL };
        assert_eq!(a.step(Some(&full), DT).unwrap(), vec![ArticulationEventKind::ButtonPressed]);
        for _ in 0..10 {
            assert!(a.step(Some(&Drive::Increment { amount: 0.001 }), DT).unwrap().is_empty());
        }
        let mut released = 0;
        for _ in 0..30 {
            released += a.step(None, DT).unwrap().len();
        }
        assert_eq!(released, 1);
        assert_eq!(a.value(), Some(0.0));
    }

    #[test]
    fn lever_toggles_at_midpoint() {
        let mut a = Articulation::rest(ObjectKind::LeverSwitch);
        assert!(a.step(Some(&Drive::Increment { amount: 29.0 }), DT).unwrap().is_empty());
        assert_eq!(a.step(Some(&Drive::Increment { amount: 2.0 }), DT).unwrap(), vec![ArticulationEventKind::LeverToggled]);
        assert!(matches!(a, Articulation::LeverSwitch { index: 1, .. }));
    }

    #[test]
    fn mismatched_drive_is_a_dispatch_error() {
        let mut a = Articulation::rest(ObjectKind::Ball);
        assert!(matches!(a.step(Some(&Drive::Set { value: 1.0 }), DT), Err(ObjectError::Dispatch(_))));
        let mut b = Articulation::rest(ObjectKind::Bandage);
        assert!(matches!(b.step(Some(&Drive::Set { value: 1.0 }), DT), Err(ObjectError::Dispatch(_))));
    }

    #[test]
    fn bandage_wraps_once() {
        let mut a = Articulation::rest(ObjectKind::Bandage);
        let d = Drive::Bandage { stretch_ratio: 2.0, wrap_angle: 1.0 };
        let mut n = 0;
        for _ in 0..20 {
            n += a.step(Some(&d), DT).unwrap().len();
        }
        assert_eq!(n, 1);
        assert!(matches!(a, Articulation::Bandage { stretch, wrap_progress } if stretch == STRETCH_MAX && wrap_progress == 1.0));
    }
}
