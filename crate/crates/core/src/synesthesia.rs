//! Touch rendered as sound: each contact becomes a short tone whose pitch
//! names the hand region and whose attack says how hard and fast it was.

use std::collections::BTreeMap;
use std::io::{Seek, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hand::Side;
use crate::interaction::{ContactEvent, Region};

pub const SAMPLE_RATE: u32 = 48_000;
pub const DECAY_MS: f64 = 250.0;
pub const ATTACK_MIN_MS: f64 = 5.0;
pub const ATTACK_MAX_MS: f64 = 120.0;
/// Approach speed (m/s) that halves the attack.
pub const SPEED_SCALE: f64 = 0.5;
/// Approach speed (m/s) that gives full amplitude.
pub const FULL_SCALE_SPEED: f64 = 2.0;

/// The decay falls 60 dB over `DECAY_MS`.
fn decay_tau() -> f64 {
    DECAY_MS / 1000.0 / 1000f64.ln()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynesthesiaError {
    #[error("no tone mapped for region {0}")]
    Unmapped(&'static str),
    #[error("invalid tone mapping: {0}")]
    Mapping(String),
    #[error("invalid audio event: {0}")]
    Event(String),
    #[error("wav output failed: {0}")]
    Wav(String),
}

/// Region to frequency (Hz) for the right hand; the left hand sounds one
/// octave lower.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToneMapping {
    pub frequencies: BTreeMap<Region, f64>,
}

impl Default for ToneMapping {
    fn default() -> Self {
        let frequencies = BTreeMap::from([
            (Region::Palm, 196.00),
            (Region::Thumb, 261.63),
            (Region::Index, 293.66),
            (Region::Middle, 329.63),
            (Region::Ring, 392.00),
            (Region::Little, 440.00),
        ]);
        Self { frequencies }
    }
}

impl ToneMapping {
    pub fn from_json(text: &str) -> Result<Self, SynesthesiaError> {
        let m: ToneMapping = serde_json::from_str(text).map_err(|e| SynesthesiaError::Mapping(e.to_string()))?;
        m.validate(SAMPLE_RATE)?;
        Ok(m)
    }

    /// Every frequency positive and below Nyquist, and distinct so regions
    /// stay audibly apart.
    pub fn validate(&self, sample_rate: u32) -> Result<(), SynesthesiaError> {
        let nyquist = sample_rate as f64 / 2.0;
        for (r, f) in &self.frequencies {
            if !(f.is_finite() && *f > 0.0 && *f < nyquist) {
                return Err(SynesthesiaError::Mapping(format!("{} frequency {f} outside (0, {nyquist})", r.as_str())));
            }
        }
        let mut fs: Vec<f64> = self.frequencies.values().copied().collect();
        fs.sort_by(f64::total_cmp);
        if fs.windows(2).any(|w| w[0] == w[1]) {
            return Err(SynesthesiaError::Mapping("two regions share a frequency".into()));
        }
        Ok(())
    }

    pub fn frequency(&self, side: Side, region: Region) -> Result<f64, SynesthesiaError> {
        let f = *self.frequencies.get(&region).ok_or(SynesthesiaError::Unmapped(region.as_str()))?;
        Ok(match side {
            Side::Right => f,
            Side::Left => f / 2.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AudioEvent {
    pub frequency: f64,
    pub attack_ms: f64,
    pub decay_ms: f64,
    pub amplitude: f64,
    /// Seconds from the start of the render.
    pub start: f64,
}

/// Attack time in ms for approach speed `v` (m/s) and hardness `h`.
pub fn attack_ms(v: f64, h: f64) -> f64 {
    (ATTACK_MAX_MS / ((1.0 + v / SPEED_SCALE) * (1.0 + h))).clamp(ATTACK_MIN_MS, ATTACK_MAX_MS)
}

pub fn amplitude(v: f64) -> f64 {
    (v / FULL_SCALE_SPEED).min(1.0)
}

pub fn event_for_contact(
    contact: &ContactEvent,
    hardness: f64,
    mapping: &ToneMapping,
) -> Result<AudioEvent, SynesthesiaError> {
    if !(0.0..=1.0).contains(&hardness) {
        return Err(SynesthesiaError::Event(format!("hardness {hardness} outside [0, 1]")));
    }
    let v = contact.approach_speed;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(SynesthesiaError::Event(format!("approach speed {v} must be finite and non-negative")));
    }
    Ok(AudioEvent {
        frequency: mapping.frequency(contact.side, contact.region)?,
        attack_ms: attack_ms(v, hardness),
        decay_ms: DECAY_MS,
        amplitude: amplitude(v),
        start: contact.t,
    })
}

/// Envelope at `t` seconds after the event start: linear rise to the
/// amplitude over the attack, exponential fall after.
pub fn envelope(event: &AudioEvent, t: f64) -> f64 {
    let attack = event.attack_ms / 1000.0;
    if t < 0.0 {
        0.0
    } else if t < attack {
        event.amplitude * t / attack
    } else {
        event.amplitude * (-(t - attack) / decay_tau()).exp()
    }
}

fn check(event: &AudioEvent, sample_rate: u32, duration: f64) -> Result<(), SynesthesiaError> {
    let fail = |m: String| Err(SynesthesiaError::Event(m));
    if !(event.frequency > 0.0 && event.frequency < sample_rate as f64 / 2.0) {
        return fail(format!("frequency {} outside (0, Nyquist)", event.frequency));
    }
    if !(ATTACK_MIN_MS..=ATTACK_MAX_MS).contains(&event.attack_ms) {
        return fail(format!("attack {} ms outside [5, 120]", event.attack_ms));
    }
    if !(0.0..=1.0).contains(&event.amplitude) {
        return fail(format!("amplitude {} outside [0, 1]", event.amplitude));
    }
    if !(event.start >= 0.0 && event.start <= duration) {
        return fail(format!("start {} outside the {duration} s buffer", event.start));
    }
    Ok(())
}

/// Mixes the events into a mono buffer. The carrier is a cosine phased so
/// its crest falls on the envelope peak. The mix is scaled down only when
/// it would leave [-1, 1].
pub fn render_pcm(events: &[AudioEvent], sample_rate: u32, duration: f64) -> Result<Vec<f64>, SynesthesiaError> {
    if !(duration >= 0.0 && duration.is_finite()) || sample_rate == 0 {
        return Err(SynesthesiaError::Event(format!("bad buffer: {duration} s at {sample_rate} Hz")));
    }
    let sr = sample_rate as f64;
    let n = (duration * sr).round() as usize;
    let mut out = vec![0.0; n];
    for e in events {
        check(e, sample_rate, duration)?;
        if e.amplitude == 0.0 {
            continue;
        }
        let peak = e.start + e.attack_ms / 1000.0;
        // Tail below 1e-6 of full scale is dropped.
        let end = peak + decay_tau() * (e.amplitude / 1e-6).ln();
        let first = (e.start * sr).ceil() as usize;
        let last = ((end * sr).ceil() as usize).min(n);
        let w = std::f64::consts::TAU * e.frequency;
        for (i, s) in out.iter_mut().enumerate().take(last).skip(first) {
            let t = i as f64 / sr;
            *s += envelope(e, t - e.start) * (w * (t - peak)).cos();
        }
    }
    let max = out.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if max > 1.0 {
        for s in out.iter_mut() {
            *s /= max;
        }
    }
    Ok(out)
}

/// 16-bit mono PCM WAV.
pub fn write_wav<W: Write + Seek>(out: W, samples: &[f64], sample_rate: u32) -> Result<(), SynesthesiaError> {
    let spec = hound::WavSpec { channels: 1, sample_rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let err = |e: hound::Error| SynesthesiaError::Wav(e.to_string());
    let mut w = hound::WavWriter::new(out, spec).map_err(err)?;
    for s in samples {
        w.write_sample((s.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16).map_err(err)?;
    }
    w.finalize().map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_endpoints() {
        assert_eq!(attack_ms(0.0, 0.0), 120.0);
        assert_eq!(attack_ms(0.5, 1.0), 30.0);
        assert_eq!(attack_ms(100.0, 1.0), 5.0);
    }

    #[test]
    fn left_hand_is_an_octave_down() {
        let m = ToneMapping::default();
        assert_eq!(m.frequency(Side::Right, Region::Index).unwrap(), 293.66);
        assert_eq!(m.frequency(Side::Left, Region::Index).unwrap(), 146.83);
    }

    #[test]
    fn unmapped_region_is_an_error() {
        let mut m = ToneMapping::default();
        m.frequencies.remove(&Region::Ring);
        assert!(matches!(m.frequency(Side::Right, Region::Ring), Err(SynesthesiaError::Unmapped("ring"))));
    }

    #[test]
    fn mapping_json_round_trip() {
        let text = serde_json::to_string(&ToneMapping::default()).unwrap();
        assert!(text.starts_with("{\"palm\":196"));
        assert_eq!(ToneMapping::from_json(&text).unwrap(), ToneMapping::default());
        assert!(ToneMapping::from_json("{\"palm\": 30000}").is_err());
        assert!(ToneMapping::from_json("{\"palm\": 200, \"thumb\": 200}").is_err());
    }
}
