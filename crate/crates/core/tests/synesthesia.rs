use std::io::Cursor;

use omg_core::hand::Side;
use omg_core::interaction::{ContactEvent, Region};
use omg_core::synesthesia::{
    attack_ms, event_for_contact, render_pcm, write_wav, AudioEvent, ToneMapping, SAMPLE_RATE,
};
use omg_core::Vec3;
use proptest::prelude::*;

fn contact(region: Region, v: f64) -> ContactEvent {
    ContactEvent {
        side: Side::Right,
        region,
        object: "ball".into(),
        point: Vec3::zeros(),
        normal: Vec3::y(),
        approach_speed: v,
        penetration: 0.001,
        t: 0.25,
    }
}

fn tone(amplitude: f64, attack: f64, start: f64, frequency: f64) -> AudioEvent {
    AudioEvent { frequency, attack_ms: attack, decay_ms: 250.0, amplitude, start }
}

/// Envelope straight from its definition: linear rise, then a decay that
/// loses 60 dB in 250 ms.
fn oracle_sample(e: &AudioEvent, t: f64) -> f64 {
    let a = e.attack_ms / 1000.0;
    let u = t - e.start;
    let env = if u < 0.0 {
        0.0
    } else if u <= a {
        e.amplitude * u / a
    } else {
        e.amplitude * 10f64.powf(-3.0 * (u - a) / 0.25)
    };
    env * (2.0 * std::f64::consts::PI * e.frequency * (t - e.start - a)).cos()
}

#[test]
fn contact_maps_to_tone() {
    let m = ToneMapping::default();
    let e = event_for_contact(&contact(Region::Index, 0.5), 1.0, &m).unwrap();
    assert_eq!(e.frequency, 293.66);
    assert_eq!(e.attack_ms, 30.0);
    assert_eq!(e.amplitude, 0.25);
    assert_eq!(e.decay_ms, 250.0);
    assert_eq!(e.start, 0.25);
    let soft = event_for_contact(&contact(Region::Palm, 0.0), 0.0, &m).unwrap();
    assert_eq!((soft.attack_ms, soft.amplitude, soft.frequency), (120.0, 0.0, 196.0));
    assert!(event_for_contact(&contact(Region::Palm, 0.0), 1.5, &m).is_err());
}

#[test]
fn regions_are_audibly_distinct() {
    let m = ToneMapping::default();
    for side in [Side::Left, Side::Right] {
        let mut fs: Vec<f64> = Region::ALL.iter().map(|r| m.frequency(side, *r).unwrap()).collect();
        fs.sort_by(f64::total_cmp);
        fs.dedup();
        assert_eq!(fs.len(), Region::ALL.len());
    }
    // The octave drop makes the left ring finger coincide with the right palm.
    assert_eq!(m.frequency(Side::Left, Region::Ring).unwrap(), m.frequency(Side::Right, Region::Palm).unwrap());
}

#[test]
fn silence_renders_zeros() {
    let pcm = render_pcm(&[], SAMPLE_RATE, 0.5).unwrap();
    assert_eq!(pcm.len(), 24_000);
    assert!(pcm.iter().all(|s| *s == 0.0));
}

#[test]
fn envelope_peak_lands_at_attack() {
    let e = tone(0.5, 30.0, 0.1, 440.0);
    let pcm = render_pcm(&[e], SAMPLE_RATE, 1.0).unwrap();
    let sr = SAMPLE_RATE as f64;
    for (i, s) in pcm.iter().enumerate() {
        let expected = oracle_sample(&e, i as f64 / sr);
        // Tails under 1e-6 are cut.
        assert!((s - expected).abs() <= 1e-6, "sample {i}: {s} vs {expected}");
    }
    let (imax, max) = pcm.iter().enumerate().fold((0, 0.0f64), |b, (i, s)| if s.abs() > b.1 { (i, s.abs()) } else { b });
    let expected_index = ((0.1 + 0.030) * sr).round() as i64;
    assert!((imax as i64 - expected_index).abs() <= 1, "peak at {imax}, expected {expected_index}");
    assert!((max - 0.5).abs() <= 1e-3);
}

#[test]
fn overlapping_loud_tones_are_limited() {
    let a = tone(0.8, 20.0, 0.05, 293.66);
    let b = tone(0.8, 20.0, 0.05, 293.66);
    let pcm = render_pcm(&[a, b], SAMPLE_RATE, 0.5).unwrap();
    let max = pcm.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    assert!(max <= 1.0);
    assert!((max - 1.0).abs() < 1e-12, "limiter should bring the mix to full scale");
    // A mix that fits is left alone.
    let quiet = render_pcm(&[tone(0.5, 20.0, 0.05, 293.66)], SAMPLE_RATE, 0.5).unwrap();
    let peak = quiet.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    assert!((peak - 0.5).abs() < 1e-12);
}

#[test]
fn rendering_is_bit_identical() {
    let events = [tone(0.3, 12.0, 0.0, 196.0), tone(0.9, 80.0, 0.2, 392.0)];
    let a = render_pcm(&events, SAMPLE_RATE, 0.6).unwrap();
    let b = render_pcm(&events, SAMPLE_RATE, 0.6).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn invalid_events_rejected() {
    assert!(render_pcm(&[tone(1.5, 30.0, 0.0, 440.0)], SAMPLE_RATE, 1.0).is_err());
    assert!(render_pcm(&[tone(0.5, 2.0, 0.0, 440.0)], SAMPLE_RATE, 1.0).is_err());
    assert!(render_pcm(&[tone(0.5, 30.0, 2.0, 440.0)], SAMPLE_RATE, 1.0).is_err());
    assert!(render_pcm(&[tone(0.5, 30.0, 0.0, 30_000.0)], SAMPLE_RATE, 1.0).is_err());
}

#[test]
fn wav_round_trip() {
    let pcm = render_pcm(&[tone(0.5, 30.0, 0.0, 440.0)], SAMPLE_RATE, 0.1).unwrap();
    let mut buf = Cursor::new(Vec::new());
    write_wav(&mut buf, &pcm, SAMPLE_RATE).unwrap();
    buf.set_position(0);
    let mut r = hound::WavReader::new(buf).unwrap();
    let spec = r.spec();
    assert_eq!((spec.channels, spec.sample_rate, spec.bits_per_sample), (1, 48_000, 16));
    let back: Vec<i16> = r.samples::<i16>().map(|s| s.unwrap()).collect();
    assert_eq!(back.len(), pcm.len());
    for (a, b) in back.iter().zip(&pcm) {
        assert!((*a as f64 / 32767.0 - b).abs() <= 1.0 / 32767.0);
    }
}

#[test]
fn attack_strictly_decreasing_on_grid() {
    let speeds: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let hards: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    for &h in &hards {
        for w in speeds.windows(2) {
            assert!(attack_ms(w[1], h) < attack_ms(w[0], h), "v {} -> {} at h {h}", w[0], w[1]);
        }
    }
    for &v in &speeds {
        for w in hards.windows(2) {
            assert!(attack_ms(v, w[1]) < attack_ms(v, w[0]));
        }
    }
}

proptest! {
    #[test]
    fn attack_monotone_and_bounded(v1 in 0.0f64..5.0, dv in 0.0f64..5.0, h1 in 0.0f64..1.0, dh in 0.0f64..1.0) {
        let h2 = (h1 + dh).min(1.0);
        let a = attack_ms(v1, h1);
        prop_assert!((5.0..=120.0).contains(&a));
        prop_assert!(attack_ms(v1 + dv, h1) <= a);
        prop_assert!(attack_ms(v1, h2) <= a);
    }

    #[test]
    fn mixes_stay_in_range(
        raw in prop::collection::vec((0.0f64..=1.0, 5.0f64..=120.0, 0.0f64..0.3, 50.0f64..4000.0), 0..12)
    ) {
        let events: Vec<AudioEvent> = raw.iter().map(|&(a, at, s, f)| tone(a, at, s, f)).collect();
        let pcm = render_pcm(&events, SAMPLE_RATE, 0.4).unwrap();
        prop_assert!(pcm.iter().all(|s| s.is_finite() && s.abs() <= 1.0));
    }
}
