//! Deterministic synthetic test material.
//!
//! [`speech_like`] alternates silent gaps, short fricative bursts and voiced
//! syllables built from harmonics of a gliding pitch, shaped by three
//! formant resonances. It is a stand-in for recorded speech in tests and
//! benchmarks: it has silences, harmonic structure and a speech-like
//! spectral tilt, and it is reproducible from a seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signal::Waveform;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Silence,
    Unvoiced,
    Voiced,
}

/// Half-open sample range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
}

#[derive(Clone, Debug)]
pub struct SpeechLike {
    pub wave: Waveform,
    pub segments: Vec<Segment>,
}

impl SpeechLike {
    pub fn segments_of(&self, kind: SegmentKind) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.kind == kind)
    }
}

const PEAK: f64 = 0.5;

// (centre Hz, bandwidth Hz) triples for a handful of vowels
const VOWELS: [[(f64, f64); 3]; 5] = [
    [(730.0, 90.0), (1090.0, 110.0), (2440.0, 170.0)],
    [(270.0, 60.0), (2290.0, 100.0), (3010.0, 120.0)],
    [(530.0, 70.0), (1840.0, 100.0), (2480.0, 160.0)],
    [(570.0, 80.0), (840.0, 80.0), (2410.0, 170.0)],
    [(300.0, 60.0), (870.0, 90.0), (2240.0, 150.0)],
];

fn ms(sample_rate: u32, millis: f64) -> usize {
    (millis * 1e-3 * sample_rate as f64).round() as usize
}

/// Builds `n_samples` of speech-like audio; peak amplitude is 0.5.
pub fn speech_like(n_samples: usize, sample_rate: u32, seed: u64) -> SpeechLike {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = sample_rate as f64;
    let mut samples = vec![0.0; n_samples];
    let mut segments = Vec::new();
    let mut pos = 0;

    let push = |segments: &mut Vec<Segment>, start: usize, len: usize, kind| {
        let end = (start + len).min(n_samples);
        if end > start {
            segments.push(Segment { start, end, kind });
        }
        end
    };

    while pos < n_samples {
        let gap = ms(sample_rate, rng.random_range(80.0..200.0));
        pos = push(&mut segments, pos, gap, SegmentKind::Silence);
        if pos >= n_samples {
            break;
        }

        if rng.random_bool(0.4) {
            let len = ms(sample_rate, rng.random_range(60.0..120.0));
            let start = pos;
            pos = push(&mut segments, pos, len, SegmentKind::Unvoiced);
            // first-difference of white noise: a crude high-pass hiss
            let mut prev = 0.0;
            let n = pos - start;
            for (i, s) in samples[start..pos].iter_mut().enumerate() {
                let w: f64 = rng.random_range(-1.0..1.0);
                *s = 0.06 * (w - prev) * envelope(i, n, ms(sample_rate, 10.0));
                prev = w;
            }
            if pos >= n_samples {
                break;
            }
        }

        let len = ms(sample_rate, rng.random_range(150.0..350.0));
        let start = pos;
        pos = push(&mut segments, pos, len, SegmentKind::Voiced);
        let formants = VOWELS[rng.random_range(0..VOWELS.len())];
        let f0_start: f64 = rng.random_range(95.0..210.0);
        let f0_end = f0_start * rng.random_range(0.8..1.2);
        let n = pos - start;

        let mut phase = 0.0;
        let mut peak: f64 = 0.0;
        for i in 0..n {
            let t = i as f64 / n.max(1) as f64;
            let f0 = f0_start + (f0_end - f0_start) * t;
            phase += 2.0 * PI * f0 / sr;
            let mut v = 0.0;
            let mut h = 1;
            while h as f64 * f0 < 0.45 * sr {
                let f = h as f64 * f0;
                let gain: f64 = formants
                    .iter()
                    .map(|&(fc, bw)| 1.0 / (1.0 + ((f - fc) / bw).powi(2)))
                    .sum::<f64>()
                    + 0.02;
                v += gain / h as f64 * (h as f64 * phase).sin();
                h += 1;
            }
            samples[start + i] = v;
            peak = peak.max(v.abs());
        }
        let attack = ms(sample_rate, 25.0);
        for (i, s) in samples[start..pos].iter_mut().enumerate() {
            *s *= envelope(i, n, attack) / peak.max(1e-12);
        }
    }

    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        samples.iter_mut().for_each(|s| *s *= PEAK / peak);
    }
    SpeechLike {
        wave: Waveform::new(samples, sample_rate).expect("generated samples are finite"),
        segments,
    }
}

/// Raised-cosine attack and release of `ramp` samples.
fn envelope(i: usize, n: usize, ramp: usize) -> f64 {
    let ramp = ramp.min(n / 2).max(1);
    let d = i.min(n - 1 - i);
    if d >= ramp {
        1.0
    } else {
        0.5 - 0.5 * (PI * d as f64 / ramp as f64).cos()
    }
}

/// Uniform white noise in `[-amplitude, amplitude)`.
pub fn white_noise(n_samples: usize, sample_rate: u32, amplitude: f64, seed: u64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n_samples)
        .map(|_| amplitude * rng.random_range(-1.0..1.0))
        .collect();
    Waveform::new(samples, sample_rate).expect("noise samples are finite")
}
