//! Windows, framing and weighted overlap-add.
//!
//! Analysis multiplies each frame by the window. [`overlap_add`] multiplies
//! each (inverse-transformed) frame by the same window again and divides the
//! sum by the overlapped squared window. Exactly inverted frames therefore
//! give back the original signal wherever that sum is non-negligible, and
//! whatever a modified spectrogram adds to a frame is tapered to zero at the
//! frame edges instead of leaving a step there.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};

/// Floor applied to the squared-window overlap sum before division.
pub const OLA_EPSILON: f64 = 1e-8;

/// Mono audio: finite samples at a positive sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(input("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(input(format!("sample {i} is not finite")));
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Waveform::new(
            self.samples.iter().map(|s| s * gain).collect(),
            self.sample_rate,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowKind {
    /// Periodic Hann, `0.5 - 0.5 cos(2 pi n / N)`.
    Hann,
    /// Symmetric Kaiser with shape parameter `beta`.
    Kaiser {
        beta: f64,
    },
    Boxcar,
}

impl WindowKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WindowKind::Kaiser { beta } if !(beta >= 0.0 && beta.is_finite()) => Err(config(
                format!("kaiser beta must be finite and >= 0, got {beta}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowKind::Hann => f.write_str("hann"),
            WindowKind::Kaiser { beta } => write!(f, "kaiser:{beta}"),
            WindowKind::Boxcar => f.write_str("boxcar"),
        }
    }
}

impl FromStr for WindowKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "hann" => WindowKind::Hann,
            "boxcar" => WindowKind::Boxcar,
            _ => match s.strip_prefix("kaiser:") {
                Some(beta) => WindowKind::Kaiser {
                    beta: beta
                        .parse()
                        .map_err(|_| config(format!("bad kaiser beta `{beta}`")))?,
                },
                None => {
                    return Err(config(format!(
                        "unknown window `{s}` (expected hann, kaiser:B or boxcar)"
                    )))
                }
            },
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Framing parameters shared by analysis and synthesis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub win_length: usize,
    pub hop_length: usize,
    pub window: WindowKind,
    /// Pad `win_length / 2` zeros on both sides before framing.
    pub centered: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            win_length: 1024,
            hop_length: 256,
            window: WindowKind::Hann,
            centered: true,
        }
    }
}

impl FrameConfig {
    pub fn new(
        win_length: usize,
        hop_length: usize,
        window: WindowKind,
        centered: bool,
    ) -> Result<Self> {
        let cfg = FrameConfig {
            win_length,
            hop_length,
            window,
            centered,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.win_length < 2 {
            return Err(config(format!(
                "win_length must be >= 2, got {}",
                self.win_length
            )));
        }
        if self.hop_length == 0 || self.hop_length > self.win_length {
            return Err(config(format!(
                "hop_length must be in 1..={}, got {}",
                self.win_length, self.hop_length
            )));
        }
        self.window.validate()
    }

    fn pad(&self) -> usize {
        if self.centered {
            self.win_length / 2
        } else {
            0
        }
    }

    /// Number of frames produced for a signal of `len` samples.
    pub fn n_frames(&self, len: usize) -> Result<usize> {
        let padded = len
            .checked_add(2 * self.pad())
            .ok_or_else(|| input(format!("signal length {len} overflows")))?;
        if len == 0 || padded < self.win_length {
            return Err(input(format!(
                "signal of {len} samples is shorter than one {}-sample frame",
                self.win_length
            )));
        }
        let span = padded - self.win_length;
        Ok(if self.centered {
            1 + span.div_ceil(self.hop_length)
        } else {
            1 + span / self.hop_length
        })
    }
}

/// Windowed frames, one row per frame, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMatrix {
    data: Vec<f64>,
    n_frames: usize,
    config: FrameConfig,
    original_length: usize,
    sample_rate: u32,
}

impl FrameMatrix {
    pub fn from_rows(
        data: Vec<f64>,
        config: FrameConfig,
        original_length: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        config.validate()?;
        if sample_rate == 0 {
            return Err(input("sample rate must be positive"));
        }
        if data.is_empty() || !data.len().is_multiple_of(config.win_length) {
            return Err(input(format!(
                "{} values do not form whole rows of {}",
                data.len(),
                config.win_length
            )));
        }
        Ok(FrameMatrix {
            n_frames: data.len() / config.win_length,
            data,
            config,
            original_length,
            sample_rate,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn row(&self, f: usize) -> &[f64] {
        let n = self.config.win_length;
        &self.data[f * n..(f + 1) * n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.config.win_length)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// Builds a window of `length` samples, all in `[0, 1]`.
pub fn make_window(kind: WindowKind, length: usize) -> Result<Vec<f64>> {
    if length < 2 {
        return Err(config(format!("window length must be >= 2, got {length}")));
    }
    kind.validate()?;
    let n = length as f64;
    let w = match kind {
        WindowKind::Hann => (0..length)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())
            .collect(),
        WindowKind::Boxcar => vec![1.0; length],
        WindowKind::Kaiser { beta } => {
            let denom = bessel_i0(beta);
            (0..length)
                .map(|i| {
                    let r = 2.0 * i as f64 / (n - 1.0) - 1.0;
                    let arg = beta * (1.0 - r * r).max(0.0).sqrt();
                    (bessel_i0(arg) / denom).min(1.0)
                })
                .collect()
        }
    };
    Ok(w)
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..1000 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Splits `x` into windowed frames.
pub fn frame_signal(x: &Waveform, config: &FrameConfig) -> Result<FrameMatrix> {
    config.validate()?;
    let window = make_window(config.window, config.win_length)?;
    frame_with_window(x, config, &window)
}

pub(crate) fn frame_with_window(
    x: &Waveform,
    config: &FrameConfig,
    window: &[f64],
) -> Result<FrameMatrix> {
    let n_frames = config.n_frames(x.len())?;
    let win = config.win_length;
    let hop = config.hop_length;
    let pad = config.pad();
    let samples = x.samples();

    let mut data = vec![0.0; n_frames * win];
    for (f, row) in data.chunks_exact_mut(win).enumerate() {
        // position in the padded signal is f*hop + i; in x it is that minus pad
        let start = (f * hop) as isize - pad as isize;
        for (i, (out, w)) in row.iter_mut().zip(window).enumerate() {
            let j = start + i as isize;
            if j >= 0 && (j as usize) < samples.len() {
                *out = samples[j as usize] * w;
            }
        }
    }
    Ok(FrameMatrix {
        data,
        n_frames,
        config: *config,
        original_length: x.len(),
        sample_rate: x.sample_rate(),
    })
}

/// Windows each frame, overlap-adds, and divides by `max(sum w^2, OLA_EPSILON)`.
pub fn overlap_add(frames: &FrameMatrix) -> Result<Waveform> {
    let window = make_window(frames.config.window, frames.config.win_length)?;
    overlap_add_with_window(frames, &window)
}

pub(crate) fn overlap_add_with_window(frames: &FrameMatrix, window: &[f64]) -> Result<Waveform> {
    let win = frames.config.win_length;
    let hop = frames.config.hop_length;
    let total = (frames.n_frames - 1) * hop + win;

    let mut acc = vec![0.0; total];
    let mut wsum = vec![0.0; total];
    for (f, row) in frames.rows().enumerate() {
        let off = f * hop;
        for ((a, s), (v, w)) in acc[off..off + win]
            .iter_mut()
            .zip(&mut wsum[off..off + win])
            .zip(row.iter().zip(window))
        {
            *a += v * w;
            *s += w * w;
        }
    }

    let pad = frames.config.pad();
    let mut out = vec![0.0; frames.original_length];
    for (i, y) in out.iter_mut().enumerate() {
        let j = i + pad;
        if j < total {
            *y = acc[j] / wsum[j].max(OLA_EPSILON);
        }
    }
    Waveform::new(out, frames.sample_rate)
}
