//! Analysis to kind-tagged real spectrograms and phase-free synthesis.
//!
//! | kind          | per-frame forward        | per-frame inverse  | exact |
//! |---------------|--------------------------|--------------------|-------|
//! | `real_fft`    | `Re(DFT)`                | real-spectrum IDFT | no    |
//! | `dct`         | DCT-II                   | DCT-III            | yes   |
//! | `packed_rfft` | packed real FFT          | packed inverse     | yes   |
//! | `magnitude`   | `|DFT|`, bins `0..=N/2`  | none               | -     |
//!
//! Clipping is applied after the forward transform. Synthesis never estimates
//! phase: whatever the coefficients hold is inverted and overlap-added.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Error, Result};
use crate::signal::{
    frame_with_window, make_window, overlap_add_with_window, FrameConfig, FrameMatrix, Waveform,
};
use crate::transforms::{FramePlan, TransformKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrogramKind {
    RealFft,
    Dct,
    PackedRfft,
    /// Analysis/export only.
    Magnitude,
}

impl SpectrogramKind {
    pub const ALL: [SpectrogramKind; 4] = [
        SpectrogramKind::RealFft,
        SpectrogramKind::Dct,
        SpectrogramKind::PackedRfft,
        SpectrogramKind::Magnitude,
    ];

    pub fn n_bins(self, win_length: usize) -> usize {
        match self {
            SpectrogramKind::Magnitude => win_length / 2 + 1,
            _ => win_length,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpectrogramKind::RealFft => "real_fft",
            SpectrogramKind::Dct => "dct",
            SpectrogramKind::PackedRfft => "packed_rfft",
            SpectrogramKind::Magnitude => "magnitude",
        }
    }

    fn transform(self) -> TransformKind {
        match self {
            SpectrogramKind::RealFft | SpectrogramKind::Magnitude => TransformKind::RealDft,
            SpectrogramKind::Dct => TransformKind::Dct,
            SpectrogramKind::PackedRfft => TransformKind::PackedRfft,
        }
    }
}

impl fmt::Display for SpectrogramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpectrogramKind {
    type Err = Error;

    /// Accepts the canonical names and the short CLI aliases
    /// `fft-real`, `prft`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real_fft" | "fft-real" => Ok(SpectrogramKind::RealFft),
            "dct" => Ok(SpectrogramKind::Dct),
            "packed_rfft" | "prft" => Ok(SpectrogramKind::PackedRfft),
            "magnitude" => Ok(SpectrogramKind::Magnitude),
            _ => Err(config(format!(
                "unknown algorithm `{s}` (expected fft-real, dct, prft or magnitude)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "tau", rename_all = "lowercase")]
pub enum ClipMode {
    #[default]
    None,
    /// `max(v, 0)`.
    Zero,
    /// Hard threshold: keep `v` if `v > tau`, else 0. `tau` is on the raw
    /// coefficient scale, so it depends on signal level.
    Threshold(f64),
}

impl ClipMode {
    pub fn threshold(tau: f64) -> Result<Self> {
        let mode = ClipMode::Threshold(tau);
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClipMode::Threshold(tau) if !(tau > 0.0 && tau < 1.0) => Err(config(format!(
                "clip threshold must lie in (0, 1), got {tau}"
            ))),
            _ => Ok(()),
        }
    }

    fn apply(&self, data: &mut [f64]) {
        match *self {
            ClipMode::None => {}
            ClipMode::Zero => data.iter_mut().for_each(|v| *v = v.max(0.0)),
            ClipMode::Threshold(tau) => data.iter_mut().for_each(|v| {
                if *v <= tau {
                    *v = 0.0
                }
            }),
        }
    }
}

impl fmt::Display for ClipMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClipMode::None => f.write_str("none"),
            ClipMode::Zero => f.write_str("zero"),
            ClipMode::Threshold(t) => write!(f, "threshold:{t}"),
        }
    }
}

impl FromStr for ClipMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ClipMode::None),
            "zero" => Ok(ClipMode::Zero),
            _ => match s.strip_prefix("threshold:") {
                Some(t) => ClipMode::threshold(
                    t.parse()
                        .map_err(|_| config(format!("bad clip threshold `{t}`")))?,
                ),
                None => Err(config(format!(
                    "unknown clip mode `{s}` (expected none, zero or threshold:T)"
                ))),
            },
        }
    }
}

/// Applies `mode` elementwise.
pub fn apply_clip(data: &[f64], mode: ClipMode) -> Result<Vec<f64>> {
    mode.validate()?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(input("clip input contains non-finite values"));
    }
    let mut out = data.to_vec();
    mode.apply(&mut out);
    Ok(out)
}

/// A frame-by-bin real matrix plus everything needed to invert it.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    kind: SpectrogramKind,
    data: Vec<f64>,
    n_frames: usize,
    config: FrameConfig,
    clip: ClipMode,
    sample_rate: u32,
    original_length: usize,
}

impl Spectrogram {
    /// Builds a spectrogram from raw parts, checking every invariant.
    pub fn from_parts(
        kind: SpectrogramKind,
        data: Vec<f64>,
        n_frames: usize,
        config: FrameConfig,
        clip: ClipMode,
        sample_rate: u32,
        original_length: usize,
    ) -> Result<Self> {
        let spec = Spectrogram {
            kind,
            data,
            n_frames,
            config,
            clip,
            sample_rate,
            original_length,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.clip.validate()?;
        if self.sample_rate == 0 {
            return Err(input("sample rate must be positive"));
        }
        if self.kind == SpectrogramKind::Magnitude && self.clip != ClipMode::None {
            return Err(config("magnitude spectrograms cannot be clipped"));
        }
        if self.kind == SpectrogramKind::PackedRfft && !self.config.win_length.is_multiple_of(2) {
            return Err(config("packed_rfft needs an even win_length"));
        }
        let expected_frames = self.config.n_frames(self.original_length)?;
        if self.n_frames != expected_frames {
            return Err(input(format!(
                "{} frames recorded, but {} samples at {}/{} give {expected_frames}",
                self.n_frames, self.original_length, self.config.win_length, self.config.hop_length
            )));
        }
        let expected = self.n_frames * self.n_bins();
        if self.data.len() != expected {
            return Err(input(format!(
                "data holds {} values, expected {} frames x {} bins",
                self.data.len(),
                self.n_frames,
                self.n_bins()
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(input("spectrogram contains non-finite values"));
        }
        let ok = match self.clip {
            _ if self.kind == SpectrogramKind::Magnitude => self.data.iter().all(|&v| v >= 0.0),
            ClipMode::None => true,
            ClipMode::Zero => self.data.iter().all(|&v| v >= 0.0),
            // f32 storage can round a kept value down onto tau itself
            ClipMode::Threshold(tau) => self.data.iter().all(|&v| v == 0.0 || v >= tau),
        };
        if !ok {
            return Err(input(format!(
                "values violate the {} constraints for clip mode {}",
                self.kind, self.clip
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> SpectrogramKind {
        self.kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.kind.n_bins(self.config.win_length)
    }

    pub fn row(&self, f: usize) -> &[f64] {
        let n = self.n_bins();
        &self.data[f * n..(f + 1) * n]
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn clip(&self) -> ClipMode {
        self.clip
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }
}

/// A configured analysis/synthesis pipeline with its window and transform
/// plan precomputed.
///
/// With `threads > 1` per-frame transforms run on a private rayon pool.
/// Overlap-add is always sequential in ascending frame order, so results are
/// bit-identical regardless of the thread count.
#[derive(Debug)]
pub struct Vocoder {
    config: FrameConfig,
    kind: SpectrogramKind,
    clip: ClipMode,
    window: Vec<f64>,
    plan: FramePlan,
    pool: Option<rayon::ThreadPool>,
}

impl Vocoder {
    pub fn new(frame: FrameConfig, kind: SpectrogramKind, clip: ClipMode) -> Result<Self> {
        frame.validate()?;
        clip.validate()?;
        if kind == SpectrogramKind::Magnitude && clip != ClipMode::None {
            return Err(config(
                "clipping does not apply to magnitude spectrograms (already nonnegative)",
            ));
        }
        let window = make_window(frame.window, frame.win_length)?;
        let plan = FramePlan::new(kind.transform(), frame.win_length)?;
        Ok(Vocoder {
            config: frame,
            kind,
            clip,
            window,
            plan,
            pool: None,
        })
    }

    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(config("thread count must be >= 1"));
        }
        self.pool = if threads == 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| config(format!("cannot start thread pool: {e}")))?,
            )
        };
        Ok(self)
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn kind(&self) -> SpectrogramKind {
        self.kind
    }

    pub fn clip(&self) -> ClipMode {
        self.clip
    }

    fn for_each_row<F>(&self, data: &mut [f64], row_len: usize, f: F)
    where
        F: Fn(&mut [f64], &mut crate::transforms::Workspace) + Sync,
    {
        match &self.pool {
            None => {
                let mut ws = self.plan.workspace();
                data.chunks_exact_mut(row_len)
                    .for_each(|row| f(row, &mut ws));
            }
            Some(pool) => pool.install(|| {
                data.par_chunks_mut(row_len)
                    .for_each_init(|| self.plan.workspace(), |ws, row| f(row, ws));
            }),
        }
    }

    pub fn analyze(&self, x: &Waveform) -> Result<Spectrogram> {
        let frames = frame_with_window(x, &self.config, &self.window)?;
        let n_frames = frames.n_frames();
        let win = self.config.win_length;

        let data = if self.kind == SpectrogramKind::Magnitude {
            let bins = self.kind.n_bins(win);
            let mut out = vec![0.0; n_frames * bins];
            let src = frames.as_slice();
            let compute = |f: usize, row: &mut [f64], ws: &mut crate::transforms::Workspace| {
                self.plan.magnitude(&src[f * win..(f + 1) * win], row, ws)
            };
            match &self.pool {
                None => {
                    let mut ws = self.plan.workspace();
                    for (f, row) in out.chunks_exact_mut(bins).enumerate() {
                        compute(f, row, &mut ws);
                    }
                }
                Some(pool) => pool.install(|| {
                    out.par_chunks_mut(bins)
                        .enumerate()
                        .for_each_init(|| self.plan.workspace(), |ws, (f, row)| compute(f, row, ws))
                }),
            }
            out
        } else {
            let mut data = frames.into_data();
            let clip = self.clip;
            self.for_each_row(&mut data, win, |row, ws| {
                self.plan.forward(row, ws);
                clip.apply(row);
            });
            data
        };

        Ok(Spectrogram {
            kind: self.kind,
            data,
            n_frames,
            config: self.config,
            clip: self.clip,
            sample_rate: x.sample_rate(),
            original_length: x.len(),
        })
    }

    fn check_compatible(&self, spec: &Spectrogram) -> Result<()> {
        if spec.kind == SpectrogramKind::Magnitude {
            return Err(Error::UnsupportedKind(spec.kind));
        }
        if spec.kind != self.kind || spec.config != self.config {
            return Err(config(format!(
                "spectrogram ({} {}/{} {}) does not match this vocoder ({} {}/{} {})",
                spec.kind,
                spec.config.win_length,
                spec.config.hop_length,
                spec.config.window,
                self.kind,
                self.config.win_length,
                self.config.hop_length,
                self.config.window
            )));
        }
        Ok(())
    }

    /// Per-frame inverse transforms, before overlap-add.
    pub fn inverse_frames(&self, spec: &Spectrogram) -> Result<FrameMatrix> {
        self.check_compatible(spec)?;
        let mut frames = FrameMatrix::from_rows(
            spec.data.clone(),
            spec.config,
            spec.original_length,
            spec.sample_rate,
        )?;
        self.for_each_row(frames.as_mut_slice(), self.config.win_length, |row, ws| {
            self.plan.inverse(row, ws)
        });
        Ok(frames)
    }

    pub fn synthesize(&self, spec: &Spectrogram) -> Result<Waveform> {
        let frames = self.inverse_frames(spec)?;
        overlap_add_with_window(&frames, &self.window)
    }
}

/// Frames `x`, transforms each frame according to `kind`, then clips.
pub fn analyze(
    x: &Waveform,
    config: &FrameConfig,
    kind: SpectrogramKind,
    clip: ClipMode,
) -> Result<Spectrogram> {
    if x.is_empty() {
        return Err(input("cannot analyze an empty waveform"));
    }
    Vocoder::new(*config, kind, clip)?.analyze(x)
}

/// Inverts every frame and overlap-adds back to `spec.original_length()`
/// samples.
pub fn synthesize(spec: &Spectrogram) -> Result<Waveform> {
    if spec.kind == SpectrogramKind::Magnitude {
        return Err(Error::UnsupportedKind(spec.kind));
    }
    Vocoder::new(spec.config, spec.kind, spec.clip)?.synthesize(spec)
}
