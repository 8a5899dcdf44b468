//! Phase-free spectral inversion vocoder.
//!
//! Three analysis/synthesis pipelines reconstruct audio directly from a real
//! spectrogram, with no phase estimation step:
//!
//! * `real_fft`: real part of the STFT (lossy: keeps each frame's even part),
//! * `dct`: short-time orthonormal DCT-II, inverted with DCT-III,
//! * `packed_rfft`: short-time real FFT packed into `N` reals, exactly
//!   invertible for any hop.
//!
//! Each can be zero-clipped (`max(v, 0)`) or hard-thresholded after analysis.
//!
//! ```
//! use specinv::{analyze, synthesize, ClipMode, FrameConfig, SpectrogramKind, Waveform};
//!
//! let x = Waveform::new((0..4096).map(|i| (i as f64 * 0.01).sin()).collect(), 22050)?;
//! let spec = analyze(&x, &FrameConfig::default(), SpectrogramKind::PackedRfft, ClipMode::None)?;
//! let y = synthesize(&spec)?;
//! assert!(specinv::metrics::snr_db(&x, &y)? > 180.0);
//! # Ok::<(), specinv::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod io;
pub mod metrics;
pub mod signal;
pub mod testsignal;
pub mod transforms;
pub mod vocoder;

pub use bench::{run_bench, BenchReport, BenchSpec, Pipeline, Stage};
pub use error::{Error, Result};
pub use metrics::{mcd, snr_db, McdConfig};
pub use signal::{
    frame_signal, make_window, overlap_add, FrameConfig, FrameMatrix, Waveform, WindowKind,
};
pub use vocoder::{
    analyze, apply_clip, synthesize, ClipMode, Spectrogram, SpectrogramKind, Vocoder,
};
