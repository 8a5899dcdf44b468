//! Per-frame transforms.
//!
//! * real part of the two-sided DFT, and the inverse DFT of a purely real
//!   spectrum (lossy pair: it keeps only the circular even part),
//! * orthonormal DCT-II / DCT-III (exact pair),
//! * FFTPACK-layout packed real FFT and its inverse (exact pair).
//!
//! Everything is computed through one complex FFT of the frame length. The
//! DCTs use Makhoul's even/odd reordering so no zero-padding is needed.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{config, input, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// `Re(DFT)` forward, real-spectrum inverse DFT backward.
    RealDft,
    /// Orthonormal DCT-II forward, DCT-III backward.
    Dct,
    /// Packed real FFT, `[Y0, Re Y1, Im Y1, ..., Re Y(N/2)]`.
    PackedRfft,
}

/// A planned transform for one frame length.
///
/// Plans are immutable and shareable across threads; per-thread scratch
/// lives in a [`Workspace`].
pub struct FramePlan {
    kind: TransformKind,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // e^{-i pi k / 2N}, DCT only
    twiddles: Vec<Complex<f64>>,
}

impl std::fmt::Debug for FramePlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FramePlan")
            .field("kind", &self.kind)
            .field("len", &self.len)
            .finish()
    }
}

pub struct Workspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl FramePlan {
    pub fn new(kind: TransformKind, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(config(format!("frame length must be >= 2, got {len}")));
        }
        if kind == TransformKind::PackedRfft && !len.is_multiple_of(2) {
            return Err(config(format!(
                "packed real FFT needs an even frame length, got {len}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let twiddles = if kind == TransformKind::Dct {
            (0..len)
                .map(|k| Complex::from_polar(1.0, -PI * k as f64 / (2.0 * len as f64)))
                .collect()
        } else {
            Vec::new()
        };
        Ok(FramePlan {
            kind,
            len,
            forward,
            inverse,
            twiddles,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn workspace(&self) -> Workspace {
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        Workspace {
            buf: vec![Complex::default(); self.len],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    fn fft(&self, ws: &mut Workspace) {
        self.forward
            .process_with_scratch(&mut ws.buf, &mut ws.scratch);
    }

    fn ifft(&self, ws: &mut Workspace) {
        self.inverse
            .process_with_scratch(&mut ws.buf, &mut ws.scratch);
    }

    fn load_real(&self, x: &[f64], ws: &mut Workspace) {
        for (b, &v) in ws.buf.iter_mut().zip(x) {
            *b = Complex::new(v, 0.0);
        }
    }

    /// Forward transform of one frame, in place.
    pub fn forward(&self, frame: &mut [f64], ws: &mut Workspace) {
        assert_eq!(frame.len(), self.len, "frame length does not match plan");
        let n = self.len;
        match self.kind {
            TransformKind::RealDft => {
                self.load_real(frame, ws);
                self.fft(ws);
                for (out, y) in frame.iter_mut().zip(&ws.buf) {
                    *out = y.re;
                }
            }
            TransformKind::PackedRfft => {
                self.load_real(frame, ws);
                self.fft(ws);
                let y = &ws.buf;
                frame[0] = y[0].re;
                for k in 1..n / 2 {
                    frame[2 * k - 1] = y[k].re;
                    frame[2 * k] = y[k].im;
                }
                frame[n - 1] = y[n / 2].re;
            }
            TransformKind::Dct => {
                for (i, b) in ws.buf.iter_mut().enumerate() {
                    // v[i] = x[2i] for the first half, x reversed odd samples after
                    let src = if 2 * i < n {
                        2 * i
                    } else {
                        2 * (n - 1 - i) + 1
                    };
                    *b = Complex::new(frame[src], 0.0);
                }
                self.fft(ws);
                let s0 = (1.0 / n as f64).sqrt();
                let sk = (2.0 / n as f64).sqrt();
                for (k, out) in frame.iter_mut().enumerate() {
                    let scale = if k == 0 { s0 } else { sk };
                    *out = scale * (ws.buf[k] * self.twiddles[k]).re;
                }
            }
        }
    }

    /// Inverse transform of one coefficient row, in place.
    pub fn inverse(&self, coeffs: &mut [f64], ws: &mut Workspace) {
        assert_eq!(coeffs.len(), self.len, "frame length does not match plan");
        let n = self.len;
        let inv_n = 1.0 / n as f64;
        match self.kind {
            TransformKind::RealDft => {
                self.load_real(coeffs, ws);
                self.ifft(ws);
                for (out, y) in coeffs.iter_mut().zip(&ws.buf) {
                    *out = y.re * inv_n;
                }
            }
            TransformKind::PackedRfft => {
                let y = &mut ws.buf;
                y[0] = Complex::new(coeffs[0], 0.0);
                for k in 1..n / 2 {
                    let c = Complex::new(coeffs[2 * k - 1], coeffs[2 * k]);
                    y[k] = c;
                    y[n - k] = c.conj();
                }
                y[n / 2] = Complex::new(coeffs[n - 1], 0.0);
                self.ifft(ws);
                for (out, y) in coeffs.iter_mut().zip(&ws.buf) {
                    *out = y.re * inv_n;
                }
            }
            TransformKind::Dct => {
                // Undo the orthonormal scaling to get the plain cosine sums X_k,
                // then V_k = conj(twiddle_k) * (X_k - i X_{N-k}) with X_N = 0.
                let s0 = (n as f64).sqrt();
                let sk = (n as f64 / 2.0).sqrt();
                let unscaled = |k: usize| -> f64 {
                    match k {
                        0 => coeffs[0] * s0,
                        k if k == n => 0.0,
                        k => coeffs[k] * sk,
                    }
                };
                for k in 0..n {
                    let z = Complex::new(unscaled(k), -unscaled(n - k));
                    ws.buf[k] = z * self.twiddles[k].conj();
                }
                self.ifft(ws);
                for i in 0..n {
                    let dst = if 2 * i < n {
                        2 * i
                    } else {
                        2 * (n - 1 - i) + 1
                    };
                    coeffs[dst] = ws.buf[i].re * inv_n;
                }
            }
        }
    }

    /// `|Y_k|` for `k = 0..=N/2`. Works for any plan kind.
    pub fn magnitude(&self, frame: &[f64], out: &mut [f64], ws: &mut Workspace) {
        assert_eq!(frame.len(), self.len, "frame length does not match plan");
        self.load_real(frame, ws);
        self.fft(ws);
        for (o, y) in out.iter_mut().zip(&ws.buf[..self.len / 2 + 1]) {
            *o = y.norm();
        }
    }
}

fn one_shot(kind: TransformKind, frame: &[f64], forward: bool) -> Result<Vec<f64>> {
    if frame.iter().any(|v| !v.is_finite()) {
        return Err(input("frame contains non-finite values"));
    }
    let plan = FramePlan::new(kind, frame.len())?;
    let mut ws = plan.workspace();
    let mut out = frame.to_vec();
    if forward {
        plan.forward(&mut out, &mut ws);
    } else {
        plan.inverse(&mut out, &mut ws);
    }
    Ok(out)
}

/// Real parts of the two-sided DFT of `frame`.
pub fn dft_real_part(frame: &[f64]) -> Result<Vec<f64>> {
    one_shot(TransformKind::RealDft, frame, true)
}

/// Real part of the inverse DFT of a purely real spectrum.
///
/// Composed with [`dft_real_part`] this yields the circular even part
/// `(x[n] + x[-n mod N]) / 2`, not `x`.
pub fn idft_from_real(coeffs: &[f64]) -> Result<Vec<f64>> {
    one_shot(TransformKind::RealDft, coeffs, false)
}

pub fn dct2(frame: &[f64]) -> Result<Vec<f64>> {
    one_shot(TransformKind::Dct, frame, true)
}

pub fn dct3(coeffs: &[f64]) -> Result<Vec<f64>> {
    one_shot(TransformKind::Dct, coeffs, false)
}

pub fn rfft_packed(frame: &[f64]) -> Result<Vec<f64>> {
    one_shot(TransformKind::PackedRfft, frame, true)
}

pub fn irfft_packed(packed: &[f64]) -> Result<Vec<f64>> {
    one_shot(TransformKind::PackedRfft, packed, false)
}
