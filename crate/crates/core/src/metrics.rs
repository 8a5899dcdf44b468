//! Objective reconstruction quality: SNR and mel-cepstral distance.
//!
//! MCD here compares frames index-by-index without time warping, because
//! every reconstruction in this crate is sample-aligned with its reference.
//! `c0` is excluded, so a global gain change scores zero.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};
use crate::signal::{FrameConfig, Waveform, WindowKind};
use crate::transforms::dct2;
use crate::vocoder::{ClipMode, SpectrogramKind, Vocoder};

/// Floor applied to mel band energies before the log.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McdConfig {
    pub n_mel_bands: usize,
    /// Cepstral coefficients compared, `c1..=c_n`.
    pub n_cepstra: usize,
    pub fft_win: usize,
    pub fft_hop: usize,
    pub fmin: f64,
    /// `None` means Nyquist.
    pub fmax: Option<f64>,
}

impl Default for McdConfig {
    fn default() -> Self {
        McdConfig {
            n_mel_bands: 23,
            n_cepstra: 13,
            fft_win: 1024,
            fft_hop: 256,
            fmin: 0.0,
            fmax: None,
        }
    }
}

impl McdConfig {
    fn resolved_fmax(&self, sample_rate: u32) -> f64 {
        self.fmax.unwrap_or(sample_rate as f64 / 2.0)
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if self.n_cepstra == 0 || self.n_cepstra >= self.n_mel_bands {
            return Err(config(format!(
                "need 1 <= n_cepstra < n_mel_bands, got {} and {}",
                self.n_cepstra, self.n_mel_bands
            )));
        }
        if self.fft_win < 2 || self.fft_hop == 0 || self.fft_hop > self.fft_win {
            return Err(config(format!(
                "bad MCD framing {}/{}",
                self.fft_win, self.fft_hop
            )));
        }
        let fmax = self.resolved_fmax(sample_rate);
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= sample_rate as f64 / 2.0) {
            return Err(config(format!(
                "need 0 <= fmin < fmax <= nyquist, got fmin {} fmax {fmax}",
                self.fmin
            )));
        }
        Ok(())
    }
}

/// `10 log10(sum ref^2 / sum (ref - est)^2)`; `+inf` when the two are identical.
pub fn snr_db(reference: &Waveform, estimate: &Waveform) -> Result<f64> {
    check_pair(reference, estimate)?;
    let signal: f64 = reference.samples().iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(input("reference signal is all zeros"));
    }
    let noise: f64 = reference
        .samples()
        .iter()
        .zip(estimate.samples())
        .map(|(r, e)| (r - e) * (r - e))
        .sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

fn check_pair(reference: &Waveform, estimate: &Waveform) -> Result<()> {
    if reference.len() != estimate.len() {
        return Err(input(format!(
            "length mismatch: reference {} samples, estimate {}",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.sample_rate() != estimate.sample_rate() {
        return Err(input(format!(
            "sample rate mismatch: {} vs {}",
            reference.sample_rate(),
            estimate.sample_rate()
        )));
    }
    Ok(())
}

/// Slaney's mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    const F_SP: f64 = 200.0 / 3.0;
    let logstep = 6.4f64.ln() / 27.0;
    if hz < 1000.0 {
        hz / F_SP
    } else {
        15.0 + (hz / 1000.0).ln() / logstep
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    const F_SP: f64 = 200.0 / 3.0;
    let logstep = 6.4f64.ln() / 27.0;
    if mel < 15.0 {
        mel * F_SP
    } else {
        1000.0 * (logstep * (mel - 15.0)).exp()
    }
}

/// Triangular filters, unit area, `n_bands x (n_fft/2 + 1)` row-major.
pub fn mel_filterbank(
    n_bands: usize,
    n_fft: usize,
    sample_rate: u32,
    fmin: f64,
    fmax: f64,
) -> Vec<f64> {
    let n_bins = n_fft / 2 + 1;
    let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let edges: Vec<f64> = (0..n_bands + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_bands + 1) as f64))
        .collect();
    let mut weights = vec![0.0; n_bands * n_bins];
    for m in 0..n_bands {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let norm = 2.0 / (right - left);
        for k in 0..n_bins {
            let f = k as f64 * sample_rate as f64 / n_fft as f64;
            let rise = (f - left) / (center - left);
            let fall = (right - f) / (right - center);
            weights[m * n_bins + k] = rise.min(fall).max(0.0) * norm;
        }
    }
    weights
}

/// Mel cepstra `c1..=c_n` for every analysis frame, row-major.
pub fn mel_cepstra(x: &Waveform, cfg: &McdConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate(x.sample_rate())?;
    if x.is_empty() {
        return Err(input("signal too short to produce a frame"));
    }
    let frame_cfg = FrameConfig::new(cfg.fft_win, cfg.fft_hop, WindowKind::Hann, true)?;
    let mag = Vocoder::new(frame_cfg, SpectrogramKind::Magnitude, ClipMode::None)?.analyze(x)?;
    let n_bins = mag.n_bins();
    let fb = mel_filterbank(
        cfg.n_mel_bands,
        cfg.fft_win,
        x.sample_rate(),
        cfg.fmin,
        cfg.resolved_fmax(x.sample_rate()),
    );

    (0..mag.n_frames())
        .map(|f| {
            let spectrum = mag.row(f);
            let log_mel: Vec<f64> = fb
                .chunks_exact(n_bins)
                .map(|band| {
                    let e: f64 = band.iter().zip(spectrum).map(|(w, s)| w * s).sum();
                    e.max(LOG_FLOOR).ln()
                })
                .collect();
            let mut c = dct2(&log_mel)?;
            c.truncate(cfg.n_cepstra + 1);
            c.remove(0);
            Ok(c)
        })
        .collect()
}

/// Mean frame-wise mel-cepstral distance, in dB-like MCD units.
pub fn mcd(reference: &Waveform, estimate: &Waveform, cfg: &McdConfig) -> Result<f64> {
    check_pair(reference, estimate)?;
    let a = mel_cepstra(reference, cfg)?;
    let b = mel_cepstra(estimate, cfg)?;
    let k = 10.0 / LN_10;
    let total: f64 = a
        .iter()
        .zip(&b)
        .map(|(ca, cb)| {
            let sq: f64 = ca.iter().zip(cb).map(|(x, y)| (x - y) * (x - y)).sum();
            k * (2.0 * sq).sqrt()
        })
        .sum();
    Ok(total / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Waveform {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Waveform::new((0..n).map(|_| rng.random_range(-0.5..0.5)).collect(), 16000).unwrap()
    }

    #[test]
    fn snr_examples() {
        let x = noise(100, 1);
        assert_eq!(snr_db(&x, &x).unwrap(), f64::INFINITY);
        let a = Waveform::new(vec![1.0, 0.0], 8000).unwrap();
        let b = Waveform::new(vec![0.0, 0.0], 8000).unwrap();
        assert_eq!(snr_db(&a, &b).unwrap(), 0.0);
        let a = Waveform::new(vec![2.0], 8000).unwrap();
        let b = Waveform::new(vec![1.0], 8000).unwrap();
        assert!((snr_db(&a, &b).unwrap() - 6.020_599_913_279_624).abs() < 1e-12);
    }

    #[test]
    fn snr_errors() {
        let a = Waveform::new(vec![1.0, 2.0], 8000).unwrap();
        let b = Waveform::new(vec![1.0], 8000).unwrap();
        assert!(snr_db(&a, &b).is_err());
        let z = Waveform::new(vec![0.0, 0.0], 8000).unwrap();
        assert!(snr_db(&z, &a).is_err());
        let c = Waveform::new(vec![1.0, 2.0], 16000).unwrap();
        assert!(snr_db(&a, &c).is_err());
    }

    #[test]
    fn mcd_identity_and_gain() {
        let x = noise(8000, 2);
        let cfg = McdConfig::default();
        assert_eq!(mcd(&x, &x, &cfg).unwrap(), 0.0);
        for gain in [0.1, 0.5, 2.0] {
            let y = x.scaled(gain).unwrap();
            assert!(mcd(&x, &y, &cfg).unwrap() < 1e-9, "gain {gain}");
        }
    }

    #[test]
    fn mcd_is_symmetric_and_positive_for_different_signals() {
        let x = noise(8000, 3);
        let y = noise(8000, 4);
        let cfg = McdConfig::default();
        let ab = mcd(&x, &y, &cfg).unwrap();
        let ba = mcd(&y, &x, &cfg).unwrap();
        assert!(ab > 0.0);
        assert!((ab - ba).abs() <= 1e-9);
    }

    #[test]
    fn mcd_config_validation() {
        let x = noise(4000, 5);
        let bad = McdConfig {
            n_cepstra: 23,
            ..McdConfig::default()
        };
        assert!(mcd(&x, &x, &bad).is_err());
        let bad = McdConfig {
            fmax: Some(9000.0),
            ..McdConfig::default()
        };
        assert!(mcd(&x, &x, &bad).is_err());
        let empty = Waveform::new(vec![], 16000).unwrap();
        assert!(mcd(&empty, &empty, &McdConfig::default()).is_err());
    }

    #[test]
    fn mel_scale_round_trips() {
        for hz in [0.0, 440.0, 999.0, 1000.0, 4000.0, 11025.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn filterbank_triangles_have_unit_area_in_hz() {
        // with a fine FFT grid the Riemann sum of each triangle approaches 1
        let n_fft = 1 << 16;
        let sr = 16000;
        let fb = mel_filterbank(10, n_fft, sr, 0.0, 8000.0);
        let df = sr as f64 / n_fft as f64;
        for band in fb.chunks_exact(n_fft / 2 + 1) {
            let area: f64 = band.iter().sum::<f64>() * df;
            assert!((area - 1.0).abs() < 1e-3, "area {area}");
        }
    }
}
