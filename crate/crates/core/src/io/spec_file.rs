//! MVS1: a self-describing little-endian spectrogram container.
//!
//! ```text
//! off size field
//!   0    4 magic "MVS1"
//!   4    2 version (u16) = 1
//!   6    1 kind   0 real_fft, 1 dct, 2 packed_rfft, 3 magnitude
//!   7    1 window 0 hann, 1 kaiser, 2 boxcar
//!   8    1 clip   0 none, 1 zero, 2 threshold
//!   9    4 clip_tau (f32)
//!  13    4 kaiser_beta (f32)
//!  17    4 win_length (u32)
//!  21    4 hop_length (u32)
//!  25    1 centered (0/1)
//!  26    4 sample_rate (u32)
//!  30    8 original_length (u64)
//!  38    4 n_frames (u32)
//!  42    4 n_bins (u32)
//!  46      n_frames * n_bins f32, frame-major
//! ```

use std::io::Write;
use std::path::Path;

use super::write_atomically;
use crate::error::{Error, Result};
use crate::signal::{FrameConfig, WindowKind};
use crate::vocoder::{ClipMode, Spectrogram, SpectrogramKind};

pub const MAGIC: [u8; 4] = *b"MVS1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 46;

/// The fixed-size header, field for field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecFileHeader {
    pub version: u16,
    pub kind: u8,
    pub window: u8,
    pub clip: u8,
    pub clip_tau: f32,
    pub kaiser_beta: f32,
    pub win_length: u32,
    pub hop_length: u32,
    pub centered: u8,
    pub sample_rate: u32,
    pub original_length: u64,
    pub n_frames: u32,
    pub n_bins: u32,
}

fn narrow(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidInput(format!("{what} {v} does not fit in u32")))
}

impl SpecFileHeader {
    pub fn for_spectrogram(spec: &Spectrogram) -> Result<Self> {
        let cfg = spec.config();
        let (window, kaiser_beta) = match cfg.window {
            WindowKind::Hann => (0, 0.0),
            WindowKind::Kaiser { beta } => (1, beta as f32),
            WindowKind::Boxcar => (2, 0.0),
        };
        let (clip, clip_tau) = match spec.clip() {
            ClipMode::None => (0, 0.0),
            ClipMode::Zero => (1, 0.0),
            ClipMode::Threshold(t) => (2, t as f32),
        };
        Ok(SpecFileHeader {
            version: VERSION,
            kind: match spec.kind() {
                SpectrogramKind::RealFft => 0,
                SpectrogramKind::Dct => 1,
                SpectrogramKind::PackedRfft => 2,
                SpectrogramKind::Magnitude => 3,
            },
            window,
            clip,
            clip_tau,
            kaiser_beta,
            win_length: narrow(cfg.win_length, "win_length")?,
            hop_length: narrow(cfg.hop_length, "hop_length")?,
            centered: cfg.centered as u8,
            sample_rate: spec.sample_rate(),
            original_length: spec.original_length() as u64,
            n_frames: narrow(spec.n_frames(), "n_frames")?,
            n_bins: narrow(spec.n_bins(), "n_bins")?,
        })
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        let mut w = &mut b[..];
        // writes into a correctly sized array cannot fail
        let _ = (|| -> std::io::Result<()> {
            w.write_all(&MAGIC)?;
            w.write_all(&self.version.to_le_bytes())?;
            w.write_all(&[self.kind, self.window, self.clip])?;
            w.write_all(&self.clip_tau.to_le_bytes())?;
            w.write_all(&self.kaiser_beta.to_le_bytes())?;
            w.write_all(&self.win_length.to_le_bytes())?;
            w.write_all(&self.hop_length.to_le_bytes())?;
            w.write_all(&[self.centered])?;
            w.write_all(&self.sample_rate.to_le_bytes())?;
            w.write_all(&self.original_length.to_le_bytes())?;
            w.write_all(&self.n_frames.to_le_bytes())?;
            w.write_all(&self.n_bins.to_le_bytes())
        })();
        b
    }

    /// Parses the header. Checks magic, version and length only; field
    /// values are checked when building the spectrogram.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(Error::BadMagic(bytes[..4].try_into().unwrap()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated {
                expected: HEADER_LEN as u64,
                actual: bytes.len() as u64,
            });
        }
        let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        Ok(SpecFileHeader {
            version,
            kind: bytes[6],
            window: bytes[7],
            clip: bytes[8],
            clip_tau: f32_at(9),
            kaiser_beta: f32_at(13),
            win_length: u32_at(17),
            hop_length: u32_at(21),
            centered: bytes[25],
            sample_rate: u32_at(26),
            original_length: u64::from_le_bytes(bytes[30..38].try_into().unwrap()),
            n_frames: u32_at(38),
            n_bins: u32_at(42),
        })
    }

    pub fn kind(&self) -> Result<SpectrogramKind> {
        Ok(match self.kind {
            0 => SpectrogramKind::RealFft,
            1 => SpectrogramKind::Dct,
            2 => SpectrogramKind::PackedRfft,
            3 => SpectrogramKind::Magnitude,
            k => return Err(Error::MalformedSpec(format!("unknown kind code {k}"))),
        })
    }

    pub fn frame_config(&self) -> Result<FrameConfig> {
        let window = match self.window {
            0 => WindowKind::Hann,
            1 => WindowKind::Kaiser {
                beta: self.kaiser_beta as f64,
            },
            2 => WindowKind::Boxcar,
            w => return Err(Error::MalformedSpec(format!("unknown window code {w}"))),
        };
        let centered = match self.centered {
            0 => false,
            1 => true,
            c => {
                return Err(Error::MalformedSpec(format!(
                    "centered flag {c} is not 0/1"
                )))
            }
        };
        FrameConfig::new(
            self.win_length as usize,
            self.hop_length as usize,
            window,
            centered,
        )
        .map_err(|e| Error::MalformedSpec(e.to_string()))
    }

    pub fn clip_mode(&self) -> Result<ClipMode> {
        match self.clip {
            0 => Ok(ClipMode::None),
            1 => Ok(ClipMode::Zero),
            2 => ClipMode::threshold(self.clip_tau as f64)
                .map_err(|e| Error::MalformedSpec(e.to_string())),
            c => Err(Error::MalformedSpec(format!("unknown clip code {c}"))),
        }
    }

    pub fn payload_len(&self) -> u64 {
        self.n_frames as u64 * self.n_bins as u64 * 4
    }
}

pub fn encode_spec(spec: &Spectrogram) -> Result<Vec<u8>> {
    let header = SpecFileHeader::for_spectrogram(spec)?;
    let mut out = Vec::with_capacity(HEADER_LEN + spec.data().len() * 4);
    out.extend_from_slice(&header.to_bytes());
    for &v in spec.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_spec(bytes: &[u8]) -> Result<Spectrogram> {
    let header = SpecFileHeader::parse(bytes)?;
    let kind = header.kind()?;
    let config = header.frame_config()?;
    let clip = header.clip_mode()?;

    let expected_bins = kind.n_bins(config.win_length);
    if header.n_bins as usize != expected_bins {
        return Err(Error::MalformedSpec(format!(
            "n_bins {} does not match {kind} with win_length {} (expected {expected_bins})",
            header.n_bins, config.win_length
        )));
    }
    let expected_len = HEADER_LEN as u64 + header.payload_len();
    let actual_len = bytes.len() as u64;
    if actual_len < expected_len {
        return Err(Error::Truncated {
            expected: expected_len,
            actual: actual_len,
        });
    }
    if actual_len > expected_len {
        return Err(Error::MalformedSpec(format!(
            "{} trailing bytes after the payload",
            actual_len - expected_len
        )));
    }
    let original_length = usize::try_from(header.original_length)
        .map_err(|_| Error::MalformedSpec("original_length overflows usize".into()))?;

    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Spectrogram::from_parts(
        kind,
        data,
        header.n_frames as usize,
        config,
        clip,
        header.sample_rate,
        original_length,
    )
    .map_err(|e| Error::MalformedSpec(e.to_string()))
}

pub fn write_spec(path: impl AsRef<Path>, spec: &Spectrogram) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_spec(spec)?;
    write_atomically(path, |f| {
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    })
}

pub fn read_spec(path: impl AsRef<Path>) -> Result<Spectrogram> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_spec(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Waveform;
    use crate::vocoder::analyze;

    fn sample_spec() -> Spectrogram {
        let x = Waveform::new((0..300).map(|i| (i as f64 * 0.1).sin()).collect(), 16000).unwrap();
        let cfg = FrameConfig::new(32, 8, WindowKind::Kaiser { beta: 6.0 }, true).unwrap();
        analyze(&x, &cfg, SpectrogramKind::Dct, ClipMode::Threshold(0.0625)).unwrap()
    }

    #[test]
    fn header_layout_offsets() {
        let bytes = encode_spec(&sample_spec()).unwrap();
        assert_eq!(&bytes[..4], b"MVS1");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(bytes[6], 1); // dct
        assert_eq!(bytes[7], 1); // kaiser
        assert_eq!(bytes[8], 2); // threshold
        assert_eq!(f32::from_le_bytes(bytes[9..13].try_into().unwrap()), 0.0625);
        assert_eq!(f32::from_le_bytes(bytes[13..17].try_into().unwrap()), 6.0);
        assert_eq!(u32::from_le_bytes(bytes[17..21].try_into().unwrap()), 32);
        assert_eq!(u32::from_le_bytes(bytes[21..25].try_into().unwrap()), 8);
        assert_eq!(bytes[25], 1);
        assert_eq!(u32::from_le_bytes(bytes[26..30].try_into().unwrap()), 16000);
        assert_eq!(u64::from_le_bytes(bytes[30..38].try_into().unwrap()), 300);
        let n_frames = u32::from_le_bytes(bytes[38..42].try_into().unwrap());
        let n_bins = u32::from_le_bytes(bytes[42..46].try_into().unwrap());
        assert_eq!(n_bins, 32);
        assert_eq!(bytes.len(), HEADER_LEN + n_frames as usize * 32 * 4);
    }

    #[test]
    fn decode_restores_f32_exact_values() {
        let spec = sample_spec();
        let back = decode_spec(&encode_spec(&spec).unwrap()).unwrap();
        assert_eq!(back.kind(), spec.kind());
        assert_eq!(back.config(), spec.config());
        assert_eq!(back.clip(), spec.clip());
        assert_eq!(back.n_frames(), spec.n_frames());
        for (a, b) in back.data().iter().zip(spec.data()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn rejects_bad_magic_version_and_truncation() {
        let mut bytes = encode_spec(&sample_spec()).unwrap();
        let mut bad = bytes.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_spec(&bad), Err(Error::BadMagic(m)) if &m == b"XXXX"));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(
            decode_spec(&bad),
            Err(Error::VersionMismatch {
                found: 2,
                expected: 1
            })
        ));

        let full = bytes.len() as u64;
        bytes.truncate(bytes.len() - 3);
        match decode_spec(&bytes) {
            Err(Error::Truncated { expected, actual }) => {
                assert_eq!(expected, full);
                assert_eq!(actual, full - 3);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        let msg = decode_spec(&bytes).unwrap_err().to_string();
        assert!(msg.contains(&full.to_string()) && msg.contains(&(full - 3).to_string()));
    }

    #[test]
    fn rejects_inconsistent_bins_and_codes() {
        let bytes = encode_spec(&sample_spec()).unwrap();
        let mut bad = bytes.clone();
        bad[42..46].copy_from_slice(&17u32.to_le_bytes());
        assert!(matches!(decode_spec(&bad), Err(Error::MalformedSpec(_))));
        let mut bad = bytes.clone();
        bad[6] = 9;
        assert!(matches!(decode_spec(&bad), Err(Error::MalformedSpec(_))));
        let mut bad = bytes;
        bad.push(0);
        assert!(matches!(decode_spec(&bad), Err(Error::MalformedSpec(_))));
    }
}
