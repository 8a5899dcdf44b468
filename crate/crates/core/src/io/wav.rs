use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::write_atomically;
use crate::error::{Error, Result};
use crate::signal::Waveform;

/// Encodings accepted by [`read_wav`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Pcm24,
    Pcm32,
    Float32,
}

impl WavEncoding {
    fn full_scale(self) -> f64 {
        match self {
            WavEncoding::Pcm16 => 32768.0,
            WavEncoding::Pcm24 => 8_388_608.0,
            WavEncoding::Pcm32 => 2_147_483_648.0,
            WavEncoding::Float32 => 1.0,
        }
    }
}

impl fmt::Display for WavEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WavEncoding::Pcm16 => "pcm16",
            WavEncoding::Pcm24 => "pcm24",
            WavEncoding::Pcm32 => "pcm32",
            WavEncoding::Float32 => "float32",
        })
    }
}

/// Encodings accepted by [`write_wav`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputEncoding {
    #[default]
    Pcm16,
    Float32,
}

impl std::str::FromStr for OutputEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm16" => Ok(OutputEncoding::Pcm16),
            "float32" => Ok(OutputEncoding::Float32),
            _ => Err(Error::InvalidConfig(format!(
                "unknown encoding `{s}` (expected pcm16 or float32)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WavRead {
    /// Channel 0, normalized to `[-1, 1]`.
    pub wave: Waveform,
    pub encoding: WavEncoding,
    pub channels: u16,
    /// Set when channels other than the first were discarded.
    pub warning: Option<String>,
}

fn map_hound(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::MalformedWav(format!("{}: unexpected end of file", path.display()))
        }
        hound::Error::IoError(io) => Error::io(path, io),
        // well-formed headers whose bit depth hound cannot decode (e.g. 64-bit float)
        hound::Error::FormatError(
            msg @ ("bits per sample is not 32" | "bits per sample is not 8 or 16"),
        ) => Error::UnsupportedCodec(msg.to_string()),
        hound::Error::FormatError(msg) => Error::MalformedWav(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedCodec("format tag or layout".into()),
        hound::Error::UnfinishedSample => Error::MalformedWav("data ends mid-sample".into()),
        hound::Error::TooWide | hound::Error::InvalidSampleFormat => {
            Error::MalformedWav("sample width inconsistent with header".into())
        }
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<WavRead> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let encoding = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => WavEncoding::Pcm16,
        (SampleFormat::Int, 24) => WavEncoding::Pcm24,
        (SampleFormat::Int, 32) => WavEncoding::Pcm32,
        (SampleFormat::Float, 32) => WavEncoding::Float32,
        (fmt, bits) => {
            return Err(Error::UnsupportedCodec(format!(
                "{bits}-bit {}",
                if fmt == SampleFormat::Float {
                    "float"
                } else {
                    "PCM"
                }
            )))
        }
    };
    if spec.channels == 0 || spec.sample_rate == 0 {
        return Err(Error::MalformedWav("zero channels or sample rate".into()));
    }
    let channels = spec.channels as usize;
    let scale = encoding.full_scale();

    let samples: Vec<f64> = match encoding {
        WavEncoding::Float32 => reader
            .into_samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        _ => reader
            .into_samples::<i32>()
            .step_by(channels)
            .map(|s| s.map(|v| v as f64 / scale))
            .collect::<std::result::Result<_, _>>(),
    }
    .map_err(|e| map_hound(path, e))?;

    let warning = (channels > 1).then(|| {
        format!(
            "{}: {channels} channels, keeping channel 0 only",
            path.display()
        )
    });
    Ok(WavRead {
        wave: Waveform::new(samples, spec.sample_rate)
            .map_err(|e| Error::MalformedWav(e.to_string()))?,
        encoding,
        channels: spec.channels,
        warning,
    })
}

/// `pcm16` clamps to `[-1, 1]`, scales by 32767 and rounds half away from
/// zero; `float32` stores each sample cast to `f32`.
pub fn write_wav(path: impl AsRef<Path>, x: &Waveform, encoding: OutputEncoding) -> Result<()> {
    let path = path.as_ref();
    let (bits, format) = match encoding {
        OutputEncoding::Pcm16 => (16, SampleFormat::Int),
        OutputEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: x.sample_rate(),
        bits_per_sample: bits,
        sample_format: format,
    };
    write_atomically(path, |file| {
        let mut w = WavWriter::new(BufWriter::new(file), spec).map_err(|e| map_hound(path, e))?;
        for &s in x.samples() {
            match encoding {
                OutputEncoding::Pcm16 => w.write_sample(pcm16(s)),
                OutputEncoding::Float32 => w.write_sample(s as f32),
            }
            .map_err(|e| map_hound(path, e))?;
        }
        w.finalize().map_err(|e| map_hound(path, e))
    })
}

fn pcm16(s: f64) -> i16 {
    (s.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_quantizer() {
        assert_eq!(pcm16(0.0), 0);
        assert_eq!(pcm16(0.5), 16384);
        assert_eq!(pcm16(-0.5), -16384);
        assert_eq!(pcm16(-1.0), -32767);
        assert_eq!(pcm16(2.0), 32767);
        assert_eq!(pcm16(-7.0), -32767);
    }
}
