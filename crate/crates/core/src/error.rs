use std::path::PathBuf;

use thiserror::Error;

use crate::vocoder::SpectrogramKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectrogram kind `{0}` has no synthesis path (it would need phase estimation)")]
    UnsupportedKind(SpectrogramKind),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed RIFF/WAVE data: {0}")]
    MalformedWav(String),

    #[error("unsupported WAV codec: {0}")]
    UnsupportedCodec(String),

    #[error("bad magic {0:?}, expected \"MVS1\"")]
    BadMagic([u8; 4]),

    #[error("unsupported MVS1 version {found}, expected {expected}")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("malformed spectrogram file: {0}")]
    MalformedSpec(String),

    #[error("measurement error: {0}")]
    Measurement(String),
}

impl Error {
    /// Stable short identifier, used as the message prefix by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidInput(_) => "invalid-input",
            Error::UnsupportedKind(_) => "unsupported-kind",
            Error::MissingFile(_) => "missing-file",
            Error::Io { .. } => "io",
            Error::MalformedWav(_) => "malformed-wav",
            Error::UnsupportedCodec(_) => "unsupported-codec",
            Error::BadMagic(_) => "bad-magic",
            Error::VersionMismatch { .. } => "version-mismatch",
            Error::Truncated { .. } => "truncated",
            Error::MalformedSpec(_) => "malformed-spec",
            Error::Measurement(_) => "measurement",
        }
    }

    /// Wraps an I/O failure on `path`; not-found becomes [`Error::MissingFile`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
