//! WAV audio and the MVS1 spectrogram container.
//!
//! Writers go through a temporary file in the destination directory and
//! rename it into place, so a failed write never leaves a partial file.
//! Concurrent writes to one path are not supported.

mod spec_file;
mod wav;

use std::path::Path;

use crate::error::{Error, Result};

pub use spec_file::{
    decode_spec, encode_spec, read_spec, write_spec, SpecFileHeader, HEADER_LEN, MAGIC, VERSION,
};
pub use wav::{read_wav, write_wav, OutputEncoding, WavEncoding, WavRead};

pub(crate) fn write_atomically(
    path: &Path,
    bytes_fn: impl FnOnce(&mut std::fs::File) -> Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    bytes_fn(tmp.as_file_mut())?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
