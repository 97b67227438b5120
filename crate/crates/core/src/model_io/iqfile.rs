//! Interleaved little-endian complex float files (`cf32`, `cf64`).

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::IqBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqFormat {
    Cf32,
    Cf64,
}

impl IqFormat {
    fn width(self) -> usize {
        match self {
            IqFormat::Cf32 => 4,
            IqFormat::Cf64 => 8,
        }
    }

    /// `.cf64` selects 64-bit floats; anything else is treated as `cf32`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("cf64") => IqFormat::Cf64,
            _ => IqFormat::Cf32,
        }
    }
}

pub fn encode_iq(buffer: &IqBuffer, format: IqFormat) -> Vec<u8> {
    let mut out = Vec::with_capacity(buffer.len() * 2 * format.width());
    for z in buffer.samples() {
        for v in [z.re, z.im] {
            match format {
                IqFormat::Cf32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                IqFormat::Cf64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    out
}

fn decode(bytes: &[u8], format: IqFormat) -> std::result::Result<Vec<Complex64>, String> {
    let w = format.width();
    if bytes.len() % w != 0 {
        return Err(format!("{} bytes is not a whole number of {w}-byte floats", bytes.len()));
    }
    if (bytes.len() / w) % 2 != 0 {
        return Err(format!("odd float count {} (I/Q pairs expected)", bytes.len() / w));
    }
    let floats: Vec<f64> = bytes
        .chunks_exact(w)
        .map(|c| match format {
            IqFormat::Cf32 => f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64,
            IqFormat::Cf64 => f64::from_le_bytes(c.try_into().expect("8 bytes")),
        })
        .collect();
    if let Some(i) = floats.iter().position(|v| !v.is_finite()) {
        return Err(format!("non-finite value at float {i}"));
    }
    Ok(floats.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

pub fn decode_iq(bytes: &[u8], format: IqFormat) -> Result<IqBuffer> {
    let samples = decode(bytes, format).map_err(|reason| Error::CorruptFile {
        path: PathBuf::from("<memory>"),
        reason,
    })?;
    IqBuffer::from_samples(samples)
}

pub fn write_iq(path: &Path, buffer: &IqBuffer, format: IqFormat) -> Result<()> {
    std::fs::write(path, encode_iq(buffer, format))?;
    Ok(())
}

pub fn read_iq(path: &Path, format: IqFormat) -> Result<IqBuffer> {
    let bytes = std::fs::read(path)?;
    let samples = decode(&bytes, format).map_err(|reason| Error::CorruptFile {
        path: path.to_path_buf(),
        reason,
    })?;
    IqBuffer::from_samples(samples)
}
