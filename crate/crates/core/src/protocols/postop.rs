use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::IqBuffer;

/// Operations appended to a base modulator's temporal output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostOp {
    /// Delays the Q rail by `samples`; I is zero-padded at the tail, Q at
    /// the head, so both rails keep one length.
    QuadratureDelay { samples: usize },
    /// Splits the buffer into `block_len` blocks and prefixes each with its
    /// last `cp_len` samples.
    CyclicPrefix { cp_len: usize, block_len: usize },
    /// Concatenates `count` copies of the buffer.
    Repeat { count: usize },
    /// Keeps `len` samples starting at `start`.
    Crop { start: usize, len: usize },
}

impl PostOp {
    pub fn name(&self) -> &'static str {
        match self {
            PostOp::QuadratureDelay { .. } => "QuadratureDelay",
            PostOp::CyclicPrefix { .. } => "CyclicPrefix",
            PostOp::Repeat { .. } => "Repeat",
            PostOp::Crop { .. } => "Crop",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PostOp::QuadratureDelay { samples } => samples > 0,
            PostOp::CyclicPrefix { cp_len, block_len } => cp_len > 0 && cp_len <= block_len,
            PostOp::Repeat { count } => count > 0,
            PostOp::Crop { len, .. } => len > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid post-op parameters: {self:?}")))
        }
    }

    pub fn apply(&self, input: &IqBuffer) -> Result<IqBuffer> {
        self.validate()?;
        let x = input.samples();
        let out: Vec<Complex64> = match *self {
            PostOp::QuadratureDelay { samples } => {
                let mut out = vec![Complex64::new(0.0, 0.0); x.len() + samples];
                for (n, z) in x.iter().enumerate() {
                    out[n].re = z.re;
                    out[n + samples].im = z.im;
                }
                out
            }
            PostOp::CyclicPrefix { cp_len, block_len } => {
                if x.len() % block_len != 0 {
                    return Err(Error::LengthMismatch(format!(
                        "{} samples are not a whole number of {block_len}-sample blocks",
                        x.len()
                    )));
                }
                let mut out = Vec::with_capacity(x.len() / block_len * (block_len + cp_len));
                for block in x.chunks_exact(block_len) {
                    out.extend_from_slice(&block[block_len - cp_len..]);
                    out.extend_from_slice(block);
                }
                out
            }
            PostOp::Repeat { count } => x.repeat(count),
            PostOp::Crop { start, len } => {
                if start + len > x.len() {
                    return Err(Error::LengthMismatch(format!(
                        "crop [{start}, {}) exceeds buffer of {} samples",
                        start + len,
                        x.len()
                    )));
                }
                x[start..start + len].to_vec()
            }
        };
        Ok(IqBuffer::from_trusted(out, input.sample_rate_hz()))
    }
}

/// Inverse of [`PostOp::CyclicPrefix`]: drops the first `cp_len` samples of
/// every `cp_len + block_len` chunk.
pub fn remove_cyclic_prefix(input: &[Complex64], cp_len: usize, block_len: usize) -> Result<Vec<Complex64>> {
    let chunk = cp_len + block_len;
    if input.len() % chunk != 0 {
        return Err(Error::LengthMismatch(format!(
            "{} samples are not a whole number of {chunk}-sample CP blocks",
            input.len()
        )));
    }
    Ok(input
        .chunks_exact(chunk)
        .flat_map(|c| c[cp_len..].iter().copied())
        .collect())
}
