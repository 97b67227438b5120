//! Complex baseband samples, symbol frames, and the channel-major real
//! tensor layout used at the synthesis boundary.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One complex baseband sample (I = `re`, Q = `im`).
pub type ComplexSample = Complex64;

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// A sequence of complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl IqBuffer {
    /// Builds a buffer, rejecting NaN/Inf samples. The sample rate is metadata only.
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        check_finite(&samples)?;
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Buffer with the nominal sample rate of 1 Hz.
    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, 1.0)
    }

    /// Caller guarantees finiteness: crate-internal producers only write
    /// values computed from finite inputs.
    pub(crate) fn from_trusted(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        debug_assert!(check_finite(&samples).is_ok());
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn empty() -> Self {
        Self::from_trusted(Vec::new(), 1.0)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn with_sample_rate(mut self, sample_rate_hz: f64) -> Self {
        self.sample_rate_hz = sample_rate_hz;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of |s|² over the buffer (0 for an empty buffer).
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// A batch of `dimension`-long complex symbol vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    dimension: usize,
    data: Vec<Complex64>,
}

impl SymbolFrame {
    pub fn new(dimension: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("symbol dimension must be positive".into()));
        }
        let mut data = Vec::with_capacity(vectors.len() * dimension);
        for (i, v) in vectors.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(Error::LengthMismatch(format!(
                    "symbol vector {i} has {} entries, expected {dimension}",
                    v.len()
                )));
            }
            data.extend(v);
        }
        Self::from_flat(dimension, data)
    }

    /// Builds a frame from `num_vectors * dimension` row-major entries.
    pub fn from_flat(dimension: usize, data: Vec<Complex64>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("symbol dimension must be positive".into()));
        }
        if data.len() % dimension != 0 {
            return Err(Error::LengthMismatch(format!(
                "{} entries do not divide into vectors of dimension {dimension}",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { dimension, data })
    }

    /// One-dimensional frame (single-carrier symbols).
    pub fn scalar(symbols: Vec<Complex64>) -> Result<Self> {
        Self::from_flat(1, symbols)
    }

    pub(crate) fn from_trusted(dimension: usize, data: Vec<Complex64>) -> Self {
        debug_assert!(dimension > 0 && data.len() % dimension == 0);
        Self { dimension, data }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_vectors(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.dimension)
    }

    /// All entries, row-major.
    pub fn flat(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<Complex64> {
        self.data
    }

    /// `a * self + b * other` for frames of identical shape.
    pub fn linear_combination(&self, a: f64, other: &SymbolFrame, b: f64) -> Result<Self> {
        if self.dimension != other.dimension || self.data.len() != other.data.len() {
            return Err(Error::LengthMismatch("frames differ in shape".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Self::from_flat(self.dimension, data)
    }
}

/// Channel-major real tensor `[channels, len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor {
    channels: usize,
    len: usize,
    data: Vec<f64>,
}

impl RealTensor {
    pub fn zeros(channels: usize, len: usize) -> Self {
        Self {
            channels,
            len,
            data: vec![0.0; channels * len],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let channels = rows.len();
        let len = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != len) {
            return Err(Error::LengthMismatch(format!(
                "channel {i} has length {}, channel 0 has {len}",
                r.len()
            )));
        }
        Ok(Self {
            channels,
            len,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, c: usize) -> &[f64] {
        &self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn row_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.channels).map(|c| self.row(c).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Splits a frame into a `[2N, num_vectors]` tensor: channels `0..N` carry
/// the real parts, channels `N..2N` the imaginary parts.
pub fn split_re_im(frame: &SymbolFrame) -> RealTensor {
    let n = frame.dimension();
    let len = frame.num_vectors();
    let mut out = RealTensor::zeros(2 * n, len);
    for (t, v) in frame.vectors().enumerate() {
        for (j, s) in v.iter().enumerate() {
            out.data[j * len + t] = s.re;
            out.data[(n + j) * len + t] = s.im;
        }
    }
    out
}

/// Pairs a `[2, len]` tensor into complex samples `(row0[k], row1[k])`.
pub fn merge_re_im(tensor: &RealTensor) -> Result<IqBuffer> {
    if tensor.channels() != 2 {
        return Err(Error::ChannelMismatch {
            expected: 2,
            found: tensor.channels(),
        });
    }
    let samples: Vec<Complex64> = tensor
        .row(0)
        .iter()
        .zip(tensor.row(1))
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    IqBuffer::from_samples(samples)
}
