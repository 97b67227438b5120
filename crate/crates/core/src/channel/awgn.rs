use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::IqBuffer;
use crate::rng::{gaussian_pair, seeded};

/// How an SNR value is referenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrMode {
    /// Energy per bit over noise density.
    EbN0Db,
    /// Average signal power per sample over noise variance per sample.
    PerSampleSnrDb,
}

/// SNR specification and its conversion to a per-sample noise variance.
///
/// With `Es` the waveform energy of one symbol vector, `k` its bit count
/// and `L` its sample count:
///
/// * Eb/N0 mode: `σ² = Es / (k · 10^(v/10))`
/// * per-sample mode: `σ² = (Es / L) / 10^(v/10)`
///
/// `σ²` is the complex noise variance (split equally across I and Q), which
/// equals N0 for unit-spaced samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub mode: SnrMode,
    pub value_db: f64,
    pub bits_per_symbol: usize,
    pub samples_per_symbol: usize,
}

impl SnrSpec {
    pub fn ebn0(value_db: f64, bits_per_symbol: usize, samples_per_symbol: usize) -> Self {
        Self {
            mode: SnrMode::EbN0Db,
            value_db,
            bits_per_symbol,
            samples_per_symbol,
        }
    }

    pub fn per_sample(value_db: f64, samples_per_symbol: usize) -> Self {
        Self {
            mode: SnrMode::PerSampleSnrDb,
            value_db,
            bits_per_symbol: 0,
            samples_per_symbol,
        }
    }

    pub fn noise_variance(&self, symbol_energy: f64) -> f64 {
        let lin = 10f64.powf(self.value_db / 10.0);
        match self.mode {
            SnrMode::EbN0Db => symbol_energy / (self.bits_per_symbol as f64 * lin),
            SnrMode::PerSampleSnrDb => symbol_energy / self.samples_per_symbol as f64 / lin,
        }
    }
}

/// Adds circularly-symmetric complex Gaussian noise of total variance
/// `noise_variance` per sample.
pub fn awgn(signal: &IqBuffer, noise_variance: f64, seed: u64) -> Result<IqBuffer> {
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be finite and non-negative, got {noise_variance}"
        )));
    }
    if noise_variance == 0.0 {
        return Ok(signal.clone());
    }
    let sigma = (noise_variance / 2.0).sqrt();
    let mut rng = seeded(seed);
    let samples = signal
        .samples()
        .iter()
        .map(|z| {
            let (a, b) = gaussian_pair(&mut rng);
            z + Complex64::new(sigma * a, sigma * b)
        })
        .collect();
    Ok(IqBuffer::from_trusted(samples, signal.sample_rate_hz()))
}
