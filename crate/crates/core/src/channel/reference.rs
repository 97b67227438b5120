//! Direct-form modulators, written independently of the synthesis engine:
//! zero-insertion upsampling followed by FIR filtering for single-carrier
//! schemes, and a per-block double-loop IDFT for OFDM.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::schemes::{Scheme, SchemeKind};

fn upsample(symbols: &[Complex64], factor: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); symbols.len() * factor];
    for (i, &s) in symbols.iter().enumerate() {
        out[i * factor] = s;
    }
    out
}

fn fir_full(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let len = x.len() + taps.len() - 1;
    (0..len)
        .map(|m| {
            let lo = m.saturating_sub(x.len() - 1);
            let hi = m.min(taps.len() - 1);
            (lo..=hi).map(|k| x[m - k] * taps[k]).sum()
        })
        .collect()
}

fn idft_block(block: &[Complex64]) -> Vec<Complex64> {
    let n = block.len();
    (0..n)
        .map(|t| {
            block
                .iter()
                .enumerate()
                .map(|(i, &s)| s * Complex64::from_polar(1.0, TAU * (t * i) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Waveform of `frame` under `scheme`, with the same length convention as
/// the engine: `(num_vectors - 1) * L + K` samples.
pub fn reference_modulate(scheme: &Scheme, frame: &SymbolFrame) -> Result<IqBuffer> {
    if frame.dimension() != scheme.symbol_dimension() {
        return Err(Error::DimensionMismatch {
            expected: scheme.symbol_dimension(),
            found: frame.dimension(),
        });
    }
    let samples = match scheme.kind() {
        SchemeKind::SingleCarrier { pulse, .. } => {
            let l = pulse.samples_per_symbol();
            let mut y = fir_full(&upsample(frame.flat(), l), pulse.taps());
            // drop the trailing L - 1 samples that only see inserted zeros
            if !frame.is_empty() {
                y.truncate((frame.num_vectors() - 1) * l + pulse.len());
            }
            y
        }
        SchemeKind::Ofdm { .. } => frame.vectors().flat_map(idft_block).collect(),
    };
    Ok(IqBuffer::from_trusted(samples, 1.0))
}

/// Looks the scheme up by registry id first.
pub fn reference_modulate_id(scheme_id: &str, frame: &SymbolFrame) -> Result<IqBuffer> {
    reference_modulate(&Scheme::from_id(scheme_id)?, frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangular_symbol_gives_equal_samples() {
        let s = Scheme::from_id("pam2-rect").unwrap();
        let y = reference_modulate(&s, &SymbolFrame::scalar(vec![Complex64::new(1.0, 0.0)]).unwrap()).unwrap();
        assert_eq!(y.len(), 8);
        assert!(y.samples().iter().all(|&z| z == y.samples()[0]));
    }

    #[test]
    fn ofdm4_roots_of_unity() {
        let kind = SchemeKind::Ofdm {
            num_subcarriers: 4,
            constellation: crate::schemes::Constellation::qpsk(),
        };
        let s = Scheme::new("ofdm4", kind);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let y = reference_modulate(&s, &SymbolFrame::new(4, vec![vec![zero, one, zero, zero]]).unwrap()).unwrap();
        let expected = [one, Complex64::new(0.0, 1.0), -one, Complex64::new(0.0, -1.0)];
        for (a, b) in y.samples().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn unknown_scheme_id() {
        let f = SymbolFrame::scalar(vec![]).unwrap();
        assert!(matches!(reference_modulate_id("fsk", &f), Err(Error::UnknownScheme(_))));
    }
}
