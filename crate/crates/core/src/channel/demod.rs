use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::schemes::{Scheme, SchemeKind};

/// Twiddle table for an N-point DFT: `table[t*N + i] = e^{-j2π ti/N}`.
pub(crate) fn dft_twiddles(n: usize) -> Vec<Complex64> {
    let mut table = Vec::with_capacity(n * n);
    for t in 0..n {
        for i in 0..n {
            let angle = -std::f64::consts::TAU * ((t * i) % n) as f64 / n as f64;
            table.push(Complex64::from_polar(1.0, angle));
        }
    }
    table
}

/// `(1/N) Σ_t x[t] e^{-j2π ti/N}` for each bin i.
pub(crate) fn dft_block(x: &[Complex64], twiddles: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (t, &xt) in x.iter().enumerate() {
        let row = &twiddles[t * n..(t + 1) * n];
        for (o, &w) in out.iter_mut().zip(row) {
            *o += xt * w;
        }
    }
    let scale = 1.0 / n as f64;
    for o in &mut out {
        *o *= scale;
    }
    out
}

/// Matched-filter receiver.
///
/// Single carrier: correlates with the pulse (equivalently, filters with the
/// time-reversed pulse and samples at delay `K - 1` past each symbol start),
/// then divides by the pulse energy. OFDM: per-block DFT with the 1/N
/// factor.
pub fn demodulate(scheme: &Scheme, signal: &IqBuffer) -> Result<SymbolFrame> {
    let r = signal.samples();
    match scheme.kind() {
        SchemeKind::SingleCarrier { pulse, .. } => {
            let k = pulse.len();
            let l = pulse.samples_per_symbol();
            if r.is_empty() {
                return Ok(SymbolFrame::from_trusted(1, Vec::new()));
            }
            if r.len() < k || (r.len() - k) % l != 0 {
                return Err(Error::LengthMismatch(format!(
                    "{} samples do not fit a grid of (n-1)*{l} + {k}",
                    r.len()
                )));
            }
            let n = (r.len() - k) / l + 1;
            let taps = pulse.taps();
            let gain = 1.0 / pulse.energy();
            let symbols = (0..n)
                .map(|i| {
                    let window = &r[i * l..i * l + k];
                    window.iter().zip(taps).map(|(z, &p)| z * p).sum::<Complex64>() * gain
                })
                .collect();
            Ok(SymbolFrame::from_trusted(1, symbols))
        }
        SchemeKind::Ofdm { num_subcarriers, .. } => {
            let n = *num_subcarriers;
            if r.len() % n != 0 {
                return Err(Error::LengthMismatch(format!(
                    "{} samples are not a whole number of {n}-sample OFDM blocks",
                    r.len()
                )));
            }
            let tw = dft_twiddles(n);
            let data = r.chunks_exact(n).flat_map(|b| dft_block(b, &tw)).collect();
            Ok(SymbolFrame::from_trusted(n, data))
        }
    }
}
