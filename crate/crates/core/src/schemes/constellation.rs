//! Gray-coded constellations with unit average energy.
//!
//! Square M-QAM uses `k = log2(M)/2` bits per rail. A symbol's label is
//! `(gray_I << k) | gray_Q`, and bits enter the mapper most significant
//! first, so the first `k` bits of a group select the I level. On each rail
//! position `p = 0..m` carries level `m - 1 - 2p` (descending) and gray code
//! `p ^ (p >> 1)`:
//!
//! | rail bits (m = 4) | 00 | 01 | 11 | 10 |
//! |-------------------|----|----|----|----|
//! | level             | +3 | +1 | −1 | −3 |
//!
//! BPSK maps bit 0 to +1 and bit 1 to −1 on the I rail.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::SymbolFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
}

fn gray(p: usize) -> usize {
    p ^ (p >> 1)
}

impl Constellation {
    pub fn bpsk() -> Self {
        Self {
            order: 2,
            bits_per_symbol: 1,
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        }
    }

    /// Square QAM of order 4, 16, 64 (any even power of two works).
    pub fn qam(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros() as usize;
        if order < 4 || !order.is_power_of_two() || bits % 2 != 0 {
            return Err(Error::InvalidArgument(format!("unsupported square QAM order {order}")));
        }
        let k = bits / 2;
        let m = 1usize << k;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let mut points = vec![Complex64::new(0.0, 0.0); order];
        for pi in 0..m {
            for pq in 0..m {
                let label = (gray(pi) << k) | gray(pq);
                let level = |p: usize| (m as f64 - 1.0 - 2.0 * p as f64) / scale;
                points[label] = Complex64::new(level(pi), level(pq));
            }
        }
        Ok(Self {
            order,
            bits_per_symbol: bits,
            points,
        })
    }

    pub fn qpsk() -> Self {
        Self::qam(4).expect("4-QAM is supported")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Maps bits (each 0 or 1) to symbols, `bits_per_symbol` at a time,
    /// most significant bit first.
    pub fn map_bits_to_symbols(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol;
        if bits.len() % k != 0 {
            return Err(Error::LengthMismatch(format!(
                "{} bits do not divide into {k}-bit symbols",
                bits.len()
            )));
        }
        bits.chunks_exact(k)
            .map(|chunk| {
                let mut label = 0usize;
                for &b in chunk {
                    if b > 1 {
                        return Err(Error::InvalidArgument(format!("bit value {b} is not 0 or 1")));
                    }
                    label = (label << 1) | b as usize;
                }
                Ok(self.points[label])
            })
            .collect()
    }

    /// Nearest point label; exact ties resolve to the lowest label.
    pub fn decide(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = label;
                best_d = d;
            }
        }
        best
    }

    pub fn label_bits(&self, label: usize, out: &mut Vec<u8>) {
        for i in (0..self.bits_per_symbol).rev() {
            out.push(((label >> i) & 1) as u8);
        }
    }

    pub fn demap_to_bits(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for &z in symbols {
            self.label_bits(self.decide(z), &mut bits);
        }
        bits
    }
}

/// Maps bits to a one-dimensional frame.
pub fn map_bits(constellation: &Constellation, bits: &[u8]) -> Result<SymbolFrame> {
    Ok(SymbolFrame::from_trusted(1, constellation.map_bits_to_symbols(bits)?))
}

/// Minimum-distance demapping of a one-dimensional frame.
pub fn demap_symbols(constellation: &Constellation, received: &SymbolFrame) -> Result<Vec<u8>> {
    if received.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: received.dimension(),
        });
    }
    Ok(constellation.demap_to_bits(received.flat()))
}
