//! IEEE 802.15.4 (2.4 GHz) O-QPSK: DSSS spreading onto a half-sine QPSK
//! graph with the Q rail delayed by half a chip pair.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::PostOp;
use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::schemes::{build_linear_modulator, PulseShape};
use crate::synth::SynthGraph;

pub const CHIPS_PER_SYMBOL: usize = 32;
pub const DEFAULT_SAMPLES_PER_CHIP_PAIR: usize = 8;

/// Chip sequences for data symbols 0..15; the most significant bit is the
/// first chip (c0) on air.
pub const CHIP_TABLE: [u32; 16] = [
    0b11011001110000110101001000101110,
    0b11101101100111000011010100100010,
    0b00101110110110011100001101010010,
    0b00100010111011011001110000110101,
    0b01010010001011101101100111000011,
    0b00110101001000101110110110011100,
    0b11000011010100100010111011011001,
    0b10011100001101010010001011101101,
    0b10001100100101100000011101111011,
    0b10111000110010010110000001110111,
    0b01111011100011001001011000000111,
    0b01110111101110001100100101100000,
    0b00000111011110111000110010010110,
    0b01100000011101111011100011001001,
    0b10010110000001110111101110001100,
    0b11001001011000000111011110111000,
];

/// Chips c0..c31 of a data symbol, each 0 or 1.
pub fn chips(symbol: u8) -> [u8; CHIPS_PER_SYMBOL] {
    let word = CHIP_TABLE[(symbol & 0x0f) as usize];
    let mut out = [0u8; CHIPS_PER_SYMBOL];
    for (i, c) in out.iter_mut().enumerate() {
        *c = ((word >> (31 - i)) & 1) as u8;
    }
    out
}

/// Data symbols of a byte stream, low nibble first.
pub fn bytes_to_symbols(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|b| [b & 0x0f, b >> 4]).collect()
}

/// CRC-16 used for the frame check sequence (CCITT polynomial, reflected,
/// zero initial value).
pub fn crc16(data: &[u8]) -> u16 {
    let mut crc = 0u16;
    for &b in data {
        crc ^= b as u16;
        for _ in 0..8 {
            crc = if crc & 1 != 0 { (crc >> 1) ^ 0x8408 } else { crc >> 1 };
        }
    }
    crc
}

/// Maximum PSDU length (payload plus 2-byte FCS).
pub const MAX_PSDU_LEN: usize = 127;

/// PPDU bytes: 4-byte zero preamble, SFD 0xA7, length, payload, FCS (LSB first).
pub fn ppdu(payload: &[u8]) -> Result<Vec<u8>> {
    if payload.len() + 2 > MAX_PSDU_LEN {
        return Err(Error::InvalidArgument(format!(
            "payload of {} bytes exceeds the {}-byte PSDU limit",
            payload.len(),
            MAX_PSDU_LEN - 2
        )));
    }
    let fcs = crc16(payload);
    let mut out = vec![0, 0, 0, 0, 0xa7, (payload.len() + 2) as u8];
    out.extend_from_slice(payload);
    out.extend_from_slice(&fcs.to_le_bytes());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZigbeeModulator {
    graph: SynthGraph,
}

/// O-QPSK modulator at the default 8 samples per chip pair.
pub fn build_oqpsk_zigbee() -> ZigbeeModulator {
    ZigbeeModulator::new(DEFAULT_SAMPLES_PER_CHIP_PAIR).expect("default rate is valid")
}

impl ZigbeeModulator {
    /// `samples_per_chip_pair` must be even so the Q offset is whole samples.
    pub fn new(samples_per_chip_pair: usize) -> Result<Self> {
        let l = samples_per_chip_pair;
        if l < 2 || l % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "samples per chip pair must be even and at least 2, got {l}"
            )));
        }
        let pulse = PulseShape::half_sine(l)?;
        let graph = build_linear_modulator(&pulse).with_post_ops(vec![PostOp::QuadratureDelay { samples: l / 2 }])?;
        Ok(Self { graph })
    }

    pub fn graph(&self) -> &SynthGraph {
        &self.graph
    }

    pub fn samples_per_chip_pair(&self) -> usize {
        self.graph.samples_per_symbol()
    }

    /// QPSK symbols for a run of data symbols: even chips on I, odd on Q.
    pub fn chip_symbols(symbols: &[u8]) -> SymbolFrame {
        let points: Vec<Complex64> = symbols
            .iter()
            .flat_map(|&s| {
                let c = chips(s);
                (0..CHIPS_PER_SYMBOL / 2)
                    .map(move |p| {
                        let level = |bit: u8| if bit == 1 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                        Complex64::new(level(c[2 * p]), level(c[2 * p + 1]))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        SymbolFrame::scalar(points).expect("chip levels are finite")
    }

    pub fn modulate_symbols(&self, symbols: &[u8]) -> Result<IqBuffer> {
        if symbols.is_empty() {
            return Ok(IqBuffer::empty());
        }
        self.graph.modulate(&Self::chip_symbols(symbols))
    }

    pub fn modulate_bytes(&self, bytes: &[u8]) -> Result<IqBuffer> {
        self.modulate_symbols(&bytes_to_symbols(bytes))
    }

    /// Soft chips sampled at pulse peaks, despread by maximum correlation.
    pub fn demodulate_symbols(&self, signal: &IqBuffer) -> Result<Vec<u8>> {
        let l = self.samples_per_chip_pair();
        let x = signal.samples();
        if x.is_empty() {
            return Ok(Vec::new());
        }
        let core = x.len().checked_sub(l / 2).filter(|n| n % (CHIPS_PER_SYMBOL / 2 * l) == 0);
        let Some(core) = core else {
            return Err(Error::LengthMismatch(format!(
                "{} samples is not a whole number of O-QPSK data symbols",
                x.len()
            )));
        };
        let pairs = core / l;
        // Half-sine peaks sit at offset L/2 within each chip pair (between
        // the two central samples for even L, so average them).
        let peak = |rail: &dyn Fn(usize) -> f64, start: usize| (rail(start + l / 2 - 1) + rail(start + l / 2)) / 2.0;
        let re = |n: usize| x[n].re;
        let im = |n: usize| x[n].im;
        let mut soft = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            soft.push(peak(&re, p * l));
            soft.push(peak(&im, p * l + l / 2));
        }
        Ok(soft
            .chunks_exact(CHIPS_PER_SYMBOL)
            .map(|block| {
                let score = |s: usize| -> f64 {
                    chips(s as u8)
                        .iter()
                        .zip(block)
                        .map(|(&c, &v)| if c == 1 { v } else { -v })
                        .sum()
                };
                (0..16).fold(0usize, |best, s| if score(s) > score(best) { s } else { best }) as u8
            })
            .collect())
    }

    pub fn demodulate_bytes(&self, signal: &IqBuffer) -> Result<Vec<u8>> {
        let symbols = self.demodulate_symbols(signal)?;
        Ok(symbols.chunks(2).map(|p| p[0] | (p.get(1).copied().unwrap_or(0) << 4)).collect())
    }
}
