//! IEEE 802.11a/g PHY frame: STF, LTF, SIG and DATA fields produced by one
//! 64-subcarrier OFDM graph with per-field post-ops, concatenated in order.
//!
//! SIG and DATA carry pre-coded values (no scrambling, convolutional coding
//! or interleaving), so frames are structurally standard but not decodable
//! by a commodity receiver.

use num_complex::Complex64;

use super::PostOp;
use crate::channel::{dft_block, dft_twiddles};
use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::schemes::{build_ofdm_modulator, Constellation};
use crate::synth::SynthGraph;

pub const NUM_SUBCARRIERS: usize = 64;
pub const CP_LEN: usize = 16;
pub const DATA_SUBCARRIERS: usize = 48;
pub const STF_LEN: usize = 160;
pub const LTF_LEN: usize = 160;
pub const SYMBOL_LEN: usize = NUM_SUBCARRIERS + CP_LEN;
pub const PILOT_SUBCARRIERS: [i32; 4] = [-21, -7, 7, 21];
const PILOT_VALUES: [f64; 4] = [1.0, 1.0, 1.0, -1.0];
/// Threshold on the normalized lag-16 autocorrelation for detection.
pub const DETECTION_THRESHOLD: f64 = 0.8;
const DETECTION_WINDOW: usize = 48;

/// Short training sequence on subcarriers −26..=26, before the √(13/6) scale.
const STF_SEQUENCE: [i8; 53] = [
    0, 0, 1, 0, 0, 0, -1, 0, 0, 0, 1, 0, 0, 0, -1, 0, 0, 0, -1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, -1,
    0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0,
];

/// Long training sequence on subcarriers −26..=26.
const LTF_SEQUENCE: [i8; 53] = [
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 0, 1, -1, -1, 1, 1, -1, 1,
    -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1,
];

fn bin(subcarrier: i32) -> usize {
    subcarrier.rem_euclid(NUM_SUBCARRIERS as i32) as usize
}

/// Data subcarrier indices in transmission order (−26..=26 without DC and pilots).
pub fn data_subcarriers() -> Vec<i32> {
    (-26..=26).filter(|k| *k != 0 && !PILOT_SUBCARRIERS.contains(k)).collect()
}

/// Frequency-domain STF (64 bins).
pub fn stf_bins() -> Vec<Complex64> {
    let scale = (13.0f64 / 6.0).sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); NUM_SUBCARRIERS];
    for (i, &v) in STF_SEQUENCE.iter().enumerate() {
        x[bin(i as i32 - 26)] = Complex64::new(1.0, 1.0) * (v as f64 * scale);
    }
    x
}

/// Frequency-domain LTF (64 bins).
pub fn ltf_bins() -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); NUM_SUBCARRIERS];
    for (i, &v) in LTF_SEQUENCE.iter().enumerate() {
        x[bin(i as i32 - 26)] = Complex64::new(v as f64, 0.0);
    }
    x
}

/// Pilot polarity sequence: the 127-periodic output of the x^7 + x^4 + 1
/// scrambler seeded with all ones, 0 → +1 and 1 → −1.
pub fn pilot_polarity(count: usize) -> Vec<f64> {
    let mut state = 0x7fu8;
    (0..count)
        .map(|_| {
            let bit = ((state >> 6) ^ (state >> 3)) & 1;
            state = ((state << 1) | bit) & 0x7f;
            if bit == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WifiFrameConfig {
    pub num_subcarriers: usize,
    pub cp_len: usize,
    pub data_constellation: Constellation,
    pub sig_constellation: Constellation,
}

impl WifiFrameConfig {
    pub fn new(data_constellation: Constellation) -> Self {
        Self {
            num_subcarriers: NUM_SUBCARRIERS,
            cp_len: CP_LEN,
            data_constellation,
            sig_constellation: Constellation::bpsk(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_subcarriers != NUM_SUBCARRIERS || self.cp_len != CP_LEN {
            return Err(Error::InvalidArgument(format!(
                "only {NUM_SUBCARRIERS} subcarriers with a {CP_LEN}-sample CP are supported"
            )));
        }
        if self.sig_constellation.bits_per_symbol() != 1 {
            return Err(Error::InvalidArgument("SIG must be BPSK".into()));
        }
        Ok(())
    }

    /// Frame length in samples for a given number of DATA symbols.
    pub fn frame_len(&self, data_symbols: usize) -> usize {
        STF_LEN + LTF_LEN + SYMBOL_LEN * (1 + data_symbols)
    }
}

impl Default for WifiFrameConfig {
    fn default() -> Self {
        Self::new(Constellation::qam(16).expect("16-QAM is a valid order"))
    }
}

struct Fields {
    stf: SynthGraph,
    ltf: SynthGraph,
    payload: SynthGraph,
}

fn fields() -> Result<Fields> {
    let base = build_ofdm_modulator(NUM_SUBCARRIERS)?;
    Ok(Fields {
        stf: base.clone().with_post_ops(vec![
            PostOp::Repeat { count: 3 },
            PostOp::Crop { start: 0, len: STF_LEN },
        ])?,
        ltf: base.clone().with_post_ops(vec![
            PostOp::Repeat { count: 2 },
            PostOp::CyclicPrefix { cp_len: 32, block_len: 2 * NUM_SUBCARRIERS },
        ])?,
        payload: base.with_post_ops(vec![PostOp::CyclicPrefix {
            cp_len: CP_LEN,
            block_len: NUM_SUBCARRIERS,
        }])?,
    })
}

/// 64-bin vector with the 48 values on the data subcarriers and the pilot
/// pattern scaled by `polarity`.
fn symbol_bins(values: &[Complex64], polarity: f64) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); NUM_SUBCARRIERS];
    for (k, v) in data_subcarriers().into_iter().zip(values) {
        x[bin(k)] = *v;
    }
    for (k, p) in PILOT_SUBCARRIERS.iter().zip(PILOT_VALUES) {
        x[bin(*k)] = Complex64::new(p * polarity, 0.0);
    }
    x
}

/// Assembles a frame. `sig_bits` must hold 48 bits; `data_symbols` must be a
/// whole number of 48-value OFDM symbols.
pub fn build_wifi_frame(config: &WifiFrameConfig, sig_bits: &[u8], data_symbols: &[Complex64]) -> Result<IqBuffer> {
    config.validate()?;
    if sig_bits.len() != DATA_SUBCARRIERS {
        return Err(Error::LengthMismatch(format!(
            "SIG needs {DATA_SUBCARRIERS} bits, got {}",
            sig_bits.len()
        )));
    }
    if data_symbols.len() % DATA_SUBCARRIERS != 0 {
        return Err(Error::LengthMismatch(format!(
            "{} data symbols do not fill whole OFDM symbols of {DATA_SUBCARRIERS}",
            data_symbols.len()
        )));
    }
    let f = fields()?;
    let sig = config.sig_constellation.map_bits_to_symbols(sig_bits)?;
    let count = data_symbols.len() / DATA_SUBCARRIERS;
    let polarity = pilot_polarity(count + 1);
    let mut payload = symbol_bins(&sig, polarity[0]);
    for (t, chunk) in data_symbols.chunks_exact(DATA_SUBCARRIERS).enumerate() {
        payload.extend(symbol_bins(chunk, polarity[t + 1]));
    }

    let mut out = f.stf.modulate(&SymbolFrame::from_flat(NUM_SUBCARRIERS, stf_bins())?)?.into_samples();
    out.extend(f.ltf.modulate(&SymbolFrame::from_flat(NUM_SUBCARRIERS, ltf_bins())?)?.into_samples());
    out.extend(f.payload.modulate(&SymbolFrame::from_flat(NUM_SUBCARRIERS, payload)?)?.into_samples());
    IqBuffer::from_samples(out)
}

/// First sample where the normalized lag-16 autocorrelation over a 48-sample
/// window crosses the threshold.
fn detect(x: &[Complex64]) -> Result<usize> {
    let w = DETECTION_WINDOW;
    let lag = 16;
    if x.len() < w + lag {
        return Err(Error::NoFrame {
            metric: 0.0,
            threshold: DETECTION_THRESHOLD,
        });
    }
    let positions = x.len() - w - lag + 1;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut energy = 0.0;
    for i in 0..w {
        corr += x[i] * x[i + lag].conj();
        energy += x[i + lag].norm_sqr();
    }
    let mut energies = Vec::with_capacity(positions);
    let mut corrs = Vec::with_capacity(positions);
    for n in 0..positions {
        if n > 0 {
            let (old, new) = (n - 1, n + w - 1);
            corr += x[new] * x[new + lag].conj() - x[old] * x[old + lag].conj();
            energy += x[new + lag].norm_sqr() - x[old + lag].norm_sqr();
        }
        corrs.push(corr);
        energies.push(energy);
    }
    let floor = 1e-2 * energies.iter().cloned().fold(0.0, f64::max);
    let mut best = 0.0f64;
    for n in 0..positions {
        if energies[n] <= floor {
            continue;
        }
        let metric = corrs[n].norm() / energies[n];
        if metric >= DETECTION_THRESHOLD {
            return Ok(n);
        }
        best = best.max(metric);
    }
    Err(Error::NoFrame {
        metric: best,
        threshold: DETECTION_THRESHOLD,
    })
}

/// Start of the first LTF body by cross-correlation near the coarse estimate.
fn fine_timing(x: &[Complex64], coarse: usize, ltf: &[Complex64]) -> usize {
    let nominal = coarse + STF_LEN + 32;
    let lo = nominal.saturating_sub(32);
    let hi = (nominal + 32).min(x.len().saturating_sub(2 * NUM_SUBCARRIERS));
    let mut best = (nominal.min(hi), -1.0);
    for d in lo..=hi {
        let c: Complex64 = x[d..d + NUM_SUBCARRIERS].iter().zip(ltf).map(|(a, b)| a * b.conj()).sum();
        if c.norm() > best.1 {
            best = (d, c.norm());
        }
    }
    best.0
}

/// Detects, synchronizes and equalizes a frame. Returns the SIG bits and the
/// equalized DATA values (48 per OFDM symbol that fits in the buffer).
pub fn demod_wifi_frame(buffer: &IqBuffer, config: &WifiFrameConfig) -> Result<(Vec<u8>, Vec<Complex64>)> {
    config.validate()?;
    let x = buffer.samples();
    let coarse = detect(x)?;
    let ltf_time = build_ofdm_modulator(NUM_SUBCARRIERS)?
        .modulate(&SymbolFrame::from_flat(NUM_SUBCARRIERS, ltf_bins())?)?
        .into_samples();
    if x.len() < coarse + STF_LEN + LTF_LEN + SYMBOL_LEN {
        return Err(Error::LengthMismatch("buffer ends before the SIG field".into()));
    }
    let ltf_start = fine_timing(x, coarse, &ltf_time);
    let tw = dft_twiddles(NUM_SUBCARRIERS);

    // Scalar complex gain from both LTF symbols over the 52 used subcarriers.
    let reference = ltf_bins();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for s in 0..2 {
        let start = ltf_start + s * NUM_SUBCARRIERS;
        let y = dft_block(&x[start..start + NUM_SUBCARRIERS], &tw);
        for (yk, lk) in y.iter().zip(&reference) {
            num += yk * lk.conj();
            den += lk.norm_sqr();
        }
    }
    let gain = num / den;
    if gain.norm() == 0.0 || !gain.is_finite() {
        return Err(Error::NoFrame {
            metric: 0.0,
            threshold: DETECTION_THRESHOLD,
        });
    }

    let sig_start = ltf_start + 2 * NUM_SUBCARRIERS;
    let data_idx: Vec<usize> = data_subcarriers().into_iter().map(bin).collect();
    let equalize = |start: usize| -> Vec<Complex64> {
        let body = start + CP_LEN;
        let y = dft_block(&x[body..body + NUM_SUBCARRIERS], &tw);
        data_idx.iter().map(|&b| y[b] / gain).collect()
    };
    let sig_values = equalize(sig_start);
    let sig_bits = config.sig_constellation.demap_to_bits(&sig_values);

    let count = (x.len() - sig_start - SYMBOL_LEN) / SYMBOL_LEN;
    let mut data = Vec::with_capacity(count * DATA_SUBCARRIERS);
    for t in 0..count {
        data.extend(equalize(sig_start + SYMBOL_LEN * (t + 1)));
    }
    Ok((sig_bits, data))
}
