//! Pulse-shaping filters. All taps are scaled to unit energy.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default RRC roll-off.
pub const DEFAULT_RRC_BETA: f64 = 0.35;
/// Default RRC span in symbols.
pub const DEFAULT_RRC_SPAN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseKind {
    Rectangular,
    HalfSine,
    RootRaisedCosine { beta: f64, span_symbols: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    taps: Vec<f64>,
    samples_per_symbol: usize,
    kind: PulseKind,
}

fn unit_energy(mut taps: Vec<f64>) -> Vec<f64> {
    let e = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    for t in &mut taps {
        *t /= e;
    }
    taps
}

fn check_sps(samples_per_symbol: usize) -> Result<()> {
    if samples_per_symbol == 0 {
        return Err(Error::InvalidArgument("samples per symbol must be positive".into()));
    }
    Ok(())
}

/// Continuous-time RRC impulse response at `t` symbol periods, unnormalized.
fn rrc_at(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (t.abs() - edge).abs() < 1e-9 * edge {
        return beta / 2f64.sqrt()
            * ((1.0 + 2.0 / PI) * (PI / (4.0 * beta)).sin() + (1.0 - 2.0 / PI) * (PI / (4.0 * beta)).cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

impl PulseShape {
    /// `L` equal taps.
    pub fn rectangular(samples_per_symbol: usize) -> Result<Self> {
        check_sps(samples_per_symbol)?;
        Ok(Self {
            taps: unit_energy(vec![1.0; samples_per_symbol]),
            samples_per_symbol,
            kind: PulseKind::Rectangular,
        })
    }

    /// `p[n] = sin(π(n + 0.5)/L)`, `n = 0..L`.
    pub fn half_sine(samples_per_symbol: usize) -> Result<Self> {
        check_sps(samples_per_symbol)?;
        let l = samples_per_symbol as f64;
        let taps = (0..samples_per_symbol)
            .map(|n| (PI * (n as f64 + 0.5) / l).sin())
            .collect();
        Ok(Self {
            taps: unit_energy(taps),
            samples_per_symbol,
            kind: PulseKind::HalfSine,
        })
    }

    /// Root raised cosine with `span_symbols * L + 1` taps centred on t = 0.
    pub fn root_raised_cosine(beta: f64, span_symbols: usize, samples_per_symbol: usize) -> Result<Self> {
        check_sps(samples_per_symbol)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidArgument(format!("RRC roll-off must be in (0, 1], got {beta}")));
        }
        if span_symbols == 0 {
            return Err(Error::InvalidArgument("RRC span must be positive".into()));
        }
        let l = samples_per_symbol as f64;
        let count = span_symbols * samples_per_symbol + 1;
        let center = (count - 1) as f64 / 2.0;
        let mut taps: Vec<f64> = (0..count).map(|n| rrc_at((n as f64 - center) / l, beta)).collect();
        // force exact symmetry
        for n in 0..count / 2 {
            let avg = 0.5 * (taps[n] + taps[count - 1 - n]);
            taps[n] = avg;
            taps[count - 1 - n] = avg;
        }
        Ok(Self {
            taps: unit_energy(taps),
            samples_per_symbol,
            kind: PulseKind::RootRaisedCosine { beta, span_symbols },
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }
}
