//! Scheme constructors: kernels for linear single-carrier modulators and
//! N-subcarrier OFDM, plus the string-keyed scheme registry.

mod constellation;
mod pulse;

use std::f64::consts::TAU;

use num_complex::Complex64;

pub use constellation::{demap_symbols, map_bits, Constellation};
pub use pulse::{PulseKind, PulseShape, DEFAULT_RRC_BETA, DEFAULT_RRC_SPAN};

use crate::error::{Error, Result};
use crate::iq::SymbolFrame;
use crate::synth::SynthGraph;

/// Samples per symbol used by the registry's single-carrier schemes.
pub const DEFAULT_SAMPLES_PER_SYMBOL: usize = 8;

/// Single-carrier modulator: kernels are the pulse taps, returned in the
/// two-channel real-filter form.
pub fn build_linear_modulator(pulse: &PulseShape) -> SynthGraph {
    SynthGraph::real_filter(pulse.samples_per_symbol(), &[pulse.taps().to_vec()])
        .expect("pulse taps form a valid kernel")
}

/// OFDM basis `φ_i[n] = e^{j2πni/N}`, unscaled.
pub fn ofdm_basis(num_subcarriers: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = num_subcarriers;
    let mut re = vec![vec![0.0; n]; n];
    let mut im = vec![vec![0.0; n]; n];
    for i in 0..n {
        for t in 0..n {
            let angle = TAU * ((t * i) % n) as f64 / n as f64;
            let (s, c) = angle.sin_cos();
            re[i][t] = c;
            im[i][t] = s;
        }
    }
    (re, im)
}

/// N-subcarrier OFDM: stride N, kernel length N, full template.
pub fn build_ofdm_modulator(num_subcarriers: usize) -> Result<SynthGraph> {
    if num_subcarriers < 2 {
        return Err(Error::InvalidArgument(format!(
            "OFDM needs at least 2 subcarriers, got {num_subcarriers}"
        )));
    }
    let (re, im) = ofdm_basis(num_subcarriers);
    SynthGraph::template(num_subcarriers, &re, &im)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    SingleCarrier {
        constellation: Constellation,
        pulse: PulseShape,
    },
    Ofdm {
        num_subcarriers: usize,
        constellation: Constellation,
    },
}

/// A named modulation scheme: what the registry ids resolve to.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    id: String,
    kind: SchemeKind,
}

impl Scheme {
    pub const IDS: [&'static str; 4] = ["pam2-rect", "qpsk-halfsine", "qam16-rrc", "ofdm64"];

    pub fn new(id: impl Into<String>, kind: SchemeKind) -> Self {
        Self { id: id.into(), kind }
    }

    /// Resolves a registry id. Besides [`Scheme::IDS`], `qpsk-rrc`,
    /// `qam64-rrc` and `ofdm<N>` are accepted.
    pub fn from_id(id: &str) -> Result<Self> {
        let l = DEFAULT_SAMPLES_PER_SYMBOL;
        let rrc = || PulseShape::root_raised_cosine(DEFAULT_RRC_BETA, DEFAULT_RRC_SPAN, l);
        let kind = match id {
            "pam2-rect" => SchemeKind::SingleCarrier {
                constellation: Constellation::bpsk(),
                pulse: PulseShape::rectangular(l)?,
            },
            "qpsk-halfsine" => SchemeKind::SingleCarrier {
                constellation: Constellation::qpsk(),
                pulse: PulseShape::half_sine(l)?,
            },
            "qpsk-rrc" => SchemeKind::SingleCarrier {
                constellation: Constellation::qpsk(),
                pulse: rrc()?,
            },
            "qam16-rrc" => SchemeKind::SingleCarrier {
                constellation: Constellation::qam(16)?,
                pulse: rrc()?,
            },
            "qam64-rrc" => SchemeKind::SingleCarrier {
                constellation: Constellation::qam(64)?,
                pulse: rrc()?,
            },
            other => match other.strip_prefix("ofdm").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 2 => SchemeKind::Ofdm {
                    num_subcarriers: n,
                    constellation: Constellation::qpsk(),
                },
                _ => return Err(Error::UnknownScheme(id.to_string())),
            },
        };
        Ok(Self::new(id, kind))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn constellation(&self) -> &Constellation {
        match &self.kind {
            SchemeKind::SingleCarrier { constellation, .. } | SchemeKind::Ofdm { constellation, .. } => {
                constellation
            }
        }
    }

    pub fn graph(&self) -> SynthGraph {
        match &self.kind {
            SchemeKind::SingleCarrier { pulse, .. } => build_linear_modulator(pulse),
            SchemeKind::Ofdm { num_subcarriers, .. } => {
                build_ofdm_modulator(*num_subcarriers).expect("validated at construction")
            }
        }
    }

    pub fn symbol_dimension(&self) -> usize {
        match &self.kind {
            SchemeKind::SingleCarrier { .. } => 1,
            SchemeKind::Ofdm { num_subcarriers, .. } => *num_subcarriers,
        }
    }

    pub fn samples_per_symbol(&self) -> usize {
        match &self.kind {
            SchemeKind::SingleCarrier { pulse, .. } => pulse.samples_per_symbol(),
            SchemeKind::Ofdm { num_subcarriers, .. } => *num_subcarriers,
        }
    }

    pub fn kernel_len(&self) -> usize {
        match &self.kind {
            SchemeKind::SingleCarrier { pulse, .. } => pulse.len(),
            SchemeKind::Ofdm { num_subcarriers, .. } => *num_subcarriers,
        }
    }

    /// Bits carried by one symbol vector.
    pub fn bits_per_vector(&self) -> usize {
        self.constellation().bits_per_symbol() * self.symbol_dimension()
    }

    /// Expected waveform energy of one symbol vector for unit-energy
    /// constellation entries: the summed energy of all basis functions.
    pub fn symbol_energy(&self) -> f64 {
        match &self.kind {
            SchemeKind::SingleCarrier { pulse, .. } => pulse.energy(),
            SchemeKind::Ofdm { num_subcarriers, .. } => (*num_subcarriers * *num_subcarriers) as f64,
        }
    }

    /// Maps bits to symbol vectors; the bit count must fill whole vectors.
    pub fn map_bits(&self, bits: &[u8]) -> Result<SymbolFrame> {
        let per_vector = self.bits_per_vector();
        if bits.len() % per_vector != 0 {
            return Err(Error::LengthMismatch(format!(
                "{} bits do not fill whole {per_vector}-bit symbol vectors",
                bits.len()
            )));
        }
        let symbols: Vec<Complex64> = self.constellation().map_bits_to_symbols(bits)?;
        SymbolFrame::from_flat(self.symbol_dimension(), symbols)
    }

    pub fn demap(&self, frame: &SymbolFrame) -> Vec<u8> {
        self.constellation().demap_to_bits(frame.flat())
    }
}
