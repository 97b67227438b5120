use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::rng::{seeded, SeededRng};
use crate::schemes::Constellation;
use crate::synth::SynthGraph;

/// Paired (symbols, waveform) examples for kernel learning.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    examples: Vec<(SymbolFrame, IqBuffer)>,
    symbol_dimension: usize,
    samples_per_symbol: usize,
    kernel_len: usize,
}

impl TrainingSet {
    pub fn new(
        examples: Vec<(SymbolFrame, IqBuffer)>,
        symbol_dimension: usize,
        samples_per_symbol: usize,
        kernel_len: usize,
    ) -> Result<Self> {
        if symbol_dimension == 0 || samples_per_symbol == 0 || kernel_len == 0 {
            return Err(Error::InvalidArgument("N, L and K must all be positive".into()));
        }
        for (i, (frame, signal)) in examples.iter().enumerate() {
            if frame.dimension() != symbol_dimension {
                return Err(Error::DimensionMismatch {
                    expected: symbol_dimension,
                    found: frame.dimension(),
                });
            }
            if frame.is_empty() {
                return Err(Error::LengthMismatch(format!("example {i} has no symbols")));
            }
            let expected = (frame.num_vectors() - 1) * samples_per_symbol + kernel_len;
            if signal.len() != expected {
                return Err(Error::LengthMismatch(format!(
                    "example {i}: signal has {} samples, expected {expected}",
                    signal.len()
                )));
            }
        }
        Ok(Self {
            examples,
            symbol_dimension,
            samples_per_symbol,
            kernel_len,
        })
    }

    /// Draws i.i.d. constellation points for every entry of every symbol
    /// vector and records the generator's output (before post-ops).
    pub fn generate(
        generator: &SynthGraph,
        constellation: &Constellation,
        num_sequences: usize,
        symbols_per_sequence: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = generator.symbol_dimension();
        let mut rng: SeededRng = seeded(seed);
        let mut examples = Vec::with_capacity(num_sequences);
        for _ in 0..num_sequences {
            let data: Vec<Complex64> = (0..n * symbols_per_sequence)
                .map(|_| random_point(constellation, &mut rng))
                .collect();
            let frame = SymbolFrame::from_flat(n, data)?;
            let signal = generator.modulate_core(&frame)?;
            examples.push((frame, signal));
        }
        Self::new(examples, n, generator.samples_per_symbol(), generator.kernel_len())
    }

    pub fn examples(&self) -> &[(SymbolFrame, IqBuffer)] {
        &self.examples
    }

    pub fn symbol_dimension(&self) -> usize {
        self.symbol_dimension
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn total_vectors(&self) -> usize {
        self.examples.iter().map(|(f, _)| f.num_vectors()).sum()
    }

    pub fn total_samples(&self) -> usize {
        self.examples.iter().map(|(_, s)| s.len()).sum()
    }

    /// Splits off the last `count` examples (e.g. as a held-out set).
    pub fn split_tail(mut self, count: usize) -> Result<(Self, Self)> {
        if count >= self.examples.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot hold out {count} of {} examples",
                self.examples.len()
            )));
        }
        let tail = self.examples.split_off(self.examples.len() - count);
        let (n, l, k) = (self.symbol_dimension, self.samples_per_symbol, self.kernel_len);
        Ok((self, Self::new(tail, n, l, k)?))
    }

    /// Per-sample MSE of `graph` (before post-ops) against the targets.
    pub fn mse(&self, graph: &SynthGraph) -> Result<f64> {
        let mut sse = 0.0;
        for (frame, target) in &self.examples {
            let y = graph.modulate_core(frame)?;
            if y.len() != target.len() {
                return Err(Error::LengthMismatch("graph output length differs from target".into()));
            }
            sse += y.samples().iter().zip(target.samples()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        }
        Ok(sse / self.total_samples() as f64)
    }
}

fn random_point(c: &Constellation, rng: &mut SeededRng) -> Complex64 {
    use rand::Rng;
    c.point(rng.random_range(0..c.order()))
}

/// Default kernel length when learning an unknown signal: `2L` for single
/// carrier, `L` when the stride equals the symbol dimension (OFDM-like).
pub fn default_kernel_len(symbol_dimension: usize, samples_per_symbol: usize) -> usize {
    if symbol_dimension > 1 && symbol_dimension == samples_per_symbol {
        samples_per_symbol
    } else {
        2 * samples_per_symbol
    }
}
