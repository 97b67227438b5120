//! Monte Carlo bit error rate sweeps.
//!
//! Each Eb/N0 point is split into blocks of whole symbol vectors. Block `b`
//! of point `p` draws its bits from `derive_seed(seed, [p, b, 0])` and its
//! noise from `derive_seed(seed, [p, b, 1])`, so the outcome is independent
//! of how rayon schedules blocks, and the engine and reference transmitters
//! see identical bits and noise.

use rayon::prelude::*;

use super::awgn::{awgn, SnrSpec};
use super::demod::demodulate;
use super::reference::reference_modulate;
use super::theory::theoretical_ber;
use crate::error::Result;
use crate::iq::{IqBuffer, SymbolFrame};
use crate::rng::{derive_seed, random_bits, seeded};
use crate::schemes::Scheme;
use crate::synth::SynthGraph;

const BITS_PER_BLOCK: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub bit_errors: u64,
    pub bits_tested: u64,
    pub ber: f64,
    /// Normal-approximation 95% half-width, `1.96 √(p(1−p)/n)`.
    pub ci95_halfwidth: f64,
    pub theory: f64,
}

impl BerPoint {
    fn new(ebn0_db: f64, bit_errors: u64, bits_tested: u64, theory: f64) -> Self {
        let ber = bit_errors as f64 / bits_tested as f64;
        Self {
            ebn0_db,
            bit_errors,
            bits_tested,
            ber,
            ci95_halfwidth: 1.96 * (ber * (1.0 - ber) / bits_tested as f64).sqrt(),
            theory,
        }
    }

    /// Standard deviation of the estimate if the theoretical rate is true.
    pub fn theory_sigma(&self) -> f64 {
        (self.theory * (1.0 - self.theory) / self.bits_tested as f64).sqrt()
    }
}

/// Which transmitter generates the waveform.
#[derive(Debug, Clone)]
pub enum Transmitter {
    Graph(SynthGraph),
    Reference,
}

impl Transmitter {
    fn modulate(&self, scheme: &Scheme, frame: &SymbolFrame) -> Result<IqBuffer> {
        match self {
            Transmitter::Graph(g) => g.modulate(frame),
            Transmitter::Reference => reference_modulate(scheme, frame),
        }
    }
}

struct Block {
    point: usize,
    index: usize,
    vectors: usize,
}

fn blocks(scheme: &Scheme, points: usize, bits_per_point: u64) -> Vec<Block> {
    let bpv = scheme.bits_per_vector();
    let total_vectors = (bits_per_point as usize).div_ceil(bpv).max(1);
    let per_block = (BITS_PER_BLOCK / bpv).max(1);
    let mut out = Vec::new();
    for point in 0..points {
        let mut left = total_vectors;
        let mut index = 0;
        while left > 0 {
            let vectors = left.min(per_block);
            out.push(Block { point, index, vectors });
            left -= vectors;
            index += 1;
        }
    }
    out
}

/// Transmitted and decided bits for one block.
fn run_block(
    scheme: &Scheme,
    tx: &Transmitter,
    ebn0_db: f64,
    block: &Block,
    seed: u64,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let coords = |stream: u64| [block.point as u64, block.index as u64, stream];
    let bits = random_bits(
        &mut seeded(derive_seed(seed, &coords(0))),
        block.vectors * scheme.bits_per_vector(),
    );
    let frame = scheme.map_bits(&bits)?;
    let clean = tx.modulate(scheme, &frame)?;
    let spec = SnrSpec::ebn0(ebn0_db, scheme.bits_per_vector(), scheme.samples_per_symbol());
    let noisy = awgn(&clean, spec.noise_variance(scheme.symbol_energy()), derive_seed(seed, &coords(1)))?;
    let decided = scheme.demap(&demodulate(scheme, &noisy)?);
    Ok((bits, decided))
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// BER at each Eb/N0 point with at least `bits_per_point` bits each.
pub fn ber_sweep_with(
    scheme: &Scheme,
    tx: &Transmitter,
    ebn0_points: &[f64],
    bits_per_point: u64,
    seed: u64,
) -> Result<Vec<BerPoint>> {
    let jobs = blocks(scheme, ebn0_points.len(), bits_per_point);
    let results: Vec<Result<(usize, u64, u64)>> = jobs
        .par_iter()
        .map(|b| {
            let (sent, got) = run_block(scheme, tx, ebn0_points[b.point], b, seed)?;
            Ok((b.point, count_errors(&sent, &got), sent.len() as u64))
        })
        .collect();
    let mut tally = vec![(0u64, 0u64); ebn0_points.len()];
    for r in results {
        let (p, e, n) = r?;
        tally[p].0 += e;
        tally[p].1 += n;
    }
    Ok(ebn0_points
        .iter()
        .zip(tally)
        .map(|(&db, (e, n))| BerPoint::new(db, e, n, theoretical_ber(scheme.constellation(), db)))
        .collect())
}

/// BER sweep through the scheme's synthesis graph.
pub fn ber_sweep(scheme: &Scheme, ebn0_points: &[f64], bits_per_point: u64, seed: u64) -> Result<Vec<BerPoint>> {
    ber_sweep_with(scheme, &Transmitter::Graph(scheme.graph()), ebn0_points, bits_per_point, seed)
}

/// Engine path versus direct-form path at identical seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComparison {
    pub graph: BerPoint,
    pub reference: BerPoint,
    /// Bits whose decisions differ between the two paths.
    pub differing_decisions: u64,
}

pub fn compare_paths(
    scheme: &Scheme,
    graph: &SynthGraph,
    ebn0_points: &[f64],
    bits_per_point: u64,
    seed: u64,
) -> Result<Vec<PathComparison>> {
    let jobs = blocks(scheme, ebn0_points.len(), bits_per_point);
    let g = Transmitter::Graph(graph.clone());
    let results: Vec<Result<(usize, u64, u64, u64, u64)>> = jobs
        .par_iter()
        .map(|b| {
            let db = ebn0_points[b.point];
            let (sent, via_graph) = run_block(scheme, &g, db, b, seed)?;
            let (_, via_ref) = run_block(scheme, &Transmitter::Reference, db, b, seed)?;
            Ok((
                b.point,
                count_errors(&sent, &via_graph),
                count_errors(&sent, &via_ref),
                count_errors(&via_graph, &via_ref),
                sent.len() as u64,
            ))
        })
        .collect();
    let mut tally = vec![(0u64, 0u64, 0u64, 0u64); ebn0_points.len()];
    for r in results {
        let (p, eg, er, d, n) = r?;
        let t = &mut tally[p];
        t.0 += eg;
        t.1 += er;
        t.2 += d;
        t.3 += n;
    }
    Ok(ebn0_points
        .iter()
        .zip(tally)
        .map(|(&db, (eg, er, d, n))| {
            let theory = theoretical_ber(scheme.constellation(), db);
            PathComparison {
                graph: BerPoint::new(db, eg, n, theory),
                reference: BerPoint::new(db, er, n, theory),
                differing_decisions: d,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_at_zero_db() {
        let s = Scheme::from_id("pam2-rect").unwrap();
        let p = &ber_sweep(&s, &[0.0], 200_000, 3).unwrap()[0];
        assert!((p.theory - 7.865e-2).abs() < 1e-4);
        assert!((p.ber - p.theory).abs() < 3.0 * p.theory_sigma(), "{p:?}");
    }

    #[test]
    fn sweep_is_deterministic_and_monotone() {
        let s = Scheme::from_id("qpsk-halfsine").unwrap();
        let a = ber_sweep(&s, &[0.0, 2.0, 4.0, 6.0], 100_000, 7).unwrap();
        let b = ber_sweep(&s, &[0.0, 2.0, 4.0, 6.0], 100_000, 7).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!(w[1].ber <= w[0].ber + w[0].ci95_halfwidth + w[1].ci95_halfwidth);
        }
    }

    #[test]
    fn bits_per_point_is_rounded_up_to_whole_vectors() {
        let s = Scheme::from_id("qam16-rrc").unwrap();
        let p = &ber_sweep(&s, &[10.0], 10_001, 1).unwrap()[0];
        assert_eq!(p.bits_tested, 10_004);
    }
}
