//! Gradient-descent kernel training.
//!
//! The step minimizes `J = Σ|e|² / T`, the squared residual per symbol
//! vector over the batch (`T` vectors), so the curvature along each real
//! parameter is about `2·E|s|²` regardless of `L`. Reported MSE is per
//! complex sample. With complex basis `φ_j = a_j + i b_j` the gradient is
//! `∂J/∂a + i ∂J/∂b = (2/T) Σ_t e[tL + k] conj(s_tj)`.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::least_squares::graph_from_basis;
use super::TrainingSet;
use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::rng::{seeded, uniform_range};
use crate::synth::SynthGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Examples per step; `0` or anything ≥ the dataset size means full batch.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            epochs: 500,
            batch_size: 0,
            seed: 0,
        }
    }
}

impl GradientConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_mse: f64,
    pub epochs_run: usize,
    /// Per-sample MSE before training followed by one entry per epoch.
    pub mse_history: Vec<f64>,
}

/// Complex basis `[N][K]` with each real part drawn from
/// uniform(−1/√K, 1/√K), real then imaginary, j-major.
pub(crate) fn random_basis(n: usize, k: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = seeded(seed);
    let bound = 1.0 / (k as f64).sqrt();
    (0..n * k)
        .map(|_| {
            let re = uniform_range(&mut rng, -bound, bound);
            let im = uniform_range(&mut rng, -bound, bound);
            Complex64::new(re, im)
        })
        .collect()
}

/// Sum of squared residuals and unnormalized gradient `Σ_t e[tL+k] conj(s_tj)`.
fn example_terms(
    graph: &SynthGraph,
    frame: &SymbolFrame,
    target: &IqBuffer,
) -> Result<(f64, Vec<Complex64>)> {
    let n = graph.symbol_dimension();
    let l = graph.samples_per_symbol();
    let k = graph.kernel_len();
    let y = graph.modulate_core(frame)?;
    let e: Vec<Complex64> = y.samples().iter().zip(target.samples()).map(|(a, b)| a - b).collect();
    let sse = e.iter().map(|z| z.norm_sqr()).sum();
    let mut grad = vec![Complex64::new(0.0, 0.0); n * k];
    for (t, s) in frame.vectors().enumerate() {
        let window = &e[t * l..t * l + k];
        for (j, sj) in s.iter().enumerate() {
            if *sj == Complex64::new(0.0, 0.0) {
                continue;
            }
            let c = sj.conj();
            for (g, ek) in grad[j * k..(j + 1) * k].iter_mut().zip(window) {
                *g += ek * c;
            }
        }
    }
    Ok((sse, grad))
}

/// Loss terms over a subset of examples, reduced in index order.
fn batch_terms(
    data: &TrainingSet,
    graph: &SynthGraph,
    indices: &[usize],
) -> Result<(f64, Vec<Complex64>, usize, usize)> {
    let parts: Vec<Result<(f64, Vec<Complex64>)>> = indices
        .par_iter()
        .map(|&i| {
            let (frame, target) = &data.examples()[i];
            example_terms(graph, frame, target)
        })
        .collect();
    let mut sse = 0.0;
    let mut grad = vec![Complex64::new(0.0, 0.0); data.symbol_dimension() * data.kernel_len()];
    for p in parts {
        let (s, g) = p?;
        sse += s;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    let vectors = indices.iter().map(|&i| data.examples()[i].0.num_vectors()).sum();
    let samples = indices.iter().map(|&i| data.examples()[i].1.len()).sum();
    Ok((sse, grad, vectors, samples))
}

/// Training objective `J` (squared residual per symbol vector) and its
/// gradient, for a complex basis `[N][K]`. `grad[j][k] = ∂J/∂Re φ + i ∂J/∂Im φ`.
pub fn loss_and_gradient(data: &TrainingSet, basis: &[Vec<Complex64>]) -> Result<(f64, Vec<Vec<Complex64>>)> {
    let n = data.symbol_dimension();
    let k = data.kernel_len();
    if basis.len() != n || basis.iter().any(|b| b.len() != k) {
        return Err(Error::InvalidArgument(format!("basis must be {n} kernels of {k} taps")));
    }
    let flat: Vec<Complex64> = basis.iter().flatten().copied().collect();
    let graph = graph_from_basis(data.samples_per_symbol(), n, k, &flat)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let (sse, grad, vectors, _) = batch_terms(data, &graph, &all)?;
    let scale = 2.0 / vectors as f64;
    Ok((
        sse / vectors as f64,
        grad.chunks(k).map(|c| c.iter().map(|g| g * scale).collect()).collect(),
    ))
}

/// Gradient descent from a seeded random start.
pub fn fit_gradient(data: &TrainingSet, config: &GradientConfig) -> Result<(SynthGraph, TrainReport)> {
    let phi = random_basis(data.symbol_dimension(), data.kernel_len(), config.seed);
    fit_gradient_from(data, config, phi)
}

pub(crate) fn fit_gradient_from(
    data: &TrainingSet,
    config: &GradientConfig,
    mut phi: Vec<Complex64>,
) -> Result<(SynthGraph, TrainReport)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let (n, l, k) = (data.symbol_dimension(), data.samples_per_symbol(), data.kernel_len());
    let total_samples = data.total_samples() as f64;
    let full_batch = config.batch_size == 0 || config.batch_size >= data.len();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle_rng = seeded(config.seed ^ 0x5eed_5eed_5eed_5eed);

    let mut graph = graph_from_basis(l, n, k, &phi)?;
    let mut history = Vec::with_capacity(config.epochs + 1);
    // In full-batch mode the loss at the current parameters comes for free
    // from the gradient pass, so history entries are recorded lazily.
    let mut pending: Option<(f64, Vec<Complex64>, usize)> = None;
    if full_batch {
        let (sse, grad, vectors, _) = batch_terms(data, &graph, &order)?;
        history.push(sse / total_samples);
        pending = Some((sse, grad, vectors));
    } else {
        history.push(data.mse(&graph)?);
    }

    for epoch in 1..=config.epochs {
        if full_batch {
            let (_, grad, vectors) = pending.take().expect("full-batch terms are kept between epochs");
            step(&mut phi, &grad, config.learning_rate * 2.0 / vectors as f64);
            graph = graph_from_basis(l, n, k, &phi).map_err(|e| diverged(e, epoch))?;
            let (sse, grad, vectors, _) = batch_terms(data, &graph, &order).map_err(|e| diverged(e, epoch))?;
            let mse = sse / total_samples;
            if !mse.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            history.push(mse);
            pending = Some((sse, grad, vectors));
        } else {
            order.shuffle(&mut shuffle_rng);
            for batch in order.chunks(config.batch_size) {
                let (sse, grad, vectors, _) = batch_terms(data, &graph, batch).map_err(|e| diverged(e, epoch))?;
                if !sse.is_finite() {
                    return Err(Error::Diverged { epoch });
                }
                step(&mut phi, &grad, config.learning_rate * 2.0 / vectors as f64);
                graph = graph_from_basis(l, n, k, &phi).map_err(|e| diverged(e, epoch))?;
            }
            let mse = data.mse(&graph).map_err(|e| diverged(e, epoch))?;
            if !mse.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            history.push(mse);
        }
    }
    let final_mse = *history.last().expect("history holds the initial MSE");
    Ok((
        graph,
        TrainReport {
            final_mse,
            epochs_run: config.epochs,
            mse_history: history,
        },
    ))
}

/// Overflowing kernels surface as non-finite samples; report them as divergence.
fn diverged(err: Error, epoch: usize) -> Error {
    match err {
        Error::NonFinite { .. } => Error::Diverged { epoch },
        other => other,
    }
}

fn step(phi: &mut [Complex64], grad: &[Complex64], scale: f64) {
    if scale == 0.0 {
        return;
    }
    for (p, g) in phi.iter_mut().zip(grad) {
        *p -= g * scale;
    }
}
