//! Closed-form kernel fit.
//!
//! The template output is complex-linear in the basis functions:
//! `S[m] = Σ_t Σ_j s_tj φ_j[m - tL]`. Sample `m = pL + r` only touches taps
//! `k = r + qL`, so the normal equations split into `L` independent
//! Hermitian systems, one per output phase `r`, each over the unknowns
//! `φ_j[r + qL]`. All systems share one Gram matrix
//! `G[(q,j),(q',j')] = Σ_p conj(s_{p-q,j}) s_{p-q',j'}`, restricted to the
//! taps that exist for that phase. Real least squares over `(Re φ, Im φ)`
//! has the same minimizer, with twice the null-space dimension.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::TrainingSet;
use crate::error::{Error, Result};
use crate::synth::SynthGraph;

/// Relative eigenvalue floor below which a direction counts as null.
const RANK_TOL: f64 = 1e-10;

fn gram(data: &TrainingSet, blocks: usize) -> DMatrix<Complex64> {
    let n = data.symbol_dimension();
    let dim = blocks * n;
    let mut g = DMatrix::<Complex64>::zeros(dim, dim);
    for (frame, _) in data.examples() {
        let len = frame.num_vectors();
        for q in 0..blocks {
            for qq in 0..blocks {
                // p ranges over blocks where both p - q and p - qq are valid
                let lo = q.max(qq);
                let hi = (len + q.min(qq)).min(len + blocks);
                for p in lo..hi {
                    if p - q >= len || p - qq >= len {
                        continue;
                    }
                    let a = frame.vector(p - q);
                    let b = frame.vector(p - qq);
                    for (j, aj) in a.iter().enumerate() {
                        let ca = aj.conj();
                        for (jj, bj) in b.iter().enumerate() {
                            g[(q * n + j, qq * n + jj)] += ca * bj;
                        }
                    }
                }
            }
        }
    }
    g
}

fn rhs(data: &TrainingSet, phase: usize, taps: usize) -> DVector<Complex64> {
    let n = data.symbol_dimension();
    let l = data.samples_per_symbol();
    let mut b = DVector::<Complex64>::zeros(taps * n);
    for (frame, signal) in data.examples() {
        let y = signal.samples();
        let len = frame.num_vectors();
        let mut p = 0;
        while p * l + phase < y.len() {
            let target = y[p * l + phase];
            for q in 0..taps.min(p + 1) {
                if p - q < len {
                    for (j, s) in frame.vector(p - q).iter().enumerate() {
                        b[q * n + j] += s.conj() * target;
                    }
                }
            }
            p += 1;
        }
    }
    b
}

/// Exact MSE minimizer over the template kernels.
///
/// Returns the full four-channel template. Fails with
/// [`Error::DegenerateDataset`] when the design matrix is rank deficient.
pub fn fit_least_squares(data: &TrainingSet) -> Result<SynthGraph> {
    let n = data.symbol_dimension();
    let l = data.samples_per_symbol();
    let k = data.kernel_len();
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let blocks = k.div_ceil(l);
    let g = gram(data, blocks);

    let mut phi = vec![Complex64::new(0.0, 0.0); n * k];
    let mut null_dims = 0usize;
    let mut solutions = Vec::with_capacity(l.min(k));
    for phase in 0..l.min(k) {
        let taps = (k - phase).div_ceil(l);
        let dim = taps * n;
        let sub = g.view((0, 0), (dim, dim)).into_owned();
        let eig = sub.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let floor = RANK_TOL * max * dim as f64;
        let deficient = eig.eigenvalues.iter().filter(|&&v| v <= floor).count();
        null_dims += 2 * deficient;
        if deficient == 0 {
            solutions.push((phase, taps, eig));
        }
    }
    if null_dims > 0 {
        return Err(Error::DegenerateDataset {
            null_space_dim: null_dims,
        });
    }
    for (phase, taps, eig) in solutions {
        let b = rhs(data, phase, taps);
        let v = &eig.eigenvectors;
        let mut coeff = v.adjoint() * b;
        for (c, &lam) in coeff.iter_mut().zip(eig.eigenvalues.iter()) {
            *c /= lam;
        }
        let x = v * coeff;
        for q in 0..taps {
            for j in 0..n {
                phi[j * k + phase + q * l] = x[q * n + j];
            }
        }
    }
    graph_from_basis(l, n, k, &phi)
}

/// Template graph from complex basis kernels stored `[N][K]`.
pub(crate) fn graph_from_basis(stride: usize, n: usize, k: usize, phi: &[Complex64]) -> Result<SynthGraph> {
    let re: Vec<Vec<f64>> = (0..n).map(|j| phi[j * k..(j + 1) * k].iter().map(|z| z.re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..n).map(|j| phi[j * k..(j + 1) * k].iter().map(|z| z.im).collect()).collect();
    SynthGraph::template(stride, &re, &im)
}
