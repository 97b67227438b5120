//! Memoryless front-end (PA) models, a polynomial predistorter, and joint
//! fine-tuning of modulator kernels and predistorter coefficients.
//!
//! Chain: `v = modulate(frame)`, `u = pd(v)`, `y = fe(u)`. Both nonlinear
//! stages have the form `x · h(|x|)`, so their Jacobians are written in
//! terms of the partials with respect to the real and imaginary parts of
//! the input.

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{awgn, demodulate, evm_rms};
use crate::error::{Error, Result};
use crate::iq::{IqBuffer, SymbolFrame};
use crate::learning::{graph_from_basis, TrainReport, TrainingSet};
use crate::schemes::Scheme;
use crate::synth::SynthGraph;

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A fixed, differentiable sample-wise nonlinearity.
pub trait FrontEnd: Send + Sync {
    fn forward(&self, x: Complex64) -> Complex64;

    /// `(∂y/∂Re x, ∂y/∂Im x)`.
    fn jacobian(&self, x: Complex64) -> (Complex64, Complex64);

    fn apply(&self, signal: &IqBuffer) -> IqBuffer {
        let y = signal.samples().iter().map(|&x| self.forward(x)).collect();
        IqBuffer::from_trusted(y, signal.sample_rate_hz())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrontEndKind {
    /// AM/AM compression `x / (1 + (|x|/a_sat)^{2p})^{1/(2p)}`, phase preserved.
    RappAmAm { smoothness: f64, saturation: f64 },
    /// `Σ_k c_k x |x|^{2k}` over odd orders 1, 3, 5, ...
    OddPolynomial { coeffs: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontEndModel {
    pub kind: FrontEndKind,
    /// Always true during fine-tuning: the front end is not trained.
    pub fixed: bool,
}

impl FrontEndModel {
    pub fn rapp(smoothness: f64, saturation: f64) -> Result<Self> {
        if !(smoothness > 0.0 && smoothness.is_finite() && saturation > 0.0 && saturation.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Rapp parameters must be positive, got p={smoothness}, a_sat={saturation}"
            )));
        }
        Ok(Self {
            kind: FrontEndKind::RappAmAm { smoothness, saturation },
            fixed: true,
        })
    }

    /// Rapp model saturating at `factor` times the RMS amplitude of `reference`.
    pub fn rapp_relative(smoothness: f64, factor: f64, reference: &IqBuffer) -> Result<Self> {
        Self::rapp(smoothness, factor * reference.mean_power().sqrt())
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("polynomial needs finite coefficients".into()));
        }
        Ok(Self {
            kind: FrontEndKind::OddPolynomial { coeffs },
            fixed: true,
        })
    }

    pub fn identity() -> Self {
        Self::polynomial(vec![Complex64::new(1.0, 0.0)]).expect("unit coefficient is valid")
    }
}

/// Value and Jacobian of `x · p(|x|²)` with `p(q) = Σ c_k q^k`.
fn odd_poly(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64, Complex64) {
    let q = x.norm_sqr();
    let mut h = ZERO;
    let mut dh = ZERO;
    let mut qk = 1.0;
    for (k, c) in coeffs.iter().enumerate() {
        h += c * qk;
        if k + 1 < coeffs.len() {
            dh += coeffs[k + 1] * (qk * (k + 1) as f64);
        }
        qk *= q;
    }
    let y = x * h;
    (y, h + x * dh * (2.0 * x.re), J * h + x * dh * (2.0 * x.im))
}

impl FrontEnd for FrontEndModel {
    fn forward(&self, x: Complex64) -> Complex64 {
        match &self.kind {
            FrontEndKind::RappAmAm { smoothness: p, saturation: a } => {
                let u = (x.norm() / a).powf(2.0 * p);
                x * (1.0 + u).powf(-1.0 / (2.0 * p))
            }
            FrontEndKind::OddPolynomial { coeffs } => odd_poly(coeffs, x).0,
        }
    }

    fn jacobian(&self, x: Complex64) -> (Complex64, Complex64) {
        match &self.kind {
            FrontEndKind::RappAmAm { smoothness: p, saturation: a } => {
                let r = x.norm();
                let u = (r / a).powf(2.0 * p);
                let g = (1.0 + u).powf(-1.0 / (2.0 * p));
                if r == 0.0 {
                    return (Complex64::new(g, 0.0), J * g);
                }
                // g'(r)/r = −(1 + u)^{−1/(2p) − 1} · r^{2p−2} / a^{2p}
                let dg_over_r = -(1.0 + u).powf(-1.0 / (2.0 * p) - 1.0) * u / (r * r);
                (g + x * (dg_over_r * x.re), J * g + x * (dg_over_r * x.im))
            }
            FrontEndKind::OddPolynomial { coeffs } => {
                let (_, a, b) = odd_poly(coeffs, x);
                (a, b)
            }
        }
    }
}

pub fn apply_front_end(model: &FrontEndModel, signal: &IqBuffer) -> IqBuffer {
    model.apply(signal)
}

/// `y = c1·x + c3·x|x|² + c5·x|x|⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predistorter {
    pub coeffs: [Complex64; 3],
}

impl Default for Predistorter {
    fn default() -> Self {
        Self::identity()
    }
}

impl Predistorter {
    pub fn identity() -> Self {
        Self {
            coeffs: [Complex64::new(1.0, 0.0), ZERO, ZERO],
        }
    }

    pub fn new(c1: Complex64, c3: Complex64, c5: Complex64) -> Result<Self> {
        if ![c1, c3, c5].iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("predistorter coefficients must be finite".into()));
        }
        Ok(Self { coeffs: [c1, c3, c5] })
    }

    pub fn forward(&self, x: Complex64) -> Complex64 {
        odd_poly(&self.coeffs, x).0
    }

    pub fn apply(&self, signal: &IqBuffer) -> IqBuffer {
        let y = signal.samples().iter().map(|&x| self.forward(x)).collect();
        IqBuffer::from_trusted(y, signal.sample_rate_hz())
    }

    /// Euclidean distance between coefficient vectors.
    pub fn distance(&self, other: &Predistorter) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn apply_predistorter(pd: &Predistorter, signal: &IqBuffer) -> IqBuffer {
    pd.apply(signal)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineTuneConfig {
    /// Gradient step for the kernels, on the per-symbol-vector objective.
    pub learning_rate: f64,
    /// Fraction of the damped Gauss-Newton step taken on the predistorter.
    pub pd_step: f64,
    pub epochs: usize,
    /// Examples per step; `0` means full batch.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for FineTuneConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            pd_step: 0.5,
            epochs: 60,
            batch_size: 0,
            seed: 0,
        }
    }
}

/// Per-batch sums: squared error, kernel gradient `Σ g_v conj(s)`,
/// predistorter gradient and Gauss-Newton matrix over the six real parameters.
struct ChainTerms {
    sse: f64,
    kernel_grad: Vec<Complex64>,
    pd_grad: Vector6<f64>,
    pd_gn: Matrix6<f64>,
}

impl ChainTerms {
    fn zeros(params: usize) -> Self {
        Self {
            sse: 0.0,
            kernel_grad: vec![ZERO; params],
            pd_grad: Vector6::zeros(),
            pd_gn: Matrix6::zeros(),
        }
    }

    fn add(&mut self, other: ChainTerms) {
        self.sse += other.sse;
        for (a, b) in self.kernel_grad.iter_mut().zip(other.kernel_grad) {
            *a += b;
        }
        self.pd_grad += other.pd_grad;
        self.pd_gn += other.pd_gn;
    }
}

fn chain_terms(
    graph: &SynthGraph,
    pd: &Predistorter,
    fe: &FrontEndModel,
    frame: &SymbolFrame,
    target: &IqBuffer,
) -> Result<ChainTerms> {
    let (l, k) = (graph.samples_per_symbol(), graph.kernel_len());
    let v = graph.modulate_core(frame)?;
    let mut terms = ChainTerms::zeros(graph.symbol_dimension() * k);
    let mut g_v = Vec::with_capacity(v.len());
    for (&vn, &d) in v.samples().iter().zip(target.samples()) {
        let (u, p_re, p_im) = odd_poly(&pd.coeffs, vn);
        let y = fe.forward(u);
        let (a, b) = fe.jacobian(u);
        let e = y - d;
        terms.sse += e.norm_sqr();
        // ∂/∂Re u + i ∂/∂Im u of |e|²/2
        let g_u = Complex64::new((e.conj() * a).re, (e.conj() * b).re);
        g_v.push(Complex64::new((g_u.conj() * p_re).re, (g_u.conj() * p_im).re));
        // ∂y/∂θ for θ = (Re c_k, Im c_k): ∂u/∂θ = b_k or i·b_k with b_k = v|v|^{2k}
        let q = vn.norm_sqr();
        let mut cols = [ZERO; 6];
        let mut bk = vn;
        for i in 0..3 {
            for (slot, du) in [(2 * i, bk), (2 * i + 1, J * bk)] {
                cols[slot] = a * du.re + b * du.im;
            }
            bk *= q;
        }
        for r in 0..6 {
            terms.pd_grad[r] += (e.conj() * cols[r]).re;
            for c in r..6 {
                terms.pd_gn[(r, c)] += (cols[r].conj() * cols[c]).re;
            }
        }
    }
    for r in 0..6 {
        for c in 0..r {
            terms.pd_gn[(r, c)] = terms.pd_gn[(c, r)];
        }
    }
    for (t, s) in frame.vectors().enumerate() {
        let window = &g_v[t * l..t * l + k];
        for (j, sj) in s.iter().enumerate() {
            let c = sj.conj();
            for (g, w) in terms.kernel_grad[j * k..(j + 1) * k].iter_mut().zip(window) {
                *g += w * c;
            }
        }
    }
    Ok(terms)
}

fn batch_chain_terms(
    data: &TrainingSet,
    graph: &SynthGraph,
    pd: &Predistorter,
    fe: &FrontEndModel,
    indices: &[usize],
) -> Result<ChainTerms> {
    let parts: Vec<Result<ChainTerms>> = indices
        .par_iter()
        .map(|&i| {
            let (frame, target) = &data.examples()[i];
            chain_terms(graph, pd, fe, frame, target)
        })
        .collect();
    let mut total = ChainTerms::zeros(data.symbol_dimension() * data.kernel_len());
    for p in parts {
        total.add(p?);
    }
    Ok(total)
}

/// Chain objective `Σ|fe(pd(v)) − d|² / T` (T symbol vectors) and its
/// gradients with respect to the complex kernels `[N][K]` and the three
/// predistorter coefficients, each as `∂/∂Re + i ∂/∂Im`.
pub fn chain_loss_and_gradient(
    data: &TrainingSet,
    basis: &[Vec<Complex64>],
    pd: &Predistorter,
    fe: &FrontEndModel,
) -> Result<(f64, Vec<Vec<Complex64>>, [Complex64; 3])> {
    let (n, k) = (data.symbol_dimension(), data.kernel_len());
    if basis.len() != n || basis.iter().any(|b| b.len() != k) {
        return Err(Error::InvalidArgument(format!("basis must be {n} kernels of {k} taps")));
    }
    let flat: Vec<Complex64> = basis.iter().flatten().copied().collect();
    let graph = graph_from_basis(data.samples_per_symbol(), n, k, &flat)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let t = batch_chain_terms(data, &graph, pd, fe, &all)?;
    let scale = 2.0 / data.total_vectors() as f64;
    let kernels = t.kernel_grad.chunks(k).map(|c| c.iter().map(|g| g * scale).collect()).collect();
    let g = t.pd_grad * scale;
    let pd_grad = [
        Complex64::new(g[0], g[1]),
        Complex64::new(g[2], g[3]),
        Complex64::new(g[4], g[5]),
    ];
    Ok((t.sse / data.total_vectors() as f64, kernels, pd_grad))
}

/// Jointly tunes kernels (gradient descent) and predistorter coefficients
/// (damped Gauss-Newton) so that `fe(pd(modulate(frame)))` matches the ideal
/// targets. The front end stays fixed. Post-ops of `graph` are carried over
/// but do not take part in training.
pub fn fine_tune(
    graph: &SynthGraph,
    pd: &Predistorter,
    fe: &FrontEndModel,
    data: &TrainingSet,
    config: &FineTuneConfig,
) -> Result<(SynthGraph, Predistorter, TrainReport)> {
    if !fe.fixed {
        return Err(Error::InvalidArgument("front-end model must be fixed during fine-tuning".into()));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite() && (0.0..=1.0).contains(&config.pd_step)) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be non-negative and pd_step in [0, 1], got {} and {}",
            config.learning_rate, config.pd_step
        )));
    }
    if data.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let (n, l, k) = (data.symbol_dimension(), data.samples_per_symbol(), data.kernel_len());
    if graph.symbol_dimension() != n || graph.samples_per_symbol() != l || graph.kernel_len() != k {
        return Err(Error::InvalidArgument(format!(
            "graph (N={}, L={}, K={}) does not match the dataset (N={n}, L={l}, K={k})",
            graph.symbol_dimension(),
            graph.samples_per_symbol(),
            graph.kernel_len()
        )));
    }
    let basis = graph
        .basis()
        .ok_or_else(|| Error::InvalidLayer("graph is not in template or real-filter form".into()))?;
    let mut phi: Vec<Complex64> = basis.into_iter().flatten().collect();
    let mut pd = *pd;
    let total_samples = data.total_samples() as f64;
    let mut current = graph.clone();
    let mut history = vec![chain_mse(data, &current, &pd, fe)?];
    if config.epochs == 0 {
        let initial = history[0];
        return Ok((
            current,
            pd,
            TrainReport {
                final_mse: initial,
                epochs_run: 0,
                mse_history: history,
            },
        ));
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch = if config.batch_size == 0 { data.len() } else { config.batch_size };
    let mut rng = crate::rng::seeded(config.seed);
    for epoch in 1..=config.epochs {
        if batch < data.len() {
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            let t = batch_chain_terms(data, &current, &pd, fe, chunk).map_err(|e| diverged(e, epoch))?;
            if !t.sse.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let vectors: usize = chunk.iter().map(|&i| data.examples()[i].0.num_vectors()).sum();
            let scale = config.learning_rate * 2.0 / vectors as f64;
            for (p, g) in phi.iter_mut().zip(&t.kernel_grad) {
                *p -= g * scale;
            }
            pd = gauss_newton_step(&pd, &t, config.pd_step).ok_or(Error::Diverged { epoch })?;
            current = graph_from_basis(l, n, k, &phi)
                .and_then(|g| g.with_post_ops(graph.post_ops().to_vec()))
                .map_err(|e| diverged(e, epoch))?;
        }
        let t = batch_chain_terms(data, &current, &pd, fe, &(0..data.len()).collect::<Vec<_>>())
            .map_err(|e| diverged(e, epoch))?;
        let mse = t.sse / total_samples;
        if !mse.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(mse);
    }
    let final_mse = *history.last().expect("history is non-empty");
    Ok((
        current,
        pd,
        TrainReport {
            final_mse,
            epochs_run: config.epochs,
            mse_history: history,
        },
    ))
}

/// Levenberg-style damping relative to the Gauss-Newton diagonal.
const GN_DAMPING: f64 = 1e-6;

fn gauss_newton_step(pd: &Predistorter, t: &ChainTerms, fraction: f64) -> Option<Predistorter> {
    if fraction == 0.0 {
        return Some(*pd);
    }
    let mut h = t.pd_gn;
    let scale = (0..6).map(|i| h[(i, i)]).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Some(*pd);
    }
    for i in 0..6 {
        h[(i, i)] += GN_DAMPING * scale;
    }
    let delta = h.cholesky()?.solve(&t.pd_grad);
    let mut c = pd.coeffs;
    for (i, ci) in c.iter_mut().enumerate() {
        *ci -= Complex64::new(delta[2 * i], delta[2 * i + 1]) * fraction;
    }
    Predistorter::new(c[0], c[1], c[2]).ok()
}

fn diverged(err: Error, epoch: usize) -> Error {
    match err {
        Error::NonFinite { .. } => Error::Diverged { epoch },
        other => other,
    }
}

/// Per-sample MSE of the full chain against the dataset targets.
pub fn chain_mse(data: &TrainingSet, graph: &SynthGraph, pd: &Predistorter, fe: &FrontEndModel) -> Result<f64> {
    let mut sse = 0.0;
    for (frame, target) in data.examples() {
        let y = fe.apply(&pd.apply(&graph.modulate_core(frame)?));
        sse += y.samples().iter().zip(target.samples()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    }
    Ok(sse / data.total_samples() as f64)
}

/// Transmit chain used to measure EVM: modulator, optional predistorter,
/// optional front end.
#[derive(Debug, Clone, Copy)]
pub struct Chain<'a> {
    pub graph: &'a SynthGraph,
    pub predistorter: Option<&'a Predistorter>,
    pub front_end: Option<&'a FrontEndModel>,
}

impl Chain<'_> {
    pub fn transmit(&self, frame: &SymbolFrame) -> Result<IqBuffer> {
        let mut x = self.graph.modulate(frame)?;
        if let Some(pd) = self.predistorter {
            x = pd.apply(&x);
        }
        if let Some(fe) = self.front_end {
            x = fe.apply(&x);
        }
        Ok(x)
    }

    /// RMS EVM (percent) after AWGN of `noise_variance` per sample and the
    /// scheme's receiver, against the transmitted symbols.
    pub fn evm(&self, scheme: &Scheme, frame: &SymbolFrame, noise_variance: f64, seed: u64) -> Result<f64> {
        let rx = awgn(&self.transmit(frame)?, noise_variance, seed)?;
        evm_rms(&demodulate(scheme, &rx)?, frame)
    }
}
