//! The modulator template: a grouped, strided transposed convolution
//! followed by a fixed two-row combine layer.
//!
//! With symbol vectors split into `2N` real channels (real parts then
//! imaginary parts), group 0 sees the real parts and group 1 the imaginary
//! parts. The full template has four output channels
//!
//! ```text
//! o0 = Σ Re{s}·Re{φ}    o1 = Σ Re{s}·Im{φ}
//! o2 = Σ Im{s}·Re{φ}    o3 = Σ Im{s}·Im{φ}
//! ```
//!
//! and the combine rows `[+1, 0, 0, -1]` / `[0, +1, +1, 0]` produce
//! `I = o0 - o3`, `Q = o1 + o2`. When every `Im{φ}` kernel is zero the
//! template collapses to two output channels that are already I and Q.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::{merge_re_im, split_re_im, IqBuffer, RealTensor, SymbolFrame};
use crate::protocols::PostOp;

/// Combine weights of the full template.
pub const TEMPLATE_COMBINE: [[f64; 4]; 2] = [[1.0, 0.0, 0.0, -1.0], [0.0, 1.0, 1.0, 0.0]];

/// 1-D transposed convolution with grouped channels.
///
/// Kernels are stored `[out_channels][in_channels / groups][kernel_len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransposedConvLayer {
    in_channels: usize,
    out_channels: usize,
    groups: usize,
    stride: usize,
    kernel_len: usize,
    kernels: Vec<f64>,
}

impl TransposedConvLayer {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        groups: usize,
        stride: usize,
        kernel_len: usize,
        kernels: Vec<f64>,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || groups == 0 {
            return Err(Error::InvalidLayer("channel and group counts must be positive".into()));
        }
        if in_channels % groups != 0 || out_channels % groups != 0 {
            return Err(Error::InvalidLayer(format!(
                "{in_channels} input / {out_channels} output channels do not divide into {groups} groups"
            )));
        }
        if stride == 0 {
            return Err(Error::InvalidLayer("stride must be at least 1".into()));
        }
        if kernel_len == 0 {
            return Err(Error::InvalidLayer("kernel length must be at least 1".into()));
        }
        let expected = out_channels * (in_channels / groups) * kernel_len;
        if kernels.len() != expected {
            return Err(Error::InvalidLayer(format!(
                "kernel tensor has {} values, expected {expected}",
                kernels.len()
            )));
        }
        if let Some(i) = kernels.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self {
            in_channels,
            out_channels,
            groups,
            stride,
            kernel_len,
            kernels,
        })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn group_in_channels(&self) -> usize {
        self.in_channels / self.groups
    }

    /// The flat kernel tensor.
    pub fn kernels(&self) -> &[f64] {
        &self.kernels
    }

    /// Kernel connecting output `o` to group-local input `c`.
    pub fn kernel(&self, o: usize, c: usize) -> &[f64] {
        let start = (o * self.group_in_channels() + c) * self.kernel_len;
        &self.kernels[start..start + self.kernel_len]
    }

    pub fn output_len(&self, seq_len: usize) -> usize {
        if seq_len == 0 {
            0
        } else {
            (seq_len - 1) * self.stride + self.kernel_len
        }
    }

    /// Overlap-add synthesis. `output[o][t*stride + k] += kernel[o][c][k] * input[c][t]`,
    /// accumulated output channel by output channel, then input channel, then time.
    pub fn forward(&self, input: &RealTensor) -> Result<RealTensor> {
        if input.channels() != self.in_channels {
            return Err(Error::ChannelMismatch {
                expected: self.in_channels,
                found: input.channels(),
            });
        }
        let seq_len = input.len();
        let mut out = RealTensor::zeros(self.out_channels, self.output_len(seq_len));
        let per_group_in = self.group_in_channels();
        let per_group_out = self.out_channels / self.groups;
        for o in 0..self.out_channels {
            let g = o / per_group_out;
            let dst = out.row_mut(o);
            for cl in 0..per_group_in {
                let x = input.row(g * per_group_in + cl);
                let w = self.kernel(o, cl);
                for (t, &xv) in x.iter().enumerate() {
                    if xv == 0.0 {
                        continue;
                    }
                    let base = t * self.stride;
                    for (d, &wk) in dst[base..base + self.kernel_len].iter_mut().zip(w) {
                        *d += wk * xv;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Fully-connected layer mapping the conv outputs onto the I and Q rails.
#[derive(Debug, Clone, PartialEq)]
pub struct CombineLayer {
    weights: [Vec<f64>; 2],
    enabled: bool,
}

impl CombineLayer {
    pub fn template() -> Self {
        Self {
            weights: [TEMPLATE_COMBINE[0].to_vec(), TEMPLATE_COMBINE[1].to_vec()],
            enabled: true,
        }
    }

    pub fn disabled() -> Self {
        Self {
            weights: [Vec::new(), Vec::new()],
            enabled: false,
        }
    }

    pub fn new(weights: [Vec<f64>; 2]) -> Result<Self> {
        if weights[0].len() != weights[1].len() || weights[0].is_empty() {
            return Err(Error::InvalidLayer("combine rows must be non-empty and equal length".into()));
        }
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::InvalidLayer("combine weights must be finite".into()));
        }
        Ok(Self {
            weights,
            enabled: true,
        })
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn in_channels(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self) -> &[Vec<f64>; 2] {
        &self.weights
    }

    pub fn is_template(&self) -> bool {
        self.enabled
            && self.weights[0] == TEMPLATE_COMBINE[0]
            && self.weights[1] == TEMPLATE_COMBINE[1]
    }

    /// Zero-weight connections are skipped.
    fn forward(&self, input: &RealTensor) -> RealTensor {
        let mut out = RealTensor::zeros(2, input.len());
        for (r, row) in self.weights.iter().enumerate() {
            let dst = out.row_mut(r);
            for (c, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (d, &x) in dst.iter_mut().zip(input.row(c)) {
                    *d += w * x;
                }
            }
        }
        out
    }
}

/// A complete modulator: transposed conv, combine layer, and post-ops.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthGraph {
    conv: TransposedConvLayer,
    combine: CombineLayer,
    symbol_dimension: usize,
    post_ops: Vec<PostOp>,
}

impl SynthGraph {
    pub fn new(
        conv: TransposedConvLayer,
        combine: CombineLayer,
        symbol_dimension: usize,
        post_ops: Vec<PostOp>,
    ) -> Result<Self> {
        if conv.in_channels() != 2 * symbol_dimension {
            return Err(Error::InvalidLayer(format!(
                "conv has {} input channels, symbol dimension {symbol_dimension} needs {}",
                conv.in_channels(),
                2 * symbol_dimension
            )));
        }
        let needed = if combine.enabled() { combine.in_channels() } else { 2 };
        if conv.out_channels() != needed {
            return Err(Error::InvalidLayer(format!(
                "conv has {} output channels, next stage expects {needed}",
                conv.out_channels()
            )));
        }
        for op in &post_ops {
            op.validate()?;
        }
        Ok(Self {
            conv,
            combine,
            symbol_dimension,
            post_ops,
        })
    }

    /// Full four-channel template from per-dimension basis kernels
    /// (`re[j]`, `im[j]` are the real and imaginary parts of φ_j).
    pub fn template(stride: usize, re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if n == 0 || im.len() != n {
            return Err(Error::InvalidLayer("need matching, non-empty basis sets".into()));
        }
        let k = re[0].len();
        if re.iter().chain(im).any(|b| b.len() != k) {
            return Err(Error::InvalidLayer("basis kernels differ in length".into()));
        }
        let mut kernels = Vec::with_capacity(4 * n * k);
        for stack in [re, im, re, im] {
            for b in stack {
                kernels.extend_from_slice(b);
            }
        }
        let conv = TransposedConvLayer::new(2 * n, 4, 2, stride, k, kernels)?;
        Self::new(conv, CombineLayer::template(), n, Vec::new())
    }

    /// Two-channel form for real-valued basis kernels; the conv outputs are I and Q.
    pub fn real_filter(stride: usize, basis: &[Vec<f64>]) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::InvalidLayer("need a non-empty basis set".into()));
        }
        let k = basis[0].len();
        if basis.iter().any(|b| b.len() != k) {
            return Err(Error::InvalidLayer("basis kernels differ in length".into()));
        }
        let kernels: Vec<f64> = basis.iter().chain(basis).flatten().copied().collect();
        let conv = TransposedConvLayer::new(2 * n, 2, 2, stride, k, kernels)?;
        Self::new(conv, CombineLayer::disabled(), n, Vec::new())
    }

    pub fn with_post_ops(mut self, post_ops: Vec<PostOp>) -> Result<Self> {
        for op in &post_ops {
            op.validate()?;
        }
        self.post_ops = post_ops;
        Ok(self)
    }

    pub fn conv(&self) -> &TransposedConvLayer {
        &self.conv
    }

    pub fn combine(&self) -> &CombineLayer {
        &self.combine
    }

    pub fn symbol_dimension(&self) -> usize {
        self.symbol_dimension
    }

    pub fn post_ops(&self) -> &[PostOp] {
        &self.post_ops
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.conv.stride()
    }

    pub fn kernel_len(&self) -> usize {
        self.conv.kernel_len()
    }

    /// True for the two-channel real-filter layout.
    pub fn is_simplified(&self) -> bool {
        !self.combine.enabled() && self.conv.out_channels() == 2 && self.conv.groups() == 2
    }

    fn is_full_template(&self) -> bool {
        self.combine.is_template() && self.conv.out_channels() == 4 && self.conv.groups() == 2
    }

    /// Complex basis functions φ_j recovered from the kernel layout, for
    /// graphs in template or simplified form. For the full template the
    /// group-0 stacks (o0, o1) are read.
    pub fn basis(&self) -> Option<Vec<Vec<Complex64>>> {
        let n = self.symbol_dimension;
        if self.is_simplified() {
            Some(
                (0..n)
                    .map(|j| self.conv.kernel(0, j).iter().map(|&r| Complex64::new(r, 0.0)).collect())
                    .collect(),
            )
        } else if self.is_full_template() {
            Some(
                (0..n)
                    .map(|j| {
                        self.conv
                            .kernel(0, j)
                            .iter()
                            .zip(self.conv.kernel(1, j))
                            .map(|(&r, &i)| Complex64::new(r, i))
                            .collect()
                    })
                    .collect(),
            )
        } else {
            None
        }
    }

    /// Output before post-ops: `(num_vectors - 1) * L + K` samples.
    pub fn modulate_core(&self, frame: &SymbolFrame) -> Result<IqBuffer> {
        if frame.dimension() != self.symbol_dimension {
            return Err(Error::DimensionMismatch {
                expected: self.symbol_dimension,
                found: frame.dimension(),
            });
        }
        let conv_out = self.conv.forward(&split_re_im(frame))?;
        let rails = if self.combine.enabled() {
            self.combine.forward(&conv_out)
        } else {
            conv_out
        };
        merge_re_im(&rails)
    }

    pub fn modulate(&self, frame: &SymbolFrame) -> Result<IqBuffer> {
        let mut buf = self.modulate_core(frame)?;
        for op in &self.post_ops {
            buf = op.apply(&buf)?;
        }
        Ok(buf)
    }

    /// Drops the imaginary-kernel channels and the combine layer when every
    /// Im{φ} kernel is exactly zero; otherwise returns the graph unchanged.
    pub fn simplify(&self) -> SynthGraph {
        if !self.is_full_template() {
            return self.clone();
        }
        let n = self.symbol_dimension;
        let all_zero = (0..n).all(|j| {
            self.conv.kernel(1, j).iter().all(|&w| w == 0.0)
                && self.conv.kernel(3, j).iter().all(|&w| w == 0.0)
        });
        if !all_zero {
            return self.clone();
        }
        let mut kernels = Vec::with_capacity(2 * n * self.kernel_len());
        for o in [0, 2] {
            for j in 0..n {
                kernels.extend_from_slice(self.conv.kernel(o, j));
            }
        }
        let conv = TransposedConvLayer::new(2 * n, 2, 2, self.conv.stride(), self.kernel_len(), kernels)
            .expect("sub-layer of a valid layer is valid");
        SynthGraph {
            conv,
            combine: CombineLayer::disabled(),
            symbol_dimension: n,
            post_ops: self.post_ops.clone(),
        }
    }
}

/// Free-function form of [`TransposedConvLayer::forward`].
pub fn transposed_conv(layer: &TransposedConvLayer, input: &RealTensor) -> Result<RealTensor> {
    layer.forward(input)
}

pub fn modulate(graph: &SynthGraph, frame: &SymbolFrame) -> Result<IqBuffer> {
    graph.modulate(frame)
}

pub fn simplify(graph: &SynthGraph) -> SynthGraph {
    graph.simplify()
}
