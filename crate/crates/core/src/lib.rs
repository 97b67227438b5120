//! Baseband modulators expressed as a strided transposed convolution plus a
//! fixed combine layer, with kernel learning, predistortion, protocol
//! framing, and BER/EVM measurement.

pub mod channel;
pub mod error;
pub mod iq;
pub mod learning;
pub mod model_io;
pub mod predistortion;
pub mod protocols;
pub mod rng;
pub mod schemes;
pub mod synth;

pub use error::{Error, Result};
pub use iq::{merge_re_im, split_re_im, ComplexSample, IqBuffer, RealTensor, SymbolFrame};
pub use schemes::Scheme;
pub use synth::{modulate, simplify, transposed_conv, CombineLayer, SynthGraph, TransposedConvLayer};
