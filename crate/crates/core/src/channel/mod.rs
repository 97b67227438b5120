//! AWGN channel, direct-form reference modulators, receivers, and BER/EVM
//! measurement.

mod awgn;
mod ber;
mod demod;
mod evm;
mod reference;
mod theory;

pub use awgn::{awgn, SnrMode, SnrSpec};
pub use ber::{ber_sweep, ber_sweep_with, compare_paths, BerPoint, PathComparison, Transmitter};
pub use demod::demodulate;
pub(crate) use demod::{dft_block, dft_twiddles};
pub use evm::evm_rms;
pub use reference::{reference_modulate, reference_modulate_id};
pub use theory::{q_function, qam_symbol_error_rate, theoretical_ber};
