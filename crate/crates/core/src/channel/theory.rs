//! Closed-form AWGN bit error rates.
//!
//! * BPSK, QPSK (gray): `Q(√(2γ))`, γ = Eb/N0 linear.
//! * 16-QAM (gray, exact): `¼[3Q(x) + 2Q(3x) − Q(5x)]`, `x = √(0.8γ)`.
//! * other square M-QAM: `(4/k)(1 − 1/√M) Q(√(3kγ/(M−1)))`, k = log2 M.

use crate::schemes::Constellation;

pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn theoretical_ber(constellation: &Constellation, ebn0_db: f64) -> f64 {
    let g = 10f64.powf(ebn0_db / 10.0);
    match constellation.order() {
        2 | 4 => q_function((2.0 * g).sqrt()),
        16 => {
            let x = (0.8 * g).sqrt();
            0.25 * (3.0 * q_function(x) + 2.0 * q_function(3.0 * x) - q_function(5.0 * x))
        }
        m => {
            let k = constellation.bits_per_symbol() as f64;
            let m = m as f64;
            (4.0 / k) * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * k * g / (m - 1.0)).sqrt())
        }
    }
}

/// Symbol error rate of square M-QAM (exact), γs = Es/N0 linear.
pub fn qam_symbol_error_rate(order: usize, esn0_linear: f64) -> f64 {
    let m = order as f64;
    let p = 2.0 * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * esn0_linear / (m - 1.0)).sqrt());
    1.0 - (1.0 - p) * (1.0 - p)
}
