use crate::error::{Error, Result};
use crate::iq::SymbolFrame;

/// RMS error vector magnitude in percent:
/// `100 · √(mean|r − s|² / mean|s|²)`.
pub fn evm_rms(received: &SymbolFrame, reference: &SymbolFrame) -> Result<f64> {
    if received.flat().len() != reference.flat().len() {
        return Err(Error::LengthMismatch(format!(
            "received has {} entries, reference {}",
            received.flat().len(),
            reference.flat().len()
        )));
    }
    let ref_power: f64 = reference.flat().iter().map(|s| s.norm_sqr()).sum();
    if ref_power == 0.0 {
        return Err(Error::InvalidArgument("reference frame has zero power".into()));
    }
    let err: f64 = received
        .flat()
        .iter()
        .zip(reference.flat())
        .map(|(r, s)| (r - s).norm_sqr())
        .sum();
    Ok(100.0 * (err / ref_power).sqrt())
}
