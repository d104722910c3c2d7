//! Log Törnqvist productivity index, the model-free TFPg benchmark.

use crate::table::{LinkedObservation, SHARE_TOLERANCE};
use crate::{Error, Result};

/// `-ln p_out + sum_i (s0_i + s1_i) / 2 * ln p_i` over factors present in
/// either period. Share slices and `deflators` are indexed by factor.
pub fn tornqvist_tfpg(s0: &[f64], s1: &[f64], deflators: &[f64], p_out: f64) -> Result<f64> {
    if s0.len() != s1.len() || s0.len() != deflators.len() {
        return Err(Error::DimensionMismatch(format!(
            "share columns {} / {}, deflators {}",
            s0.len(),
            s1.len(),
            deflators.len()
        )));
    }
    for (label, s) in [("reference", s0), ("target", s1)] {
        let total: f64 = s.iter().sum();
        if (total - 1.0).abs() > SHARE_TOLERANCE {
            return Err(Error::Precondition(format!("{label} shares sum to {total}, not 1")));
        }
    }
    if !(p_out > 0.0 && p_out.is_finite()) {
        return Err(Error::NonpositiveDeflator { index: usize::MAX, value: p_out });
    }
    let mut acc = -p_out.ln();
    for (i, ((&a, &b), &p)) in s0.iter().zip(s1).zip(deflators).enumerate() {
        if a + b > 0.0 {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::NonpositiveDeflator { index: i, value: p });
            }
            acc += 0.5 * (a + b) * p.ln();
        }
    }
    Ok(acc)
}

/// Törnqvist TFPg of zero-based sector `j` of a linked observation.
pub fn tornqvist_sector(obs: &LinkedObservation, j: usize) -> Result<f64> {
    tornqvist_tfpg(
        &obs.table0.share_column(j),
        &obs.table1.share_column(j),
        obs.deflators.as_slice(),
        obs.deflators.output(j),
    )
}
