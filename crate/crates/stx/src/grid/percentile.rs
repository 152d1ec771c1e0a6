//! Order statistics with a single, fixed convention.

use crate::error::{Result, StxError};

/// Percentile of a sample by linear interpolation on `(n − 1)` ranks:
/// the value at fractional rank `(p / 100) · (n − 1)` of the sorted sample.
///
/// Non-finite values (NaN) are treated as missing and excluded. `p` must lie
/// in `[0, 100]`; an empty (or all-missing) sample is a domain error.
///
/// This one convention backs every threshold, median, and quartile in the
/// crate, so results are reproducible bit for bit.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    let mut pool: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if pool.is_empty() {
        return Err(StxError::domain(
            "percentile of an empty (or all-missing) sample",
        ));
    }
    pool.sort_unstable_by(f64::total_cmp);
    percentile_sorted(&pool, p)
}

/// [`percentile`] over a pre-sorted, missing-free sample. Useful when several
/// percentiles are taken from one large pool.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(StxError::domain(
            "percentile of an empty (or all-missing) sample",
        ));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(StxError::domain(format!(
            "percentile must lie in [0, 100], got {p}"
        )));
    }
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Median: `percentile(values, 50)`.
pub fn median(values: &[f64]) -> Result<f64> {
    percentile(values, 50.0)
}
