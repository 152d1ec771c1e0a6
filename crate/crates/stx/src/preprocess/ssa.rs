//! Singular spectrum analysis of a single monthly series.
//!
//! The decomposition embeds the series into an `L × K` trajectory matrix
//! (`K = T − L + 1`), eigendecomposes the lag-covariance structure
//! `S = X Xᵀ`, reconstructs each eigentriple by diagonal averaging, and
//! groups the reconstructions into a nonlinear trend (return periods of a
//! decade or longer), a modulated annual cycle (12-month fundamental plus
//! harmonics), and a residual anomaly.
//!
//! Eigentriples are classified by the dominant periodogram frequency of
//! their *reconstructed* series: the reconstruction is what actually gets
//! added to a group, so its spectrum — not the eigenvector's, whose length-L
//! periodogram resolves frequencies too coarsely for decadal cutoffs when
//! `L` is small — is the quantity the cutoff must judge.

use nalgebra::DMatrix;

use crate::error::{Result, StxError};

/// Frequency below which an eigentriple counts as trend, in cycles/month.
/// Equivalent to return periods of ten years and longer.
pub const TREND_CUTOFF: f64 = 1.0 / 120.0;

/// Relative eigenvalue floor: triples carrying less than this fraction of
/// the total spectrum are numerical zeros and are left in the residual.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Which group an eigentriple was assigned to.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum SsaGroup {
    Trend,
    Annual,
    Anomaly,
}

impl std::fmt::Display for SsaGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SsaGroup::Trend => "trend",
            SsaGroup::Annual => "annual",
            SsaGroup::Anomaly => "anomaly",
        })
    }
}

/// One entry of the eigen spectrum: the eigenvalue, the dominant
/// periodogram frequency of the eigentriple's reconstruction
/// (cycles/month), and the group it was assigned to.
#[derive(Copy, Clone, Debug)]
pub struct EigenTriple {
    pub eigenvalue: f64,
    pub dominant_frequency: f64,
    pub group: SsaGroup,
}

/// A grouped SSA decomposition of one series.
///
/// The three component series always satisfy
/// `trend + annual + anomaly = input` to within floating-point rounding:
/// the anomaly is computed as the exact residual after subtracting the
/// reconstructed trend and annual groups.
#[derive(Clone, Debug)]
pub struct SsaDecomposition {
    pub trend: Vec<f64>,
    pub annual: Vec<f64>,
    pub anomaly: Vec<f64>,
    pub window_length: usize,
    /// Eigentriples in descending eigenvalue order, restricted to those
    /// carrying a non-negligible share of the spectrum.
    pub eigen_spectrum: Vec<EigenTriple>,
}

impl SsaDecomposition {
    /// `trend + annual + anomaly`, which reproduces the input series.
    pub fn reconstruct(&self) -> Vec<f64> {
        (0..self.trend.len())
            .map(|i| self.trend[i] + self.annual[i] + self.anomaly[i])
            .collect()
    }
}

/// The default window: the largest multiple of 12 no larger than `T/2`
/// (at least 12). A window divisible by the annual period keeps the
/// 12-month cycle and its harmonics separable.
pub fn default_window(ntime: usize) -> usize {
    (ntime / 2 / 12 * 12).max(12)
}

/// Decompose a gap-free monthly series with an SSA window of `window`
/// months. Requires `T ≥ 24` and `12 ≤ window ≤ T/2`.
pub fn ssa_decompose(series: &[f64], window: usize) -> Result<SsaDecomposition> {
    let t_len = series.len();
    if t_len < 24 {
        return Err(StxError::domain(format!(
            "series has {t_len} months; SSA needs at least 24"
        )));
    }
    if window < 12 || window > t_len / 2 {
        return Err(StxError::domain(format!(
            "SSA window {window} is outside [12, T/2] = [12, {}]",
            t_len / 2
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(StxError::domain(
            "series contains non-finite values; missing cells must be skipped upstream",
        ));
    }

    let l_len = window;
    let k_len = t_len - l_len + 1;
    let trajectory = DMatrix::from_fn(l_len, k_len, |i, j| series[i + j]);
    let covariance = &trajectory * trajectory.transpose();
    let eigen = covariance.symmetric_eigen();

    // Descending eigenvalue order, index-tie-broken for determinism.
    let mut order: Vec<usize> = (0..l_len).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let total: f64 = eigen.eigenvalues.iter().map(|&v| v.max(0.0)).sum();
    let floor = total * EIGENVALUE_FLOOR;

    let tables = HarmonicTables::new(t_len);
    let annual_tolerance = 0.5 / t_len as f64;
    let mut trend = vec![0.0; t_len];
    let mut annual = vec![0.0; t_len];
    let mut eigen_spectrum = Vec::new();
    for &i in &order {
        let value = eigen.eigenvalues[i];
        if !(value > floor) || value <= 0.0 {
            break;
        }
        let u: Vec<f64> = eigen.eigenvectors.column(i).iter().copied().collect();
        let w = trajectory.tr_mul(&eigen.eigenvectors.column(i));
        let component = diagonal_average(&u, w.as_slice(), t_len);
        let frequency = tables.dominant_frequency(&component);
        let group = classify(frequency, annual_tolerance);
        match group {
            SsaGroup::Trend => add_assign(&mut trend, &component),
            SsaGroup::Annual => add_assign(&mut annual, &component),
            SsaGroup::Anomaly => {}
        }
        eigen_spectrum.push(EigenTriple {
            eigenvalue: value,
            dominant_frequency: frequency,
            group,
        });
    }

    // Exact residual: whatever the grouped reconstructions did not capture
    // (including eigentriples classified as anomaly and the numerical
    // tail) stays in the anomaly, so additivity holds by construction.
    let anomaly: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(t, &v)| v - trend[t] - annual[t])
        .collect();

    Ok(SsaDecomposition {
        trend,
        annual,
        anomaly,
        window_length: window,
        eigen_spectrum,
    })
}

fn classify(frequency: f64, annual_tolerance: f64) -> SsaGroup {
    if frequency < TREND_CUTOFF {
        return SsaGroup::Trend;
    }
    for k in 1..=6 {
        if (frequency - k as f64 / 12.0).abs() <= annual_tolerance + 1e-12 {
            return SsaGroup::Annual;
        }
    }
    SsaGroup::Anomaly
}

fn add_assign(acc: &mut [f64], x: &[f64]) {
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

/// Diagonal (anti-diagonal) averaging of the rank-one matrix `u wᵀ` back
/// into a series of length `t_len`: entry `t` averages `u[i]·w[j]` over
/// all `i + j = t`.
fn diagonal_average(u: &[f64], w: &[f64], t_len: usize) -> Vec<f64> {
    let mut sum = vec![0.0; t_len];
    let mut count = vec![0u32; t_len];
    for (i, &ui) in u.iter().enumerate() {
        for (j, &wj) in w.iter().enumerate() {
            sum[i + j] += ui * wj;
            count[i + j] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| s / c as f64)
        .collect()
}

/// Precomputed cos/sin tables for the length-`T` discrete Fourier basis:
/// `cos(2π·k·t/T) = table[(k·t) mod T]`, so every periodogram bin is pure
/// table lookups.
struct HarmonicTables {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl HarmonicTables {
    fn new(t_len: usize) -> Self {
        let step = std::f64::consts::TAU / t_len as f64;
        HarmonicTables {
            cos: (0..t_len).map(|j| (step * j as f64).cos()).collect(),
            sin: (0..t_len).map(|j| (step * j as f64).sin()).collect(),
        }
    }

    /// Frequency (cycles/month) of the largest periodogram bin, scanning
    /// k = 0 ..= T/2; ties resolve to the lowest frequency.
    fn dominant_frequency(&self, x: &[f64]) -> f64 {
        let t_len = x.len();
        let mut best_k = 0usize;
        let mut best_power = f64::NEG_INFINITY;
        for k in 0..=t_len / 2 {
            let (mut re, mut im) = (0.0, 0.0);
            let mut phase = 0usize;
            for &v in x {
                re += v * self.cos[phase];
                im += v * self.sin[phase];
                phase += k;
                if phase >= t_len {
                    phase -= t_len;
                }
            }
            let power = re * re + im * im;
            if power > best_power {
                best_power = power;
                best_k = k;
            }
        }
        best_k as f64 / t_len as f64
    }
}
