//! Percentile thresholding of anomaly fields into binary extreme masks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StxError};
use crate::grid::{percentile, Grid3D};

/// Which distribution tail(s) count as extreme.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum Tail {
    /// Anomalies below the low cut. The default: carbon-cycle extremes of
    /// interest are unusually strong uptake losses, i.e. deeply negative
    /// flux anomalies.
    #[default]
    Negative,
    /// Anomalies above the high cut.
    Positive,
    /// Both tails at once.
    Both,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::Negative => "negative",
            Tail::Positive => "positive",
            Tail::Both => "both",
        })
    }
}

impl FromStr for Tail {
    type Err = StxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neg" | "negative" => Ok(Tail::Negative),
            "pos" | "positive" => Ok(Tail::Positive),
            "both" => Ok(Tail::Both),
            other => Err(StxError::domain(format!(
                "unknown tail {other:?} (expected neg|pos|both)"
            ))),
        }
    }
}

/// How the extreme budget is split between the tails.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum TailBudget {
    /// The total percentage is divided evenly across both tails, so a 10 %
    /// budget puts the low cut at the 5th percentile and the high cut at
    /// the 95th. Selecting a single tail then yields about half the budget.
    #[default]
    SplitAcrossTails,
    /// The selected tail receives the full percentage: a 10 % budget with
    /// the negative tail puts the low cut at the 10th percentile. With
    /// [`Tail::Both`] each tail gets the full budget.
    SingleTail,
}

impl fmt::Display for TailBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailBudget::SplitAcrossTails => "split",
            TailBudget::SingleTail => "single",
        })
    }
}

impl FromStr for TailBudget {
    type Err = StxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(TailBudget::SplitAcrossTails),
            "single" => Ok(TailBudget::SingleTail),
            other => Err(StxError::domain(format!(
                "unknown tail budget {other:?} (expected split|single)"
            ))),
        }
    }
}

/// A complete thresholding rule: how much of the anomaly distribution is
/// declared extreme, on which side(s), and how the budget is shared.
#[derive(Copy, Clone, PartialEq, Debug)]
pub struct ThresholdSpec {
    /// Total percentage of the distribution treated as extreme, in (0, 100).
    pub percentile_total: f64,
    pub tail: Tail,
    pub budget: TailBudget,
}

impl Default for ThresholdSpec {
    /// 10 % total, negative tail, split budget — i.e. the low cut sits at
    /// the 5th percentile of the pooled anomalies.
    fn default() -> Self {
        ThresholdSpec {
            percentile_total: 10.0,
            tail: Tail::Negative,
            budget: TailBudget::SplitAcrossTails,
        }
    }
}

impl ThresholdSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.percentile_total > 0.0 && self.percentile_total < 100.0) {
            return Err(StxError::domain(format!(
                "percentile budget must lie in (0, 100), got {}",
                self.percentile_total
            )));
        }
        Ok(())
    }

    /// The percentile ranks of the low and high cuts implied by this spec.
    /// Either may be `None` when the corresponding tail is not selected.
    pub fn cut_ranks(&self) -> (Option<f64>, Option<f64>) {
        let per_tail = match self.budget {
            TailBudget::SplitAcrossTails => self.percentile_total / 2.0,
            TailBudget::SingleTail => self.percentile_total,
        };
        let low = Some(per_tail);
        let high = Some(100.0 - per_tail);
        match self.tail {
            Tail::Negative => (low, None),
            Tail::Positive => (None, high),
            Tail::Both => (low, high),
        }
    }
}

/// A binary mask over the voxels of a grid, plus the threshold values that
/// produced it. Produced by [`threshold_mask`]; consumed by the labeling
/// stage.
#[derive(Clone, Debug)]
pub struct ExtremeMask {
    dims: (usize, usize, usize),
    bits: Vec<bool>,
    lon_full_circle: bool,
    /// Value of the low cut, when the negative tail was selected.
    pub low_cut: Option<f64>,
    /// Value of the high cut, when the positive tail was selected.
    pub high_cut: Option<f64>,
}

impl ExtremeMask {
    /// Build a mask directly from bits (for tests and synthetic data).
    pub fn from_bits(
        dims: (usize, usize, usize),
        bits: Vec<bool>,
        lon_full_circle: bool,
    ) -> Result<Self> {
        if bits.len() != dims.0 * dims.1 * dims.2 {
            return Err(StxError::domain(format!(
                "mask has {} bits but dims {:?} require {}",
                bits.len(),
                dims,
                dims.0 * dims.1 * dims.2
            )));
        }
        Ok(ExtremeMask {
            dims,
            bits,
            lon_full_circle,
            low_cut: None,
            high_cut: None,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    /// Whether the longitude axis wraps (adjacency across the date line).
    pub fn lon_full_circle(&self) -> bool {
        self.lon_full_circle
    }

    pub fn set_lon_full_circle(&mut self, wrap: bool) {
        self.lon_full_circle = wrap;
    }

    #[inline]
    pub fn get(&self, t: usize, y: usize, x: usize) -> bool {
        let (_, nlat, nlon) = self.dims;
        self.bits[(t * nlat + y) * nlon + x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of voxels flagged extreme.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Pool every non-missing anomaly value, place the percentile cut(s), and
/// flag voxels strictly beyond them. Values exactly equal to a cut are not
/// extreme, so shrinking the budget can only shrink the mask.
///
/// Errors with a numerical error when the grid holds no finite values.
pub fn threshold_mask(anomalies: &Grid3D, spec: &ThresholdSpec) -> Result<ExtremeMask> {
    spec.validate()?;
    let pool: Vec<f64> = anomalies
        .values()
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if pool.is_empty() {
        return Err(StxError::numerical(
            "cannot place a percentile threshold: the anomaly field has no finite values",
        ));
    }
    let (low_rank, high_rank) = spec.cut_ranks();
    let low_cut = low_rank.map(|r| percentile(&pool, r)).transpose()?;
    let high_cut = high_rank.map(|r| percentile(&pool, r)).transpose()?;

    let bits: Vec<bool> = anomalies
        .values()
        .iter()
        .map(|&v| {
            v.is_finite()
                && (low_cut.is_some_and(|c| v < c) || high_cut.is_some_and(|c| v > c))
        })
        .collect();

    Ok(ExtremeMask {
        dims: anomalies.dims(),
        bits,
        lon_full_circle: anomalies.lon_full_circle(),
        low_cut,
        high_cut,
    })
}
