//! Climate-driver attribution of extreme events: classifies each
//! top-ranked component as hot/cold (temperature) and dry/wet
//! (precipitation) from driver conditions during and up to a few months
//! before the event.
//!
//! For a component and lag `t`, the event-side statistic is the median of
//! the driver over the component's voxels shifted `t` months back. It is
//! compared against reference quartiles by strict inequality: median above
//! the 75th percentile flags hot (wet), below the 25th flags cold (dry).
//! Temperature is expected standardized ([`crate::preprocess::scale_temperature`])
//! and precipitation total-normalized ([`crate::preprocess::normalize_precip`])
//! so thresholds are comparable across space.

use rayon::prelude::*;

use std::fmt;
use std::str::FromStr;

use crate::detect::Labeling;
use crate::error::{Result, StxError};
use crate::grid::{median, percentile, Grid3D};
use crate::stats::ComponentStats;

/// What population the reference quartiles are drawn from.
///
/// The event median must be compared against a pool in which the event
/// months are a minority, otherwise strict exceedance is impossible by
/// construction. The default compares the event against the component's
/// own footprint across the whole record (a local climatology); the
/// alternative compares against the entire grid at the event's (shifted)
/// months (a global snapshot).
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum ReferenceMode {
    #[default]
    FootprintClimatology,
    GlobalSnapshot,
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceMode::FootprintClimatology => "footprint-climatology",
            ReferenceMode::GlobalSnapshot => "global-snapshot",
        })
    }
}

impl FromStr for ReferenceMode {
    type Err = StxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "footprint-climatology" => Ok(ReferenceMode::FootprintClimatology),
            "global-snapshot" => Ok(ReferenceMode::GlobalSnapshot),
            other => Err(StxError::domain(format!(
                "unknown reference mode {other:?} (expected footprint-climatology|global-snapshot)"
            ))),
        }
    }
}

/// Attribution parameters.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AttributionConfig {
    /// How many top-ranked components to classify.
    pub top_k: usize,
    /// Maximum lag in months; lags `0 ..= max_lag` are evaluated.
    pub max_lag: usize,
    pub reference: ReferenceMode,
}

impl Default for AttributionConfig {
    fn default() -> Self {
        AttributionConfig {
            top_k: 100,
            max_lag: 3,
            reference: ReferenceMode::default(),
        }
    }
}

impl AttributionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 {
            return Err(StxError::domain("attribution top_k must be ≥ 1"));
        }
        Ok(())
    }
}

/// Driver statistics and flags for one component at one lag.
#[derive(Clone, Debug, PartialEq)]
pub struct LagAttribution {
    pub lag: usize,
    /// Median of the standardized temperature over lag-shifted voxels;
    /// `None` when no voxel survives truncation and missing-data removal.
    pub tas_median: Option<f64>,
    /// Fraction of member voxels contributing to `tas_median`.
    pub tas_coverage: f64,
    pub pr_median: Option<f64>,
    pub pr_coverage: f64,
    pub tas_q25: Option<f64>,
    pub tas_q75: Option<f64>,
    pub pr_q25: Option<f64>,
    pub pr_q75: Option<f64>,
    pub hot: bool,
    pub cold: bool,
    pub dry: bool,
    pub wet: bool,
}

/// Per-lag attribution of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributionRecord {
    pub component_id: u32,
    /// Rank of the component in the loss ordering (1 = largest).
    pub rank: usize,
    /// One entry per lag, `0 ..= max_lag`.
    pub lags: Vec<LagAttribution>,
}

/// Median of `driver` over the component's voxels shifted `lag` months
/// back, plus the coverage fraction: the share of member voxels whose
/// shifted month is inside the record and non-missing. Returns `None`
/// when nothing survives.
pub fn lagged_driver_median(
    driver: &Grid3D,
    voxels: &[(usize, usize, usize)],
    lag: usize,
) -> (Option<f64>, f64) {
    let mut pool = Vec::with_capacity(voxels.len());
    for &(t, y, x) in voxels {
        if t >= lag {
            let v = driver.get(t - lag, y, x);
            if v.is_finite() {
                pool.push(v);
            }
        }
    }
    let coverage = pool.len() as f64 / voxels.len() as f64;
    (median(&pool).ok(), coverage)
}

/// Reference quartiles `(q25, q75)` for a component at one lag, or `None`
/// when the reference pool is empty.
pub fn reference_quartiles(
    driver: &Grid3D,
    voxels: &[(usize, usize, usize)],
    lag: usize,
    mode: ReferenceMode,
) -> Option<(f64, f64)> {
    let pool = match mode {
        ReferenceMode::FootprintClimatology => {
            let mut cells: Vec<(usize, usize)> = voxels.iter().map(|&(_, y, x)| (y, x)).collect();
            cells.sort_unstable();
            cells.dedup();
            let mut pool = Vec::with_capacity(cells.len() * driver.ntime());
            for &(y, x) in &cells {
                for t in 0..driver.ntime() {
                    let v = driver.get(t, y, x);
                    if v.is_finite() {
                        pool.push(v);
                    }
                }
            }
            pool
        }
        ReferenceMode::GlobalSnapshot => {
            let mut months: Vec<usize> = voxels
                .iter()
                .filter(|&&(t, _, _)| t >= lag)
                .map(|&(t, _, _)| t - lag)
                .collect();
            months.sort_unstable();
            months.dedup();
            let (_, nlat, nlon) = driver.dims();
            let mut pool = Vec::with_capacity(months.len() * nlat * nlon);
            for &t in &months {
                for y in 0..nlat {
                    for x in 0..nlon {
                        let v = driver.get(t, y, x);
                        if v.is_finite() {
                            pool.push(v);
                        }
                    }
                }
            }
            pool
        }
    };
    let q25 = percentile(&pool, 25.0).ok()?;
    let q75 = percentile(&pool, 75.0).ok()?;
    Some((q25, q75))
}

/// Classify one component against both drivers at every lag. Flags are
/// strict inequalities of the event median against the reference
/// quartiles and stay false wherever a median or quartile is undefined.
pub fn classify_component(
    tas: &Grid3D,
    pr: &Grid3D,
    component_id: u32,
    rank: usize,
    voxels: &[(usize, usize, usize)],
    cfg: &AttributionConfig,
) -> AttributionRecord {
    let lags = (0..=cfg.max_lag)
        .map(|lag| {
            let (tas_median, tas_coverage) = lagged_driver_median(tas, voxels, lag);
            let (pr_median, pr_coverage) = lagged_driver_median(pr, voxels, lag);
            let tas_q = reference_quartiles(tas, voxels, lag, cfg.reference);
            let pr_q = reference_quartiles(pr, voxels, lag, cfg.reference);
            let (tas_q25, tas_q75) = (tas_q.map(|q| q.0), tas_q.map(|q| q.1));
            let (pr_q25, pr_q75) = (pr_q.map(|q| q.0), pr_q.map(|q| q.1));
            let hot = matches!((tas_median, tas_q75), (Some(m), Some(q)) if m > q);
            let cold = matches!((tas_median, tas_q25), (Some(m), Some(q)) if m < q);
            let wet = matches!((pr_median, pr_q75), (Some(m), Some(q)) if m > q);
            let dry = matches!((pr_median, pr_q25), (Some(m), Some(q)) if m < q);
            LagAttribution {
                lag,
                tas_median,
                tas_coverage,
                pr_median,
                pr_coverage,
                tas_q25,
                tas_q75,
                pr_q25,
                pr_q75,
                hot,
                cold,
                dry,
                wet,
            }
        })
        .collect();
    AttributionRecord {
        component_id,
        rank,
        lags,
    }
}

/// Classify the `top_k` ranked components. `stats` must be rank-sorted
/// (as [`crate::stats::component_metrics`] returns them); when fewer than
/// `top_k` components exist, all are used. Drivers must share the
/// labeling's dimensions.
pub fn attribute_components(
    stats: &[ComponentStats],
    labeling: &Labeling,
    tas: &Grid3D,
    pr: &Grid3D,
    cfg: &AttributionConfig,
) -> Result<Vec<AttributionRecord>> {
    cfg.validate()?;
    if tas.dims() != labeling.dims() || pr.dims() != labeling.dims() {
        return Err(StxError::domain(format!(
            "driver dims (tas {:?}, pr {:?}) do not match labeling dims {:?}",
            tas.dims(),
            pr.dims(),
            labeling.dims()
        )));
    }
    let membership = labeling.voxels_by_component();
    let used = cfg.top_k.min(stats.len());
    Ok(stats[..used]
        .par_iter()
        .map(|s| {
            let voxels = &membership[(s.id - 1) as usize];
            classify_component(tas, pr, s.id, s.rank, voxels, cfg)
        })
        .collect())
}

/// Lag-wise flag counts for one category plus the lag-averaged value.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoryCounts {
    /// Flagged components per lag, `0 ..= max_lag`.
    pub per_lag: Vec<usize>,
    /// Mean of `per_lag` (fractional).
    pub mean: f64,
    /// `mean` rounded half away from zero, for presentation.
    pub presented: u64,
}

fn category_counts<F>(records: &[AttributionRecord], n_lags: usize, flag: F) -> CategoryCounts
where
    F: Fn(&LagAttribution) -> bool,
{
    let per_lag: Vec<usize> = (0..n_lags)
        .map(|lag| {
            records
                .iter()
                .filter(|r| r.lags.get(lag).map(&flag).unwrap_or(false))
                .count()
        })
        .collect();
    let mean = per_lag.iter().sum::<usize>() as f64 / n_lags as f64;
    CategoryCounts {
        per_lag,
        mean,
        presented: mean.round() as u64,
    }
}

/// Summary table over classified components: per category, flag counts at
/// each lag and their lag average (raw and rounded).
#[derive(Clone, Debug, PartialEq)]
pub struct AttributionTable {
    /// `top_k` that was asked for.
    pub requested_top_k: usize,
    /// Components actually classified (smaller on shortfall).
    pub used_top_k: usize,
    pub max_lag: usize,
    pub hot: CategoryCounts,
    pub cold: CategoryCounts,
    pub dry: CategoryCounts,
    pub wet: CategoryCounts,
}

/// Aggregate classified records into the presentation table.
pub fn attribution_table(records: &[AttributionRecord], cfg: &AttributionConfig) -> AttributionTable {
    let n_lags = cfg.max_lag + 1;
    AttributionTable {
        requested_top_k: cfg.top_k,
        used_top_k: records.len(),
        max_lag: cfg.max_lag,
        hot: category_counts(records, n_lags, |l| l.hot),
        cold: category_counts(records, n_lags, |l| l.cold),
        dry: category_counts(records, n_lags, |l| l.dry),
        wet: category_counts(records, n_lags, |l| l.wet),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{label_components, neighborhood, ExtremeMask, StructureKind};
    use crate::grid::{GridAxes, MonthIndex};
    use approx::assert_relative_eq;

    const T: usize = 24;

    fn driver_grid(nlat: usize, nlon: usize, fill: f64) -> Grid3D {
        let lat_edges: Vec<f64> = (0..=nlat).map(|i| i as f64).collect();
        let lon_edges: Vec<f64> = (0..=nlon).map(|i| i as f64).collect();
        let axes = GridAxes::from_edges(lat_edges, lon_edges);
        Grid3D::filled(
            "tas",
            "1",
            MonthIndex::from_ym(2001, 1).unwrap(),
            T,
            &axes,
            fill,
        )
    }

    #[test]
    fn singleton_median_is_the_shifted_value() {
        let mut g = driver_grid(2, 2, 0.0);
        g.set(3, 1, 1, 4.25);
        let (value, coverage) = lagged_driver_median(&g, &[(5, 1, 1)], 2);
        assert_eq!(value, Some(4.25));
        assert_eq!(coverage, 1.0);
    }

    #[test]
    fn truncated_voxels_leave_the_pool() {
        let mut g = driver_grid(2, 2, 0.0);
        g.set(1, 0, 0, 7.0);
        let voxels = [(0, 0, 0), (2, 0, 0)];
        let (value, coverage) = lagged_driver_median(&g, &voxels, 1);
        assert_eq!(value, Some(7.0));
        assert_eq!(coverage, 0.5);
        let (none_value, zero_coverage) = lagged_driver_median(&g, &[(0, 0, 0)], 1);
        assert_eq!(none_value, None);
        assert_eq!(zero_coverage, 0.0);
    }

    #[test]
    fn three_voxel_median_is_the_middle_value() {
        let mut g = driver_grid(1, 3, 0.0);
        g.set(2, 0, 0, 1.0);
        g.set(2, 0, 1, 2.0);
        g.set(2, 0, 2, 9.0);
        let voxels = [(3, 0, 0), (3, 0, 1), (3, 0, 2)];
        let (value, _) = lagged_driver_median(&g, &voxels, 1);
        assert_eq!(value, Some(2.0));
    }

    #[test]
    fn footprint_climatology_quartiles_interpolate() {
        // One footprint cell whose record is 1..=100 (T=100 here).
        let axes = GridAxes::from_edges(vec![0.0, 1.0], vec![0.0, 1.0]);
        let mut g = Grid3D::filled(
            "tas",
            "1",
            MonthIndex::from_ym(2001, 1).unwrap(),
            100,
            &axes,
            0.0,
        );
        for t in 0..100 {
            g.set(t, 0, 0, (t + 1) as f64);
        }
        let (q25, q75) =
            reference_quartiles(&g, &[(40, 0, 0)], 0, ReferenceMode::FootprintClimatology)
                .unwrap();
        assert_relative_eq!(q25, 25.75, epsilon = 1e-12);
        assert_relative_eq!(q75, 75.25, epsilon = 1e-12);
    }

    #[test]
    fn uniform_driver_cannot_flag_anything() {
        let tas = driver_grid(2, 3, 1.5);
        let pr = driver_grid(2, 3, 0.2);
        let voxels = [(4, 0, 0), (4, 0, 1), (5, 0, 0)];
        let record = classify_component(&tas, &pr, 1, 1, &voxels, &AttributionConfig::default());
        for lag in &record.lags {
            assert_eq!(lag.tas_q25, lag.tas_q75);
            assert!(!lag.hot && !lag.cold && !lag.dry && !lag.wet);
        }
    }

    #[test]
    fn forced_warm_anomaly_flags_hot_at_every_lag() {
        let mut tas = driver_grid(2, 3, 0.0);
        let pr = driver_grid(2, 3, 0.0);
        // Event voxels at t = 10, 11 on two cells; +3 written over the
        // full lag window so every shifted median reads 3.
        let voxels = [(10, 0, 0), (10, 0, 1), (11, 0, 0), (11, 0, 1)];
        for t in 7..=11 {
            tas.set(t, 0, 0, 3.0);
            tas.set(t, 0, 1, 3.0);
        }
        let record = classify_component(&tas, &pr, 1, 1, &voxels, &AttributionConfig::default());
        for lag in &record.lags {
            assert!(lag.hot, "lag {} not hot", lag.lag);
            assert!(!lag.cold);
        }
    }

    #[test]
    fn global_snapshot_uses_the_shifted_months() {
        let mut g = driver_grid(1, 4, 0.0);
        for x in 0..4 {
            g.set(2, 0, x, (x + 1) as f64); // month 2 holds 1, 2, 3, 4
        }
        let (q25, q75) =
            reference_quartiles(&g, &[(3, 0, 0)], 1, ReferenceMode::GlobalSnapshot).unwrap();
        assert_relative_eq!(q25, 1.75, epsilon = 1e-12);
        assert_relative_eq!(q75, 3.25, epsilon = 1e-12);
    }

    #[test]
    fn coverage_never_increases_with_lag_on_gap_free_drivers() {
        let tas = driver_grid(3, 3, 0.5);
        let pr = driver_grid(3, 3, 0.5);
        let voxels = [(0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 0, 2)];
        let cfg = AttributionConfig {
            max_lag: 3,
            ..AttributionConfig::default()
        };
        let record = classify_component(&tas, &pr, 1, 1, &voxels, &cfg);
        for pair in record.lags.windows(2) {
            assert!(pair[1].tas_coverage <= pair[0].tas_coverage);
            assert!(pair[1].pr_coverage <= pair[0].pr_coverage);
        }
    }

    #[test]
    fn hot_and_cold_are_mutually_exclusive_under_random_fields() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let mut tas = driver_grid(3, 3, 0.0);
            let mut pr = driver_grid(3, 3, 0.0);
            for t in 0..T {
                for y in 0..3 {
                    for x in 0..3 {
                        tas.set(t, y, x, rng.gen_range(-2.0..2.0));
                        pr.set(t, y, x, rng.gen_range(-0.1..0.1));
                    }
                }
            }
            let voxels: Vec<(usize, usize, usize)> = (0..4)
                .map(|_| {
                    (
                        rng.gen_range(0..T),
                        rng.gen_range(0..3usize),
                        rng.gen_range(0..3usize),
                    )
                })
                .collect();
            let record =
                classify_component(&tas, &pr, 1, 1, &voxels, &AttributionConfig::default());
            for lag in &record.lags {
                assert!(!(lag.hot && lag.cold));
                assert!(!(lag.dry && lag.wet));
            }
        }
    }

    fn record_with_hot_lags(flags: &[bool]) -> AttributionRecord {
        AttributionRecord {
            component_id: 1,
            rank: 1,
            lags: flags
                .iter()
                .enumerate()
                .map(|(lag, &hot)| LagAttribution {
                    lag,
                    tas_median: Some(0.0),
                    tas_coverage: 1.0,
                    pr_median: Some(0.0),
                    pr_coverage: 1.0,
                    tas_q25: Some(-1.0),
                    tas_q75: Some(1.0),
                    pr_q25: Some(-1.0),
                    pr_q75: Some(1.0),
                    hot,
                    cold: false,
                    dry: false,
                    wet: false,
                })
                .collect(),
        }
    }

    #[test]
    fn lag_average_rounds_half_up() {
        // Per-lag hot counts {12, 11, 10, 9} → mean 10.5 → presented 11.
        let mut records = Vec::new();
        for i in 0..12 {
            let flags = [true, i < 11, i < 10, i < 9];
            records.push(record_with_hot_lags(&flags));
        }
        let cfg = AttributionConfig {
            top_k: 12,
            max_lag: 3,
            ..AttributionConfig::default()
        };
        let table = attribution_table(&records, &cfg);
        assert_eq!(table.hot.per_lag, vec![12, 11, 10, 9]);
        assert_relative_eq!(table.hot.mean, 10.5, epsilon = 1e-12);
        assert_eq!(table.hot.presented, 11);
        assert_eq!(table.cold.presented, 0);
    }

    #[test]
    fn empty_records_make_an_empty_table() {
        let cfg = AttributionConfig::default();
        let table = attribution_table(&[], &cfg);
        assert_eq!(table.used_top_k, 0);
        assert_eq!(table.requested_top_k, 100);
        assert_eq!(table.hot.per_lag, vec![0, 0, 0, 0]);
        assert_eq!(table.hot.presented, 0);
    }

    #[test]
    fn shortfall_uses_all_available_components() {
        // 2×2×2 scene with two sesd components; top_k = 100 → both used.
        let mut anomalies = driver_grid(2, 2, 0.0);
        anomalies.set(0, 0, 0, -5.0);
        anomalies.set(1, 1, 1, -4.0);
        let bits: Vec<bool> = anomalies.values().iter().map(|&v| v < 0.0).collect();
        let mask = ExtremeMask::from_bits(anomalies.dims(), bits, false).unwrap();
        let labeling = label_components(&mask, &neighborhood(StructureKind::Sesd), false).unwrap();
        let stats = crate::stats::component_metrics(&labeling, &anomalies).unwrap();
        let tas = driver_grid(2, 2, 0.0);
        let pr = driver_grid(2, 2, 0.0);
        let cfg = AttributionConfig::default();
        let records = attribute_components(&stats, &labeling, &tas, &pr, &cfg).unwrap();
        assert_eq!(records.len(), 2);
        let table = attribution_table(&records, &cfg);
        assert_eq!(table.used_top_k, 2);
        assert_eq!(table.requested_top_k, 100);
    }
}
