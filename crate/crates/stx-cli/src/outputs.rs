//! Renderers for the report artifacts (CSV tables, JSON summaries).
//!
//! Every function returns the file body as a string; the stage driver owns
//! the filesystem. All numbers are written in Rust's shortest round-trip
//! form, so identical data always yields identical bytes. Every artifact
//! declares its units in a leading `#` comment (CSV) or a `units` field
//! (JSON). Missing values are empty CSV fields.

use serde::{Deserialize, Serialize};
use stx::attribution::{AttributionRecord, AttributionTable};
use stx::scalefree::{PowerLawFit, SizeDistribution};
use stx::stats::{ComponentStats, CumulativeShareCurve, Map2D};

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Ranked component table.
pub fn components_csv(stats: &[ComponentStats]) -> String {
    let mut out = String::from(
        "# carbon_integral_pg in Pg C (assumes kg m-2 s-1 input flux); areas in m2; \
         duration in months; start is the first affected month (YYYY-MM); \
         *_min/*_max are zero-based voxel index bounds\n",
    );
    out.push_str(
        "rank,id,voxel_count,carbon_integral_pg,affected_area_m2,voxel_month_area_m2,\
         duration_months,start,time_min,time_max,lat_min,lat_max,lon_min,lon_max\n",
    );
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.rank,
            s.id,
            s.voxel_count,
            fmt(s.carbon_integral_pg),
            fmt(s.affected_area_m2),
            fmt(s.voxel_month_area_m2),
            s.duration_months,
            s.start,
            s.time_idx.0,
            s.time_idx.1,
            s.lat_idx.0,
            s.lat_idx.1,
            s.lon_idx.0,
            s.lon_idx.1,
        ));
    }
    out
}

/// Cumulative concentration curve over ranked components.
pub fn cumulative_csv(curve: &CumulativeShareCurve) -> String {
    let mut out = String::from(
        "# share of total |carbon integral| covered by the top k components (dimensionless); \
         cumulative_pg is the signed running total in Pg C\n",
    );
    out.push_str("k,share,cumulative_pg\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.k, fmt(p.share), fmt(p.cumulative_pg)));
    }
    out
}

/// A 2-D map in long form: one row per grid cell.
pub fn map_csv(map: &Map2D) -> String {
    let mut out = format!(
        "# {} in {}; lat/lon are cell centers in degrees\nlat,lon,{}\n",
        map.name, map.units, map.name
    );
    for (y, lat) in map.lat_centers.iter().enumerate() {
        for (x, lon) in map.lon_centers.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", fmt(*lat), fmt(*lon), fmt(map.get(y, x))));
        }
    }
    out
}

/// Empirical size distribution: `(size, count, p̂)` per observed size.
pub fn powerlaw_csv(dist: &SizeDistribution) -> String {
    let mut out = String::from(
        "# component sizes in voxels; probability = count / total components\n",
    );
    out.push_str("size,count,probability\n");
    for &(size, count) in &dist.pairs {
        out.push_str(&format!(
            "{},{},{}\n",
            size,
            count,
            fmt(count as f64 / dist.total as f64)
        ));
    }
    out
}

/// Per-component, per-lag attribution detail.
pub fn attribution_csv(records: &[AttributionRecord]) -> String {
    let mut out = String::from(
        "# tas values in standardized anomaly units, pr in normalized anomaly units; \
         q25/q75 are the reference quartiles; coverage is the fraction of event voxels \
         with driver data at that lag; flags are strict quartile exceedances\n",
    );
    out.push_str(
        "id,rank,lag,tas_median,tas_q25,tas_q75,tas_coverage,\
         pr_median,pr_q25,pr_q75,pr_coverage,hot,cold,dry,wet\n",
    );
    for r in records {
        for l in &r.lags {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.component_id,
                r.rank,
                l.lag,
                fmt_opt(l.tas_median),
                fmt_opt(l.tas_q25),
                fmt_opt(l.tas_q75),
                fmt(l.tas_coverage),
                fmt_opt(l.pr_median),
                fmt_opt(l.pr_q25),
                fmt_opt(l.pr_q75),
                fmt(l.pr_coverage),
                l.hot,
                l.cold,
                l.dry,
                l.wet,
            ));
        }
    }
    out
}

/// The thresholding record the detect stage leaves for later stages.
#[derive(Clone, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub variable: String,
    /// Units of the anomaly field the cuts apply to.
    pub units: String,
    pub percentile_total: f64,
    pub tail: String,
    pub tail_budget: String,
    pub low_cut: Option<f64>,
    pub high_cut: Option<f64>,
    pub masked_voxels: usize,
    pub total_voxels: usize,
    pub mask_fraction: f64,
}

/// Per-structure mask summary: the threshold record plus the labeling
/// outcome under this structure.
#[derive(Serialize)]
pub struct MaskSummary {
    pub structure: String,
    pub wrap_lon: bool,
    pub n_components: usize,
    #[serde(flatten)]
    pub threshold: ThresholdSummary,
}

/// Fitted size-distribution report.
#[derive(Serialize)]
pub struct PowerLawReport {
    pub structure: String,
    /// Sizes are voxel counts; the density is per unit size.
    pub units: &'static str,
    pub method: String,
    pub gamma: f64,
    /// Natural log of the fitted density at size 1.
    pub log_c: f64,
    pub r_squared: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub component_count: u64,
    /// Size beyond which fewer than one event is expected in a sample of
    /// this many components (absent when the exponent makes it undefined).
    pub natural_cutoff: Option<f64>,
}

impl PowerLawReport {
    pub fn new(structure: String, fit: &PowerLawFit, dist: &SizeDistribution) -> Self {
        PowerLawReport {
            structure,
            units: "sizes in voxels; density per unit size",
            method: fit.method.to_string(),
            gamma: fit.gamma,
            log_c: fit.log_c,
            r_squared: fit.r_squared,
            n_min: fit.n_range.0,
            n_max: fit.n_range.1,
            component_count: dist.total,
            natural_cutoff: stx::scalefree::natural_cutoff(
                fit.n_range.0,
                dist.total,
                fit.gamma,
            )
            .ok(),
        }
    }
}

#[derive(Serialize)]
pub struct CategoryReport {
    /// Flagged component count at each lag 0..=max.
    pub per_lag: Vec<usize>,
    pub mean: f64,
    /// Lag-averaged count rounded half away from zero.
    pub presented: u64,
}

/// Aggregate attribution counts in the form the summary tables use.
#[derive(Serialize)]
pub struct AttributionReport {
    pub structure: String,
    pub units: &'static str,
    pub reference: String,
    pub requested_top_k: usize,
    pub used_top_k: usize,
    pub max_lag: usize,
    pub hot: CategoryReport,
    pub cold: CategoryReport,
    pub dry: CategoryReport,
    pub wet: CategoryReport,
}

impl AttributionReport {
    pub fn new(structure: String, reference: String, table: &AttributionTable) -> Self {
        let cat = |c: &stx::attribution::CategoryCounts| CategoryReport {
            per_lag: c.per_lag.clone(),
            mean: c.mean,
            presented: c.presented,
        };
        AttributionReport {
            structure,
            units: "counts of components whose lagged driver median crosses the reference quartile",
            reference,
            requested_top_k: table.requested_top_k,
            used_top_k: table.used_top_k,
            max_lag: table.max_lag,
            hot: cat(&table.hot),
            cold: cat(&table.cold),
            dry: cat(&table.dry),
            wet: cat(&table.wet),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
