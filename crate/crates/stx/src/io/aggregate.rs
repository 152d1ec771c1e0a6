//! Day-weighted aggregation of sub-monthly composite series to months.

use chrono::NaiveDate;

use crate::error::{Result, StxError};
use crate::grid::{DataKind, Grid3D, GridAxes, MonthIndex};

/// One composite observation: a value representative of `days` consecutive
/// days starting at `start` (e.g. an 8-day satellite composite).
#[derive(Copy, Clone, Debug)]
pub struct Sample {
    pub start: NaiveDate,
    pub days: u32,
    pub value: f64,
}

impl Sample {
    pub fn new(start: NaiveDate, days: u32, value: f64) -> Self {
        Sample { start, days, value }
    }
}

/// Aggregates one cell's composites to the given months.
///
/// Each month receives the mean of all overlapping samples weighted by the
/// number of days the sample spends inside that month, so composites that
/// straddle a month boundary are split proportionally. Months with no
/// coverage (and samples with missing values) yield NaN.
pub fn aggregate_series(samples: &[Sample], months: &[MonthIndex]) -> Vec<f64> {
    months
        .iter()
        .map(|&m| {
            let first = month_first_day(m);
            let next = month_first_day(m.next());
            let mut weighted = 0.0;
            let mut days = 0.0;
            for s in samples {
                if !s.value.is_finite() || s.days == 0 {
                    continue;
                }
                let s_end = s.start + chrono::Days::new(u64::from(s.days));
                let lo = s.start.max(first);
                let hi = s_end.min(next);
                if lo < hi {
                    let overlap = (hi - lo).num_days() as f64;
                    weighted += s.value * overlap;
                    days += overlap;
                }
            }
            if days > 0.0 {
                weighted / days
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Aggregates a whole grid of composite series (one `Vec<Sample>` per cell
/// in lat-major order) to a monthly [`Grid3D`].
pub fn aggregate_monthly(
    cells: &[Vec<Sample>],
    months: &[MonthIndex],
    axes: GridAxes,
    variable_name: &str,
    units: &str,
) -> Result<Grid3D> {
    let nlat = axes.lat_centers.len();
    let nlon = axes.lon_centers.len();
    if cells.len() != nlat * nlon {
        return Err(StxError::validation(format!(
            "{} cell series for a {nlat}×{nlon} grid",
            cells.len()
        )));
    }
    let ntime = months.len();
    let mut values = vec![f64::NAN; ntime * nlat * nlon];
    for (cell, samples) in cells.iter().enumerate() {
        for (t, v) in aggregate_series(samples, months).into_iter().enumerate() {
            values[t * nlat * nlon + cell] = v;
        }
    }
    Grid3D::new(
        variable_name,
        units,
        months.to_vec(),
        axes,
        values,
        DataKind::F64,
    )
}

fn month_first_day(m: MonthIndex) -> NaiveDate {
    NaiveDate::from_ymd_opt(m.year(), m.month(), 1).expect("valid month by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn jan() -> Vec<MonthIndex> {
        vec![MonthIndex::from_ym(2001, 1).unwrap()]
    }

    #[test]
    fn constant_coverage_returns_the_constant() {
        let samples: Vec<Sample> = (0..4)
            .map(|i| Sample::new(date(2001, 1, 1 + 8 * i), 8, 5.0))
            .collect();
        let out = aggregate_series(&samples, &jan());
        assert_relative_eq!(out[0], 5.0);
    }

    #[test]
    fn equal_day_weighting_of_two_composites() {
        let samples = [
            Sample::new(date(2001, 1, 1), 8, 1.0),
            Sample::new(date(2001, 1, 9), 8, 3.0),
        ];
        let out = aggregate_series(&samples, &jan());
        assert_relative_eq!(out[0], 2.0);
    }

    #[test]
    fn straddling_composite_splits_by_days() {
        // 8 days from Jan 29: 3 in January, 5 in February.
        let months = vec![
            MonthIndex::from_ym(2001, 1).unwrap(),
            MonthIndex::from_ym(2001, 2).unwrap(),
        ];
        let samples = [
            Sample::new(date(2001, 1, 1), 28, 0.0),
            Sample::new(date(2001, 1, 29), 8, 8.0),
        ];
        let out = aggregate_series(&samples, &months);
        assert_relative_eq!(out[0], 8.0 * 3.0 / 31.0);
        assert_relative_eq!(out[1], 8.0); // only the straddler covers February
    }

    #[test]
    fn uncovered_month_is_missing() {
        let out = aggregate_series(&[], &jan());
        assert!(out[0].is_nan());
        let only_feb = [Sample::new(date(2001, 2, 3), 8, 1.0)];
        assert!(aggregate_series(&only_feb, &jan())[0].is_nan());
    }

    #[test]
    fn missing_sample_values_are_skipped() {
        let samples = [
            Sample::new(date(2001, 1, 1), 8, f64::NAN),
            Sample::new(date(2001, 1, 9), 8, 4.0),
        ];
        assert_relative_eq!(aggregate_series(&samples, &jan())[0], 4.0);
    }

    #[test]
    fn grid_aggregation_places_cells() {
        let axes = GridAxes::from_edges(vec![0.0, 1.0], vec![0.0, 1.0, 2.0]);
        let cells = vec![
            vec![Sample::new(date(2001, 1, 1), 31, 7.0)],
            vec![], // uncovered cell
        ];
        let g = aggregate_monthly(&cells, &jan(), axes, "gpp", "kg m-2 s-1").unwrap();
        assert_relative_eq!(g.get(0, 0, 0), 7.0);
        assert!(g.is_missing(0, 0, 1));
    }
}
