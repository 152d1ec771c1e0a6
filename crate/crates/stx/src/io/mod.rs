//! Grid ingestion and serialization: the STXG binary container, a CSV
//! fixture format, unit conversion, study-period trimming, day-weighted
//! monthly aggregation, and conservative regridding.

mod aggregate;
mod csvgrid;
mod regrid;
mod stxg;
mod units;

pub use aggregate::{aggregate_monthly, aggregate_series, Sample};
pub use csvgrid::{read_csv_grid, write_csv_grid};
pub use regrid::regrid_conservative;
pub use stxg::{read_grid, read_grid_file, write_grid, write_grid_file};
pub use units::{convert_units, Unit};

use crate::error::{Result, StxError};
use crate::grid::{Grid3D, MonthIndex};

/// Trims a grid to the inclusive month range `[start, end]`.
///
/// Both endpoints must lie on the grid's time axis.
pub fn subset_time(grid: &Grid3D, start: MonthIndex, end: MonthIndex) -> Result<Grid3D> {
    if end < start {
        return Err(StxError::domain(format!(
            "study period ends ({end}) before it starts ({start})"
        )));
    }
    let axis = grid.time_axis();
    let (first, last) = (axis[0], *axis.last().unwrap());
    if start < first || end > last {
        return Err(StxError::domain(format!(
            "study period {start}..{end} is outside the record {first}..{last}"
        )));
    }
    let offset = (start.raw() - first.raw()) as usize;
    let ntime = (end.raw() - start.raw()) as usize + 1;
    let per_step = grid.nlat() * grid.nlon();
    let values = grid.values()[offset * per_step..(offset + ntime) * per_step].to_vec();
    Grid3D::new(
        grid.variable_name(),
        grid.units(),
        axis[offset..offset + ntime].to_vec(),
        grid.axes().clone(),
        values,
        grid.dtype(),
    )
}
