//! The core data model: a 3-D (time × lat × lon) volume of physical values
//! with axis metadata, plus calendar, geometry, and order-statistic helpers.

mod geometry;
mod month;
mod percentile;

pub use geometry::{cell_area, CellGeometry, EARTH_RADIUS_M};
pub use month::{month_seconds, MonthIndex};
pub use percentile::{median, percentile, percentile_sorted};

use crate::error::{Result, StxError};

/// Width of the numeric type a grid was stored with. Values are held as
/// `f64` in memory either way; the kind is kept so a file round-trips
/// byte-identically.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum DataKind {
    F32,
    F64,
}

impl DataKind {
    /// The container's 8-bit type code.
    pub fn code(self) -> u8 {
        match self {
            DataKind::F32 => 0,
            DataKind::F64 => 1,
        }
    }

    /// Inverse of [`DataKind::code`].
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DataKind::F32),
            1 => Ok(DataKind::F64),
            other => Err(StxError::format(format!("unknown dtype code {other}"))),
        }
    }
}

/// Spatial axes of a regular latitude–longitude grid: cell edges and cell
/// centers, in degrees, both strictly ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAxes {
    pub lat_edges: Vec<f64>,
    pub lat_centers: Vec<f64>,
    pub lon_edges: Vec<f64>,
    pub lon_centers: Vec<f64>,
}

impl GridAxes {
    /// Axes with centers at the midpoints of consecutive edges.
    pub fn from_edges(lat_edges: Vec<f64>, lon_edges: Vec<f64>) -> Self {
        let mid = |edges: &[f64]| {
            edges
                .windows(2)
                .map(|e| 0.5 * (e[0] + e[1]))
                .collect::<Vec<_>>()
        };
        GridAxes {
            lat_centers: mid(&lat_edges),
            lon_centers: mid(&lon_edges),
            lat_edges,
            lon_edges,
        }
    }
}

/// A gridded monthly time series: one value per (time, lat, lon) voxel, in
/// row-major order with time slowest. Missing values are NaN.
///
/// Construction validates every structural invariant (monotone axes, centers
/// inside their cells, gap-free consecutive months, payload size), so any
/// `Grid3D` in hand is well-formed.
#[derive(Clone, Debug)]
pub struct Grid3D {
    variable_name: String,
    units: String,
    time_axis: Vec<MonthIndex>,
    axes: GridAxes,
    values: Vec<f64>,
    dtype: DataKind,
}

impl Grid3D {
    pub fn new(
        variable_name: impl Into<String>,
        units: impl Into<String>,
        time_axis: Vec<MonthIndex>,
        axes: GridAxes,
        values: Vec<f64>,
        dtype: DataKind,
    ) -> Result<Self> {
        validate_axes(&time_axis, &axes)?;
        let expect = time_axis.len() * (axes.lat_edges.len() - 1) * (axes.lon_edges.len() - 1);
        if values.len() != expect {
            return Err(StxError::validation(format!(
                "value payload has {} entries, dims imply {expect}",
                values.len()
            )));
        }
        Ok(Grid3D {
            variable_name: variable_name.into(),
            units: units.into(),
            time_axis,
            axes,
            values,
            dtype,
        })
    }

    /// Convenience constructor: `ntime` consecutive months starting at `t0`,
    /// every voxel set to `fill`, stored as binary64.
    ///
    /// # Panics
    /// Panics if the axes are invalid; intended for fixtures and tests where
    /// the axes are known good.
    pub fn filled(
        variable_name: &str,
        units: &str,
        t0: MonthIndex,
        ntime: usize,
        axes: &GridAxes,
        fill: f64,
    ) -> Self {
        let time_axis: Vec<MonthIndex> = (0..ntime)
            .map(|i| MonthIndex::from_raw(t0.raw() + i as i32))
            .collect();
        let n = ntime * axes.lat_centers.len() * axes.lon_centers.len();
        Grid3D::new(
            variable_name,
            units,
            time_axis,
            axes.clone(),
            vec![fill; n],
            DataKind::F64,
        )
        .expect("filled: invalid axes")
    }

    /// A grid with the same axes and dtype but different values (and
    /// optionally different units), for derived quantities.
    pub fn derived(&self, values: Vec<f64>, units: Option<&str>) -> Result<Self> {
        Grid3D::new(
            self.variable_name.clone(),
            units.unwrap_or(&self.units),
            self.time_axis.clone(),
            self.axes.clone(),
            values,
            self.dtype,
        )
    }

    pub fn ntime(&self) -> usize {
        self.time_axis.len()
    }

    pub fn nlat(&self) -> usize {
        self.axes.lat_centers.len()
    }

    pub fn nlon(&self) -> usize {
        self.axes.lon_centers.len()
    }

    /// `(ntime, nlat, nlon)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.ntime(), self.nlat(), self.nlon())
    }

    /// Linear index of voxel `(t, y, x)`.
    #[inline]
    pub fn idx(&self, t: usize, y: usize, x: usize) -> usize {
        (t * self.nlat() + y) * self.nlon() + x
    }

    #[inline]
    pub fn get(&self, t: usize, y: usize, x: usize) -> f64 {
        self.values[self.idx(t, y, x)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, y: usize, x: usize, v: f64) {
        let i = self.idx(t, y, x);
        self.values[i] = v;
    }

    /// True if the voxel is missing (NaN).
    #[inline]
    pub fn is_missing(&self, t: usize, y: usize, x: usize) -> bool {
        self.get(t, y, x).is_nan()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn variable_name(&self) -> &str {
        &self.variable_name
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub(crate) fn set_units(&mut self, units: &str) {
        self.units = units.to_string();
    }

    pub fn time_axis(&self) -> &[MonthIndex] {
        &self.time_axis
    }

    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn lat_edges(&self) -> &[f64] {
        &self.axes.lat_edges
    }

    pub fn lat_centers(&self) -> &[f64] {
        &self.axes.lat_centers
    }

    pub fn lon_edges(&self) -> &[f64] {
        &self.axes.lon_edges
    }

    pub fn lon_centers(&self) -> &[f64] {
        &self.axes.lon_centers
    }

    pub fn dtype(&self) -> DataKind {
        self.dtype
    }

    /// True when the longitude axis spans the full circle (360° within 1e-6),
    /// i.e. the grid wraps at the antimeridian.
    pub fn lon_full_circle(&self) -> bool {
        let span = self.axes.lon_edges.last().unwrap() - self.axes.lon_edges[0];
        (span - 360.0).abs() <= 1e-6
    }

    /// The time series of one cell, in time order (may contain NaN).
    pub fn cell_series(&self, y: usize, x: usize) -> Vec<f64> {
        (0..self.ntime()).map(|t| self.get(t, y, x)).collect()
    }

    /// True when both grids have identical dims, axes, and time axes, i.e.
    /// voxel indices refer to the same physical locations.
    pub fn same_layout(&self, other: &Grid3D) -> bool {
        self.time_axis == other.time_axis && self.axes == other.axes
    }
}

fn validate_axes(time_axis: &[MonthIndex], axes: &GridAxes) -> Result<()> {
    if time_axis.is_empty() {
        return Err(StxError::validation("time axis is empty"));
    }
    for pair in time_axis.windows(2) {
        if pair[1].raw() != pair[0].raw() + 1 {
            return Err(StxError::validation(format!(
                "time axis must be consecutive months, found {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    check_edges_and_centers("lat", &axes.lat_edges, &axes.lat_centers)?;
    check_edges_and_centers("lon", &axes.lon_edges, &axes.lon_centers)?;
    let (lat_lo, lat_hi) = (axes.lat_edges[0], *axes.lat_edges.last().unwrap());
    if lat_lo < -90.0 - 1e-9 || lat_hi > 90.0 + 1e-9 {
        return Err(StxError::validation(format!(
            "lat edges must lie within [-90, 90], got [{lat_lo}, {lat_hi}]"
        )));
    }
    let lon_span = axes.lon_edges.last().unwrap() - axes.lon_edges[0];
    if lon_span > 360.0 + 1e-9 {
        return Err(StxError::validation(format!(
            "lon span must not exceed 360°, got {lon_span}"
        )));
    }
    Ok(())
}

fn check_edges_and_centers(name: &str, edges: &[f64], centers: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(StxError::validation(format!(
            "{name} axis needs at least 2 edges, got {}",
            edges.len()
        )));
    }
    if centers.len() + 1 != edges.len() {
        return Err(StxError::validation(format!(
            "{name} axis has {} centers for {} edges",
            centers.len(),
            edges.len()
        )));
    }
    if edges.iter().any(|e| !e.is_finite()) || centers.iter().any(|c| !c.is_finite()) {
        return Err(StxError::validation(format!("{name} axis is not finite")));
    }
    for (i, pair) in edges.windows(2).enumerate() {
        if !(pair[0] < pair[1]) {
            return Err(StxError::validation(format!(
                "{name} edges must be strictly increasing, edge[{i}] = {} ≥ edge[{}] = {}",
                pair[0],
                i + 1,
                pair[1]
            )));
        }
        if !(pair[0] < centers[i] && centers[i] < pair[1]) {
            return Err(StxError::validation(format!(
                "{name} center[{i}] = {} is not strictly inside ({}, {})",
                centers[i], pair[0], pair[1]
            )));
        }
    }
    Ok(())
}
