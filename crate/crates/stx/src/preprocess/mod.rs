//! Per-cell preprocessing of gridded monthly series: SSA decomposition
//! into trend, annual cycle, and anomalies, plus the driver-specific
//! scalings used for temperature and precipitation fields.

mod ssa;

pub use ssa::{
    default_window, ssa_decompose, EigenTriple, SsaDecomposition, SsaGroup, TREND_CUTOFF,
};

use rayon::prelude::*;

use crate::error::{Result, StxError};
use crate::grid::Grid3D;

/// Degeneracy floor: a per-cell scale (standard deviation or record total)
/// at or below this fraction of the cell's magnitude counts as zero, so
/// numerically-constant cells do not blow up under division.
const DEGENERATE_EPS: f64 = 1e-9;

/// A scaled grid plus the cells whose scale factor was degenerate (zero
/// anomaly variance, or zero record total). Degenerate cells are written
/// as all-zero series; the list is in `(lat, lon)` scan order.
#[derive(Clone, Debug)]
pub struct ScaledGrid {
    pub grid: Grid3D,
    pub degenerate_cells: Vec<(usize, usize)>,
}

/// Map every gap-free cell series through `f`; cells containing any
/// missing month come back as `None`. Cell results are computed in
/// parallel but collected in scan order, so output is deterministic.
fn per_cell<F>(g: &Grid3D, f: F) -> Result<Vec<Option<Vec<f64>>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let (ntime, nlat, nlon) = g.dims();
    for &v in g.values() {
        if v.is_infinite() {
            return Err(StxError::validation(
                "grid contains infinite values; missing data must be encoded as NaN",
            ));
        }
    }
    (0..nlat * nlon)
        .into_par_iter()
        .map(|cell| {
            let (y, x) = (cell / nlon, cell % nlon);
            let series = g.cell_series(y, x);
            if series.iter().any(|v| v.is_nan()) {
                return Ok(None);
            }
            debug_assert_eq!(series.len(), ntime);
            f(&series).map(Some)
        })
        .collect()
}

fn assemble(g: &Grid3D, cells: Vec<Option<Vec<f64>>>, units: Option<&str>) -> Result<Grid3D> {
    let (ntime, nlat, nlon) = g.dims();
    let mut values = vec![f64::NAN; ntime * nlat * nlon];
    for (cell, series) in cells.iter().enumerate() {
        if let Some(series) = series {
            let (y, x) = (cell / nlon, cell % nlon);
            for (t, &v) in series.iter().enumerate() {
                values[(t * nlat + y) * nlon + x] = v;
            }
        }
    }
    g.derived(values, units)
}

/// SSA anomalies of every cell: the input minus its reconstructed trend
/// and annual cycle, in the input's physical units. Cells with any
/// missing month pass through as all-missing.
pub fn compute_anomalies(g: &Grid3D, window: usize) -> Result<Grid3D> {
    let cells = per_cell(g, |series| Ok(ssa_decompose(series, window)?.anomaly))?;
    assemble(g, cells, None)
}

/// Standardized temperature anomalies: per cell,
/// `(value − trend − annual) / σ` with σ the sample standard deviation of
/// the cell's anomaly series. Dimensionless; cells with zero anomaly
/// variance come back as zeros and are flagged.
pub fn scale_temperature(g: &Grid3D, window: usize) -> Result<ScaledGrid> {
    let cells = per_cell(g, |series| {
        let anomaly = ssa_decompose(series, window)?.anomaly;
        let magnitude = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sigma = sample_std(&anomaly);
        if sigma <= DEGENERATE_EPS * magnitude.max(1.0) {
            return Ok(vec![0.0; anomaly.len()]);
        }
        Ok(anomaly.iter().map(|v| v / sigma).collect())
    })?;
    let degenerate_cells = zero_cells(&cells, g.nlon());
    let grid = assemble(g, cells, Some("1"))?;
    Ok(ScaledGrid {
        grid,
        degenerate_cells,
    })
}

/// Normalized precipitation: per cell, `(value − trend) / Σ value` with
/// the sum taken over the full record. The annual cycle is kept — unlike
/// temperature, precipitation extremes are judged against the seasonal
/// rhythm, not after removing it. Dimensionless; all-dry cells (zero
/// record total) come back as zeros and are flagged.
pub fn normalize_precip(g: &Grid3D, window: usize) -> Result<ScaledGrid> {
    let cells = per_cell(g, |series| {
        if let Some(bad) = series.iter().find(|&&v| v < 0.0) {
            return Err(StxError::validation(format!(
                "precipitation must be non-negative, found {bad}"
            )));
        }
        let total: f64 = series.iter().sum();
        let magnitude = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if total <= DEGENERATE_EPS * magnitude.max(1.0) {
            return Ok(vec![0.0; series.len()]);
        }
        let trend = ssa_decompose(series, window)?.trend;
        Ok(series
            .iter()
            .zip(&trend)
            .map(|(&v, &tr)| (v - tr) / total)
            .collect())
    })?;
    let degenerate_cells = zero_cells(&cells, g.nlon());
    let grid = assemble(g, cells, Some("1"))?;
    Ok(ScaledGrid {
        grid,
        degenerate_cells,
    })
}

/// Sample standard deviation (n − 1 denominator).
fn sample_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

fn zero_cells(cells: &[Option<Vec<f64>>], nlon: usize) -> Vec<(usize, usize)> {
    cells
        .iter()
        .enumerate()
        .filter_map(|(cell, series)| match series {
            Some(s) if s.iter().all(|&v| v == 0.0) => Some((cell / nlon, cell % nlon)),
            _ => None,
        })
        .collect()
}
