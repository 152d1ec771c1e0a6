//! First-order conservative remapping between regular lat–lon grids.

use crate::error::{Result, StxError};
use crate::grid::{DataKind, Grid3D, GridAxes, EARTH_RADIUS_M};

/// Conservatively regrids `src` onto the grid defined by the destination
/// cell edges.
///
/// Every destination value is the overlap-area-weighted mean of the source
/// cells it intersects, skipping missing contributors:
/// `dst = Σ (A_overlap · src) / Σ A_overlap`. On a sphere the overlap area
/// factorizes into independent latitude (`Δ sin φ`) and longitude (`Δλ`)
/// terms, so the weights are precomputed per axis. Destination cells with no
/// source overlap (or only missing contributors) become missing. When the
/// domains coincide and nothing is missing, the global area-weighted
/// integral is preserved to rounding error.
///
/// Both grids must be in the same longitude frame (e.g. both 0..360); the
/// overlap search does not unwrap coordinates.
pub fn regrid_conservative(
    src: &Grid3D,
    dst_lat_edges: &[f64],
    dst_lon_edges: &[f64],
) -> Result<Grid3D> {
    let lat_w = axis_overlaps(src.lat_edges(), dst_lat_edges, |lo, hi| {
        hi.to_radians().sin() - lo.to_radians().sin()
    });
    let lon_w = axis_overlaps(src.lon_edges(), dst_lon_edges, |lo, hi| {
        (hi - lo).to_radians()
    });
    if lat_w.iter().all(Vec::is_empty) || lon_w.iter().all(Vec::is_empty) {
        return Err(StxError::domain(
            "source and destination domains do not overlap",
        ));
    }

    let ntime = src.ntime();
    let dst_nlat = dst_lat_edges.len() - 1;
    let dst_nlon = dst_lon_edges.len() - 1;
    let mut values = vec![f64::NAN; ntime * dst_nlat * dst_nlon];
    let r2 = EARTH_RADIUS_M * EARTH_RADIUS_M;
    for t in 0..ntime {
        for (dy, lat_row) in lat_w.iter().enumerate() {
            for (dx, lon_row) in lon_w.iter().enumerate() {
                let mut num = 0.0;
                let mut den = 0.0;
                for &(sy, wy) in lat_row {
                    for &(sx, wx) in lon_row {
                        let v = src.get(t, sy, sx);
                        if v.is_nan() {
                            continue;
                        }
                        let w = r2 * wy * wx;
                        num += w * v;
                        den += w;
                    }
                }
                if den > 0.0 {
                    values[(t * dst_nlat + dy) * dst_nlon + dx] = num / den;
                }
            }
        }
    }

    Grid3D::new(
        src.variable_name(),
        src.units(),
        src.time_axis().to_vec(),
        GridAxes::from_edges(dst_lat_edges.to_vec(), dst_lon_edges.to_vec()),
        values,
        DataKind::F64,
    )
}

/// For each destination interval, the source intervals it overlaps and the
/// measure of each overlap under `measure(lo, hi)`.
fn axis_overlaps(
    src_edges: &[f64],
    dst_edges: &[f64],
    measure: impl Fn(f64, f64) -> f64,
) -> Vec<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(dst_edges.len().saturating_sub(1));
    for d in dst_edges.windows(2) {
        let mut row = Vec::new();
        for (j, s) in src_edges.windows(2).enumerate() {
            let lo = s[0].max(d[0]);
            let hi = s[1].min(d[1]);
            if lo < hi {
                row.push((j, measure(lo, hi)));
            }
        }
        out.push(row);
    }
    out
}
