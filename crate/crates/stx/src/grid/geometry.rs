//! Spherical cell areas and per-grid geometry factors.

use crate::error::{Result, StxError};
use crate::grid::Grid3D;

/// Mean Earth radius in metres. Fixed so that areas (and therefore carbon
/// integrals) are exactly reproducible.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Area in m² of the spherical quadrilateral bounded by two latitudes and
/// spanning `lon_width` degrees of longitude:
/// `A = R² · Δλ · (sin φ₂ − sin φ₁)`.
pub fn cell_area(lat_lo: f64, lat_hi: f64, lon_width: f64) -> Result<f64> {
    if !(-90.0..=90.0).contains(&lat_lo) || !(-90.0..=90.0).contains(&lat_hi) {
        return Err(StxError::domain(format!(
            "latitudes must lie in [-90, 90], got [{lat_lo}, {lat_hi}]"
        )));
    }
    if lat_lo >= lat_hi {
        return Err(StxError::domain(format!(
            "latitude bounds must satisfy lo < hi, got [{lat_lo}, {lat_hi}]"
        )));
    }
    if !(lon_width > 0.0) || lon_width > 360.0 {
        return Err(StxError::domain(format!(
            "longitude width must lie in (0, 360], got {lon_width}"
        )));
    }
    let dl = lon_width.to_radians();
    let dsin = lat_hi.to_radians().sin() - lat_lo.to_radians().sin();
    Ok(EARTH_RADIUS_M * EARTH_RADIUS_M * dl * dsin)
}

/// Precomputed geometry of one grid: cell areas (factorized into a latitude
/// band term and a longitude width term) and the duration of every time step.
///
/// `area(y, x) = band_m2_per_rad[y] · lon_width_rad[x]`
#[derive(Debug, Clone)]
pub struct CellGeometry {
    band_m2_per_rad: Vec<f64>,
    lon_width_rad: Vec<f64>,
    month_seconds: Vec<f64>,
}

impl CellGeometry {
    /// Derives areas and month durations from a grid's axes.
    pub fn of(grid: &Grid3D) -> Self {
        let band_m2_per_rad = grid
            .lat_edges()
            .windows(2)
            .map(|e| {
                EARTH_RADIUS_M
                    * EARTH_RADIUS_M
                    * (e[1].to_radians().sin() - e[0].to_radians().sin())
            })
            .collect();
        let lon_width_rad = grid
            .lon_edges()
            .windows(2)
            .map(|e| (e[1] - e[0]).to_radians())
            .collect();
        let month_seconds = grid.time_axis().iter().map(|m| m.seconds()).collect();
        CellGeometry {
            band_m2_per_rad,
            lon_width_rad,
            month_seconds,
        }
    }

    /// Area of the cell at (lat index, lon index) in m².
    pub fn area(&self, y: usize, x: usize) -> f64 {
        self.band_m2_per_rad[y] * self.lon_width_rad[x]
    }

    /// Duration of time step `t` in seconds.
    pub fn step_seconds(&self, t: usize) -> f64 {
        self.month_seconds[t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::global_grid_axes;
    use approx::assert_relative_eq;

    #[test]
    fn equatorial_half_degree_cell() {
        let a = cell_area(0.0, 0.5, 0.5).unwrap();
        assert_relative_eq!(a, 3.0912e9, max_relative = 1e-4);
    }

    #[test]
    fn full_sphere_area() {
        let a = cell_area(-90.0, 90.0, 360.0).unwrap();
        let sphere = 4.0 * std::f64::consts::PI * EARTH_RADIUS_M * EARTH_RADIUS_M;
        assert_relative_eq!(a, sphere, max_relative = 1e-12);
        assert_relative_eq!(a, 5.1006e14, max_relative = 1e-4);
    }

    #[test]
    fn rejects_degenerate_and_inverted_bounds() {
        assert!(cell_area(10.0, 10.0, 0.5).is_err());
        assert!(cell_area(20.0, 10.0, 0.5).is_err());
        assert!(cell_area(0.0, 1.0, 0.0).is_err());
        assert!(cell_area(0.0, 95.0, 1.0).is_err());
    }

    #[test]
    fn partition_of_a_band_sums_to_the_band() {
        // Split [30, 35]° × 360° into uneven latitude slices and longitude
        // strips; the pieces must sum to the zone area.
        let whole = cell_area(30.0, 35.0, 360.0).unwrap();
        let cuts = [30.0, 31.3, 32.0, 34.9, 35.0];
        let widths = [100.0, 260.0];
        let mut sum = 0.0;
        for pair in cuts.windows(2) {
            for w in widths {
                sum += cell_area(pair[0], pair[1], w).unwrap();
            }
        }
        assert_relative_eq!(sum, whole, max_relative = 1e-12);
    }

    #[test]
    fn grid_geometry_matches_direct_areas() {
        let axes = global_grid_axes(4, 8);
        let grid = crate::grid::Grid3D::filled(
            "x",
            "1",
            crate::grid::MonthIndex::from_ym(2001, 1).unwrap(),
            2,
            &axes,
            0.0,
        );
        let geom = CellGeometry::of(&grid);
        for y in 0..4 {
            for x in 0..8 {
                let direct = cell_area(
                    grid.lat_edges()[y],
                    grid.lat_edges()[y + 1],
                    grid.lon_edges()[x + 1] - grid.lon_edges()[x],
                )
                .unwrap();
                assert_relative_eq!(geom.area(y, x), direct, max_relative = 1e-12);
            }
        }
        assert_eq!(geom.step_seconds(0), 2_678_400.0);
        assert_eq!(geom.step_seconds(1), 2_419_200.0);
    }
}
