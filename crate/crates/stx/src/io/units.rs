//! Recognized physical units and conversions between compatible ones.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StxError};
use crate::grid::Grid3D;

/// The unit vocabulary the pipeline understands.
///
/// Carbon flux is canonically `kg m-2 s-1` (kilograms of carbon per square
/// metre per second). Precipitation flux carries a distinct `(pr)` marker so
/// water and carbon fluxes can never be silently mixed.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Unit {
    /// Carbon flux, `kg m-2 s-1` (canonical).
    KgPerM2PerS,
    /// Carbon flux, `gC m-2 day-1`.
    GramsCPerM2PerDay,
    /// Temperature, kelvin.
    Kelvin,
    /// Temperature, degrees Celsius.
    DegC,
    /// Precipitation total, `mm month-1` (1 mm ≡ 1 kg of water per m²).
    MmPerMonth,
    /// Precipitation flux, `kg m-2 s-1 (pr)`.
    PrKgPerM2PerS,
}

/// Dimension class of a unit; conversions exist only within one class.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum Class {
    CarbonFlux,
    Temperature,
    Precipitation,
}

impl Unit {
    fn class(self) -> Class {
        match self {
            Unit::KgPerM2PerS | Unit::GramsCPerM2PerDay => Class::CarbonFlux,
            Unit::Kelvin | Unit::DegC => Class::Temperature,
            Unit::MmPerMonth | Unit::PrKgPerM2PerS => Class::Precipitation,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::KgPerM2PerS => "kg m-2 s-1",
            Unit::GramsCPerM2PerDay => "gC m-2 day-1",
            Unit::Kelvin => "K",
            Unit::DegC => "degC",
            Unit::MmPerMonth => "mm month-1",
            Unit::PrKgPerM2PerS => "kg m-2 s-1 (pr)",
        };
        f.write_str(s)
    }
}

impl FromStr for Unit {
    type Err = StxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kg m-2 s-1" => Ok(Unit::KgPerM2PerS),
            "gC m-2 day-1" => Ok(Unit::GramsCPerM2PerDay),
            "K" => Ok(Unit::Kelvin),
            "degC" => Ok(Unit::DegC),
            "mm month-1" => Ok(Unit::MmPerMonth),
            "kg m-2 s-1 (pr)" => Ok(Unit::PrKgPerM2PerS),
            other => Err(StxError::domain(format!("unrecognized units {other:?}"))),
        }
    }
}

/// Converts a grid to `target` units.
///
/// Linear rescales and offsets are applied voxel-wise; the month-total →
/// month-mean-flux conversion for precipitation divides by the length of
/// each time step, so it is time-aware. Missing voxels stay missing.
/// Converting across dimension classes is a domain error.
pub fn convert_units(grid: &Grid3D, target: Unit) -> Result<Grid3D> {
    let source: Unit = grid.units().parse()?;
    if source.class() != target.class() {
        return Err(StxError::domain(format!(
            "cannot convert {source} to {target}: incompatible dimensions"
        )));
    }
    if source == target {
        return Ok(grid.clone());
    }

    let mut out = grid.clone();
    out.set_units(&target.to_string());
    let (ntime, nlat, nlon) = grid.dims();
    let per_step = nlat * nlon;
    match (source, target) {
        (Unit::GramsCPerM2PerDay, Unit::KgPerM2PerS) => scale(&mut out, 1e-3 / 86_400.0),
        (Unit::KgPerM2PerS, Unit::GramsCPerM2PerDay) => scale(&mut out, 86_400.0 * 1e3),
        (Unit::Kelvin, Unit::DegC) => offset(&mut out, -273.15),
        (Unit::DegC, Unit::Kelvin) => offset(&mut out, 273.15),
        (Unit::MmPerMonth, Unit::PrKgPerM2PerS) => {
            // 1 mm of water over 1 m² is 1 kg, accumulated over one month.
            for t in 0..ntime {
                let s = grid.time_axis()[t].seconds();
                for v in &mut out.values_mut()[t * per_step..(t + 1) * per_step] {
                    *v /= s;
                }
            }
        }
        (Unit::PrKgPerM2PerS, Unit::MmPerMonth) => {
            for t in 0..ntime {
                let s = grid.time_axis()[t].seconds();
                for v in &mut out.values_mut()[t * per_step..(t + 1) * per_step] {
                    *v *= s;
                }
            }
        }
        _ => unreachable!("same-class pairs are exhaustive"),
    }
    Ok(out)
}

fn scale(grid: &mut Grid3D, factor: f64) {
    for v in grid.values_mut() {
        *v *= factor;
    }
}

fn offset(grid: &mut Grid3D, delta: f64) {
    for v in grid.values_mut() {
        *v += delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridAxes, MonthIndex};
    use approx::assert_relative_eq;

    fn one_cell(units: &str, ntime: usize, fill: f64) -> Grid3D {
        let axes = GridAxes::from_edges(vec![0.0, 1.0], vec![0.0, 1.0]);
        Grid3D::filled(
            "x",
            units,
            MonthIndex::from_ym(2001, 1).unwrap(),
            ntime,
            &axes,
            fill,
        )
    }

    #[test]
    fn flux_per_day_to_per_second() {
        let g = one_cell("gC m-2 day-1", 1, 8.64);
        let out = convert_units(&g, Unit::KgPerM2PerS).unwrap();
        assert_relative_eq!(out.get(0, 0, 0), 1e-7, max_relative = 1e-12);
        assert_eq!(out.units(), "kg m-2 s-1");
    }

    #[test]
    fn zero_maps_to_zero_in_scaling_units() {
        let g = one_cell("gC m-2 day-1", 1, 0.0);
        assert_eq!(
            convert_units(&g, Unit::KgPerM2PerS).unwrap().get(0, 0, 0),
            0.0
        );
    }

    #[test]
    fn kelvin_and_celsius() {
        let g = one_cell("K", 1, 273.15);
        let c = convert_units(&g, Unit::DegC).unwrap();
        assert_relative_eq!(c.get(0, 0, 0), 0.0);
        let k = convert_units(&c, Unit::Kelvin).unwrap();
        assert_relative_eq!(k.get(0, 0, 0), 273.15);
    }

    #[test]
    fn precipitation_conversion_is_month_aware() {
        // Jan (31 d) and Feb (28 d) 2001: equal monthly totals give
        // different mean fluxes.
        let g = one_cell("mm month-1", 2, 86.4);
        let out = convert_units(&g, Unit::PrKgPerM2PerS).unwrap();
        assert_relative_eq!(out.get(0, 0, 0), 86.4 / 2_678_400.0, max_relative = 1e-12);
        assert_relative_eq!(out.get(1, 0, 0), 86.4 / 2_419_200.0, max_relative = 1e-12);
        let back = convert_units(&out, Unit::MmPerMonth).unwrap();
        assert_relative_eq!(back.get(0, 0, 0), 86.4, max_relative = 1e-15);
        assert_relative_eq!(back.get(1, 0, 0), 86.4, max_relative = 1e-15);
    }

    #[test]
    fn incompatible_classes_are_rejected() {
        let g = one_cell("K", 1, 280.0);
        assert!(convert_units(&g, Unit::KgPerM2PerS).is_err());
        let g = one_cell("kg m-2 s-1", 1, 1.0);
        assert!(convert_units(&g, Unit::PrKgPerM2PerS).is_err());
    }

    #[test]
    fn unknown_unit_string_is_rejected() {
        let g = one_cell("furlongs", 1, 1.0);
        assert!(convert_units(&g, Unit::Kelvin).is_err());
    }

    #[test]
    fn round_trip_is_tight() {
        let g = one_cell("gC m-2 day-1", 1, 3.21);
        let there = convert_units(&g, Unit::KgPerM2PerS).unwrap();
        let back = convert_units(&there, Unit::GramsCPerM2PerDay).unwrap();
        assert_relative_eq!(back.get(0, 0, 0), 3.21, max_relative = 1e-15);
    }

    #[test]
    fn missing_stays_missing() {
        let mut g = one_cell("K", 1, 280.0);
        g.set(0, 0, 0, f64::NAN);
        let out = convert_units(&g, Unit::DegC).unwrap();
        assert!(out.is_missing(0, 0, 0));
    }
}
