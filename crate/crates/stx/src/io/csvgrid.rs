//! A text fixture format for small grids.
//!
//! Header lines carry the metadata, then one row per `(time, lat)` pair in
//! time-major order lists the longitude values:
//!
//! ```text
//! # var=gpp
//! # units=kg m-2 s-1
//! # lat_edges=-90,0,90
//! # lon_edges=0,180,360
//! # t0=2001-01
//! 1.5,2.0
//! 3.0,NA
//! ...
//! ```
//!
//! `NA` marks a missing voxel. Cell centers are the edge midpoints. The
//! number of months is inferred from the row count.

use crate::error::{Result, StxError};
use crate::grid::{DataKind, Grid3D, GridAxes, MonthIndex};

/// Parses the CSV fixture format.
pub fn read_csv_grid(text: &str) -> Result<Grid3D> {
    let mut var: Option<String> = None;
    let mut units: Option<String> = None;
    let mut lat_edges: Option<Vec<f64>> = None;
    let mut lon_edges: Option<Vec<f64>> = None;
    let mut t0: Option<MonthIndex> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let header = header.trim();
            let (key, value) = header.split_once('=').ok_or_else(|| {
                StxError::validation(format!("line {}: header without '='", lineno + 1))
            })?;
            let value = value.trim();
            match key.trim() {
                "var" => var = Some(value.to_string()),
                "units" => units = Some(value.to_string()),
                "lat_edges" => lat_edges = Some(parse_numbers(value, lineno)?),
                "lon_edges" => lon_edges = Some(parse_numbers(value, lineno)?),
                "t0" => t0 = Some(value.parse()?),
                other => {
                    return Err(StxError::validation(format!(
                        "line {}: unknown header {other:?}",
                        lineno + 1
                    )))
                }
            }
        } else {
            let row = line
                .split(',')
                .map(|cell| parse_cell(cell.trim(), lineno))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
    }

    let missing = |what: &str| StxError::validation(format!("missing required header # {what}="));
    let var = var.ok_or_else(|| missing("var"))?;
    let units = units.ok_or_else(|| missing("units"))?;
    let lat_edges = lat_edges.ok_or_else(|| missing("lat_edges"))?;
    let lon_edges = lon_edges.ok_or_else(|| missing("lon_edges"))?;
    let t0 = t0.ok_or_else(|| missing("t0"))?;

    if lat_edges.len() < 2 || lon_edges.len() < 2 {
        return Err(StxError::validation("axes need at least two edges"));
    }
    let nlat = lat_edges.len() - 1;
    let nlon = lon_edges.len() - 1;
    if rows.is_empty() || rows.len() % nlat != 0 {
        return Err(StxError::validation(format!(
            "{} data rows is not a multiple of nlat = {nlat}",
            rows.len()
        )));
    }
    let ntime = rows.len() / nlat;
    let mut values = Vec::with_capacity(ntime * nlat * nlon);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != nlon {
            return Err(StxError::validation(format!(
                "data row {} has {} values, lon axis implies {nlon}",
                i + 1,
                row.len()
            )));
        }
        values.extend_from_slice(row);
    }
    let time_axis = (0..ntime)
        .map(|i| MonthIndex::from_raw(t0.raw() + i as i32))
        .collect();
    Grid3D::new(
        var,
        units,
        time_axis,
        GridAxes::from_edges(lat_edges, lon_edges),
        values,
        DataKind::F64,
    )
}

/// Renders a grid in the CSV fixture format (inverse of [`read_csv_grid`]
/// up to float formatting; cell centers are not stored).
pub fn write_csv_grid(grid: &Grid3D) -> String {
    let join = |values: &[f64]| {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = String::new();
    out.push_str(&format!("# var={}\n", grid.variable_name()));
    out.push_str(&format!("# units={}\n", grid.units()));
    out.push_str(&format!("# lat_edges={}\n", join(grid.lat_edges())));
    out.push_str(&format!("# lon_edges={}\n", join(grid.lon_edges())));
    out.push_str(&format!("# t0={}\n", grid.time_axis()[0]));
    let (ntime, nlat, nlon) = grid.dims();
    for t in 0..ntime {
        for y in 0..nlat {
            let row: Vec<String> = (0..nlon)
                .map(|x| {
                    let v = grid.get(t, y, x);
                    if v.is_nan() {
                        "NA".to_string()
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

fn parse_numbers(value: &str, lineno: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                StxError::format(format!("line {}: {s:?} is not a number", lineno + 1))
            })
        })
        .collect()
}

fn parse_cell(cell: &str, lineno: usize) -> Result<f64> {
    if cell == "NA" {
        return Ok(f64::NAN);
    }
    cell.parse::<f64>().map_err(|_| {
        StxError::format(format!(
            "line {}: {cell:?} is neither a number nor NA",
            lineno + 1
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_MONTHS: &str = "\
# var=gpp
# units=kg m-2 s-1
# lat_edges=-90,90
# lon_edges=0,360
# t0=2001-01
1
2
";

    #[test]
    fn parses_a_minimal_grid() {
        let g = read_csv_grid(TWO_MONTHS).unwrap();
        assert_eq!(g.dims(), (2, 1, 1));
        assert_eq!(g.get(0, 0, 0), 1.0);
        assert_eq!(g.get(1, 0, 0), 2.0);
        assert_eq!(g.variable_name(), "gpp");
        assert_eq!(g.time_axis()[1].to_string(), "2001-02");
        assert_eq!(g.lat_centers(), &[0.0]);
    }

    #[test]
    fn na_becomes_missing() {
        let text = TWO_MONTHS.replace("2\n", "NA\n");
        let g = read_csv_grid(&text).unwrap();
        assert!(g.is_missing(1, 0, 0));
    }

    #[test]
    fn missing_header_is_rejected() {
        let text = TWO_MONTHS.replace("# lat_edges=-90,90\n", "");
        let err = read_csv_grid(&text);
        assert!(matches!(err, Err(StxError::Validation(_))));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let text = TWO_MONTHS.replace("1\n", "1,5\n");
        assert!(read_csv_grid(&text).is_err());
    }

    #[test]
    fn row_count_must_fill_whole_months() {
        let text = format!("{TWO_MONTHS}3\n").replace("# lat_edges=-90,90", "# lat_edges=-90,0,90");
        assert!(read_csv_grid(&text).is_err());
    }

    #[test]
    fn garbage_cells_are_format_errors() {
        let text = TWO_MONTHS.replace("2\n", "two\n");
        assert!(matches!(read_csv_grid(&text), Err(StxError::Format(_))));
    }

    #[test]
    fn writes_and_reads_back() {
        let mut g = read_csv_grid(TWO_MONTHS).unwrap();
        g.set(1, 0, 0, f64::NAN);
        let text = write_csv_grid(&g);
        let back = read_csv_grid(&text).unwrap();
        assert_eq!(back.dims(), g.dims());
        assert_eq!(back.get(0, 0, 0), 1.0);
        assert!(back.is_missing(1, 0, 0));
        assert_eq!(back.axes(), g.axes());
    }
}
