//! Quantification and ranking of labeled extreme events: integrated
//! carbon loss, affected area, duration, cumulative-share curves, and
//! spatial diagnostic maps.

mod tls;

pub use tls::tls_fit;

use crate::detect::{ExtremeMask, Labeling};
use crate::error::{Result, StxError};
use crate::grid::{CellGeometry, Grid3D, MonthIndex};

const KG_PER_PG: f64 = 1e12;
const KG_PER_TG: f64 = 1e9;

/// Aggregate statistics of one labeled component.
///
/// The carbon integral assumes anomalies in kg C m⁻² s⁻¹ and is the sum of
/// `anomaly × cell area × month seconds` over member voxels, expressed in
/// Pg C; it is negative for uptake losses. Bounding-box fields are
/// inclusive index ranges in grid coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStats {
    /// Label id from the [`Labeling`] (1-based, scan order).
    pub id: u32,
    /// 1 = largest `|carbon_integral_pg|`; ties broken by
    /// (start month, min lat index, min lon index).
    pub rank: usize,
    pub voxel_count: usize,
    pub carbon_integral_pg: f64,
    /// Union of member cells' areas, each distinct cell counted once.
    pub affected_area_m2: f64,
    /// Σ of member cell areas per voxel-month (cells recounted every
    /// month they participate) — a secondary, duration-weighted measure.
    pub voxel_month_area_m2: f64,
    /// `max t − min t + 1` over member voxels.
    pub duration_months: usize,
    /// Calendar month of the first member voxel.
    pub start: MonthIndex,
    pub time_idx: (usize, usize),
    pub lat_idx: (usize, usize),
    pub lon_idx: (usize, usize),
}

/// Per-component statistics, returned sorted by rank (descending absolute
/// carbon integral). Labeling and anomaly grid must share dimensions.
pub fn component_metrics(labeling: &Labeling, anomalies: &Grid3D) -> Result<Vec<ComponentStats>> {
    if labeling.dims() != anomalies.dims() {
        return Err(StxError::domain(format!(
            "labeling dims {:?} do not match anomaly grid dims {:?}",
            labeling.dims(),
            anomalies.dims()
        )));
    }
    let n = labeling.n_components();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (ntime, nlat, nlon) = anomalies.dims();
    let geometry = CellGeometry::of(anomalies);

    struct Acc {
        voxels: usize,
        kg: f64,
        voxel_month_m2: f64,
        t: (usize, usize),
        y: (usize, usize),
        x: (usize, usize),
    }
    let mut accs: Vec<Acc> = (0..n)
        .map(|_| Acc {
            voxels: 0,
            kg: 0.0,
            voxel_month_m2: 0.0,
            t: (usize::MAX, 0),
            y: (usize::MAX, 0),
            x: (usize::MAX, 0),
        })
        .collect();
    // (component, cell) pairs for the distinct-cell area union.
    let mut member_cells: Vec<(u32, u32)> = Vec::new();

    let labels = labeling.labels();
    for t in 0..ntime {
        let seconds = geometry.step_seconds(t);
        for y in 0..nlat {
            for x in 0..nlon {
                let id = labels[(t * nlat + y) * nlon + x];
                if id == 0 {
                    continue;
                }
                let value = anomalies.get(t, y, x);
                let area = geometry.area(y, x);
                let acc = &mut accs[(id - 1) as usize];
                acc.voxels += 1;
                acc.kg += value * area * seconds;
                acc.voxel_month_m2 += area;
                acc.t = (acc.t.0.min(t), acc.t.1.max(t));
                acc.y = (acc.y.0.min(y), acc.y.1.max(y));
                acc.x = (acc.x.0.min(x), acc.x.1.max(x));
                member_cells.push((id, (y * nlon + x) as u32));
            }
        }
    }

    member_cells.sort_unstable();
    member_cells.dedup();
    let mut union_area = vec![0.0f64; n];
    for &(id, cell) in &member_cells {
        let (y, x) = ((cell as usize) / nlon, (cell as usize) % nlon);
        union_area[(id - 1) as usize] += geometry.area(y, x);
    }

    let mut stats: Vec<ComponentStats> = accs
        .into_iter()
        .enumerate()
        .map(|(i, acc)| ComponentStats {
            id: i as u32 + 1,
            rank: 0,
            voxel_count: acc.voxels,
            carbon_integral_pg: acc.kg / KG_PER_PG,
            affected_area_m2: union_area[i],
            voxel_month_area_m2: acc.voxel_month_m2,
            duration_months: acc.t.1 - acc.t.0 + 1,
            start: anomalies.time_axis()[acc.t.0],
            time_idx: acc.t,
            lat_idx: acc.y,
            lon_idx: acc.x,
        })
        .collect();

    stats.sort_by(|a, b| {
        b.carbon_integral_pg
            .abs()
            .total_cmp(&a.carbon_integral_pg.abs())
            .then(a.start.raw().cmp(&b.start.raw()))
            .then(a.lat_idx.0.cmp(&b.lat_idx.0))
            .then(a.lon_idx.0.cmp(&b.lon_idx.0))
    });
    for (i, s) in stats.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    Ok(stats)
}

/// One point of a cumulative-share curve.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CumulativePoint {
    /// Number of top-ranked components included.
    pub k: usize,
    /// Σ top-K |carbon integral| over the total, in [0, 1].
    pub share: f64,
    /// Signed cumulative carbon integral of the top K, in Pg C.
    pub cumulative_pg: f64,
}

/// Cumulative concentration of carbon loss across ranked components: the
/// share is non-decreasing in K and reaches exactly 1 at K = total.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CumulativeShareCurve {
    pub points: Vec<CumulativePoint>,
}

/// The full cumulative curve over ranked stats (one point per K).
pub fn cumulative_curve(stats: &[ComponentStats]) -> CumulativeShareCurve {
    let total: f64 = stats.iter().map(|s| s.carbon_integral_pg.abs()).sum();
    let mut points = Vec::with_capacity(stats.len());
    let mut cum_abs = 0.0;
    let mut cum_signed = 0.0;
    for (i, s) in stats.iter().enumerate() {
        cum_abs += s.carbon_integral_pg.abs();
        cum_signed += s.carbon_integral_pg;
        points.push(CumulativePoint {
            k: i + 1,
            share: cum_abs / total,
            cumulative_pg: cum_signed,
        });
    }
    CumulativeShareCurve { points }
}

/// Share of total |carbon integral| carried by the top `k` ranked
/// components; `1 ≤ k ≤ stats.len()`.
pub fn cumulative_share(stats: &[ComponentStats], k: usize) -> Result<f64> {
    if k < 1 || k > stats.len() {
        return Err(StxError::domain(format!(
            "K = {k} is outside [1, {}]",
            stats.len()
        )));
    }
    let total: f64 = stats.iter().map(|s| s.carbon_integral_pg.abs()).sum();
    let top: f64 = stats[..k].iter().map(|s| s.carbon_integral_pg.abs()).sum();
    Ok(top / total)
}

/// A single-level (lat × lon) field with named units, used for spatial
/// diagnostics. Missing cells are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct Map2D {
    pub name: String,
    pub units: String,
    pub lat_centers: Vec<f64>,
    pub lon_centers: Vec<f64>,
    pub values: Vec<f64>,
}

impl Map2D {
    pub fn nlat(&self) -> usize {
        self.lat_centers.len()
    }

    pub fn nlon(&self) -> usize {
        self.lon_centers.len()
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.nlon() + x]
    }
}

/// Per-cell carbon integral of masked anomalies over all months, in Tg C:
/// `Σ_t masked anomaly × cell area × month seconds`. Cells with no masked
/// voxel are zero.
pub fn spatial_loss_map(mask: &ExtremeMask, anomalies: &Grid3D) -> Result<Map2D> {
    if mask.dims() != anomalies.dims() {
        return Err(StxError::domain(format!(
            "mask dims {:?} do not match anomaly grid dims {:?}",
            mask.dims(),
            anomalies.dims()
        )));
    }
    let (ntime, nlat, nlon) = anomalies.dims();
    let geometry = CellGeometry::of(anomalies);
    let mut values = vec![0.0f64; nlat * nlon];
    for t in 0..ntime {
        let seconds = geometry.step_seconds(t);
        for y in 0..nlat {
            for x in 0..nlon {
                if mask.get(t, y, x) {
                    let v = anomalies.get(t, y, x);
                    if v.is_finite() {
                        values[y * nlon + x] += v * geometry.area(y, x) * seconds / KG_PER_TG;
                    }
                }
            }
        }
    }
    Ok(Map2D {
        name: "carbon_loss".into(),
        units: "Tg C".into(),
        lat_centers: anomalies.lat_centers().to_vec(),
        lon_centers: anomalies.lon_centers().to_vec(),
        values,
    })
}

/// Interannual variability: per-cell sample standard deviation (n − 1
/// denominator) of the anomaly series. Cells with fewer than two
/// non-missing months are missing.
pub fn iav_map(anomalies: &Grid3D) -> Map2D {
    let (ntime, nlat, nlon) = anomalies.dims();
    let mut values = vec![f64::NAN; nlat * nlon];
    for y in 0..nlat {
        for x in 0..nlon {
            let mut kept = Vec::with_capacity(ntime);
            for t in 0..ntime {
                let v = anomalies.get(t, y, x);
                if v.is_finite() {
                    kept.push(v);
                }
            }
            if kept.len() >= 2 {
                let n = kept.len() as f64;
                let mean = kept.iter().sum::<f64>() / n;
                let ss: f64 = kept.iter().map(|v| (v - mean).powi(2)).sum();
                values[y * nlon + x] = (ss / (n - 1.0)).sqrt();
            }
        }
    }
    Map2D {
        name: "iav".into(),
        units: anomalies.units().to_string(),
        lat_centers: anomalies.lat_centers().to_vec(),
        lon_centers: anomalies.lon_centers().to_vec(),
        values,
    }
}

/// Cell-wise `a − b` for dataset comparison (column dataset minus row
/// dataset). Missing cells propagate.
pub fn difference_map(a: &Map2D, b: &Map2D) -> Result<Map2D> {
    if a.lat_centers != b.lat_centers || a.lon_centers != b.lon_centers {
        return Err(StxError::domain(
            "difference map requires identical grid axes",
        ));
    }
    if a.units != b.units {
        return Err(StxError::domain(format!(
            "difference map requires matching units, got {:?} and {:?}",
            a.units, b.units
        )));
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| x - y)
        .collect();
    Ok(Map2D {
        name: format!("{}_minus_{}", a.name, b.name),
        units: a.units.clone(),
        lat_centers: a.lat_centers.clone(),
        lon_centers: a.lon_centers.clone(),
        values,
    })
}
