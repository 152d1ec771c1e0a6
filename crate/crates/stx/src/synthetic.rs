//! Deterministic synthetic data: seeded generators for fixtures,
//! property-test inputs, and the planted-component scenes used to verify
//! the pipeline end to end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::detect::{neighborhood, StructureKind};
use crate::error::{Result, StxError};
use crate::grid::{CellGeometry, Grid3D, GridAxes, MonthIndex};

/// Uniform global axes: `nlat` latitude bands spanning −90°..90° and
/// `nlon` longitude columns spanning 0°..360° (a full circle, so
/// longitude wrap is available).
pub fn global_grid_axes(nlat: usize, nlon: usize) -> GridAxes {
    let lat_edges: Vec<f64> = (0..=nlat)
        .map(|i| -90.0 + 180.0 * i as f64 / nlat as f64)
        .collect();
    let lon_edges: Vec<f64> = (0..=nlon)
        .map(|i| 360.0 * i as f64 / nlon as f64)
        .collect();
    GridAxes::from_edges(lat_edges, lon_edges)
}

/// A grid of independent standard-normal draws, generated in scan order
/// from a seeded stream (bitwise deterministic).
pub fn standard_normal_grid(
    seed: u64,
    variable_name: &str,
    units: &str,
    t0: MonthIndex,
    ntime: usize,
    axes: &GridAxes,
) -> Grid3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = Grid3D::filled(variable_name, units, t0, ntime, axes, 0.0);
    for v in grid.values_mut() {
        *v = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
    }
    grid
}

/// Draw `count` sizes from the discrete power law `p(k) ∝ k^(−γ)` on
/// `n_min ..= n_max` by inverse transform over the exact normalized
/// cumulative mass function.
pub fn sample_powerlaw_sizes(
    seed: u64,
    gamma: f64,
    count: usize,
    n_min: u64,
    n_max: u64,
) -> Vec<u64> {
    assert!(n_min >= 1 && n_max >= n_min, "invalid size range");
    let mut cdf: Vec<f64> = Vec::with_capacity((n_max - n_min + 1) as usize);
    let mut acc = 0.0;
    for k in n_min..=n_max {
        acc += (k as f64).powf(-gamma);
        cdf.push(acc);
    }
    let total = *cdf.last().expect("range is non-empty");
    for c in &mut cdf {
        *c /= total;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            let idx = cdf.partition_point(|&c| c < u);
            n_min + idx as u64
        })
        .collect()
}

/// One planted component of a [`PlantedScene`].
#[derive(Clone, Debug)]
pub struct PlantedComponent {
    /// Member voxels in scan order.
    pub voxels: Vec<(usize, usize, usize)>,
    /// The anomaly value written at every member voxel (negative).
    pub value: f64,
    /// The component's designed carbon integral in Pg C (negative).
    pub integral_pg: f64,
}

/// A synthetic anomaly grid with known ground truth: full-shell-connected
/// components of prescribed sizes planted on an exactly-zero background.
#[derive(Clone, Debug)]
pub struct PlantedScene {
    pub anomalies: Grid3D,
    /// Ground-truth components, in placement order (same order as the
    /// `sizes` argument).
    pub components: Vec<PlantedComponent>,
}

const PLANT_SCALE_KG: f64 = 1e8;

/// Build a global scene with one component per entry of `sizes`.
///
/// Each component is grown as a random walk over full-shell (26-neighbor)
/// adjacency with longitude wrap, so it is connected under that structure
/// by construction. Components keep a Chebyshev distance of at least 2
/// from each other — no structure can merge them. Every voxel of a
/// component holds the same negative value, scaled so the component's
/// carbon integral is exactly `−(size² × 10⁸ kg)`: bigger events are
/// deeper per voxel and their losses grow as size², independent of where
/// on the sphere the walk happened to land.
///
/// The background is exactly zero, so thresholding the scene with any
/// small negative-tail budget masks exactly the planted voxels.
pub fn plant_scene(
    seed: u64,
    ntime: usize,
    nlat: usize,
    nlon: usize,
    sizes: &[u64],
) -> Result<PlantedScene> {
    let axes = global_grid_axes(nlat, nlon);
    let mut grid = Grid3D::filled(
        "gpp_anomaly",
        "kg m-2 s-1",
        MonthIndex::from_ym(2001, 1).unwrap(),
        ntime,
        &axes,
        0.0,
    );
    let geometry = CellGeometry::of(&grid);
    let offsets = neighborhood(StructureKind::Leld);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Voxels owned by any placed blob, dilated by one in every direction:
    // new blobs must avoid this set entirely, which enforces the
    // pairwise separation.
    let mut reserved = vec![false; ntime * nlat * nlon];
    let index = |t: usize, y: usize, x: usize| (t * nlat + y) * nlon + x;

    let mut components = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let size_usize = size as usize;
        let mut blob: Vec<(usize, usize, usize)> = Vec::with_capacity(size_usize);
        'placement: for attempt in 0.. {
            if attempt >= 10_000 {
                return Err(StxError::domain(format!(
                    "could not place a component of size {size}: grid {ntime}×{nlat}×{nlon} is too crowded"
                )));
            }
            blob.clear();
            let start = (
                rng.gen_range(0..ntime),
                rng.gen_range(0..nlat),
                rng.gen_range(0..nlon),
            );
            if reserved[index(start.0, start.1, start.2)] {
                continue;
            }
            blob.push(start);
            let mut stalled = 0;
            while blob.len() < size_usize {
                if stalled >= 500 {
                    continue 'placement;
                }
                let &(t, y, x) = &blob[rng.gen_range(0..blob.len())];
                let (dt, dy, dx) =
                    offsets.offsets()[rng.gen_range(0..offsets.offsets().len())];
                let tt = t as isize + dt as isize;
                let yy = y as isize + dy as isize;
                if tt < 0 || tt >= ntime as isize || yy < 0 || yy >= nlat as isize {
                    stalled += 1;
                    continue;
                }
                let xx = (x as isize + dx as isize).rem_euclid(nlon as isize) as usize;
                let candidate = (tt as usize, yy as usize, xx);
                if reserved[index(candidate.0, candidate.1, candidate.2)]
                    || blob.contains(&candidate)
                {
                    stalled += 1;
                    continue;
                }
                blob.push(candidate);
                stalled = 0;
            }
            break;
        }

        // Reserve the blob and its one-voxel halo (with longitude wrap).
        for &(t, y, x) in &blob {
            reserved[index(t, y, x)] = true;
            for &(dt, dy, dx) in offsets.offsets() {
                let tt = t as isize + dt as isize;
                let yy = y as isize + dy as isize;
                if tt < 0 || tt >= ntime as isize || yy < 0 || yy >= nlat as isize {
                    continue;
                }
                let xx = (x as isize + dx as isize).rem_euclid(nlon as isize) as usize;
                reserved[index(tt as usize, yy as usize, xx)] = true;
            }
        }

        blob.sort_unstable();
        let weight: f64 = blob
            .iter()
            .map(|&(t, y, x)| geometry.area(y, x) * geometry.step_seconds(t))
            .sum();
        let target_kg = -((size * size) as f64) * PLANT_SCALE_KG;
        let value = target_kg / weight;
        for &(t, y, x) in &blob {
            grid.set(t, y, x, value);
        }
        components.push(PlantedComponent {
            voxels: blob,
            value,
            integral_pg: target_kg / 1e12,
        });
    }

    Ok(PlantedScene {
        anomalies: grid,
        components,
    })
}
