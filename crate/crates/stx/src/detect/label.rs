//! Connected-component labeling of extreme masks.
//!
//! Two interchangeable implementations are exposed: a union-find labeler
//! (the production path) and a breadth-first flood fill
//! ([`label_components_bfs`]) kept as an independently-written reference
//! oracle. Both number components identically: ids are assigned in scan
//! order — ascending `(time, lat, lon)` — of each component's first voxel,
//! so label 1 is the component whose earliest voxel comes first.

use crate::detect::structure::NeighborhoodStructure;
use crate::detect::threshold::ExtremeMask;
use crate::error::{Result, StxError};

/// A labeling of masked voxels into connected components.
///
/// `0` marks background (unmasked) voxels; components are numbered from 1
/// in scan order of their first voxel, which makes labelings of identical
/// inputs byte-identical regardless of internal algorithm or parallelism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    dims: (usize, usize, usize),
    labels: Vec<u32>,
    voxel_counts: Vec<usize>,
}

impl Labeling {
    /// Rebuilds a labeling from stored per-voxel ids (`0` = background).
    ///
    /// The ids must be exactly `1 ..= max` with no gaps — the shape every
    /// labeling produced by this module has — so voxel counts can be
    /// reconstructed by a single scan.
    pub fn from_labels(dims: (usize, usize, usize), labels: Vec<u32>) -> Result<Labeling> {
        if labels.len() != dims.0 * dims.1 * dims.2 {
            return Err(StxError::validation(format!(
                "label volume has {} entries but dims {:?} require {}",
                labels.len(),
                dims,
                dims.0 * dims.1 * dims.2
            )));
        }
        let max = labels.iter().copied().max().unwrap_or(0);
        let mut voxel_counts = vec![0usize; max as usize];
        for &id in &labels {
            if id > 0 {
                voxel_counts[(id - 1) as usize] += 1;
            }
        }
        if let Some(gap) = voxel_counts.iter().position(|&c| c == 0) {
            return Err(StxError::validation(format!(
                "component ids are not contiguous: id {} is unused",
                gap + 1
            )));
        }
        Ok(Labeling {
            dims,
            labels,
            voxel_counts,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    /// Per-voxel labels in scan order; `0` is background.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, t: usize, y: usize, x: usize) -> u32 {
        let (_, nlat, nlon) = self.dims;
        self.labels[(t * nlat + y) * nlon + x]
    }

    pub fn n_components(&self) -> usize {
        self.voxel_counts.len()
    }

    /// Voxel count of component `id` (1-based).
    pub fn voxel_count(&self, id: u32) -> usize {
        self.voxel_counts[(id - 1) as usize]
    }

    /// Voxel counts indexed by `id - 1`.
    pub fn voxel_counts(&self) -> &[usize] {
        &self.voxel_counts
    }

    /// Member voxels of every component, indexed by `id - 1`, each list in
    /// scan order.
    pub fn voxels_by_component(&self) -> Vec<Vec<(usize, usize, usize)>> {
        let (_, nlat, nlon) = self.dims;
        let mut out: Vec<Vec<(usize, usize, usize)>> = self
            .voxel_counts
            .iter()
            .map(|&c| Vec::with_capacity(c))
            .collect();
        for (idx, &id) in self.labels.iter().enumerate() {
            if id != 0 {
                let t = idx / (nlat * nlon);
                let y = (idx / nlon) % nlat;
                let x = idx % nlon;
                out[(id - 1) as usize].push((t, y, x));
            }
        }
        out
    }
}

/// Number of labeled components.
pub fn count_components(labeling: &Labeling) -> usize {
    labeling.n_components()
}

fn check_wrap(mask: &ExtremeMask, wrap_lon: bool) -> Result<()> {
    if wrap_lon && !mask.lon_full_circle() {
        return Err(StxError::domain(
            "longitude wrap requested but the longitude axis does not span a full circle",
        ));
    }
    Ok(())
}

/// Resolve the neighbor of `(t, y, x)` under one offset, honoring bounds
/// and optional longitude wrap. Returns the neighbor's linear index.
#[inline]
fn neighbor_index(
    dims: (usize, usize, usize),
    wrap_lon: bool,
    t: usize,
    y: usize,
    x: usize,
    offset: (i8, i8, i8),
) -> Option<usize> {
    let (ntime, nlat, nlon) = dims;
    let (dt, dy, dx) = offset;
    let tt = t as isize + dt as isize;
    if tt < 0 || tt >= ntime as isize {
        return None;
    }
    let yy = y as isize + dy as isize;
    if yy < 0 || yy >= nlat as isize {
        return None;
    }
    let mut xx = x as isize + dx as isize;
    if wrap_lon {
        xx = xx.rem_euclid(nlon as isize);
    } else if xx < 0 || xx >= nlon as isize {
        return None;
    }
    Some((tt as usize * nlat + yy as usize) * nlon + xx as usize)
}

#[inline]
fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        // Path halving: point each visited node at its grandparent.
        parent[i as usize] = parent[parent[i as usize] as usize];
        i = parent[i as usize];
    }
    i
}

/// Label the connected components of `mask` under `structure`.
///
/// With `wrap_lon`, longitude column `nlon - 1` is adjacent to column `0`
/// (the mask must cover a full circle). Latitude and time never wrap: the
/// poles and the record boundaries are true boundaries.
pub fn label_components(
    mask: &ExtremeMask,
    structure: &NeighborhoodStructure,
    wrap_lon: bool,
) -> Result<Labeling> {
    check_wrap(mask, wrap_lon)?;
    let dims = mask.dims();
    let (ntime, nlat, nlon) = dims;
    let nvox = ntime * nlat * nlon;
    let _ = u32::try_from(nvox)
        .map_err(|_| StxError::validation("grid has too many voxels to label (u32 overflow)"))?;
    let bits = mask.bits();

    let mut parent: Vec<u32> = (0..nvox as u32).collect();
    for t in 0..ntime {
        for y in 0..nlat {
            for x in 0..nlon {
                let idx = (t * nlat + y) * nlon + x;
                if !bits[idx] {
                    continue;
                }
                for &offset in structure.offsets() {
                    // Offsets are symmetric, so every adjacent pair is seen
                    // from both endpoints; keeping only the smaller-index
                    // neighbor processes each edge exactly once.
                    if let Some(nidx) = neighbor_index(dims, wrap_lon, t, y, x, offset) {
                        if nidx < idx && bits[nidx] {
                            let a = find(&mut parent, idx as u32);
                            let b = find(&mut parent, nidx as u32);
                            if a != b {
                                // Root at the smaller index so roots stay
                                // scan-order minimal.
                                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                                parent[hi as usize] = lo;
                            }
                        }
                    }
                }
            }
        }
    }

    // Second pass: number roots in scan order of first appearance.
    let mut labels = vec![0u32; nvox];
    let mut root_number = vec![0u32; nvox];
    let mut voxel_counts = Vec::new();
    for idx in 0..nvox {
        if !bits[idx] {
            continue;
        }
        let root = find(&mut parent, idx as u32) as usize;
        if root_number[root] == 0 {
            voxel_counts.push(0);
            root_number[root] = voxel_counts.len() as u32;
        }
        let id = root_number[root];
        labels[idx] = id;
        voxel_counts[(id - 1) as usize] += 1;
    }

    Ok(Labeling {
        dims,
        labels,
        voxel_counts,
    })
}

/// Reference labeler: breadth-first flood fill from each unvisited masked
/// voxel in scan order. Slower than [`label_components`] but independently
/// written; the two must agree exactly on every input.
pub fn label_components_bfs(
    mask: &ExtremeMask,
    structure: &NeighborhoodStructure,
    wrap_lon: bool,
) -> Result<Labeling> {
    check_wrap(mask, wrap_lon)?;
    let dims = mask.dims();
    let (ntime, nlat, nlon) = dims;
    let nvox = ntime * nlat * nlon;
    let _ = u32::try_from(nvox)
        .map_err(|_| StxError::validation("grid has too many voxels to label (u32 overflow)"))?;
    let bits = mask.bits();

    let mut labels = vec![0u32; nvox];
    let mut voxel_counts = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..nvox {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        voxel_counts.push(0usize);
        let id = voxel_counts.len() as u32;
        labels[start] = id;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            voxel_counts[(id - 1) as usize] += 1;
            let t = idx / (nlat * nlon);
            let y = (idx / nlon) % nlat;
            let x = idx % nlon;
            for &offset in structure.offsets() {
                if let Some(nidx) = neighbor_index(dims, wrap_lon, t, y, x, offset) {
                    if bits[nidx] && labels[nidx] == 0 {
                        labels[nidx] = id;
                        queue.push_back(nidx);
                    }
                }
            }
        }
    }

    Ok(Labeling {
        dims,
        labels,
        voxel_counts,
    })
}
