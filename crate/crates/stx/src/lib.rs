//! Detection, quantification, ranking, and attribution of spatiotemporal
//! extremes in gridded monthly time series.
//!
//! The crate is organized as a pipeline over [`grid::Grid3D`] volumes
//! (time × lat × lon, monthly, NaN = missing):
//!
//! 1. **[`io`]** — a compact binary container and a CSV fixture format,
//!    unit conversion, study-period trimming, day-weighted monthly
//!    aggregation, and first-order conservative regridding.
//! 2. **[`preprocess`]** — per-cell singular spectrum analysis that splits
//!    each series into a slow trend, a modulated annual cycle, and
//!    anomalies; driver-specific scaling for temperature and precipitation.
//! 3. **[`detect`]** — percentile thresholding of the anomaly distribution
//!    into a boolean extremes mask, and connected-component labeling of the
//!    mask under six 3-D neighborhood structures (with optional longitude
//!    wraparound).
//! 4. **[`stats`]** — per-component carbon integrals, affected areas,
//!    durations and ranks; cumulative-share curves; spatial loss and
//!    interannual-variability maps; orthogonal (total least squares)
//!    regression for dataset comparison.
//! 5. **[`scalefree`]** — component-size distributions, power-law exponent
//!    fitting on log-binned densities, and the finite-system natural-cutoff
//!    diagnostic.
//! 6. **[`attribution`]** — classification of the top-ranked extremes as
//!    hot/cold/dry/wet from lagged medians of climate-driver fields against
//!    reference quartiles.
//!
//! [`synthetic`] generates seeded fixtures (planted components, power-law
//! size samples, noise grids) used by the test suite and handy for demos.
//!
//! Everything is deterministic: a fixed input produces bit-identical output
//! regardless of thread count (parallelism is restricted to per-cell maps;
//! every reduction that reaches an artifact is a fixed-order sum).

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod attribution;
pub mod detect;
pub mod error;
pub mod grid;
pub mod io;
pub mod preprocess;
pub mod scalefree;
pub mod stats;
pub mod synthetic;

pub use error::{Result, StxError};
