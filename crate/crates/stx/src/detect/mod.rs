//! Extreme-event detection: percentile thresholding of anomaly fields and
//! connected-component labeling of the resulting masks under configurable
//! spatiotemporal neighborhood structures.

mod label;
mod structure;
mod threshold;

pub use label::{count_components, label_components, label_components_bfs, Labeling};
pub use structure::{neighborhood, NeighborhoodStructure, StructureKind};
pub use threshold::{threshold_mask, ExtremeMask, Tail, TailBudget, ThresholdSpec};
