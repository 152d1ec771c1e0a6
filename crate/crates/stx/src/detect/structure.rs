//! The voxel adjacency geometries used for component labeling.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StxError};

/// The six canonical neighborhood geometries, named by the event shape they
/// admit (spatial extent × duration):
///
/// | name  | offsets | reading                                          |
/// |-------|---------|--------------------------------------------------|
/// | sesd  | 0       | small extent, short duration: isolated voxels     |
/// | seld  | 2       | small extent, long duration: time axis only       |
/// | lesd  | 8       | large extent, short duration: spatial plane only  |
/// | 6n    | 6       | face neighbors                                    |
/// | 18n   | 18      | face + edge neighbors                             |
/// | leld  | 26      | large extent, long duration: full 3×3×3 shell     |
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum StructureKind {
    Sesd,
    Seld,
    Lesd,
    SixN,
    EighteenN,
    Leld,
}

impl StructureKind {
    /// All six canonical kinds, in refinement-friendly order.
    pub const ALL: [StructureKind; 6] = [
        StructureKind::Sesd,
        StructureKind::Seld,
        StructureKind::Lesd,
        StructureKind::SixN,
        StructureKind::EighteenN,
        StructureKind::Leld,
    ];
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StructureKind::Sesd => "sesd",
            StructureKind::Seld => "seld",
            StructureKind::Lesd => "lesd",
            StructureKind::SixN => "6n",
            StructureKind::EighteenN => "18n",
            StructureKind::Leld => "leld",
        };
        f.write_str(s)
    }
}

impl FromStr for StructureKind {
    type Err = StxError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sesd" => Ok(StructureKind::Sesd),
            "seld" => Ok(StructureKind::Seld),
            "lesd" => Ok(StructureKind::Lesd),
            "6n" => Ok(StructureKind::SixN),
            "18n" => Ok(StructureKind::EighteenN),
            "leld" => Ok(StructureKind::Leld),
            other => Err(StxError::domain(format!(
                "unknown neighborhood structure {other:?} (expected sesd|seld|lesd|6n|18n|leld)"
            ))),
        }
    }
}

/// A set of `(Δt, Δlat, Δlon)` offsets from `{-1, 0, 1}³ \ {origin}`
/// defining which voxels are adjacent. Offsets are kept sorted and are
/// always symmetric under negation, so adjacency is undirected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodStructure {
    name: String,
    offsets: Vec<(i8, i8, i8)>,
}

impl NeighborhoodStructure {
    /// A custom structure. Offsets must come from `{-1, 0, 1}³` minus the
    /// origin and must be closed under negation.
    pub fn custom(name: impl Into<String>, mut offsets: Vec<(i8, i8, i8)>) -> Result<Self> {
        offsets.sort_unstable();
        offsets.dedup();
        for &(dt, dy, dx) in &offsets {
            if ![dt, dy, dx].iter().all(|d| (-1..=1).contains(d)) || (dt, dy, dx) == (0, 0, 0) {
                return Err(StxError::domain(format!(
                    "offset ({dt}, {dy}, {dx}) is outside the unit shell"
                )));
            }
            if offsets.binary_search(&(-dt, -dy, -dx)).is_err() {
                return Err(StxError::domain(format!(
                    "offsets are not symmetric: ({dt}, {dy}, {dx}) lacks its negation"
                )));
            }
        }
        Ok(NeighborhoodStructure {
            name: name.into(),
            offsets,
        })
    }

    /// The 4-neighbor spatial variant of `lesd` (plane adjacency without
    /// diagonals). Not part of the canonical six; available for
    /// sensitivity studies.
    pub fn lesd_four_neighbor() -> Self {
        NeighborhoodStructure::custom(
            "lesd4",
            vec![(0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)],
        )
        .expect("static offsets are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The adjacency offsets, sorted.
    pub fn offsets(&self) -> &[(i8, i8, i8)] {
        &self.offsets
    }

    /// True if every offset of `self` is also an offset of `other` — in
    /// which case `other` can only merge (never split) `self`'s components.
    pub fn refines(&self, other: &NeighborhoodStructure) -> bool {
        self.offsets
            .iter()
            .all(|o| other.offsets.binary_search(o).is_ok())
    }
}

/// The canonical structure for a [`StructureKind`].
pub fn neighborhood(kind: StructureKind) -> NeighborhoodStructure {
    let offsets: Vec<(i8, i8, i8)> = match kind {
        StructureKind::Sesd => Vec::new(),
        StructureKind::Seld => vec![(-1, 0, 0), (1, 0, 0)],
        StructureKind::Lesd => shell(|dt, dy, dx| dt == 0 && (dy, dx) != (0, 0)),
        StructureKind::SixN => shell(|dt, dy, dx| dt.abs() + dy.abs() + dx.abs() == 1),
        StructureKind::EighteenN => {
            shell(|dt, dy, dx| (1..=2).contains(&(dt.abs() + dy.abs() + dx.abs())))
        }
        StructureKind::Leld => shell(|_, _, _| true),
    };
    NeighborhoodStructure::custom(kind.to_string(), offsets).expect("canonical offsets are valid")
}

fn shell(keep: impl Fn(i8, i8, i8) -> bool) -> Vec<(i8, i8, i8)> {
    let mut out = Vec::new();
    for dt in -1..=1 {
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dt, dy, dx) != (0, 0, 0) && keep(dt, dy, dx) {
                    out.push((dt, dy, dx));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_cardinalities() {
        let sizes: Vec<usize> = StructureKind::ALL
            .iter()
            .map(|&k| neighborhood(k).offsets().len())
            .collect();
        assert_eq!(sizes, vec![0, 2, 8, 6, 18, 26]);
    }

    #[test]
    fn six_n_is_faces_only() {
        for &(dt, dy, dx) in neighborhood(StructureKind::SixN).offsets() {
            assert_eq!(dt.abs() + dy.abs() + dx.abs(), 1);
        }
    }

    #[test]
    fn seld_is_time_only_and_lesd_is_plane_only() {
        assert_eq!(
            neighborhood(StructureKind::Seld).offsets(),
            &[(-1, 0, 0), (1, 0, 0)]
        );
        for &(dt, _, _) in neighborhood(StructureKind::Lesd).offsets() {
            assert_eq!(dt, 0);
        }
    }

    #[test]
    fn all_canonical_structures_are_symmetric() {
        for &kind in &StructureKind::ALL {
            let s = neighborhood(kind);
            for &(dt, dy, dx) in s.offsets() {
                assert!(s.offsets().contains(&(-dt, -dy, -dx)));
            }
        }
    }

    #[test]
    fn refinement_chains_hold() {
        let get = neighborhood;
        use StructureKind::*;
        assert!(get(Sesd).refines(&get(Seld)));
        assert!(get(Seld).refines(&get(Leld)));
        assert!(get(Sesd).refines(&get(Lesd)));
        assert!(get(Lesd).refines(&get(Leld)));
        assert!(get(SixN).refines(&get(EighteenN)));
        assert!(get(EighteenN).refines(&get(Leld)));
        assert!(!get(Seld).refines(&get(Lesd)));
    }

    #[test]
    fn custom_rejects_asymmetry_and_long_offsets() {
        assert!(NeighborhoodStructure::custom("x", vec![(1, 0, 0)]).is_err());
        assert!(NeighborhoodStructure::custom("x", vec![(0, 0, 0)]).is_err());
        assert!(NeighborhoodStructure::custom("x", vec![(2, 0, 0), (-2, 0, 0)]).is_err());
        assert!(NeighborhoodStructure::custom("x", vec![(1, 0, 0), (-1, 0, 0)]).is_ok());
    }

    #[test]
    fn names_parse_and_print() {
        for &kind in &StructureKind::ALL {
            let name = kind.to_string();
            assert_eq!(name.parse::<StructureKind>().unwrap(), kind);
        }
        assert!("27n".parse::<StructureKind>().is_err());
    }
}
