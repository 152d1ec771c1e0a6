//! Property tests of cross-module invariants: container round-trips,
//! threshold budgets, labeler agreement, refinement monotonicity,
//! decomposition additivity, exact power-law recovery, and unit
//! conversions.

use proptest::prelude::*;

use stx::detect::{
    label_components, label_components_bfs, neighborhood, threshold_mask, ExtremeMask,
    StructureKind, Tail, TailBudget, ThresholdSpec,
};
use stx::grid::{Grid3D, MonthIndex};
use stx::io::{convert_units, read_csv_grid, read_grid, write_csv_grid, write_grid, Unit};
use stx::preprocess::{default_window, ssa_decompose};
use stx::scalefree::{powerlaw_fit, SizeDistribution};
use stx::synthetic::global_grid_axes;

fn t0() -> MonthIndex {
    MonthIndex::from_ym(2001, 1).unwrap()
}

fn grid_from_values(
    name: &str,
    units: &str,
    dims: (usize, usize, usize),
    values: &[f64],
) -> Grid3D {
    let axes = global_grid_axes(dims.1, dims.2);
    let mut g = Grid3D::filled(name, units, t0(), dims.0, &axes, 0.0);
    g.values_mut().copy_from_slice(values);
    g
}

/// Small random grids with occasional missing voxels.
fn arb_grid() -> impl Strategy<Value = Grid3D> {
    ((1usize..=3, 1usize..=4, 1usize..=4), "[a-z][a-z_]{0,10}").prop_flat_map(
        |(dims, name)| {
            let n = dims.0 * dims.1 * dims.2;
            proptest::collection::vec(
                prop_oneof![9 => -1e6f64..1e6, 1 => Just(f64::NAN)],
                n..=n,
            )
            .prop_map(move |values| grid_from_values(&name, "kg m-2 s-1", dims, &values))
        },
    )
}

/// Random masks over full-circle axes, with their wrap choice.
fn arb_mask() -> impl Strategy<Value = (ExtremeMask, bool)> {
    ((1usize..=3, 1usize..=4, 1usize..=4), any::<bool>()).prop_flat_map(|(dims, wrap)| {
        let n = dims.0 * dims.1 * dims.2;
        proptest::collection::vec(any::<bool>(), n..=n)
            .prop_map(move |bits| (ExtremeMask::from_bits(dims, bits, true).unwrap(), wrap))
    })
}

fn bits_eq(a: &Grid3D, b: &Grid3D) -> bool {
    a.values().len() == b.values().len()
        && a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

proptest! {
    /// The binary container reproduces a grid exactly — names, axes, time
    /// base, and every value bit — and serializing twice gives the same
    /// bytes.
    #[test]
    fn stxg_round_trip_is_lossless(grid in arb_grid()) {
        let bytes = write_grid(&grid).unwrap();
        prop_assert_eq!(&bytes, &write_grid(&grid).unwrap());
        let back = read_grid(&bytes).unwrap();
        prop_assert_eq!(grid.variable_name(), back.variable_name());
        prop_assert_eq!(grid.units(), back.units());
        prop_assert_eq!(grid.time_axis(), back.time_axis());
        prop_assert_eq!(grid.lat_edges(), back.lat_edges());
        prop_assert_eq!(grid.lon_edges(), back.lon_edges());
        prop_assert!(bits_eq(&grid, &back));
    }

    /// The CSV fixture format also round-trips values bit for bit
    /// (shortest round-trip float formatting, `NA` for missing).
    #[test]
    fn csv_round_trip_is_lossless(grid in arb_grid()) {
        let text = write_csv_grid(&grid);
        let back = read_csv_grid(&text).unwrap();
        prop_assert_eq!(grid.variable_name(), back.variable_name());
        prop_assert_eq!(grid.units(), back.units());
        prop_assert_eq!(grid.time_axis(), back.time_axis());
        prop_assert!(bits_eq(&grid, &back));
    }

    /// Growing the percentile budget never unmasks a voxel, missing voxels
    /// are never masked, and the strict-inequality mask never exceeds its
    /// budget by more than the interpolation slack (one value per tail).
    #[test]
    fn threshold_masks_nest_and_respect_budget(
        grid in arb_grid(),
        p_small in 0.5f64..30.0,
        extra in 1.0f64..20.0,
    ) {
        let n_finite = grid.values().iter().filter(|v| v.is_finite()).count();
        prop_assume!(n_finite >= 2);
        let spec = |p: f64| ThresholdSpec {
            percentile_total: p,
            tail: Tail::Both,
            budget: TailBudget::SplitAcrossTails,
        };
        let small = threshold_mask(&grid, &spec(p_small)).unwrap();
        let large = threshold_mask(&grid, &spec(p_small + extra)).unwrap();
        for (i, (&a, &b)) in small.bits().iter().zip(large.bits()).enumerate() {
            prop_assert!(!a || b, "voxel {i} unmasked by growing the budget");
            prop_assert!(!a || grid.values()[i].is_finite(), "missing voxel masked");
        }
        let bound = (p_small + extra) / 100.0 * (n_finite - 1) as f64 + 2.0;
        prop_assert!((large.count() as f64) <= bound);
    }

    /// Union-find labeling equals the BFS reference on every structure,
    /// labels exactly the masked voxels with contiguous ids, and enabling
    /// wraparound can only merge components.
    #[test]
    fn labeling_agrees_with_bfs_and_partitions_the_mask((mask, wrap) in arb_mask()) {
        for kind in StructureKind::ALL {
            let s = neighborhood(kind);
            let fast = label_components(&mask, &s, wrap).unwrap();
            let slow = label_components_bfs(&mask, &s, wrap).unwrap();
            prop_assert_eq!(fast.labels(), slow.labels());

            let k = fast.n_components() as u32;
            let mut seen = vec![false; k as usize];
            for (i, (&label, &bit)) in fast.labels().iter().zip(mask.bits()).enumerate() {
                prop_assert_eq!(label > 0, bit, "voxel {} mislabeled", i);
                prop_assert!(label <= k);
                if label > 0 {
                    seen[(label - 1) as usize] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s), "unused label id");
            prop_assert_eq!(fast.voxel_counts().iter().sum::<usize>(), mask.count());

            let wrapped = label_components(&mask, &s, true).unwrap();
            let unwrapped = label_components(&mask, &s, false).unwrap();
            prop_assert!(wrapped.n_components() <= unwrapped.n_components());
        }
    }

    /// Component counts fall (weakly) along each refinement chain: a finer
    /// structure can only split components, never merge them.
    #[test]
    fn refinement_chains_are_monotone((mask, wrap) in arb_mask()) {
        let count = |kind: StructureKind| {
            label_components(&mask, &neighborhood(kind), wrap)
                .unwrap()
                .n_components()
        };
        let chains = [
            [StructureKind::Sesd, StructureKind::Seld, StructureKind::Leld],
            [StructureKind::Sesd, StructureKind::Lesd, StructureKind::Leld],
            [StructureKind::SixN, StructureKind::EighteenN, StructureKind::Leld],
        ];
        for chain in chains {
            let c: Vec<usize> = chain.iter().map(|&k| count(k)).collect();
            prop_assert!(c[0] >= c[1] && c[1] >= c[2], "counts {:?} along {:?}", c, chain);
        }
    }

    /// Exact dyadic power-law histograms (counts m·r³, m·r², m·r, m at
    /// sizes 1, 2, 4, 8 — all inside singleton bins) are recovered with
    /// γ = log₂ r to first-principles precision.
    #[test]
    fn powerlaw_fit_recovers_exact_dyadic_lines(r in 2u64..=6, m in 1u64..=5) {
        let mut sizes = Vec::new();
        for (size, count) in [(1u64, m * r * r * r), (2, m * r * r), (4, m * r), (8, m)] {
            sizes.extend(std::iter::repeat(size).take(count as usize));
        }
        let fit = powerlaw_fit(&SizeDistribution::from_sizes(&sizes).unwrap()).unwrap();
        let expected = (r as f64).log2();
        prop_assert!(
            (fit.gamma - expected).abs() <= 1e-9,
            "gamma {} for ratio {} (expected {})", fit.gamma, r, expected
        );
        prop_assert!((fit.r_squared - 1.0).abs() <= 1e-9);
    }

    /// Converting to a compatible unit and back reproduces each value to
    /// floating-point precision.
    #[test]
    fn unit_conversions_round_trip(
        grid in arb_grid(),
        pair in prop_oneof![
            Just((Unit::KgPerM2PerS, Unit::GramsCPerM2PerDay)),
            Just((Unit::Kelvin, Unit::DegC)),
            Just((Unit::PrKgPerM2PerS, Unit::MmPerMonth)),
        ],
    ) {
        let (from, to) = pair;
        let grid = grid
            .derived(grid.values().to_vec(), Some(&from.to_string()))
            .unwrap();
        let back = convert_units(&convert_units(&grid, to).unwrap(), from).unwrap();
        prop_assert_eq!(back.units(), grid.units());
        for (i, (&a, &b)) in grid.values().iter().zip(back.values()).enumerate() {
            if a.is_nan() {
                prop_assert!(b.is_nan());
            } else {
                let tol = 1e-12 * a.abs().max(1.0);
                prop_assert!((a - b).abs() <= tol, "voxel {}: {} vs {}", i, a, b);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The three decomposition groups always add back to the input series
    /// exactly (the anomaly is the literal residual).
    #[test]
    fn ssa_groups_add_back_to_the_input(
        len in 24usize..=72,
        seed_values in proptest::collection::vec(-5.0f64..5.0, 72),
    ) {
        let series: Vec<f64> = (0..len)
            .map(|i| {
                seed_values[i] + (2.0 * std::f64::consts::PI * i as f64 / 12.0).sin()
            })
            .collect();
        let d = ssa_decompose(&series, default_window(len)).unwrap();
        let recon = d.reconstruct();
        let scale = series.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in recon.iter().zip(&series) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }
}
