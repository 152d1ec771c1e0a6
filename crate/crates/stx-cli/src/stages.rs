//! Stage drivers.
//!
//! Each subcommand reads what earlier stages left in the output directory
//! and writes its own artifacts there, so long runs are resumable stage by
//! stage:
//!
//! ```text
//! out/
//!   anomalies.stxg         preprocess   anomaly field (carbon flux)
//!   tas_scaled.stxg        preprocess   standardized temperature (if configured)
//!   pr_normalized.stxg     preprocess   normalized precipitation (if configured)
//!   mask.stxg              detect       0/1 extremes mask
//!   threshold.json         detect       percentile cuts and mask counts
//!   iav_map.csv            stats        per-cell interannual variability
//!   manifest.json          pipeline     config hash, versions, artifact list
//!   <structure>/           one directory per neighborhood structure
//!     labels.stxg          label        per-voxel component ids (0 = none)
//!     mask_summary.json    label        threshold record + component count
//!     components.csv       stats        ranked component table
//!     cumulative.csv       stats        concentration curve
//!     loss_map.csv         stats        masked-anomaly carbon total per cell
//!     powerlaw.csv         powerlaw     size histogram
//!     powerlaw_fit.json    powerlaw     fitted exponent (not for sesd)
//!     attribution.csv      attribute    per-component lag detail
//!     attribution_table.json attribute  category counts
//!     *.svg                pipeline     charts
//! ```
//!
//! The interchange artifacts (`*.stxg`, `threshold.json`) are always
//! written; the `formats` setting gates only the report files.

use std::path::{Path, PathBuf};

use stx::attribution::{attribute_components, attribution_table, AttributionConfig};
use stx::detect::{
    label_components, neighborhood, threshold_mask, ExtremeMask, Labeling, StructureKind,
};
use stx::grid::{DataKind, Grid3D};
use stx::io::{
    convert_units, read_csv_grid, read_grid_file, subset_time, write_grid_file, Unit,
};
use stx::preprocess::{compute_anomalies, default_window, normalize_precip, scale_temperature};
use stx::scalefree::{powerlaw_fit_with, SizeDistribution};
use stx::stats::{component_metrics, cumulative_curve, iav_map, spatial_loss_map, ComponentStats};

use crate::config::{PipelineConfig, PreprocessMode};
use crate::error::{CliError, CliResult, StageExt, EXIT_CONFIG};
use crate::{manifest, outputs, svg};

const ANOMALIES: &str = "anomalies.stxg";
const TAS_SCALED: &str = "tas_scaled.stxg";
const PR_NORMALIZED: &str = "pr_normalized.stxg";
const MASK: &str = "mask.stxg";
const THRESHOLD: &str = "threshold.json";
const LABELS: &str = "labels.stxg";

fn structure_dir(cfg: &PipelineConfig, kind: StructureKind) -> PathBuf {
    cfg.out.join(kind.to_string())
}

fn write_file(stage: &'static str, path: &Path, body: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| {
            CliError::validation(stage, format!("cannot create {}: {e}", parent.display()))
        })?;
    }
    std::fs::write(path, body)
        .map_err(|e| CliError::validation(stage, format!("cannot write {}: {e}", path.display())))
}

fn write_grid(stage: &'static str, path: &Path, grid: &Grid3D) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| {
            CliError::validation(stage, format!("cannot create {}: {e}", parent.display()))
        })?;
    }
    write_grid_file(path, grid).in_stage(stage)
}

/// Loads a configured input grid (binary container, or the CSV fixture
/// format when the path ends in `.csv`).
fn load_input(stage: &'static str, path: &Path) -> CliResult<Grid3D> {
    if path.extension().is_some_and(|e| e == "csv") {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(stage, format!("cannot read {}: {e}", path.display()))
        })?;
        read_csv_grid(&text).in_stage(stage)
    } else {
        read_grid_file(path).in_stage(stage)
    }
}

/// Reads a grid artifact produced by an earlier stage, with a pointer at
/// the stage to run when it is missing.
fn read_artifact(
    stage: &'static str,
    path: &Path,
    produced_by: &str,
) -> CliResult<Grid3D> {
    if !path.is_file() {
        return Err(CliError::validation(
            stage,
            format!(
                "missing artifact {}; run `stx {produced_by}` first",
                path.display()
            ),
        ));
    }
    read_grid_file(path).in_stage(stage)
}

/// Converts to `target` when the grid's units are recognized; unknown unit
/// strings pass through untouched (the tables then report in input units).
fn coerce_units(g: Grid3D, target: Unit) -> stx::error::Result<Grid3D> {
    if g.units().parse::<Unit>().is_ok() {
        convert_units(&g, target)
    } else {
        Ok(g)
    }
}

fn study_subset(cfg: &PipelineConfig, g: Grid3D) -> stx::error::Result<Grid3D> {
    if cfg.start.is_none() && cfg.end.is_none() {
        return Ok(g);
    }
    let first = g.time_axis()[0];
    let last = *g.time_axis().last().expect("grids have at least one month");
    subset_time(&g, cfg.start.unwrap_or(first), cfg.end.unwrap_or(last))
}

/// Anomaly extraction: carbon flux → anomalies, temperature → standardized
/// anomalies, precipitation → normalized anomalies (or pass-through when
/// `preprocess = none`).
pub fn stage_preprocess(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "preprocess";
    std::fs::create_dir_all(&cfg.out).map_err(|e| {
        CliError::validation(STAGE, format!("cannot create {}: {e}", cfg.out.display()))
    })?;

    let gpp = load_input(STAGE, &cfg.gpp)?;
    let gpp = coerce_units(gpp, Unit::KgPerM2PerS).in_stage(STAGE)?;
    let gpp = study_subset(cfg, gpp).in_stage(STAGE)?;
    let anomalies = match cfg.preprocess {
        PreprocessMode::Ssa => {
            let window = cfg.ssa_window.unwrap_or_else(|| default_window(gpp.ntime()));
            compute_anomalies(&gpp, window).in_stage(STAGE)?
        }
        PreprocessMode::None => gpp,
    };
    write_grid(STAGE, &cfg.out.join(ANOMALIES), &anomalies)?;

    if let Some(path) = &cfg.tas {
        let tas = load_input(STAGE, path)?;
        let tas = coerce_units(tas, Unit::Kelvin).in_stage(STAGE)?;
        let tas = study_subset(cfg, tas).in_stage(STAGE)?;
        let scaled = match cfg.preprocess {
            PreprocessMode::Ssa => {
                let window = cfg.ssa_window.unwrap_or_else(|| default_window(tas.ntime()));
                let s = scale_temperature(&tas, window).in_stage(STAGE)?;
                if !s.degenerate_cells.is_empty() {
                    eprintln!(
                        "stx: {STAGE}: {} temperature cell(s) have no anomaly variance; set to 0",
                        s.degenerate_cells.len()
                    );
                }
                s.grid
            }
            PreprocessMode::None => tas,
        };
        write_grid(STAGE, &cfg.out.join(TAS_SCALED), &scaled)?;
    }

    if let Some(path) = &cfg.pr {
        let pr = load_input(STAGE, path)?;
        let pr = coerce_units(pr, Unit::PrKgPerM2PerS).in_stage(STAGE)?;
        let pr = study_subset(cfg, pr).in_stage(STAGE)?;
        let normalized = match cfg.preprocess {
            PreprocessMode::Ssa => {
                let window = cfg.ssa_window.unwrap_or_else(|| default_window(pr.ntime()));
                let s = normalize_precip(&pr, window).in_stage(STAGE)?;
                if !s.degenerate_cells.is_empty() {
                    eprintln!(
                        "stx: {STAGE}: {} precipitation cell(s) are dry everywhere; set to 0",
                        s.degenerate_cells.len()
                    );
                }
                s.grid
            }
            PreprocessMode::None => pr,
        };
        write_grid(STAGE, &cfg.out.join(PR_NORMALIZED), &normalized)?;
    }

    eprintln!("stx: {STAGE}: ok");
    Ok(())
}

/// Percentile thresholding of the anomaly field into the extremes mask.
pub fn stage_detect(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "detect";
    let anomalies = read_artifact(STAGE, &cfg.out.join(ANOMALIES), "preprocess")?;
    let mask = threshold_mask(&anomalies, &cfg.threshold).in_stage(STAGE)?;

    let values: Vec<f64> = mask.bits().iter().map(|&b| f64::from(u8::from(b))).collect();
    let grid = Grid3D::new(
        "extreme_mask",
        "1",
        anomalies.time_axis().to_vec(),
        anomalies.axes().clone(),
        values,
        DataKind::F32,
    )
    .in_stage(STAGE)?;
    write_grid(STAGE, &cfg.out.join(MASK), &grid)?;

    let (nt, ny, nx) = mask.dims();
    let total = nt * ny * nx;
    let summary = outputs::ThresholdSummary {
        variable: anomalies.variable_name().to_string(),
        units: anomalies.units().to_string(),
        percentile_total: cfg.threshold.percentile_total,
        tail: cfg.threshold.tail.to_string(),
        tail_budget: cfg.threshold.budget.to_string(),
        low_cut: mask.low_cut,
        high_cut: mask.high_cut,
        masked_voxels: mask.count(),
        total_voxels: total,
        mask_fraction: mask.count() as f64 / total as f64,
    };
    write_file(STAGE, &cfg.out.join(THRESHOLD), outputs::to_json(&summary))?;
    eprintln!(
        "stx: {STAGE}: masked {} of {} voxels",
        mask.count(),
        total
    );
    Ok(())
}

fn read_mask(
    stage: &'static str,
    cfg: &PipelineConfig,
) -> CliResult<(ExtremeMask, outputs::ThresholdSummary)> {
    let grid = read_artifact(stage, &cfg.out.join(MASK), "detect")?;
    let bits: Vec<bool> = grid.values().iter().map(|&v| v > 0.5).collect();
    let mut mask =
        ExtremeMask::from_bits(grid.dims(), bits, grid.lon_full_circle()).in_stage(stage)?;
    let path = cfg.out.join(THRESHOLD);
    if !path.is_file() {
        return Err(CliError::validation(
            stage,
            format!("missing artifact {}; run `stx detect` first", path.display()),
        ));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::validation(stage, format!("cannot read {}: {e}", path.display()))
    })?;
    let summary: outputs::ThresholdSummary = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(stage, format!("malformed {}: {e}", path.display()))
    })?;
    mask.low_cut = summary.low_cut;
    mask.high_cut = summary.high_cut;
    Ok((mask, summary))
}

fn read_labels(
    stage: &'static str,
    cfg: &PipelineConfig,
    kind: StructureKind,
) -> CliResult<(Labeling, Grid3D)> {
    let path = structure_dir(cfg, kind).join(LABELS);
    if !path.is_file() {
        return Err(CliError::validation(
            stage,
            format!("missing artifact {}; run `stx label` first", path.display()),
        ));
    }
    let grid = read_grid_file(&path).in_stage(stage)?;
    let labels: Vec<u32> = grid.values().iter().map(|&v| v as u32).collect();
    let labeling = Labeling::from_labels(grid.dims(), labels).in_stage(stage)?;
    Ok((labeling, grid))
}

/// Connected-component labeling of the mask under every configured
/// structure.
pub fn stage_label(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "label";
    let mask_grid = read_artifact(STAGE, &cfg.out.join(MASK), "detect")?;
    let (mask, summary) = read_mask(STAGE, cfg)?;
    for &kind in &cfg.structures {
        let labeling =
            label_components(&mask, &neighborhood(kind), cfg.wrap_lon).in_stage(STAGE)?;
        let values: Vec<f64> = labeling.labels().iter().map(|&id| f64::from(id)).collect();
        let grid = Grid3D::new(
            "component_id",
            "1",
            mask_grid.time_axis().to_vec(),
            mask_grid.axes().clone(),
            values,
            DataKind::F64,
        )
        .in_stage(STAGE)?;
        write_grid(STAGE, &structure_dir(cfg, kind).join(LABELS), &grid)?;
        if cfg.formats.json {
            let mask_summary = outputs::MaskSummary {
                structure: kind.to_string(),
                wrap_lon: cfg.wrap_lon,
                n_components: labeling.n_components(),
                threshold: summary.clone(),
            };
            write_file(
                STAGE,
                &structure_dir(cfg, kind).join("mask_summary.json"),
                outputs::to_json(&mask_summary),
            )?;
        }
        eprintln!(
            "stx: {STAGE}: {kind}: {} components",
            labeling.n_components()
        );
    }
    Ok(())
}

fn ranked_stats(
    stage: &'static str,
    cfg: &PipelineConfig,
    kind: StructureKind,
    anomalies: &Grid3D,
) -> CliResult<(Labeling, Vec<ComponentStats>)> {
    let (labeling, _) = read_labels(stage, cfg, kind)?;
    let stats = component_metrics(&labeling, anomalies).in_stage(stage)?;
    Ok((labeling, stats))
}

/// Component metrics, concentration curves, and spatial maps.
pub fn stage_stats(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "stats";
    let anomalies = read_artifact(STAGE, &cfg.out.join(ANOMALIES), "preprocess")?;
    if cfg.formats.csv {
        write_file(
            STAGE,
            &cfg.out.join("iav_map.csv"),
            outputs::map_csv(&iav_map(&anomalies)),
        )?;
    }
    for &kind in &cfg.structures {
        let (labeling, stats) = ranked_stats(STAGE, cfg, kind, &anomalies)?;
        if cfg.formats.csv {
            let dir = structure_dir(cfg, kind);
            write_file(STAGE, &dir.join("components.csv"), outputs::components_csv(&stats))?;
            write_file(
                STAGE,
                &dir.join("cumulative.csv"),
                outputs::cumulative_csv(&cumulative_curve(&stats)),
            )?;
            let bits: Vec<bool> = labeling.labels().iter().map(|&id| id > 0).collect();
            let mask = ExtremeMask::from_bits(labeling.dims(), bits, anomalies.lon_full_circle())
                .in_stage(STAGE)?;
            let loss = spatial_loss_map(&mask, &anomalies).in_stage(STAGE)?;
            write_file(STAGE, &dir.join("loss_map.csv"), outputs::map_csv(&loss))?;
        }
        eprintln!("stx: {STAGE}: {kind}: {} components ranked", stats.len());
    }
    Ok(())
}

/// Size-distribution histogram and power-law fit per structure.
///
/// The isolated-voxel structure is excluded from fitting (every size is 1,
/// so the distribution is degenerate by construction); its histogram is
/// still written.
pub fn stage_powerlaw(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "powerlaw";
    for &kind in &cfg.structures {
        let (labeling, _) = read_labels(STAGE, cfg, kind)?;
        let sizes: Vec<u64> = labeling.voxel_counts().iter().map(|&c| c as u64).collect();
        if sizes.is_empty() {
            eprintln!("stx: {STAGE}: {kind}: no components; skipped");
            continue;
        }
        let dist = SizeDistribution::from_sizes(&sizes).in_stage(STAGE)?;
        let dir = structure_dir(cfg, kind);
        if cfg.formats.csv {
            write_file(STAGE, &dir.join("powerlaw.csv"), outputs::powerlaw_csv(&dist))?;
        }
        if kind == StructureKind::Sesd {
            eprintln!("stx: {STAGE}: sesd: all sizes are 1; fit skipped");
            continue;
        }
        match powerlaw_fit_with(&dist, cfg.fit_method) {
            Ok(fit) if fit.gamma.is_finite() => {
                if cfg.formats.json {
                    let report = outputs::PowerLawReport::new(kind.to_string(), &fit, &dist);
                    write_file(STAGE, &dir.join("powerlaw_fit.json"), outputs::to_json(&report))?;
                }
                eprintln!(
                    "stx: {STAGE}: {kind}: gamma = {:.4} (r2 = {:.4})",
                    fit.gamma, fit.r_squared
                );
            }
            Ok(_) => eprintln!("stx: {STAGE}: {kind}: degenerate fit; skipped"),
            Err(e) => eprintln!("stx: {STAGE}: {kind}: fit not possible ({e}); skipped"),
        }
    }
    Ok(())
}

/// Hot/cold/dry/wet classification of the top-ranked components.
pub fn stage_attribute(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "attribute";
    if cfg.tas.is_none() || cfg.pr.is_none() {
        return Err(CliError {
            stage: STAGE,
            code: EXIT_CONFIG,
            message: "attribution requires both tas and pr inputs in the config".to_string(),
        });
    }
    let anomalies = read_artifact(STAGE, &cfg.out.join(ANOMALIES), "preprocess")?;
    let tas = read_artifact(STAGE, &cfg.out.join(TAS_SCALED), "preprocess")?;
    let pr = read_artifact(STAGE, &cfg.out.join(PR_NORMALIZED), "preprocess")?;
    let acfg = AttributionConfig {
        top_k: cfg.top_k,
        max_lag: cfg.max_lag,
        reference: cfg.reference,
    };
    for &kind in &cfg.structures {
        let (labeling, stats) = ranked_stats(STAGE, cfg, kind, &anomalies)?;
        let records =
            attribute_components(&stats, &labeling, &tas, &pr, &acfg).in_stage(STAGE)?;
        let dir = structure_dir(cfg, kind);
        if cfg.formats.csv {
            write_file(STAGE, &dir.join("attribution.csv"), outputs::attribution_csv(&records))?;
        }
        if cfg.formats.json {
            let table = attribution_table(&records, &acfg);
            let report =
                outputs::AttributionReport::new(kind.to_string(), cfg.reference.to_string(), &table);
            write_file(
                STAGE,
                &dir.join("attribution_table.json"),
                outputs::to_json(&report),
            )?;
        }
        eprintln!("stx: {STAGE}: {kind}: classified {} components", records.len());
    }
    Ok(())
}

/// SVG result charts (pipeline only).
fn stage_charts(cfg: &PipelineConfig) -> CliResult<()> {
    const STAGE: &str = "charts";
    let anomalies = read_artifact(STAGE, &cfg.out.join(ANOMALIES), "preprocess")?;
    for &kind in &cfg.structures {
        let (labeling, stats) = ranked_stats(STAGE, cfg, kind, &anomalies)?;
        if stats.is_empty() {
            continue;
        }
        let dir = structure_dir(cfg, kind);
        write_file(STAGE, &dir.join("ranked_loss.svg"), svg::ranked_loss_chart(&stats))?;
        write_file(
            STAGE,
            &dir.join("cumulative_share.svg"),
            svg::cumulative_share_chart(&cumulative_curve(&stats)),
        )?;
        if kind != StructureKind::Sesd {
            let sizes: Vec<u64> = labeling.voxel_counts().iter().map(|&c| c as u64).collect();
            let dist = SizeDistribution::from_sizes(&sizes).in_stage(STAGE)?;
            if let Ok(fit) = powerlaw_fit_with(&dist, cfg.fit_method) {
                if fit.gamma.is_finite() {
                    write_file(
                        STAGE,
                        &dir.join("powerlaw_fit.svg"),
                        svg::powerlaw_chart(&dist, &fit),
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// The whole pipeline, charts, and the manifest.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<()> {
    stage_preprocess(cfg)?;
    stage_detect(cfg)?;
    stage_label(cfg)?;
    stage_stats(cfg)?;
    stage_powerlaw(cfg)?;
    if cfg.tas.is_some() && cfg.pr.is_some() {
        stage_attribute(cfg)?;
    } else {
        eprintln!("stx: attribute: skipped (tas/pr inputs not configured)");
    }
    if cfg.formats.svg {
        stage_charts(cfg)?;
    }
    let manifest = manifest::build(cfg)?;
    write_file(
        "manifest",
        &cfg.out.join("manifest.json"),
        outputs::to_json(&manifest),
    )?;
    eprintln!("stx: pipeline: complete ({})", cfg.out.display());
    Ok(())
}
