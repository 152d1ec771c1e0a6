//! End-to-end contract tests for the `stx` binary: the bundled demo
//! fixture, exit codes, artifact layout, stage resumability, and
//! byte-determinism.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn stx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stx"))
}

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo/demo.conf")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = stx();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn stx")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

/// Every file under `dir` (recursively), keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, rel: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(root.join(rel)).unwrap() {
            let entry = entry.unwrap();
            let sub = rel.join(entry.file_name());
            if entry.file_type().unwrap().is_dir() {
                walk(root, &sub, out);
            } else {
                out.insert(
                    sub.to_string_lossy().replace('\\', "/"),
                    std::fs::read(root.join(&sub)).unwrap(),
                );
            }
        }
    }
    let mut map = BTreeMap::new();
    walk(dir, Path::new(""), &mut map);
    map
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1) // column header
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn demo_pipeline_recovers_the_three_planted_components() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "pipeline",
            "--config",
            demo_config().to_str().unwrap(),
            "--out",
            out_dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let components =
        std::fs::read_to_string(out_dir.path().join("leld/components.csv")).unwrap();
    let rows = data_rows(&components);
    assert_eq!(rows.len(), 3, "expected exactly 3 components:\n{components}");
    // Planted integrals: −(size² × 10⁸ kg) for sizes 5, 3, 1.
    let expected = [-0.0025f64, -0.0009, -0.0001];
    for (row, want) in rows.iter().zip(expected) {
        let got: f64 = row[3].parse().unwrap();
        assert!(
            ((got - want) / want).abs() < 1e-9,
            "integral {got} differs from planted {want}"
        );
    }
    let sizes: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(sizes, vec![5, 3, 1]);

    // The planted warm/dry patch flags exactly one hot and one dry
    // component at both lags.
    let table: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.path().join("leld/attribution_table.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(table["hot"]["per_lag"], serde_json::json!([1, 1]));
    assert_eq!(table["dry"]["per_lag"], serde_json::json!([1, 1]));
    assert_eq!(table["cold"]["presented"], serde_json::json!(0));
    assert_eq!(table["wet"]["presented"], serde_json::json!(0));

    // Required bundle is present.
    for name in [
        "manifest.json",
        "mask.stxg",
        "threshold.json",
        "iav_map.csv",
        "leld/labels.stxg",
        "leld/mask_summary.json",
        "leld/cumulative.csv",
        "leld/loss_map.csv",
        "leld/powerlaw.csv",
        "leld/powerlaw_fit.json",
        "leld/attribution.csv",
        "leld/ranked_loss.svg",
        "leld/cumulative_share.svg",
        "leld/powerlaw_fit.svg",
    ] {
        assert!(out_dir.path().join(name).is_file(), "missing {name}");
    }

    // The manifest lists every artifact except itself.
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.path().join("manifest.json")).unwrap(),
    )
    .unwrap();
    let listed: Vec<&str> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(listed.contains(&"leld/components.csv"));
    assert!(!listed.contains(&"manifest.json"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_structure_exits_2() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "pipeline",
            "--config",
            demo_config().to_str().unwrap(),
            "--structure",
            "27n",
            "--out",
            out_dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("config"), "stderr: {}", stderr(&out));
}

#[test]
fn empty_anomaly_pool_exits_4_naming_detect() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("gpp.csv"),
        "# var=x\n# units=kg m-2 s-1\n# lat_edges=0,10\n# lon_edges=0,10,20\n# t0=2001-01\nNA,NA\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("run.conf"), "gpp = gpp.csv\npreprocess = none\n").unwrap();
    let out = run(
        &[
            "pipeline",
            "--config",
            dir.path().join("run.conf").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("detect"), "stderr: {err}");
}

#[test]
fn wrap_on_partial_longitude_axis_exits_3_naming_label() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("gpp.csv"),
        "# var=x\n# units=kg m-2 s-1\n# lat_edges=0,10\n# lon_edges=0,10,20\n# t0=2001-01\n\
         1,-5\n2,-6\n3,4\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "gpp = gpp.csv\npreprocess = none\npercentile = 40\nstructures = leld\nwrap_lon = on\n",
    )
    .unwrap();
    let out = run(
        &[
            "pipeline",
            "--config",
            dir.path().join("run.conf").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("label"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_artifact_points_to_the_stage_that_makes_it() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "detect",
            "--config",
            demo_config().to_str().unwrap(),
            "--out",
            out_dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr(&out).contains("run `stx preprocess` first"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn stage_subcommands_reproduce_the_pipeline_artifacts() {
    let full = tempfile::tempdir().unwrap();
    let staged = tempfile::tempdir().unwrap();
    let cfg = demo_config();
    let cfg = cfg.to_str().unwrap();
    assert!(run(
        &["pipeline", "--config", cfg, "--out", full.path().to_str().unwrap()],
        &[]
    )
    .status
    .success());
    for sub in ["preprocess", "detect", "label", "stats", "powerlaw", "attribute"] {
        let out = run(
            &[sub, "--config", cfg, "--out", staged.path().to_str().unwrap()],
            &[],
        );
        assert!(out.status.success(), "{sub}: {}", stderr(&out));
    }
    let full_snap = snapshot(full.path());
    let staged_snap = snapshot(staged.path());
    for (name, bytes) in &staged_snap {
        assert_eq!(
            Some(bytes),
            full_snap.get(name),
            "stage-by-stage artifact {name} differs from the pipeline's"
        );
    }
    // The pipeline additionally wrote charts and the manifest.
    assert!(full_snap.keys().any(|k| k.ends_with(".svg")));
    assert!(full_snap.contains_key("manifest.json"));
}

#[test]
fn reruns_and_thread_counts_are_byte_identical() {
    let out_dir = tempfile::tempdir().unwrap();
    let cfg = demo_config();
    let args = [
        "pipeline",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ];
    assert!(run(&args, &[("STX_THREADS", "1")]).status.success());
    let first = snapshot(out_dir.path());
    assert!(run(&args, &[]).status.success());
    let second = snapshot(out_dir.path());
    assert_eq!(first, second, "rerun changed artifact bytes");
    assert!(run(&args, &[("STX_THREADS", "8")]).status.success());
    let third = snapshot(out_dir.path());
    assert_eq!(first, third, "thread count changed artifact bytes");
}

#[test]
fn format_filter_gates_report_families() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "pipeline",
            "--config",
            demo_config().to_str().unwrap(),
            "--out",
            out_dir.path().to_str().unwrap(),
            "--format",
            "csv",
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let snap = snapshot(out_dir.path());
    assert!(snap.keys().any(|k| k.ends_with("components.csv")));
    assert!(!snap.keys().any(|k| k.ends_with(".svg")));
    // Interchange artifacts and the manifest are exempt from the filter.
    assert!(snap.contains_key("threshold.json"));
    assert!(snap.contains_key("manifest.json"));
    assert!(!snap.contains_key("leld/mask_summary.json"));
    assert!(!snap.contains_key("leld/powerlaw_fit.json"));
    assert!(!snap.contains_key("leld/attribution_table.json"));
}

#[test]
fn invalid_threads_variable_exits_2() {
    let out = run(
        &["pipeline", "--config", demo_config().to_str().unwrap()],
        &[("STX_THREADS", "zero")],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn every_table_declares_units() {
    let out_dir = tempfile::tempdir().unwrap();
    assert!(run(
        &[
            "pipeline",
            "--config",
            demo_config().to_str().unwrap(),
            "--out",
            out_dir.path().to_str().unwrap(),
        ],
        &[],
    )
    .status
    .success());
    for (name, bytes) in snapshot(out_dir.path()) {
        if name.ends_with(".csv") {
            let text = String::from_utf8(bytes).unwrap();
            assert!(
                text.starts_with('#'),
                "{name} lacks a units comment header"
            );
        } else if name.ends_with(".json") && name != "manifest.json" {
            let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
            assert!(
                v.get("units").is_some(),
                "{name} lacks a units field"
            );
        }
    }
}
