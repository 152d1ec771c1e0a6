//! Regenerates the bundled demo fixture.
//!
//! ```text
//! cargo run -p stx-cli --example make_demo [-- DIR]
//! ```
//!
//! Writes `gpp.csv`, `tas.csv`, `pr.csv`, and `demo.conf` (default
//! directory: `fixtures/demo`). The carbon grid holds three planted extreme
//! components of sizes 5, 3, and 1 on an 8-month, 10×24 global grid with an
//! exactly-zero background, so the pipeline recovers them exactly; their
//! carbon integrals are −25, −9, and −1 in units of 10⁸ kg C by
//! construction. The temperature and precipitation companions hold a warm,
//! dry patch under the largest component's footprint, so attribution flags
//! it hot and dry.

use std::collections::BTreeSet;
use std::path::Path;

use stx::io::write_csv_grid;
use stx::synthetic::plant_scene;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures/demo".to_string());
    let dir = Path::new(&dir);
    std::fs::create_dir_all(dir).expect("create fixture directory");

    let scene = plant_scene(42, 8, 10, 24, &[5, 3, 1]).expect("plant demo scene");
    let gpp = &scene.anomalies;

    // Drivers are already in scaled/normalized form (the demo config sets
    // `preprocess = none`): a +3 standardized-temperature / −0.5
    // normalized-precipitation patch sits under the largest component's
    // footprint from one month before its onset through its last month.
    let largest = &scene.components[0];
    let cells: BTreeSet<(usize, usize)> =
        largest.voxels.iter().map(|&(_, y, x)| (y, x)).collect();
    let t_min = largest.voxels.iter().map(|&(t, _, _)| t).min().unwrap();
    let t_max = largest.voxels.iter().map(|&(t, _, _)| t).max().unwrap();
    let patch_start = t_min.saturating_sub(1);

    let mut tas = gpp.derived(vec![0.0; gpp.values().len()], Some("1")).unwrap();
    let mut pr = gpp.derived(vec![0.5; gpp.values().len()], Some("1")).unwrap();
    for t in patch_start..=t_max {
        for &(y, x) in &cells {
            tas.set(t, y, x, 3.0);
            pr.set(t, y, x, -0.5);
        }
    }

    write(dir, "gpp.csv", &write_csv_grid(gpp));
    write(dir, "tas.csv", &rename(&write_csv_grid(&tas), "tas_scaled"));
    write(dir, "pr.csv", &rename(&write_csv_grid(&pr), "pr_normalized"));
    write(
        dir,
        "demo.conf",
        "# Demo: three planted extreme components on an 8-month 10x24 global grid.\n\
         # The inputs are already anomalies, so preprocessing is disabled.\n\
         gpp = gpp.csv\n\
         tas = tas.csv\n\
         pr = pr.csv\n\
         preprocess = none\n\
         percentile = 10\n\
         tail = neg\n\
         structures = leld\n\
         wrap_lon = on\n\
         top_k = 3\n\
         max_lag = 1\n\
         # The record is only 8 months, so a per-footprint climatology would be\n\
         # dominated by the planted patch itself; compare against the global\n\
         # snapshot of each lagged month instead.\n\
         reference = global-snapshot\n\
         out = out\n\
         formats = csv,json,svg\n",
    );
    for part in &scene.components {
        eprintln!(
            "planted component: {} voxels, integral {} Pg C",
            part.voxels.len(),
            part.integral_pg
        );
    }
    eprintln!("wrote demo fixture to {}", dir.display());
}

fn rename(csv: &str, var: &str) -> String {
    csv.replacen("# var=gpp_anomaly", &format!("# var={var}"), 1)
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).expect("write fixture file");
}
