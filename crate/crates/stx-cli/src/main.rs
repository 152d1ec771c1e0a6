//! `stx` — detect, quantify, rank, and attribute spatiotemporal extremes
//! in gridded monthly carbon-cycle data.

mod config;
mod error;
mod manifest;
mod outputs;
mod stages;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, PipelineConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "stx",
    version,
    about = "Spatiotemporal extremes in gridded monthly carbon-cycle data",
    long_about = "Detects extreme anomalies in a gridded monthly carbon-flux record, labels \
                  them into spatiotemporal components under six neighborhood structures, ranks \
                  them by carbon impact, fits their size distribution, and attributes the top \
                  events to temperature and precipitation drivers.\n\nStages communicate through \
                  artifacts in the output directory, so each subcommand can resume from the \
                  previous one's outputs. `pipeline` runs everything.\n\nThe environment \
                  variable STX_THREADS caps internal parallelism (results are identical for \
                  any thread count)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn inputs into anomaly fields (carbon flux, scaled drivers)
    Preprocess(StageArgs),
    /// Threshold the anomaly field into an extremes mask
    Detect(StageArgs),
    /// Label mask voxels into connected components per structure
    Label(StageArgs),
    /// Rank components and write tables and maps
    Stats(StageArgs),
    /// Fit the component size distribution
    Powerlaw(StageArgs),
    /// Classify top components as hot/cold/dry/wet
    Attribute(StageArgs),
    /// Run every stage, then charts and the manifest
    Pipeline(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Path to the key=value config file
    #[arg(long)]
    config: PathBuf,
    /// Neighborhood structure (repeatable; replaces the config list)
    #[arg(long = "structure")]
    structure: Vec<String>,
    /// Total percentile budget for thresholding (0, 100)
    #[arg(long)]
    percentile: Option<f64>,
    /// Tail(s) of the anomaly distribution: neg|pos|both
    #[arg(long)]
    tail: Option<String>,
    /// Longitude wraparound: on|off
    #[arg(long = "wrap-lon")]
    wrap_lon: Option<String>,
    /// Number of top-ranked components to attribute
    #[arg(long = "top-k")]
    top_k: Option<usize>,
    /// Maximum driver lag in months
    #[arg(long)]
    lags: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact families to write: comma list of csv,json,svg
    #[arg(long)]
    format: Option<String>,
}

impl StageArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            structures: self.structure.clone(),
            percentile: self.percentile,
            tail: self.tail.clone(),
            wrap_lon: self.wrap_lon.clone(),
            top_k: self.top_k,
            lags: self.lags,
            out: self.out.clone(),
            format: self.format.clone(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("stx: error in stage {e}");
        std::process::exit(e.code);
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    init_threads()?;
    let (args, stage): (&StageArgs, fn(&PipelineConfig) -> CliResult<()>) = match &cli.command {
        Command::Preprocess(a) => (a, stages::stage_preprocess),
        Command::Detect(a) => (a, stages::stage_detect),
        Command::Label(a) => (a, stages::stage_label),
        Command::Stats(a) => (a, stages::stage_stats),
        Command::Powerlaw(a) => (a, stages::stage_powerlaw),
        Command::Attribute(a) => (a, stages::stage_attribute),
        Command::Pipeline(a) => (a, stages::run_pipeline),
    };
    let cfg = PipelineConfig::load(&args.config, &args.overrides())?;
    stage(&cfg)
}

/// Applies the `STX_THREADS` cap before any parallel work starts.
fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("STX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            CliError::config(format!(
                "invalid STX_THREADS {raw:?} (expected an integer >= 1)"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot configure thread pool: {e}")))
}
