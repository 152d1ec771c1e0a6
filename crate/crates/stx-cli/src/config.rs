//! Pipeline configuration: a flat `key = value` text file plus command-line
//! overrides.
//!
//! The format is deliberately minimal — one setting per line, `#` starts a
//! comment line, blank lines are ignored. Unknown or duplicated keys are
//! configuration errors: a typo must never silently fall back to a default.
//! Relative input paths resolve against the config file's directory, so a
//! config can travel with its data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use stx::attribution::ReferenceMode;
use stx::detect::{StructureKind, Tail, TailBudget, ThresholdSpec};
use stx::grid::MonthIndex;
use stx::scalefree::FitMethod;

use crate::error::{CliError, CliResult};

/// How the inputs are turned into anomalies.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum PreprocessMode {
    /// Per-cell spectral decomposition: anomalies are the residual after
    /// removing the trend and annual-cycle groups; temperature is
    /// standardized, precipitation normalized.
    #[default]
    Ssa,
    /// Inputs are used as-is (they are already anomalies / scaled drivers).
    None,
}

impl FromStr for PreprocessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ssa" => Ok(PreprocessMode::Ssa),
            "none" => Ok(PreprocessMode::None),
            other => Err(format!("unknown preprocess mode {other:?} (expected ssa|none)")),
        }
    }
}

impl PreprocessMode {
    fn as_str(self) -> &'static str {
        match self {
            PreprocessMode::Ssa => "ssa",
            PreprocessMode::None => "none",
        }
    }
}

/// Which artifact families to emit.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

impl Formats {
    fn parse(list: &str) -> Result<Self, String> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for item in list.split(',') {
            match item.trim() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown format {other:?} (expected csv|json|svg)")),
            }
        }
        if !(f.csv || f.json || f.svg) {
            return Err("format list is empty".to_string());
        }
        Ok(f)
    }

    fn as_string(self) -> String {
        let mut parts = Vec::new();
        if self.csv {
            parts.push("csv");
        }
        if self.json {
            parts.push("json");
        }
        if self.svg {
            parts.push("svg");
        }
        parts.join(",")
    }
}

/// The complete, validated run configuration.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Carbon-flux input (the variable whose extremes are analyzed).
    pub gpp: PathBuf,
    /// Optional temperature driver for attribution.
    pub tas: Option<PathBuf>,
    /// Optional precipitation driver for attribution.
    pub pr: Option<PathBuf>,
    /// Study period (inclusive); `None` = full record.
    pub start: Option<MonthIndex>,
    pub end: Option<MonthIndex>,
    pub preprocess: PreprocessMode,
    /// Spectral window length in months; `None` = largest multiple of 12
    /// not exceeding half the record.
    pub ssa_window: Option<usize>,
    pub threshold: ThresholdSpec,
    /// Neighborhood structures to label under (deduplicated, in order).
    pub structures: Vec<StructureKind>,
    pub wrap_lon: bool,
    /// How many top-ranked components to attribute.
    pub top_k: usize,
    /// Maximum driver lag in months.
    pub max_lag: usize,
    pub fit_method: FitMethod,
    pub reference: ReferenceMode,
    /// Output directory (artifact workspace).
    pub out: PathBuf,
    pub formats: Formats,
}

/// Command-line overrides (each `None` keeps the config-file value).
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub structures: Vec<String>,
    pub percentile: Option<f64>,
    pub tail: Option<String>,
    pub wrap_lon: Option<String>,
    pub top_k: Option<usize>,
    pub lags: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "gpp",
    "tas",
    "pr",
    "start",
    "end",
    "preprocess",
    "ssa_window",
    "percentile",
    "tail",
    "tail_budget",
    "structures",
    "wrap_lon",
    "top_k",
    "max_lag",
    "fit_method",
    "reference",
    "out",
    "formats",
];

impl PipelineConfig {
    /// Reads and validates a config file, then applies CLI overrides.
    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut cfg = Self::parse(&text, base)?;
        cfg.apply(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(format!(
                    "line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            if seen.insert(key.clone(), value).is_some() {
                return Err(CliError::config(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }

        let get = |k: &str| seen.get(k).map(String::as_str);
        let resolve = |p: &str| -> PathBuf {
            let pb = PathBuf::from(p);
            if pb.is_absolute() {
                pb
            } else {
                base.join(pb)
            }
        };

        let gpp = get("gpp")
            .map(resolve)
            .ok_or_else(|| CliError::config("missing required key \"gpp\""))?;

        let mut threshold = ThresholdSpec::default();
        if let Some(v) = get("percentile") {
            threshold.percentile_total = parse_key("percentile", v)?;
        }
        if let Some(v) = get("tail") {
            threshold.tail = v
                .parse::<Tail>()
                .map_err(|e| CliError::config(e.to_string()))?;
        }
        if let Some(v) = get("tail_budget") {
            threshold.budget = v
                .parse::<TailBudget>()
                .map_err(|e| CliError::config(e.to_string()))?;
        }

        let structures = match get("structures") {
            Some(list) => parse_structures(list)?,
            None => StructureKind::ALL.to_vec(),
        };

        Ok(PipelineConfig {
            gpp,
            tas: get("tas").map(resolve),
            pr: get("pr").map(resolve),
            start: get("start").map(|v| parse_key("start", v)).transpose()?,
            end: get("end").map(|v| parse_key("end", v)).transpose()?,
            preprocess: get("preprocess")
                .map(|v| v.parse::<PreprocessMode>().map_err(CliError::config))
                .transpose()?
                .unwrap_or_default(),
            ssa_window: get("ssa_window")
                .map(|v| parse_key("ssa_window", v))
                .transpose()?,
            threshold,
            structures,
            wrap_lon: get("wrap_lon")
                .map(parse_on_off)
                .transpose()?
                .unwrap_or(true),
            top_k: get("top_k")
                .map(|v| parse_key("top_k", v))
                .transpose()?
                .unwrap_or(100),
            max_lag: get("max_lag")
                .map(|v| parse_key("max_lag", v))
                .transpose()?
                .unwrap_or(3),
            fit_method: get("fit_method")
                .map(|v| {
                    v.parse::<FitMethod>()
                        .map_err(|e| CliError::config(e.to_string()))
                })
                .transpose()?
                .unwrap_or_default(),
            reference: get("reference")
                .map(|v| {
                    v.parse::<ReferenceMode>()
                        .map_err(|e| CliError::config(e.to_string()))
                })
                .transpose()?
                .unwrap_or_default(),
            out: get("out").map(resolve).unwrap_or_else(|| resolve("stx-out")),
            formats: get("formats")
                .map(|v| Formats::parse(v).map_err(CliError::config))
                .transpose()?
                .unwrap_or_default(),
        })
    }

    fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if !o.structures.is_empty() {
            self.structures = parse_structures(&o.structures.join(","))?;
        }
        if let Some(p) = o.percentile {
            self.threshold.percentile_total = p;
        }
        if let Some(t) = &o.tail {
            self.threshold.tail = t
                .parse::<Tail>()
                .map_err(|e| CliError::config(e.to_string()))?;
        }
        if let Some(w) = &o.wrap_lon {
            self.wrap_lon = parse_on_off(w)?;
        }
        if let Some(k) = o.top_k {
            self.top_k = k;
        }
        if let Some(l) = o.lags {
            self.max_lag = l;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(f) = &o.format {
            self.formats = Formats::parse(f).map_err(CliError::config)?;
        }
        Ok(())
    }

    fn validate(&self) -> CliResult<()> {
        self.threshold
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        if self.structures.is_empty() {
            return Err(CliError::config("no structures selected"));
        }
        if self.top_k == 0 {
            return Err(CliError::config("top_k must be at least 1"));
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                return Err(CliError::config(format!(
                    "study period starts {s} after it ends {e}"
                )));
            }
        }
        for (key, path) in [
            ("gpp", Some(&self.gpp)),
            ("tas", self.tas.as_ref()),
            ("pr", self.pr.as_ref()),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(CliError::config(format!(
                        "{key} input {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Canonical text of the effective settings (sorted `key = value`
    /// lines), used for the manifest's config hash.
    pub fn effective_text(&self) -> String {
        let mut pairs: Vec<(&str, String)> = vec![
            ("gpp", self.gpp.display().to_string()),
            ("preprocess", self.preprocess.as_str().to_string()),
            ("percentile", self.threshold.percentile_total.to_string()),
            ("tail", self.threshold.tail.to_string()),
            ("tail_budget", self.threshold.budget.to_string()),
            (
                "structures",
                self.structures
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("wrap_lon", if self.wrap_lon { "on" } else { "off" }.to_string()),
            ("top_k", self.top_k.to_string()),
            ("max_lag", self.max_lag.to_string()),
            ("fit_method", self.fit_method.to_string()),
            ("reference", self.reference.to_string()),
            ("out", self.out.display().to_string()),
            ("formats", self.formats.as_string()),
        ];
        if let Some(p) = &self.tas {
            pairs.push(("tas", p.display().to_string()));
        }
        if let Some(p) = &self.pr {
            pairs.push(("pr", p.display().to_string()));
        }
        if let Some(m) = self.start {
            pairs.push(("start", m.to_string()));
        }
        if let Some(m) = self.end {
            pairs.push(("end", m.to_string()));
        }
        if let Some(w) = self.ssa_window {
            pairs.push(("ssa_window", w.to_string()));
        }
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let mut text = String::new();
        for (k, v) in pairs {
            let _ = writeln!(text, "{k} = {v}");
        }
        text
    }
}

fn parse_key<T>(key: &str, value: &str) -> CliResult<T>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CliError::config(format!("invalid {key} {value:?}: {e}")))
}

fn parse_on_off(v: &str) -> CliResult<bool> {
    match v {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(CliError::config(format!(
            "invalid wrap_lon {other:?} (expected on|off)"
        ))),
    }
}

fn parse_structures(list: &str) -> CliResult<Vec<StructureKind>> {
    let mut out = Vec::new();
    for item in list.split(',') {
        let kind = item
            .trim()
            .parse::<StructureKind>()
            .map_err(|e| CliError::config(e.to_string()))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(CliError::config("structure list is empty"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("run.conf");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "{body}").unwrap();
        path
    }

    fn touch(dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, b"x").unwrap();
        p
    }

    #[test]
    fn defaults_and_required_keys() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "g.stxg");
        let path = write_config(dir.path(), "gpp = g.stxg");
        let cfg = PipelineConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.structures, StructureKind::ALL.to_vec());
        assert_eq!(cfg.top_k, 100);
        assert_eq!(cfg.max_lag, 3);
        assert!(cfg.wrap_lon);
        assert_eq!(cfg.threshold.percentile_total, 10.0);
        assert_eq!(cfg.out, dir.path().join("stx-out"));

        let missing = write_config(dir.path(), "tail = neg");
        let err = PipelineConfig::load(&missing, &Overrides::default()).unwrap_err();
        assert_eq!(err.code, crate::error::EXIT_CONFIG);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "g.stxg");
        for body in [
            "gpp = g.stxg\nstructure = leld",         // unknown key
            "gpp = g.stxg\ntop_k = 5\ntop_k = 6",     // duplicate
            "gpp = g.stxg\nstructures = leld, 27n",   // unknown structure
            "gpp = g.stxg\npercentile = 0",           // out of range
            "gpp = g.stxg\nwrap_lon = yes",           // bad boolean
            "gpp = g.stxg\nstart = 2010-01\nend = 2009-12", // inverted period
        ] {
            let path = write_config(dir.path(), body);
            let err = PipelineConfig::load(&path, &Overrides::default()).unwrap_err();
            assert_eq!(err.code, crate::error::EXIT_CONFIG, "body: {body}");
            assert_eq!(err.stage, "config");
        }
    }

    #[test]
    fn missing_input_file_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), "gpp = nowhere.stxg");
        let err = PipelineConfig::load(&path, &Overrides::default()).unwrap_err();
        assert_eq!(err.code, crate::error::EXIT_CONFIG);
        assert!(err.message.contains("nowhere.stxg"));
    }

    #[test]
    fn overrides_replace_file_values() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "g.stxg");
        let path = write_config(
            dir.path(),
            "gpp = g.stxg\nstructures = sesd\npercentile = 20\ntop_k = 7",
        );
        let overrides = Overrides {
            structures: vec!["leld".into(), "6n".into(), "leld".into()],
            percentile: Some(5.0),
            tail: Some("both".into()),
            wrap_lon: Some("off".into()),
            top_k: Some(3),
            lags: Some(1),
            out: Some(PathBuf::from("/tmp/elsewhere")),
            format: Some("csv".into()),
        };
        let cfg = PipelineConfig::load(&path, &overrides).unwrap();
        assert_eq!(
            cfg.structures,
            vec![StructureKind::Leld, StructureKind::SixN]
        );
        assert_eq!(cfg.threshold.percentile_total, 5.0);
        assert_eq!(cfg.threshold.tail, Tail::Both);
        assert!(!cfg.wrap_lon);
        assert_eq!(cfg.top_k, 3);
        assert_eq!(cfg.max_lag, 1);
        assert_eq!(cfg.out, PathBuf::from("/tmp/elsewhere"));
        assert!(cfg.formats.csv && !cfg.formats.json && !cfg.formats.svg);
    }

    #[test]
    fn effective_text_is_sorted_and_complete() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "g.stxg");
        let path = write_config(dir.path(), "gpp = g.stxg\nssa_window = 60");
        let cfg = PipelineConfig::load(&path, &Overrides::default()).unwrap();
        let text = cfg.effective_text();
        let keys: Vec<&str> = text
            .lines()
            .map(|l| l.split_once(" = ").unwrap().0)
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert!(text.contains("ssa_window = 60"));
        assert!(text.contains("structures = sesd,seld,lesd,6n,18n,leld"));
    }
}
