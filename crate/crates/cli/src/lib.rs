//! Batch experiments: a JSON config in, JSON/CSV/SVG files plus a manifest out.

pub mod plot;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use ppstat_core::diagnostics::{n1_samples, tolerance_report_with_stats, PalmSampler, ToleranceOptions, MIN_REPS};
use ppstat_core::matching::{match_stats, stable_match, verify_stability, PalmMatchStats};
use ppstat_core::percolation::{
    build_boolean_model, count_m_branches, count_spanning_clusters, records_to_csv, summary_json, PercolationRecord,
    SpanMode,
};
use ppstat_core::{GeneratorSpec, Label, Metric, RngSpec};

pub use plot::{emit_plot, Plot, PlotKind};

/// Stream tag separating the blue pattern from the red one in two-colour runs.
const BLUE_TAG: u64 = 0xB1E0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema: {0}")]
    Schema(String),
    #[error("compute: {0}")]
    Compute(#[from] ppstat_core::Error),
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// One-line diagnostic, `ppstat: error[<kind>]: <message>`.
    pub fn diagnostic(&self) -> String {
        let kind = match self {
            CliError::Schema(_) => "schema",
            CliError::Compute(_) => "compute",
            CliError::Io { .. } => "io",
        };
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("ppstat: error[{kind}]: {msg}")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn one() -> usize {
    1
}

fn default_reps() -> usize {
    200
}

fn default_palm_reps() -> usize {
    1000
}

fn default_ball() -> f64 {
    1.0
}

fn default_span() -> SpanMode {
    SpanMode::TouchTwoOpposite { axis: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub generator: GeneratorSpec,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub generator: GeneratorSpec,
    /// Second colour; one-colour matching when absent.
    #[serde(default)]
    pub blue: Option<GeneratorSpec>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub boundary_margin: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolateConfig {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub generator: GeneratorSpec,
    pub radius: f64,
    #[serde(default = "default_span")]
    pub span: SpanMode,
    /// Branch radius `M`; branches are not counted when absent.
    #[serde(default)]
    pub m: Option<f64>,
    /// Defaults to the window centre.
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Half-widths `n` for the one-dimensional `N_n` histogram.
    #[serde(default)]
    pub n1: Vec<u32>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PalmConfig {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub generator: GeneratorSpec,
    #[serde(default = "default_palm_reps")]
    pub replicates: usize,
    /// Radius of the ball around the root whose other points are counted.
    #[serde(default = "default_ball")]
    pub radius: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    /// CSV file, relative to the config file when not absolute.
    pub input: PathBuf,
    pub kind: PlotKind,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Config {
    Generate(GenerateConfig),
    Match(MatchConfig),
    Percolate(PercolateConfig),
    Diagnose(DiagnoseConfig),
    Palm(PalmConfig),
    Plot(PlotConfig),
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn command(&self) -> &'static str {
        match self {
            Config::Generate(_) => "generate",
            Config::Match(_) => "match",
            Config::Percolate(_) => "percolate",
            Config::Diagnose(_) => "diagnose",
            Config::Palm(_) => "palm",
            Config::Plot(_) => "plot",
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            Config::Generate(c) => c.output.as_deref(),
            Config::Match(c) => c.output.as_deref(),
            Config::Percolate(c) => c.output.as_deref(),
            Config::Diagnose(c) => c.output.as_deref(),
            Config::Palm(c) => c.output.as_deref(),
            Config::Plot(c) => c.output.as_deref(),
        }
    }

    fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            Config::Generate(c) => Some(&mut c.seed),
            Config::Match(c) => Some(&mut c.seed),
            Config::Percolate(c) => Some(&mut c.seed),
            Config::Diagnose(c) => Some(&mut c.seed),
            Config::Palm(c) => Some(&mut c.seed),
            Config::Plot(_) => None,
        }
    }

    pub fn override_seed(&mut self, seed: u64) {
        if let Some(s) = self.seed_mut() {
            *s = seed;
        }
    }

    /// Multiplies every replicate count by `factor`, keeping at least one
    /// replicate (and at least the diagnostics minimum for `diagnose`).
    pub fn scale_reps(&mut self, factor: f64) {
        let scale = |n: usize, min: usize| ((n as f64 * factor).round() as usize).max(min);
        match self {
            Config::Generate(c) => c.replicates = scale(c.replicates, 1),
            Config::Match(c) => c.replicates = scale(c.replicates, 1),
            Config::Percolate(c) => c.replicates = scale(c.replicates, 1),
            Config::Diagnose(c) => c.reps = scale(c.reps, MIN_REPS.min(c.reps)),
            Config::Palm(c) => c.replicates = scale(c.replicates, 1),
            Config::Plot(_) => {}
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let schema = |e: ppstat_core::Error| CliError::Schema(e.to_string());
        let positive = |name: &str, n: usize| {
            if n == 0 {
                Err(CliError::Schema(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match self {
            Config::Generate(c) => {
                c.generator.validate().map_err(schema)?;
                positive("replicates", c.replicates)
            }
            Config::Match(c) => {
                c.generator.validate().map_err(schema)?;
                if let Some(b) = &c.blue {
                    b.validate().map_err(schema)?;
                    if b.window != c.generator.window || b.metric != c.generator.metric {
                        return Err(CliError::Schema("blue generator must share window and metric".into()));
                    }
                }
                if !(c.boundary_margin >= 0.0) {
                    return Err(CliError::Schema(format!("boundary_margin {}", c.boundary_margin)));
                }
                positive("replicates", c.replicates)
            }
            Config::Percolate(c) => {
                c.generator.validate().map_err(schema)?;
                if !(c.radius > 0.0 && c.radius.is_finite()) {
                    return Err(CliError::Schema(format!("radius {}", c.radius)));
                }
                if let Some(o) = &c.origin {
                    if o.len() != c.generator.window.dimension() {
                        return Err(CliError::Schema("origin dimension differs from the window".into()));
                    }
                }
                if c.m.is_some_and(|m| !(m >= 0.0)) {
                    return Err(CliError::Schema("m must be nonnegative".into()));
                }
                positive("replicates", c.replicates)
            }
            Config::Diagnose(c) => {
                c.generator.validate().map_err(schema)?;
                if let Some(s) = &c.scales {
                    if s.is_empty() || s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                        return Err(CliError::Schema("scales must be positive".into()));
                    }
                }
                if !c.n1.is_empty() && c.generator.window.dimension() != 1 {
                    return Err(CliError::Schema("n1 needs a one-dimensional window".into()));
                }
                positive("reps", c.reps)
            }
            Config::Palm(c) => {
                c.generator.validate().map_err(schema)?;
                if !(c.radius > 0.0 && c.radius.is_finite()) {
                    return Err(CliError::Schema(format!("radius {}", c.radius)));
                }
                positive("replicates", c.replicates)
            }
            Config::Plot(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub wall_clock_seconds: f64,
    /// File name to SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Named in-memory outputs, written only once the whole computation succeeded.
type Outputs = Vec<(String, String)>;

fn rng_of(seed: u64, stream: u64) -> RngSpec {
    RngSpec::new(seed, stream)
}

fn json_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn run_generate(c: &GenerateConfig) -> Result<Outputs, CliError> {
    let rng = rng_of(c.seed, c.stream);
    let width = c.replicates.to_string().len().max(3);
    let patterns: Vec<String> = (0..c.replicates as u64)
        .into_par_iter()
        .map(|i| c.generator.sample(rng.replicate(i)).map(|p| p.to_json()))
        .collect::<Result<_, _>>()?;
    Ok(patterns
        .into_iter()
        .enumerate()
        .map(|(i, p)| (format!("pattern_{i:0width$}.json"), p))
        .collect())
}

fn run_match(c: &MatchConfig) -> Result<Outputs, CliError> {
    let rng = rng_of(c.seed, c.stream);
    let metric = Metric::for_window(c.generator.metric, &c.generator.window)?;
    struct Rep {
        distances: Vec<f64>,
        stable: bool,
        unmatched: usize,
        json: Option<String>,
    }
    let reps: Vec<Rep> = (0..c.replicates as u64)
        .into_par_iter()
        .map(|i| -> Result<Rep, CliError> {
            let r = rng.replicate(i);
            let red = c.generator.sample(r)?;
            let blue = match &c.blue {
                Some(g) => Some(g.sample(r.derive(BLUE_TAG))?.with_label(Label::Blue)),
                None => None,
            };
            let red = if blue.is_some() { red.with_label(Label::Red) } else { red };
            let m = stable_match(&red, blue.as_ref(), &metric)?;
            let stable = verify_stability(&m, &red, blue.as_ref()).stable;
            let stats = match_stats(&m, &red, c.boundary_margin);
            let distances = match stats {
                Ok(s) => s.distances,
                Err(ppstat_core::Error::EmptySelection(_)) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            Ok(Rep {
                distances,
                stable,
                unmatched: m.unmatched().len() + m.unmatched_blue().len(),
                json: (i == 0).then(|| m.to_json()),
            })
        })
        .collect::<Result<_, _>>()?;
    let pooled: Vec<f64> = reps.iter().flat_map(|r| r.distances.iter().copied()).collect();
    let stats = PalmMatchStats::from_distances(c.generator.window.dimension(), pooled)?;
    let distances_csv = stats.to_csv();
    let tail_csv = stats.tail_csv();
    let mut summary: serde_json::Value = serde_json::from_str(&stats.to_json()).expect("valid json");
    summary["replicates"] = serde_json::json!(c.replicates);
    summary["mode"] = serde_json::json!(if c.blue.is_some() { "two-colour" } else { "one-colour" });
    summary["all_stable"] = serde_json::json!(reps.iter().all(|r| r.stable));
    summary["unmatched"] = serde_json::json!(reps.iter().map(|r| r.unmatched).sum::<usize>());
    summary["max_distance"] = serde_json::json!(stats.distances.last());
    let mut out = vec![
        ("matching_000.json".into(), reps[0].json.clone().expect("first replicate")),
        ("distances.csv".into(), distances_csv.clone()),
        ("tail.csv".into(), tail_csv.clone()),
        ("summary.json".into(), json_line(&summary)),
        ("cdf.svg".into(), emit_plot(&distances_csv, PlotKind::Cdf)?.svg),
    ];
    if let Ok(p) = emit_plot(&tail_csv, PlotKind::TailLoglog) {
        out.push(("tail.svg".into(), p.svg));
    }
    Ok(out)
}

fn run_percolate(c: &PercolateConfig) -> Result<Outputs, CliError> {
    let rng = rng_of(c.seed, c.stream);
    let origin = c.origin.clone().unwrap_or_else(|| c.generator.window.center());
    let records: Vec<PercolationRecord> = (0..c.replicates as u64)
        .into_par_iter()
        .map(|i| -> Result<PercolationRecord, CliError> {
            let p = c.generator.sample(rng.replicate(i))?;
            let labels = build_boolean_model(&p, c.radius)?;
            let m_branches = match c.m {
                Some(m) => Some(count_m_branches(&labels, &p, &origin, m)?),
                None => None,
            };
            Ok(PercolationRecord {
                replicate: i,
                n_points: p.len(),
                radius: c.radius,
                n_clusters: labels.clusters.len(),
                n_spanning: count_spanning_clusters(&labels, c.span),
                m_branches,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(vec![
        ("records.csv".into(), records_to_csv(&records)),
        ("summary.json".into(), summary_json(&records)),
    ])
}

fn run_diagnose(c: &DiagnoseConfig) -> Result<Outputs, CliError> {
    let rng = rng_of(c.seed, c.stream);
    let opts = ToleranceOptions { scales: c.scales.clone(), reps: c.reps };
    let (report, stats) = tolerance_report_with_stats(&c.generator, rng, &opts)?;
    let variance_csv = stats.to_csv();
    let mut out = vec![
        ("report.json".into(), report.to_json()),
        ("variance.csv".into(), variance_csv.clone()),
        ("covariance.csv".into(), stats.covariance_csv()),
        ("variance.svg".into(), emit_plot(&variance_csv, PlotKind::VarianceVsScale)?.svg),
    ];
    if !c.n1.is_empty() {
        let mut csv_text = String::from("n,value,count\n");
        for &n in &c.n1 {
            let samples = n1_samples(&c.generator, n, c.reps, rng.derive(u64::from(n)))?;
            let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
            for v in samples {
                *hist.entry(v).or_default() += 1;
            }
            for (v, k) in hist {
                let _ = writeln!(csv_text, "{n},{v},{k}");
            }
        }
        out.push(("n1.csv".into(), csv_text));
    }
    Ok(out)
}

fn run_palm(c: &PalmConfig) -> Result<Outputs, CliError> {
    let sampler = PalmSampler::new(&c.generator, rng_of(c.seed, c.stream))?;
    let dim = c.generator.window.dimension();
    let origin = vec![0.0; dim];
    let metric = Metric::for_window(c.generator.metric, &c.generator.window)?;
    let counts: Vec<usize> = (0..c.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let p = sampler.sample(i)?;
            Ok(p.points().filter(|x| metric.dist(x, &origin) < c.radius).count() - 1)
        })
        .collect::<Result<_, ppstat_core::Error>>()?;
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in &counts {
        *hist.entry(k).or_default() += 1;
    }
    let mut csv_text = String::from("count,frequency\n");
    for (k, n) in &hist {
        let _ = writeln!(csv_text, "{k},{n}");
    }
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let summary = serde_json::json!({
        "replicates": c.replicates,
        "radius": c.radius,
        "mean_other_points": mean,
        "nominal_intensity": c.generator.intensity(),
    });
    Ok(vec![
        ("counts.csv".into(), csv_text),
        ("sample_000.json".into(), sampler.sample(0)?.to_json()),
        ("summary.json".into(), json_line(&summary)),
    ])
}

fn run_plot(c: &PlotConfig, base: &Path) -> Result<Outputs, CliError> {
    let path = if c.input.is_absolute() { c.input.clone() } else { base.join(&c.input) };
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let plot = emit_plot(&text, c.kind)?;
    let meta = serde_json::json!({ "kind": c.kind, "slope": plot.slope });
    Ok(vec![("plot.svg".into(), plot.svg), ("plot.json".into(), json_line(&meta))])
}

/// Computes every output, writes them into `out_dir`, then writes
/// `manifest.json` last. On failure no output of this run is left behind.
/// `base` resolves relative paths inside the config.
pub fn run(config: &Config, out_dir: &Path, base: &Path) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let canonical = serde_json::to_string(config).expect("serializable");
    let outputs = match config {
        Config::Generate(c) => run_generate(c),
        Config::Match(c) => run_match(c),
        Config::Percolate(c) => run_percolate(c),
        Config::Diagnose(c) => run_diagnose(c),
        Config::Palm(c) => run_palm(c),
        Config::Plot(c) => run_plot(c, base),
    }?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut manifest = RunManifest {
        command: config.command().into(),
        config_sha256: sha256_hex(canonical.as_bytes()),
        version: env!("CARGO_PKG_VERSION").into(),
        wall_clock_seconds: 0.0,
        outputs: BTreeMap::new(),
    };
    let result = (|| {
        for (name, body) in &outputs {
            let path = out_dir.join(name);
            written.push(path.clone());
            std::fs::write(&path, body).map_err(io_err(&path))?;
            manifest.outputs.insert(name.clone(), sha256_hex(body.as_bytes()));
        }
        manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
        let path = out_dir.join("manifest.json");
        written.push(path.clone());
        std::fs::write(&path, json_line(&manifest)).map_err(io_err(&path))
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = std::fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(manifest)
}
