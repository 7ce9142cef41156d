//! report.json, series.csv, checkpoints and the terminal summary.

use crate::config::{RunConfig, Scenario};
use crate::dump;
use mswave::cauchy::{IterationReport, Trajectory};
use mswave::wave::{DecayFit, SeriesSpec};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value <= tolerance`; NaN fails.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            tolerance: Some(tolerance),
            passed: value <= tolerance,
            detail: None,
        }
    }

    pub fn flag(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            value: None,
            tolerance: None,
            passed,
            detail: Some(detail),
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    ToleranceFailure,
    NonContraction,
    ConfigError,
    IoError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ConfigError => 2,
            Status::NonContraction => 3,
            Status::ToleranceFailure => 4,
            Status::IoError => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub n: usize,
    pub length: f64,
    pub t_start: f64,
    pub t_max: f64,
    pub rho: f64,
    pub nodes: usize,
    pub seed: u64,
    pub w_plus_l2: f64,
    pub zero_state: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub y: f64,
    pub y1: f64,
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iterate: usize,
    pub distance: f64,
    pub contraction_ratio: Option<f64>,
    pub weighted_norms: Norms,
    pub equation_distances: [f64; 3],
    pub max_div_bb: f64,
    pub max_curl_sigma: f64,
}

impl From<&IterationReport> for IterationRecord {
    fn from(r: &IterationReport) -> Self {
        let w = &r.weighted_norms;
        Self {
            iterate: r.iterate_index,
            distance: r.distance,
            contraction_ratio: r.contraction_ratio,
            weighted_norms: Norms {
                y: w.y,
                y1: w.y1,
                z0: w.z[0],
                z1: w.z[1],
                z2: w.z[2],
                n: w.n,
            },
            equation_distances: r.residuals,
            max_div_bb: r.max_div_bb,
            max_curl_sigma: r.max_curl_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub series: String,
    pub exponent: Option<f64>,
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub log_power: i32,
    pub r_squared: Option<f64>,
    pub window: [f64; 2],
    pub nodes: usize,
    pub zero_series: bool,
    pub passed: bool,
}

impl FitRecord {
    pub fn new(spec: &SeriesSpec, fit: &DecayFit, passed: bool) -> Self {
        Self {
            series: fit.series_name.clone(),
            exponent: fit.exponent,
            expected: spec.expected,
            tolerance: spec.tolerance,
            log_power: fit.log_power,
            r_squared: fit.r_squared,
            window: [fit.window.0, fit.window.1],
            nodes: fit.nodes,
            zero_series: fit.is_zero_series(),
            passed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schrodinger_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxwell_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosscheck_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub status: Status,
    pub exit_code: i32,
    pub reason: Option<String>,
    pub run: RunMeta,
    pub checks: Vec<Check>,
    pub iterations: Vec<IterationRecord>,
    pub fits: Vec<FitRecord>,
    pub nodes: Vec<NodeRecord>,
}

impl Report {
    pub fn new(scenario: Scenario, run: RunMeta) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario,
            status: Status::Pass,
            exit_code: 0,
            reason: None,
            run,
            checks: Vec::new(),
            iterations: Vec::new(),
            fits: Vec::new(),
            nodes: Vec::new(),
        }
    }

    /// Status from the checks unless a failure was already recorded.
    pub fn finish(&mut self) {
        if self.status == Status::Pass
            && (self.checks.iter().any(|c| !c.passed) || self.fits.iter().any(|f| !f.passed))
        {
            self.status = Status::ToleranceFailure;
            let failed: Vec<&str> = self
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .chain(
                    self.fits
                        .iter()
                        .filter(|f| !f.passed)
                        .map(|f| f.series.as_str()),
                )
                .collect();
            self.reason = Some(format!("failed: {}", failed.join(", ")));
        }
        self.exit_code = self.status.exit_code();
    }

    pub fn fail(&mut self, status: Status, reason: String) {
        self.status = status;
        self.reason = Some(reason);
        self.exit_code = status.exit_code();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Validates a report document against the shipped schema.
pub fn validate_report(doc: &serde_json::Value) -> Result<(), Vec<String>> {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).expect("shipped schema is JSON");
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("shipped schema compiles");
    compiled
        .validate(doc)
        .map_err(|errs| errs.map(|e| format!("{}: {e}", e.instance_path)).collect())
}

/// Column-major time series, one row per node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = if self.columns.is_empty() {
            vec!["t".to_string()]
        } else {
            self.columns.clone()
        };
        w.write_record(&header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:e}")))?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

#[derive(Debug, Serialize)]
struct CheckpointEntry {
    node: usize,
    t: f64,
    q: String,
    sigma: String,
    bb: String,
}

#[derive(Debug, Serialize)]
struct CheckpointIndex<'a> {
    n: usize,
    length: f64,
    t_start: f64,
    t_max: f64,
    rho: f64,
    alpha: f64,
    beta: f64,
    times: Vec<f64>,
    nodes: &'a [CheckpointEntry],
}

/// q, sigma and B_b of every node as field dumps, plus index.json.
pub fn write_checkpoints(
    dir: &Path,
    cfg: &RunConfig,
    traj: &Trajectory,
) -> Result<(), dump::DumpError> {
    let io = |source| dump::DumpError::Io {
        path: dir.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut entries = Vec::with_capacity(traj.states.len());
    for (i, s) in traj.states.iter().enumerate() {
        let names = [
            format!("q_{i:04}.fld"),
            format!("sigma_{i:04}.fld"),
            format!("bb_{i:04}.fld"),
        ];
        dump::write(&dir.join(&names[0]), &dump::encode_scalar(&s.q))?;
        dump::write(&dir.join(&names[1]), &dump::encode_vector(&s.sigma))?;
        dump::write(&dir.join(&names[2]), &dump::encode_vector(&s.bb))?;
        let [q, sigma, bb] = names;
        entries.push(CheckpointEntry {
            node: i,
            t: s.t,
            q,
            sigma,
            bb,
        });
    }
    let index = CheckpointIndex {
        n: cfg.grid.n,
        length: cfg.grid.length,
        t_start: cfg.time.t_start,
        t_max: cfg.time.t_max,
        rho: cfg.time.rho,
        alpha: cfg.physics.alpha,
        beta: cfg.physics.beta,
        times: traj.states.iter().map(|s| s.t).collect(),
        nodes: &entries,
    };
    let json = serde_json::to_string_pretty(&index).expect("index serializes");
    dump::write(&dir.join("index.json"), json.as_bytes())
}

/// Writes report.json and series.csv.
pub fn emit(out_dir: &Path, report: &Report, series: &Series) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("report.json"), report.to_json())?;
    let csv = series.to_csv().map_err(std::io::Error::other)?;
    std::fs::write(out_dir.join("series.csv"), csv)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

/// One-screen summary.
pub fn summary(report: &Report, mut out: impl Write) -> std::io::Result<()> {
    let r = &report.run;
    writeln!(
        out,
        "scenario {}  n = {}  L = {}  t in [{}, {}]  rho = {}  nodes = {}",
        report.scenario.name(),
        r.n,
        r.length,
        r.t_start,
        r.t_max,
        r.rho,
        r.nodes
    )?;
    if let Some(last) = report.iterations.last() {
        writeln!(
            out,
            "picard: {} iterates, final distance {:.3e}",
            report.iterations.len(),
            last.distance
        )?;
    }
    if !report.checks.is_empty() {
        writeln!(
            out,
            "{:<36} {:>11} {:>11}  result",
            "check", "value", "tolerance"
        )?;
        for c in &report.checks {
            writeln!(
                out,
                "{:<36} {:>11} {:>11}  {}",
                c.name,
                fmt_opt(c.value),
                fmt_opt(c.tolerance),
                if c.passed { "pass" } else { "FAIL" }
            )?;
        }
    }
    if !report.fits.is_empty() {
        writeln!(
            out,
            "{:<28} {:>9} {:>9} {:>7} {:>8}  result",
            "series", "slope", "expected", "tol", "r^2"
        )?;
        for f in &report.fits {
            let slope = if f.zero_series {
                "zero".to_string()
            } else {
                f.exponent.map_or("-".into(), |e| format!("{e:.3}"))
            };
            let expected = f.expected.map_or("-".into(), |e| format!("{e:.3}"));
            let r2 = f.r_squared.map_or("-".into(), |v| format!("{v:.4}"));
            writeln!(
                out,
                "{:<28} {:>9} {:>9} {:>7.2} {:>8}  {}",
                f.series,
                slope,
                expected,
                f.tolerance,
                r2,
                if f.passed { "pass" } else { "FAIL" }
            )?;
        }
    }
    writeln!(
        out,
        "status {:?} (exit {}){}",
        report.status,
        report.exit_code,
        report
            .reason
            .as_ref()
            .map_or(String::new(), |r| format!(": {r}"))
    )
}
