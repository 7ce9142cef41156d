//! Run configuration: one TOML file per run, dotted-path overrides on top.

use mswave::cauchy::SolverConfig;
use mswave::potentials::TimeKernelQuadrature;
use mswave::profiles::check_parameters;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override {0:?}: expected --dotted.key value")]
    Override(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Identities,
    FixedPoint,
    DecaySuite,
    FiniteT0Crosscheck,
    EnergyDrift,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Identities,
        Scenario::FixedPoint,
        Scenario::DecaySuite,
        Scenario::FiniteT0Crosscheck,
        Scenario::EnergyDrift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Identities => "identities",
            Scenario::FixedPoint => "fixed_point",
            Scenario::DecaySuite => "decay_suite",
            Scenario::FiniteT0Crosscheck => "finite_t0_crosscheck",
            Scenario::EnergyDrift => "energy_drift",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: 16,
            length: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub beta: f64,
    pub alpha: f64,
    pub k: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            beta: 0.4,
            alpha: 1.5,
            k: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_start: f64,
    pub t_max: f64,
    pub rho: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_start: 20.0,
            t_max: 640.0,
            rho: 1.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
    pub under_relaxation: f64,
    pub step_tol: f64,
    pub max_halvings: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tol: d.tol,
            max_iters: d.max_iters,
            under_relaxation: d.under_relaxation,
            step_tol: d.step_tol,
            max_halvings: d.max_halvings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub points_per_panel: usize,
    pub panel_ratio: f64,
    pub far_panel_ratio: f64,
    pub far_extent: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = TimeKernelQuadrature::default();
        Self {
            points_per_panel: q.points_per_panel,
            panel_ratio: q.panel_ratio,
            far_panel_ratio: q.far_panel_ratio,
            far_extent: q.far_extent,
        }
    }
}

/// Per-axis widths, or one width for all axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Widths {
    Iso(f64),
    Axes([f64; 3]),
}

impl Widths {
    pub fn axes(self) -> [f64; 3] {
        match self {
            Widths::Iso(w) => [w; 3],
            Widths::Axes(a) => a,
        }
    }
}

/// The asymptotic state `w_plus`. `l2_norm`, when given, rescales the
/// analytic families after evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Gaussian {
        amplitude: f64,
        width: Widths,
        #[serde(default)]
        l2_norm: Option<f64>,
    },
    GaussianPlaneWave {
        amplitude: f64,
        width: Widths,
        wavevector: [f64; 3],
        #[serde(default)]
        l2_norm: Option<f64>,
    },
    TwoGaussians {
        amplitudes: [f64; 2],
        width: [f64; 2],
        centers: [[f64; 3]; 2],
        #[serde(default)]
        l2_norm: Option<f64>,
    },
    FieldDump {
        path: PathBuf,
    },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::GaussianPlaneWave {
            amplitude: 1.0,
            width: Widths::Axes([1.0, 0.8, 1.25]),
            wavevector: [0.5, 0.0, 0.0],
            l2_norm: Some(0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub initial_state: InitialState,
    /// Write field checkpoints of the converged trajectory.
    #[serde(default = "default_true")]
    pub checkpoints: bool,
}

fn default_seed() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for (key, value) in overrides {
            set_dotted(&mut table, key, parse_value(value))?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        self.scenario
            .ok_or_else(|| ConfigError::Invalid("no scenario given".into()))
    }

    /// Every hypothesis and range check, before any compute.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let scenario = self.scenario()?;
        if self.out_dir.is_none() {
            return bad("no out_dir given".into());
        }
        check_parameters(self.physics.alpha, self.physics.beta)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.physics.k > 1.5) {
            return bad(format!("k must exceed 3/2, got {}", self.physics.k));
        }
        if self.grid.n < 4 || !self.grid.n.is_multiple_of(2) || !(self.grid.length > 0.0) {
            return bad(format!(
                "grid needs even n >= 4 and L > 0, got n = {}, L = {}",
                self.grid.n, self.grid.length
            ));
        }
        let ratio = self.time.t_max / self.time.t_start;
        // the fit window [2T, T_max] must cover a decade
        if scenario == Scenario::DecaySuite && !(ratio >= 20.0) {
            return bad(format!("decay_suite needs T_max / T >= 20, got {ratio}"));
        }
        self.solver_config()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        match &self.initial_state {
            InitialState::Gaussian { width, l2_norm, .. }
            | InitialState::GaussianPlaneWave { width, l2_norm, .. } => {
                if width.axes().iter().any(|w| !(*w > 0.0)) {
                    return bad("Gaussian widths must be positive".into());
                }
                check_norm(*l2_norm)?;
            }
            InitialState::TwoGaussians { width, l2_norm, .. } => {
                if width.iter().any(|w| !(*w > 0.0)) {
                    return bad("Gaussian widths must be positive".into());
                }
                check_norm(*l2_norm)?;
            }
            InitialState::FieldDump { .. } => {}
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            t_start: self.time.t_start,
            t_max: self.time.t_max,
            rho: self.time.rho,
            step_tol: self.solver.step_tol,
            max_halvings: self.solver.max_halvings,
            tol: self.solver.tol,
            max_iters: self.solver.max_iters,
            under_relaxation: self.solver.under_relaxation,
            quad: TimeKernelQuadrature {
                points_per_panel: self.quadrature.points_per_panel,
                panel_ratio: self.quadrature.panel_ratio,
                far_panel_ratio: self.quadrature.far_panel_ratio,
                far_extent: self.quadrature.far_extent,
                ..TimeKernelQuadrature::default()
            },
        }
    }
}

fn check_norm(l2: Option<f64>) -> Result<(), ConfigError> {
    match l2 {
        Some(v) if !(v >= 0.0) => Err(ConfigError::Invalid(format!(
            "l2_norm must be nonnegative, got {v}"
        ))),
        _ => Ok(()),
    }
}

/// TOML literal if it parses as one, else a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(key.to_string()));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(ConfigError::Override(key.to_string())),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// `(dotted key, raw value)` pairs.
pub type Overrides = Vec<(String, String)>;

/// Splits `--a.b value` and `--a.b=value` pairs out of the argument list.
/// Everything else is returned for the regular flag parser.
pub fn split_overrides(args: &[String]) -> Result<(Vec<String>, Overrides), ConfigError> {
    let mut plain = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(body) = a.strip_prefix("--") else {
            plain.push(a.clone());
            continue;
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (body, None),
        };
        if !key.contains('.') {
            plain.push(a.clone());
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .cloned()
                .ok_or_else(|| ConfigError::Override(a.clone()))?,
        };
        overrides.push((key.to_string(), value));
    }
    Ok((plain, overrides))
}
