//! Run configuration: JSON documents plus dotted-key overrides.

use rrk::euler::InterfaceMode;
use rrk::problems::{make_problem, ProblemOverrides, ProblemSpec};
use rrk::relaxation::{RelaxationConfig, RelaxationMode};
use rrk::tableaux::{builtin_tableau, ButcherTableau};
use serde::{Deserialize, Serialize};

/// Errors split by exit code: configuration problems exit with 2, numerical
/// failures with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(rrk::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rrk::Error> for CliError {
    fn from(e: rrk::Error) -> Self {
        // argument/lookup problems are configuration mistakes, the rest are
        // runtime numerics
        match e {
            rrk::Error::UnknownTableau { .. }
            | rrk::Error::UnknownProblem { .. }
            | rrk::Error::InvalidTableau { .. }
            | rrk::Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

/// Relaxation settings as they appear in the config document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxationSettings {
    pub mode: String,
    pub root_tol: f64,
    pub residual_tol: f64,
    pub bracket_halfwidth: f64,
    pub max_expansions: usize,
    pub gamma_floor: f64,
    pub curvature_tol: f64,
    pub use_bisection: bool,
}

impl Default for RelaxationSettings {
    fn default() -> Self {
        let d = RelaxationConfig::default();
        Self {
            mode: "local".into(),
            root_tol: d.root_tol,
            residual_tol: d.residual_tol,
            bracket_halfwidth: d.bracket_halfwidth,
            max_expansions: d.max_expansions,
            gamma_floor: d.gamma_floor,
            curvature_tol: d.curvature_tol,
            use_bisection: d.use_bisection,
        }
    }
}

impl RelaxationSettings {
    pub fn to_relaxation_config(&self) -> CliResult<RelaxationConfig> {
        let mode = match self.mode.as_str() {
            "none" => RelaxationMode::None,
            "global" => RelaxationMode::Global,
            "local" => RelaxationMode::Local,
            other => return config_err(format!("unknown relaxation mode `{other}`")),
        };
        if !(self.root_tol > 0.0) || !(self.residual_tol > 0.0) {
            return config_err("relaxation tolerances must be positive");
        }
        if !(self.gamma_floor > 0.0) {
            return config_err("gamma_floor must be positive");
        }
        Ok(RelaxationConfig {
            mode,
            root_tol: self.root_tol,
            residual_tol: self.residual_tol,
            bracket_halfwidth: self.bracket_halfwidth,
            max_expansions: self.max_expansions,
            gamma_floor: self.gamma_floor,
            curvature_tol: self.curvature_tol,
            use_bisection: self.use_bisection,
        })
    }
}

/// The config document. Every field except `problem` falls back to the
/// problem defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub degree: Option<usize>,
    pub elements: Option<usize>,
    pub tableau: String,
    pub dt: Option<f64>,
    pub adaptive_tol: Option<f64>,
    pub t_end: Option<f64>,
    /// `ec` or `es_rusanov`.
    pub interface: Option<String>,
    pub relaxation: RelaxationSettings,
    pub output_dir: String,
    pub threads: usize,
    pub max_steps: usize,
    /// Emit error norms for every conservative variable, not just density.
    pub all_variables: bool,
    /// Mesh sizes for `convergence`.
    pub elements_list: Option<Vec<usize>>,
    /// `u_ref * dt / dx` held constant across a convergence study; derived
    /// from `dt` at the base resolution when absent.
    pub cfl: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: None,
            degree: None,
            elements: None,
            tableau: "RK44".into(),
            dt: None,
            adaptive_tol: None,
            t_end: None,
            interface: None,
            relaxation: RelaxationSettings::default(),
            output_dir: "out".into(),
            threads: 1,
            max_steps: 50_000_000,
            all_variables: false,
            elements_list: None,
            cfl: None,
        }
    }
}

impl RunConfig {
    /// Parses a JSON document into a config.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => return config_err(format!("invalid JSON: {e}")),
        };
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> CliResult<Self> {
        match serde_json::from_value(value) {
            Ok(cfg) => Ok(cfg),
            Err(e) => config_err(format!("invalid config: {e}")),
        }
    }
}

/// Applies one `--set key=value` override to a JSON document. Keys use
/// dotted paths (`relaxation.mode`); values are parsed as JSON scalars with
/// a fallback to plain strings.
pub fn apply_override(doc: &mut serde_json::Value, assignment: &str) -> CliResult<()> {
    let Some((key, raw)) = assignment.split_once('=') else {
        return config_err(format!("override `{assignment}` is not of the form key=value"));
    };
    if key.is_empty() {
        return config_err("override key is empty");
    }
    let value: serde_json::Value = match serde_json::from_str(raw) {
        Ok(v) => v,
        Err(_) => serde_json::Value::String(raw.to_string()),
    };
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return config_err(format!("override key `{key}` has an empty segment"));
        }
        if !node.is_object() {
            return config_err(format!("override key `{key}` crosses a non-object value"));
        }
        let map = node.as_object_mut().expect("checked above");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("loop always returns on the last segment")
}

/// Loads the optional config file and applies `--set` overrides.
pub fn load_config(path: Option<&std::path::Path>, sets: &[String]) -> CliResult<RunConfig> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            match serde_json::from_str(&text) {
                Ok(v) => v,
                Err(e) => return config_err(format!("invalid JSON in {}: {e}", p.display())),
            }
        }
        None => serde_json::Value::Object(Default::default()),
    };
    if !doc.is_object() {
        return config_err("config document must be a JSON object");
    }
    for set in sets {
        apply_override(&mut doc, set)?;
    }
    RunConfig::from_value(doc)
}

/// Everything needed to run, with problem defaults filled in.
pub struct ResolvedRun {
    pub config: RunConfig,
    pub spec: ProblemSpec,
    pub tableau: ButcherTableau,
    pub relax: RelaxationConfig,
    pub degree: usize,
    pub elements: usize,
    /// Fixed step size (`None` means adaptive with `adaptive_tol`).
    pub dt: Option<f64>,
    pub adaptive_tol: Option<f64>,
    pub t_end: f64,
    pub interface: InterfaceMode,
    pub output_dir: std::path::PathBuf,
    pub threads: usize,
    pub max_steps: usize,
}

pub fn resolve(config: &RunConfig) -> CliResult<ResolvedRun> {
    let Some(problem) = &config.problem else {
        return config_err("no problem named (set `problem`)");
    };
    let interface = match config.interface.as_deref() {
        None => None,
        Some("ec") => Some(InterfaceMode::Ec),
        Some("es_rusanov") => Some(InterfaceMode::EsRusanov),
        Some(other) => {
            return config_err(format!(
                "unknown interface `{other}` (valid: ec, es_rusanov)"
            ))
        }
    };
    if config.dt.is_some() && config.adaptive_tol.is_some() {
        return config_err("set either dt or adaptive_tol, not both");
    }
    if let Some(tol) = config.adaptive_tol {
        if !(tol > 0.0) {
            return config_err("adaptive_tol must be positive");
        }
    }
    let overrides = ProblemOverrides {
        degree: config.degree,
        elements: config.elements,
        dt: config.dt,
        t_end: config.t_end,
        interface,
    };
    let spec = make_problem(problem, &overrides)?;
    let tableau = builtin_tableau(&config.tableau)?;
    let relax = config.relaxation.to_relaxation_config()?;
    if config.adaptive_tol.is_some() && tableau.b_embedded.is_none() {
        return config_err(format!(
            "tableau {} has no embedded weights; adaptive stepping needs them",
            tableau.name
        ));
    }
    if config.threads == 0 {
        return config_err("threads must be at least 1");
    }
    Ok(ResolvedRun {
        config: config.clone(),
        degree: spec.degree,
        elements: spec.elements,
        dt: if config.adaptive_tol.is_some() {
            None
        } else {
            Some(spec.dt)
        },
        adaptive_tol: config.adaptive_tol,
        t_end: spec.t_end,
        interface: spec.interface,
        output_dir: std::path::PathBuf::from(&config.output_dir),
        threads: config.threads,
        max_steps: config.max_steps,
        tableau,
        relax,
        spec,
    })
}
