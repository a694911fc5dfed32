//! TOML run configuration. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use graphon_gl::graphon::Sampling;
use graphon_gl::{AnalyticGraphon, Tolerances};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Gen,
    Eval,
    Minimize,
    Sweep,
    Cutnorm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    pub seed: Option<u64>,
    pub kernel: Option<KernelSpec>,
    pub state: Option<StateSpec>,
    pub functional: Option<FunctionalSpec>,
    pub problem: Option<ProblemSpec>,
    pub sweep: Option<SweepSpec>,
    pub cutnorm: Option<CutnormSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFormat {
    Csv,
    Edges,
}

/// Exactly one of `analytic` and `file`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub analytic: Option<AnalyticGraphon>,
    pub file: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: KernelFormat,
    /// Resolution for sampling analytic kernels, or node count for edge lists.
    pub n: Option<usize>,
    #[serde(default)]
    pub sampling: Sampling,
}

fn default_format() -> KernelFormat {
    KernelFormat::Csv
}

/// Exactly one source of state.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub values: Option<Vec<f64>>,
    /// Single-column CSV.
    pub file: Option<PathBuf>,
    /// Young measure JSON.
    pub young: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalName {
    GraphDirichlet,
    GraphGl,
    GraphTv,
    GraphonDirichlet,
    GraphonGl,
    GraphonTv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    pub name: FunctionalName,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpaceName {
    StepFunction,
    TwoAtom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizeMethod {
    Descent,
    ClosedForm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub epsilon: f64,
    pub c: f64,
    #[serde(default = "one")]
    pub restarts: usize,
    #[serde(default = "step_space")]
    pub state_space: StateSpaceName,
    /// Graph size or two-atom cell count; defaults to `kernel.n`.
    pub cells: Option<usize>,
    #[serde(default = "descent")]
    pub method: MinimizeMethod,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn one() -> usize {
    1
}

fn step_space() -> StateSpaceName {
    StateSpaceName::StepFunction
}

fn descent() -> MinimizeMethod {
    MinimizeMethod::Descent
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    N,
    Epsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFunctionalName {
    Gl,
    Tv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Graph,
    Graphon,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Graph sizes (axis `n`) or strictly decreasing ε values (axis `epsilon`).
    pub points: Vec<f64>,
    #[serde(default = "gl")]
    pub functional: SweepFunctionalName,
    #[serde(default = "graph")]
    pub level: Level,
    /// Fixed ε of an n sweep.
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub c: f64,
    /// Graph size or two-atom cells of an ε sweep.
    pub cells: Option<usize>,
    #[serde(default = "eight")]
    pub restarts: usize,
    #[serde(default = "thirty_two")]
    pub reference_cells: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn gl() -> SweepFunctionalName {
    SweepFunctionalName::Gl
}

fn graph() -> Level {
    Level::Graph
}

fn eight() -> usize {
    8
}

fn thirty_two() -> usize {
    32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMethodName {
    Auto,
    Exhaustive,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutFormName {
    Subset,
    Bilinear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutnormSpec {
    #[serde(default = "auto")]
    pub method: CutMethodName,
    /// Defaults to `subset` for exhaustive runs and `bilinear` for the heuristic,
    /// which only estimates the bilinear form.
    pub form: Option<CutFormName>,
    #[serde(default = "fifty")]
    pub restarts: usize,
}

impl Default for CutnormSpec {
    fn default() -> Self {
        Self {
            method: CutMethodName::Auto,
            form: None,
            restarts: 50,
        }
    }
}

fn auto() -> CutMethodName {
    CutMethodName::Auto
}

fn fifty() -> usize {
    50
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Reads the config and resolves relative input paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(k) = cfg.kernel.as_mut() {
            k.file.as_mut().map(fix);
        }
        if let Some(s) = cfg.state.as_mut() {
            s.file.as_mut().map(fix);
            s.young.as_mut().map(fix);
        }
        if let Some(d) = cfg.output.dir.as_mut() {
            fix(d);
        }
        cfg.check_files()?;
        Ok(cfg)
    }

    fn check_files(&self) -> Result<(), CliError> {
        let mut files: Vec<&PathBuf> = Vec::new();
        if let Some(k) = &self.kernel {
            files.extend(k.file.as_ref());
        }
        if let Some(s) = &self.state {
            files.extend(s.file.as_ref());
            files.extend(s.young.as_ref());
        }
        for f in files {
            if !f.is_file() {
                return Err(CliError::Validation(format!("referenced file {} does not exist", f.display())));
            }
        }
        Ok(())
    }
}
