use std::path::{Path, PathBuf};

use chern_yamabe::models::MetricRecipe;
use chern_yamabe::solver::{ContinuityConfig, FlowConfig, SmallDataConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Current version of the configuration schema.
pub const CONFIG_VERSION: u32 = 1;

/// Schema of [`RunConfig`], shipped with the binary.
pub const CONFIG_SCHEMA: &str = include_str!("../schema/run-config.v1.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Curvature,
    Degree,
    Solve,
    Flow,
    Bifurcate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Degree => "degree",
            Command::Solve => "solve",
            Command::Flow => "flow",
            Command::Bifurcate => "bifurcate",
            Command::Verify => "verify",
        }
    }
}

/// How `solve` picks its method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Linear solve for zero degree, continuity method for negative degree,
    /// small-data Newton for positive degree.
    #[default]
    Auto,
    Linear,
    Continuity,
    SmallData,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub method: SolveMethod,
    /// Number of random initial guesses for the uniqueness probe (0 disables it).
    pub uniqueness_seeds: usize,
    pub continuity: ContinuityConfig,
    pub flow: FlowConfig,
    pub small_data: SmallDataConfig,
}

/// A rational given either as text (`"1/4"`, `"0.25"`) or as a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalInput {
    Text(String),
    Number(f64),
}

impl RationalInput {
    pub fn text(&self) -> String {
        match self {
            RationalInput::Text(s) => s.clone(),
            RationalInput::Number(x) => format!("{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BifurcationBlock {
    pub lambda: Option<RationalInput>,
    pub interval: Option<[RationalInput; 2]>,
    pub j_max: u32,
}

impl Default for BifurcationBlock {
    fn default() -> Self {
        Self {
            lambda: None,
            interval: None,
            j_max: chern_yamabe::bifurcation::DEFAULT_JMAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Output directory; `--out` overrides it. Defaults to the working directory.
    pub directory: Option<PathBuf>,
    pub report_name: String,
    /// Write CSV traces next to the report.
    pub traces: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: None,
            report_name: "report.json".into(),
            traces: true,
        }
    }
}

/// Everything a run depends on. Defaults are materialized when the config is echoed
/// into the report, so a report alone reproduces its run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Optional; must agree with the subcommand when present.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub recipe: Option<MetricRecipe>,
    /// Path to a stored conformal instance (alternative to `recipe`).
    #[serde(default)]
    pub instance: Option<PathBuf>,
    /// Target constant; defaults to the degree.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub bifurcation: BifurcationBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn empty() -> Self {
        Self {
            version: CONFIG_VERSION,
            command: None,
            recipe: None,
            instance: None,
            lambda: None,
            solver: SolverBlock::default(),
            bifurcation: BifurcationBlock::default(),
            output: OutputBlock::default(),
            seed: 0,
        }
    }

    /// Parses JSON, reporting the path of the offending key on failure.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = e.path().to_string();
            CliError::Config {
                reason: "schema_violation",
                pointer: Some(pointer),
                message: e.inner().to_string(),
            }
        })?;
        if config.version != CONFIG_VERSION {
            return Err(CliError::Config {
                reason: "unsupported_version",
                pointer: Some("version".into()),
                message: format!("config version {} is not supported (expected {CONFIG_VERSION})", config.version),
            });
        }
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            reason: "unreadable_config",
            pointer: None,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }
}
