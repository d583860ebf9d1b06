//! TOML run configurations, one schema per subcommand.
//!
//! Unknown keys are rejected everywhere. Paths are taken as written
//! (relative paths resolve against the working directory).

use std::path::{Path, PathBuf};

use netgame_core::io::MissingPolicy;
use netgame_core::{AlphaBox, CovariateDist, NetworkKind, OptimizerSettings, PayoffParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Structural parameters as nested rows: `beta` is `K × d`, `alpha` is `K × K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    pub beta: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
}

impl ThetaConfig {
    pub fn params(&self) -> Result<PayoffParams, CliError> {
        PayoffParams::from_rows(&self.beta, &self.alpha).map_err(|e| CliError::Config(format!("theta: {e}")))
    }

    pub fn from_params(p: &PayoffParams) -> Self {
        Self {
            beta: p.beta_rows(),
            alpha: p.alpha_rows(),
        }
    }
}

/// A named covariate column and its distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "toml::Table", into = "toml::Table")]
pub struct ColumnConfig {
    pub name: String,
    pub dist: CovariateDist,
}

impl TryFrom<toml::Table> for ColumnConfig {
    type Error = String;

    fn try_from(mut table: toml::Table) -> Result<Self, String> {
        let name = match table.remove("name") {
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err("covariate `name` must be a string".into()),
            None => return Err("covariate entry needs a `name`".into()),
        };
        let dist =
            CovariateDist::deserialize(toml::Value::Table(table)).map_err(|e| format!("covariate `{name}`: {e}"))?;
        Ok(Self { name, dist })
    }
}

impl From<ColumnConfig> for toml::Table {
    fn from(c: ColumnConfig) -> Self {
        let mut t = match toml::Value::try_from(c.dist) {
            Ok(toml::Value::Table(t)) => t,
            _ => toml::Table::new(),
        };
        t.insert("name".into(), toml::Value::String(c.name));
        t
    }
}

/// Radius given directly or by the rule `floor(h0 · n^a)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HRule {
    pub h0: f64,
    pub a: f64,
}

impl Default for HRule {
    fn default() -> Self {
        Self { h0: 0.1, a: 0.5 }
    }
}

pub fn resolve_h(h: Option<usize>, rule: Option<HRule>, n: usize) -> usize {
    h.unwrap_or_else(|| {
        let r = rule.unwrap_or_default();
        netgame_core::choose_h(n, r.h0, r.a)
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    netgame_core::game::DEFAULT_TOL
}

fn default_max_iter() -> usize {
    netgame_core::game::DEFAULT_MAX_ITER
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> netgame_core::SolveOptions {
        netgame_core::SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            record_steps: false,
        }
    }
}

/// Input files shared by the data-consuming subcommands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub edges: PathBuf,
    pub covariates: PathBuf,
    #[serde(default)]
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub network: NetworkKind,
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Covariate columns to draw; none means no covariate file.
    #[serde(default)]
    pub covariates: Vec<ColumnConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(flatten)]
    pub inputs: Inputs,
    pub theta: ThetaConfig,
    /// Solve every player's h-hop subnetwork game instead of the full game.
    #[serde(default)]
    pub h: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(flatten)]
    pub inputs: Inputs,
    pub theta: ThetaConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(flatten)]
    pub inputs: Inputs,
    pub outcomes: PathBuf,
    /// Number of non-baseline actions; defaults to the largest observed action.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub h: Option<usize>,
    #[serde(default)]
    pub h_rule: Option<HRule>,
    #[serde(default)]
    pub init: Option<ThetaConfig>,
    #[serde(default)]
    pub alpha_box: Option<AlphaBox>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub network: NetworkKind,
    pub n: usize,
    pub theta: ThetaConfig,
    pub covariates: Vec<ColumnConfig>,
    pub replications: usize,
    #[serde(default)]
    pub h: Option<usize>,
    #[serde(default)]
    pub h_rule: Option<HRule>,
    /// Estimate every dataset at each of these radii instead of `h`.
    #[serde(default)]
    pub ladder: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub alpha_box: Option<AlphaBox>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpEstimateConfig {
    #[serde(flatten)]
    pub inputs: Inputs,
    pub outcomes: PathBuf,
    /// 1-based player id; `--target` overrides.
    #[serde(default)]
    pub target: Option<usize>,
    #[serde(default)]
    pub h: Option<usize>,
}
