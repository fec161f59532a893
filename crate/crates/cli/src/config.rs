//! Run configuration: command-line flags over a JSON file over per-command
//! defaults.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use negfuse_core::{FusionGraph, GridSpec, HyperGrid, Model, PointEstimate, Scaling};
use serde::{Deserialize, Serialize};

use crate::args::{GridArgs, SharedArgs};
use crate::error::{CliError, CliResult};
use crate::io;

/// Fusion graph as written on the command line and in config files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphSpec {
    Chain,
    Empty,
    Complete,
    Grid { rows: usize, cols: usize },
    Custom(PathBuf),
}

impl FromStr for GraphSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let bad = || {
            CliError::Usage(format!(
                "unknown graph '{s}' (expected chain, empty, complete, grid:ROWSxCOLS or custom:FILE)"
            ))
        };
        match s {
            "chain" => return Ok(GraphSpec::Chain),
            "empty" => return Ok(GraphSpec::Empty),
            "complete" => return Ok(GraphSpec::Complete),
            _ => {}
        }
        if let Some(dims) = s.strip_prefix("grid:") {
            let (r, c) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
            let rows = r.trim().parse().map_err(|_| bad())?;
            let cols = c.trim().parse().map_err(|_| bad())?;
            if rows == 0 || cols == 0 {
                return Err(CliError::Usage("grid dimensions must be positive".into()));
            }
            return Ok(GraphSpec::Grid { rows, cols });
        }
        if let Some(path) = s.strip_prefix("custom:") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(GraphSpec::Custom(PathBuf::from(path)));
        }
        Err(bad())
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Chain => f.write_str("chain"),
            GraphSpec::Empty => f.write_str("empty"),
            GraphSpec::Complete => f.write_str("complete"),
            GraphSpec::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            GraphSpec::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = CliError;

    fn try_from(s: String) -> CliResult<Self> {
        s.parse()
    }
}

impl From<GraphSpec> for String {
    fn from(g: GraphSpec) -> String {
        g.to_string()
    }
}

impl GraphSpec {
    pub fn build(&self, p: usize) -> CliResult<FusionGraph> {
        match self {
            GraphSpec::Chain => Ok(FusionGraph::chain(p)),
            GraphSpec::Empty => Ok(FusionGraph::empty(p)),
            GraphSpec::Complete => Ok(FusionGraph::complete(p)),
            GraphSpec::Grid { rows, cols } => {
                if rows * cols != p {
                    return Err(CliError::Data(format!(
                        "grid {rows}x{cols} has {} nodes but the data have {p} coefficients",
                        rows * cols
                    )));
                }
                Ok(FusionGraph::grid(*rows, *cols))
            }
            GraphSpec::Custom(path) => {
                let edges = io::read_edges(path)?;
                FusionGraph::custom(p, &edges).map_err(|e| CliError::Data(e.to_string()))
            }
        }
    }
}

/// Contents of a `--config` file. Every field is optional; unknown fields
/// are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<Model>,
    pub graph: Option<GraphSpec>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub iters: Option<usize>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub point: Option<PointEstimate>,
    pub lambda1: Option<Vec<f64>>,
    pub lambda1_count: Option<usize>,
    pub lambda1_min: Option<f64>,
    pub lambda2: Option<Vec<f64>>,
    pub gamma2: Option<Vec<f64>>,
    pub scaling: Option<Scaling>,
    pub response: Option<String>,
    pub column: Option<String>,
    pub input: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub case: Option<u8>,
    pub replications: Option<usize>,
    pub methods: Option<Vec<Model>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainConfig {
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
}

/// Hyperparameter axes. `lambda1 = None` lays the axis out automatically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub lambda1: Option<Vec<f64>>,
    pub lambda1_count: usize,
    pub lambda1_min: f64,
    pub lambda2: Vec<f64>,
    pub gamma2: Vec<f64>,
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            lambda1_count: self.lambda1_count,
            lambda1_min: self.lambda1_min,
            lambda2: self.lambda2.clone(),
            gamma2: self.gamma2.clone(),
        }
    }

    pub fn fixed(&self) -> CliResult<Option<HyperGrid>> {
        self.lambda1
            .as_ref()
            .map(|l1| {
                HyperGrid::new(l1.clone(), self.lambda2.clone(), self.gamma2.clone())
                    .map_err(|e| CliError::Usage(e.to_string()))
            })
            .transpose()
    }

    fn validate(&self) -> CliResult<()> {
        if self.lambda1.is_none() {
            if self.lambda1_count == 0 {
                return Err(CliError::Usage("lambda1_count must be positive".into()));
            }
            if !(self.lambda1_min.is_finite() && self.lambda1_min > 0.0) {
                return Err(CliError::Usage("lambda1_min must be positive".into()));
            }
        }
        let axes = HyperGrid {
            lambda1: self.lambda1.clone().unwrap_or_else(|| vec![1.0]),
            lambda2: self.lambda2.clone(),
            gamma2: self.gamma2.clone(),
        };
        axes.validate().map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Fully resolved settings of one run. Serialized into the manifest and
/// hashed; the output directory and thread count do not affect results and
/// are left out.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    pub chain: ChainConfig,
    pub point: PointEstimate,
    pub grid: GridConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Model>>,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn chain_settings(&self) -> negfuse_core::ChainSettings {
        let mut s = negfuse_core::ChainSettings::new(self.chain.iters, self.chain.burnin);
        s.thin = self.chain.thin;
        s
    }

    pub fn input(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("no input file given".into()))
    }
}

/// Per-command defaults.
pub struct Defaults {
    pub model: Model,
    pub iters: usize,
    pub burnin: usize,
    pub grid: GridConfig,
}

/// Geometric sequence of `count` values from `lo` to `hi`.
fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|k| lo * (step * k as f64).exp()).collect()
}

impl Defaults {
    /// Regression fits: a 20 x 20 x 3 grid.
    pub fn fit() -> Self {
        Self {
            model: Model::NegFused,
            iters: 3000,
            burnin: 1000,
            grid: GridConfig {
                lambda1: None,
                lambda1_count: 20,
                lambda1_min: negfuse_core::selection::LAMBDA_SEARCH_START,
                lambda2: geometric(0.1, 7.0, 20),
                gamma2: negfuse_core::selection::DEFAULT_GAMMA2.to_vec(),
            },
        }
    }

    pub fn flsa() -> Self {
        let spec = negfuse_core::evaluation::flsa_grid_spec();
        Self {
            model: Model::NegFused,
            iters: 3000,
            burnin: 1000,
            grid: GridConfig {
                lambda1: None,
                lambda1_count: spec.lambda1_count,
                lambda1_min: spec.lambda1_min,
                lambda2: spec.lambda2,
                gamma2: spec.gamma2,
            },
        }
    }

    pub fn denoise() -> Self {
        let spec = negfuse_core::evaluation::image_grid_spec();
        let chain = negfuse_core::evaluation::image_chain_settings();
        Self {
            model: Model::NegFused,
            iters: chain.iters,
            burnin: chain.burnin,
            grid: GridConfig {
                lambda1: None,
                lambda1_count: spec.lambda1_count,
                lambda1_min: spec.lambda1_min,
                lambda2: spec.lambda2,
                gamma2: spec.gamma2,
            },
        }
    }

    pub fn simulate() -> Self {
        let spec = GridSpec::default();
        Self {
            model: Model::NegFused,
            iters: 3000,
            burnin: 1000,
            grid: GridConfig {
                lambda1: None,
                lambda1_count: spec.lambda1_count,
                lambda1_min: spec.lambda1_min,
                lambda2: spec.lambda2,
                gamma2: spec.gamma2,
            },
        }
    }
}

/// Merge of the shared layers. Command-specific fields are resolved by the
/// caller from `file` and its own flags.
pub fn resolve(
    command: &str,
    defaults: Defaults,
    shared: &SharedArgs,
    grid: &GridArgs,
    file: &FileConfig,
    model_flag: Option<Model>,
) -> CliResult<RunConfig> {
    let chain = ChainConfig {
        iters: shared.iters.or(file.iters).unwrap_or(defaults.iters),
        burnin: shared.burnin.or(file.burnin).unwrap_or(defaults.burnin),
        thin: shared.thin.or(file.thin).unwrap_or(1),
    };
    let point = grid.point.or(file.point).unwrap_or_default();
    let grid = GridConfig {
        lambda1: grid
            .lambda1
            .clone()
            .or_else(|| file.lambda1.clone())
            .or(defaults.grid.lambda1),
        lambda1_count: grid
            .lambda1_count
            .or(file.lambda1_count)
            .unwrap_or(defaults.grid.lambda1_count),
        lambda1_min: grid
            .lambda1_min
            .or(file.lambda1_min)
            .unwrap_or(defaults.grid.lambda1_min),
        lambda2: grid
            .lambda2
            .clone()
            .or_else(|| file.lambda2.clone())
            .unwrap_or(defaults.grid.lambda2),
        gamma2: grid
            .gamma2
            .clone()
            .or_else(|| file.gamma2.clone())
            .unwrap_or(defaults.grid.gamma2),
    };
    grid.validate()?;
    let threads = shared.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let cfg = RunConfig {
        command: command.to_string(),
        seed: shared.seed.or(file.seed).unwrap_or(1),
        model: Some(model_flag.or(file.model).unwrap_or(defaults.model)),
        graph: None,
        chain,
        point,
        grid,
        scaling: None,
        response: None,
        column: None,
        input: None,
        truth: None,
        case: None,
        replications: None,
        methods: None,
        out_dir: shared
            .out_dir
            .clone()
            .or_else(|| file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        threads,
    };
    cfg.chain_settings()
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}
