//! Pipeline configuration.
//!
//! ```toml
//! seed = 7
//! run_dir = "run"
//!
//! [data]
//! graphs = "graphs"          # directory of <id>.graph files
//! targets = "targets.csv"    # id,value
//! rho = 2
//!
//! [train]
//! model = "mlp"
//! hidden = [4]
//!
//! [infer]
//! spec = "spec.txt"
//! y_lower = 1.0
//! y_upper = 1.5
//!
//! [grid]
//! widths = [1.0]
//! radius = [2]
//!
//! [[grid.projection]]
//! weights = { n_atoms = 1.0 }
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use molinfer::regression::TrainConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_run_dir")]
    pub run_dir: PathBuf,
    pub data: DataSection,
    #[serde(default)]
    pub train: TrainSection,
    pub infer: Option<InferSection>,
    #[serde(default)]
    pub solver: SolverSection,
    pub grid: Option<GridSection>,
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_run_dir() -> PathBuf {
    PathBuf::from("run")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub graphs: PathBuf,
    pub targets: PathBuf,
    /// Element table file; the built-in table otherwise.
    pub elements: Option<PathBuf>,
    #[serde(default = "default_rho")]
    pub rho: u32,
}

fn default_rho() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub model: ModelKind,
    /// Hidden layer widths of the network.
    pub hidden: Vec<usize>,
    pub r_stop: f64,
    pub it_stop: u32,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub lambda: f64,
    /// Lasso penalty used to pick the network's inputs; 0 keeps every
    /// non-constant descriptor.
    pub select_lambda: f64,
    pub folds: usize,
    pub repeats: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            model: ModelKind::Mlp,
            hidden: vec![4],
            r_stop: t.r_stop,
            it_stop: t.it_stop,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            lambda: t.lambda,
            select_lambda: 0.0,
            folds: 5,
            repeats: 10,
        }
    }
}

impl TrainSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            r_stop: self.r_stop,
            it_stop: self.it_stop,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed,
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferSection {
    /// Topological specification file.
    pub spec: PathBuf,
    pub y_lower: f64,
    pub y_upper: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Solver executable; `highs` or `cbc` from `PATH` when absent.
    pub path: Option<PathBuf>,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            path: None,
            time_limit: default_time_limit(),
        }
    }
}

fn default_time_limit() -> f64 {
    300.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub widths: Vec<f64>,
    pub radius: Vec<u32>,
    #[serde(default = "yes")]
    pub prune: bool,
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default)]
    pub projection: Vec<ProjectionSource>,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

/// One projection axis: a linear model file, or explicit coefficients on
/// raw descriptor values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSource {
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub constant: f64,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub time_limit: Option<f64>,
    pub solver: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text)?;
        cfg.base = base.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(&text, base).with_context(|| format!("in config {}", path.display()))?;
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(t) = overrides.time_limit {
            cfg.solver.time_limit = t;
        }
        if let Some(s) = &overrides.solver {
            cfg.solver.path = Some(s.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn run_dir(&self) -> PathBuf {
        self.resolve(&self.run_dir)
    }

    pub fn infer(&self) -> Result<&InferSection> {
        self.infer.as_ref().context("config has no [infer] section")
    }

    pub fn grid(&self) -> Result<&GridSection> {
        self.grid.as_ref().context("config has no [grid] section")
    }

    fn validate(&self) -> Result<()> {
        ensure!(self.data.rho >= 1, "rho must be at least 1");
        for p in [&self.data.graphs, &self.data.targets]
            .into_iter()
            .chain(self.data.elements.as_ref())
        {
            let full = self.resolve(p);
            ensure!(full.exists(), "{} does not exist", full.display());
        }
        let t = &self.train;
        self.train.train_config(self.seed).validate()?;
        ensure!(
            t.select_lambda >= 0.0 && t.select_lambda.is_finite(),
            "select_lambda must be non-negative"
        );
        ensure!(t.folds >= 2, "folds must be at least 2");
        ensure!(t.repeats >= 1, "repeats must be at least 1");
        ensure!(t.hidden.iter().all(|&w| w > 0), "hidden layer widths must be positive");
        ensure!(
            self.solver.time_limit > 0.0 && self.solver.time_limit.is_finite(),
            "time_limit must be positive"
        );
        if let Some(inf) = &self.infer {
            let spec = self.resolve(&inf.spec);
            ensure!(spec.exists(), "{} does not exist", spec.display());
            ensure!(
                inf.y_lower.is_finite() && inf.y_upper.is_finite() && inf.y_lower <= inf.y_upper,
                "target interval [{}, {}] is not a finite ordered pair",
                inf.y_lower,
                inf.y_upper
            );
        }
        if let Some(g) = &self.grid {
            ensure!(!g.projection.is_empty(), "[grid] needs at least one [[grid.projection]]");
            let p = g.projection.len();
            ensure!(
                g.widths.len() == p && g.radius.len() == p,
                "[grid] widths and radius need one entry per projection ({p})"
            );
            ensure!(g.threads >= 1, "threads must be at least 1");
            for src in &g.projection {
                match (&src.model, src.weights.is_empty()) {
                    (Some(m), true) => {
                        let full = self.resolve(m);
                        ensure!(full.exists(), "{} does not exist", full.display());
                    }
                    (None, false) => {}
                    _ => bail!("a projection takes either `model` or `weights`"),
                }
            }
        }
        Ok(())
    }
}
