//! Run-configuration schema for the command-line driver.
//!
//! One JSON document selects a command and parameterizes every stage;
//! unknown keys are rejected so typos fail loudly, and each block falls back
//! to documented defaults when omitted. Seed precedence is resolved here so
//! it can be tested without spawning processes: command-line flag, then the
//! QAWA_SEED environment variable, then the config file, then 42.

use serde::{Deserialize, Serialize};

use crate::distributed::PartitionConfig;
use crate::error::{Error, Result};
use crate::experiments::{BenchmarkConfig, CopulaLearnConfig, CorrelationExperimentConfig};
use crate::oracle::TrainingConfig;
use crate::problem::PortfolioSpec;
use crate::qaoa::OptimizerConfig;

/// Seed used when no flag, environment variable, or config entry names one.
pub const DEFAULT_SEED: u64 = 42;
/// Environment variable consulted between the flag and the config file.
pub const SEED_ENV_VAR: &str = "QAWA_SEED";
/// Output directory used when neither flag nor config names one.
pub const DEFAULT_OUT_DIR: &str = "qawa-out";

/// What a `run` invocation computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Optimize the sampler alone and report its energies and ratio.
    Qaoa,
    /// Train the walk oracle against an alignment target.
    Qawa,
    /// Size-sweep comparison table (benchmark.csv).
    Benchmark,
    /// Dependence-learning curve (copula_trace.csv).
    Copula,
    /// Attenuation, variance, and depth-decay series (fig4a/b/c.csv).
    Correlation,
    /// End-to-end validation report (report.json).
    Validate,
    /// Partitioned training with merged correlation records.
    Distributed,
}

/// Where the portfolio instance comes from: a spec file written by `ingest`,
/// or a seeded synthetic instance of `n_assets` names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemBlock {
    /// Path to a portfolio spec JSON (as produced by `ingest`). When unset, a
    /// synthetic instance is generated from the run seed.
    pub spec: Option<String>,
    /// Asset count of the synthetic instance; ignored when `spec` is set.
    pub n_assets: usize,
}

impl Default for ProblemBlock {
    fn default() -> Self {
        ProblemBlock { spec: None, n_assets: 4 }
    }
}

/// Sampler-optimization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaBlock {
    /// Alternating-layer count.
    pub p: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for QaoaBlock {
    fn default() -> Self {
        QaoaBlock { p: 3, optimizer: OptimizerConfig::default() }
    }
}

/// Walk-training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QawaBlock {
    pub training: TrainingConfig,
    /// Fixed scalar readout target; when unset the exhaustive-search
    /// alignment target is used.
    pub target: Option<f64>,
}

impl Default for QawaBlock {
    fn default() -> Self {
        QawaBlock { training: TrainingConfig::default(), target: None }
    }
}

/// Experiment-suite settings shared by `benchmark` and `correlation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentBlock {
    /// Problem sizes swept by the benchmark.
    pub sizes: Vec<usize>,
    /// Layer count used by the benchmark.
    pub p: usize,
    pub correlation: CorrelationExperimentConfig,
    pub benchmark: BenchmarkConfig,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        ExperimentBlock {
            sizes: vec![4, 5, 6, 7, 8],
            p: 3,
            correlation: CorrelationExperimentConfig::default(),
            benchmark: BenchmarkConfig::default(),
        }
    }
}

/// Partitioned-run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributedBlock {
    /// Worker count for the contiguous even partition.
    pub workers: usize,
    pub config: PartitionConfig,
}

impl Default for DistributedBlock {
    fn default() -> Self {
        DistributedBlock { workers: 2, config: PartitionConfig::default() }
    }
}

/// The full run configuration. Only `command` is mandatory; every block has
/// defaults, and `seed`/`out`/`shots` can be overridden by their flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    /// Global shot budget: overrides the per-forward-pass shot counts of the
    /// training blocks when set.
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub problem: ProblemBlock,
    #[serde(default)]
    pub qaoa: QaoaBlock,
    #[serde(default)]
    pub qawa: QawaBlock,
    #[serde(default)]
    pub copula: CopulaLearnConfig,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub distributed: DistributedBlock,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("config did not parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=16).contains(&self.problem.n_assets) {
            return Err(Error::invalid("problem.n_assets must lie in 2..=16"));
        }
        if self.qaoa.p == 0 {
            return Err(Error::invalid("qaoa.p must be at least 1"));
        }
        if self.experiment.p == 0 {
            return Err(Error::invalid("experiment.p must be at least 1"));
        }
        if self.experiment.sizes.is_empty() {
            return Err(Error::invalid("experiment.sizes must be nonempty"));
        }
        if self.distributed.workers == 0 {
            return Err(Error::invalid("distributed.workers must be at least 1"));
        }
        if let Some(t) = self.qawa.target {
            if !(-1.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("qawa.target {t} outside [−1,1]")));
            }
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots must be at least 1"));
        }
        self.qawa.training.validate()?;
        self.copula.validate()?;
        self.experiment.correlation.validate()?;
        Ok(())
    }
}

/// Resolve the effective seed: flag beats the environment variable, which
/// beats the config entry, which beats the default 42. A set-but-unparsable
/// environment value is an error rather than a silent fallback.
pub fn resolve_seed(flag: Option<u64>, env_value: Option<&str>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(raw) = env_value {
        return raw
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::invalid(format!("{SEED_ENV_VAR} value {raw:?} is not an unsigned integer")));
    }
    Ok(config.unwrap_or(DEFAULT_SEED))
}

/// On-disk portfolio spec written by `ingest` and consumed by `run`:
/// tickers alongside the mean/covariance/risk-aversion triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioFile {
    pub tickers: Vec<String>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub lambda: f64,
}

impl PortfolioFile {
    pub fn from_spec(tickers: Vec<String>, spec: &PortfolioSpec) -> Result<Self> {
        if tickers.len() != spec.n_assets() {
            return Err(Error::invalid("ticker count must match the spec dimension"));
        }
        Ok(PortfolioFile { tickers, mu: spec.mu.clone(), sigma: spec.sigma.clone(), lambda: spec.lambda })
    }

    /// Validated conversion into the solver-facing spec.
    pub fn into_spec(self) -> Result<(Vec<String>, PortfolioSpec)> {
        if self.tickers.len() != self.mu.len() {
            return Err(Error::invalid("ticker count must match the mu dimension"));
        }
        let spec = PortfolioSpec { mu: self.mu, sigma: self.sigma, lambda: self.lambda };
        spec.validate()?;
        Ok((self.tickers, spec))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("portfolio spec did not parse: {e}")))
    }
}
