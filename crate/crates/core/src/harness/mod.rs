//! Seeded Monte Carlo experiments over an `n` grid.
//!
//! Every `(n, trial)` cell samples its own structure from
//! [`stream_rng`](crate::randmodel::stream_rng) streams, so results do not
//! depend on the number of workers. Rows are emitted in `(n, trial)` order
//! and written as CSV with the columns `experiment,n,trial,seed,quantity,value`;
//! the JSON report carries the same rows plus the config, derived bounds,
//! per-`n` aggregates and threshold checks. Wall-clock time goes to a
//! separate timing file so the report itself is reproducible byte for byte.

mod experiments;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiments::{
    measure_degree, measure_height, measure_levels, measure_order, measure_parity, measure_paths, phi_for_structure,
    start_node, Measurements,
};
pub use report::{aggregate, write_report, Aggregate, Check, Derived, ExperimentReport, ReportPaths, Row};

use crate::heightkit::{OrderError, TemplateError};
use crate::pathkit::{PathError, PhiError};
use crate::randmodel::{Case, SamplerConfig, SamplerError, DEFAULT_ALPHA1, DEFAULT_ALPHA2, DEFAULT_ALPHA_A};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "SPARSELAW_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Degree,
    Levels,
    Height,
    Paths,
    Parity,
    Order,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Degree,
        ExperimentId::Levels,
        ExperimentId::Height,
        ExperimentId::Paths,
        ExperimentId::Parity,
        ExperimentId::Order,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Degree => "degree",
            ExperimentId::Levels => "levels",
            ExperimentId::Height => "height",
            ExperimentId::Paths => "paths",
            ExperimentId::Parity => "parity",
            ExperimentId::Order => "order",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown experiment `{s}` (expected degree, levels, height, paths, parity or order)"))
    }
}

/// Pass thresholds. All are artifact choices for finite `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Allowed relative deviation of the mean `R2` out-degree.
    pub degree_rel_tol: f64,
    /// Allowed deviation of `|R1|` in binomial standard deviations.
    pub degree_sigmas: f64,
    /// Fraction of trials whose `|R1|` must fall within `degree_sigmas`.
    pub r1_pass_rate: f64,
    /// Fraction of trials passing both level flags.
    pub levels_pass_rate: f64,
    /// Per-trial fraction of sampled pairs the order must separate.
    pub order_pair_rate: f64,
    /// Fraction of trials reaching `order_pair_rate`.
    pub order_pass_rate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            degree_rel_tol: 0.02,
            degree_sigmas: 4.0,
            r1_pass_rate: 0.95,
            levels_pass_rate: 0.9,
            order_pair_rate: 0.99,
            order_pass_rate: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub case: Case,
    pub n_grid: Vec<u32>,
    pub trials: u64,
    /// Case A edge exponent.
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub seed: u64,
    /// Height horizon exponent: `k* = floor(n^epsilon)`.
    pub epsilon: f64,
    /// Recorded for completeness; no experiment reads it yet.
    pub zeta: f64,
    /// Level cap; `None` uses `ceil(sqrt n)` for levels and `n` for height.
    pub cap: Option<usize>,
    /// Allows `alpha2 >= 1/4` (order experiment, mechanism regime).
    pub nonpaper_regime: bool,
    /// Chain length in the mechanism regime.
    pub chain_len: usize,
    /// Length of the Goldilocks sequence; `None` means `n - 1`.
    pub eta_len: Option<usize>,
    /// Sampled start nodes for height, paths and parity; 0 means all nodes.
    pub starts: usize,
    /// Pairs sampled per trial by the order experiment.
    pub pair_samples: usize,
    /// Domain nodes in the explicit strict-order scan.
    pub scan_sample: usize,
    /// Seed for the Case A witness templates.
    pub template_seed: u64,
    pub thresholds: Thresholds,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentConfig {
            id,
            case: Case::B,
            n_grid: vec![4096],
            trials: 20,
            alpha: DEFAULT_ALPHA_A,
            alpha1: DEFAULT_ALPHA1,
            alpha2: DEFAULT_ALPHA2,
            seed: 0,
            epsilon: 0.3,
            zeta: 0.05,
            cap: None,
            nonpaper_regime: false,
            chain_len: 256,
            eta_len: None,
            starts: 64,
            pair_samples: 10_000,
            scan_sample: 200,
            template_seed: 0,
            thresholds: Thresholds::default(),
            out_dir: None,
        }
    }

    pub fn sampler(&self, n: u32, trial: u64) -> SamplerConfig {
        let mut s = match self.case {
            Case::A => SamplerConfig::case_a(n, self.alpha, self.seed, trial),
            Case::B => SamplerConfig::case_b(n, self.alpha1, self.alpha2, self.seed, trial),
        };
        s.nonpaper_regime = self.nonpaper_regime;
        s
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(HarnessError::InvalidConfig("the n grid is empty".into()));
        }
        for &n in &self.n_grid {
            self.sampler(n, 0).validate()?;
        }
        if self.id == ExperimentId::Order && self.case != Case::B {
            return Err(HarnessError::InvalidConfig(format!("the {} experiment needs case b", self.id)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(HarnessError::InvalidConfig(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        Ok(())
    }

    /// Number of rayon workers from the environment, if set and positive.
    pub fn workers() -> Option<usize> {
        std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&w| w > 0)
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs the experiment on a pool sized by [`WORKERS_ENV`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ExperimentConfig::workers().unwrap_or(0))
        .build()?;
    pool.install(|| experiments::run(config))
}

pub fn run_degree_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_as(config, ExperimentId::Degree)
}

pub fn run_levels_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_as(config, ExperimentId::Levels)
}

pub fn run_height_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_as(config, ExperimentId::Height)
}

pub fn run_paths_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_as(config, ExperimentId::Paths)
}

pub fn run_parity_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_as(config, ExperimentId::Parity)
}

pub fn run_order_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_as(config, ExperimentId::Order)
}

fn run_as(config: &ExperimentConfig, id: ExperimentId) -> Result<ExperimentReport, HarnessError> {
    let mut c = config.clone();
    c.id = id;
    run_experiment(&c)
}
