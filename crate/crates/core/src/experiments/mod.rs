//! Named, reproducible experiments confronting exact laws and Monte Carlo
//! estimates with closed-form predictions.
//!
//! Every experiment returns an [`ExperimentReport`] whose rows carry a
//! measured value, a prediction, a tolerance and a verdict. Gated rows pass
//! when `|measured - predicted| <= tolerance`; Monte Carlo rows in addition
//! need the tolerance to exceed four standard errors.

mod catalog;
mod report;

pub use report::{fmt_num, ExperimentReport, Row, Verdict};

use crate::counting::Backend;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Instant;

/// Names accepted by [`run_experiment`].
pub const EXPERIMENTS: &[&str] = &[
    "height-lln",
    "height-clt",
    "discrete-clt",
    "height-ldp",
    "bernoulli",
    "star",
    "width-scaling",
    "root-degree",
    "local-ball",
    "count-asymptotics",
    "partition-asymptotics",
    "lambda-expansions",
    "brownian-selfconsistency",
    "bijection-exhaustive",
];

/// Default seed of every experiment.
pub const DEFAULT_SEED: u64 = 20240917;

/// Overrides of an experiment's built-in parameters. Fields left out keep
/// the defaults of the chosen experiment.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    /// Tree sizes.
    pub n: Option<Vec<usize>>,
    /// Bias values (ignored where the experiment derives `mu` from `n`).
    pub mu: Option<Vec<f64>>,
    /// Grid of reals (LDP points, expansion arguments).
    pub x: Option<Vec<f64>>,
    /// Values of `delta` (star and Bernoulli experiments).
    pub delta: Option<Vec<f64>>,
    /// `mu sqrt(n)` values of the Brownian experiment.
    pub alpha: Option<Vec<f64>>,
    /// `mu / n^{1/4}` of the discrete-CLT experiment.
    pub gamma: Option<f64>,
    /// Exponent `a` in `mu = n^a` (width scaling, regime overlap).
    pub mu_power: Option<f64>,
    /// Monte Carlo sample count.
    pub samples: Option<usize>,
    /// Main gate tolerance.
    pub tolerance: Option<f64>,
    pub backend: Option<Backend>,
    /// Table cache directory; tables are not cached when absent.
    #[serde(skip_serializing)]
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

/// One-line description of an experiment.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "height-lln" => "exact mean height against (2 pi^2 n/mu)^{1/3}",
        "height-clt" => "Kolmogorov distance of the standardized exact height law to N(0,1)",
        "discrete-clt" => "total variation between h - floor(t) + 2 and the discrete Gaussian X",
        "height-ldp" => "exact height tails against the rate function",
        "bernoulli" => "exact law of h - m_x + 2 against Bernoulli(p)",
        "star" => "exact probability of the star against 4/(4 + e^{-delta})",
        "width-scaling" => "Monte Carlo width over min(n, (mu n^2)^{1/3})",
        "root-degree" => "exact root-degree law against mean 2mu, variance 6mu and the local density",
        "local-ball" => "Monte Carlo root degree against Kesten ball masses",
        "count-asymptotics" => "H[n][m] against its leading asymptotic term",
        "partition-asymptotics" => "exact Z against the three regime formulas",
        "lambda-expansions" => "t_x and lambda_x(t_x) against their small-x expansions",
        "brownian-selfconsistency" => "laws of h/sqrt(2n) at n and 2n with mu = alpha/sqrt(n)",
        "bijection-exhaustive" => "cycle map fibers, cut bijection and path width, exhaustively",
        _ => return None,
    })
}

/// Runs the named experiment.
pub fn run_experiment(name: &str, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = match name {
        "height-lln" => catalog::height_lln(config),
        "height-clt" => catalog::height_clt(config),
        "discrete-clt" => catalog::discrete_clt(config),
        "height-ldp" => catalog::height_ldp(config),
        "bernoulli" => catalog::bernoulli(config),
        "star" => catalog::star(config),
        "width-scaling" => catalog::width_scaling(config),
        "root-degree" => catalog::root_degree(config),
        "local-ball" => catalog::local_ball(config),
        "count-asymptotics" => catalog::count_asymptotics(config),
        "partition-asymptotics" => catalog::partition_asymptotics(config),
        "lambda-expansions" => catalog::lambda_expansions(config),
        "brownian-selfconsistency" => catalog::brownian_selfconsistency(config),
        "bijection-exhaustive" => catalog::bijection_exhaustive(config),
        _ => return Err(Error::UnknownExperiment(name.to_string())),
    }?;
    report.runtime = start.elapsed();
    Ok(report)
}
