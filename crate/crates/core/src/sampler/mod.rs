//! Reversible-jump MCMC over marked point configurations.
//!
//! Each iteration performs one dimension-changing attempt (birth, death or a
//! combined death-birth), one fixed-dimension attempt (position, joint level,
//! single level or origin level), a Gibbs refresh of the process intensities
//! and, for semi-parametric models, a sweep over the linear-predictor
//! parameters.

mod chain;
mod record;

pub use chain::{
    acceptance_probability, birth_log_ratio, death_birth_log_ratio, death_log_ratio, Chain, MoveKind,
    MoveStats, Progress,
};
pub use record::SampleRecord;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{Dataset, LinkKind, LinkSpec};
use crate::mpp::{Interval, DEFAULT_MAX_COVARIATES};

/// Structure of the regression model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Number of ordered categories `K`.
    pub levels: usize,
    /// Number of monotone covariates `p`.
    pub covariates: usize,
    pub link: LinkKind,
    /// Range `A` of the regression levels; `[0,1]` under the identity link.
    pub range: Interval,
    /// Number of linear covariates `q` (logit link only).
    #[serde(default)]
    pub linear_covariates: usize,
    /// Number of clusters `C` carrying random intercepts (logit link only).
    #[serde(default)]
    pub clusters: usize,
    #[serde(default = "default_max_covariates")]
    pub max_covariates: usize,
}

fn default_max_covariates() -> usize {
    DEFAULT_MAX_COVARIATES
}

impl ModelSpec {
    /// Fully non-parametric model under the identity link.
    pub fn nonparametric(levels: usize, covariates: usize) -> Self {
        Self {
            levels,
            covariates,
            link: LinkKind::Identity,
            range: Interval::unit(),
            linear_covariates: 0,
            clusters: 0,
            max_covariates: DEFAULT_MAX_COVARIATES,
        }
    }

    /// Logit-link model with levels in `[lower, upper]`.
    pub fn logit(levels: usize, covariates: usize, lower: f64, upper: f64) -> Result<Self> {
        let link = LinkSpec::logit(lower, upper)?;
        Ok(Self {
            levels,
            covariates,
            link: LinkKind::Logit,
            range: link.range,
            linear_covariates: 0,
            clusters: 0,
            max_covariates: DEFAULT_MAX_COVARIATES,
        })
    }

    pub fn with_linear(mut self, linear: usize, clusters: usize) -> Self {
        self.linear_covariates = linear;
        self.clusters = clusters;
        self
    }

    pub fn link_spec(&self) -> LinkSpec {
        LinkSpec { kind: self.link, range: self.range }
    }

    /// Whether level 1 is fixed at the top of the range.
    pub fn pins_top(&self) -> bool {
        self.link == LinkKind::Identity
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::invalid("at least two categories are required"));
        }
        if self.covariates == 0 || self.covariates > self.max_covariates {
            return Err(Error::invalid(format!(
                "covariate count {} outside 1..={}",
                self.covariates, self.max_covariates
            )));
        }
        self.link_spec().validate()?;
        if self.link == LinkKind::Identity && (self.linear_covariates > 0 || self.clusters > 0) {
            return Err(Error::invalid("linear covariates and clusters require the logit link"));
        }
        Ok(())
    }

    /// Checks that a dataset matches this model.
    pub fn check_dataset(&self, data: &Dataset) -> Result<()> {
        self.validate()?;
        if data.levels() != self.levels {
            return Err(Error::Data(format!(
                "dataset has {} categories, model expects {}",
                data.levels(),
                self.levels
            )));
        }
        if !data.is_empty() {
            if data.covariates() != self.covariates {
                return Err(Error::Data(format!(
                    "dataset has {} monotone covariates, model expects {}",
                    data.covariates(),
                    self.covariates
                )));
            }
            if data.linear_covariates() != self.linear_covariates {
                return Err(Error::Data(format!(
                    "dataset has {} linear covariates, model expects {}",
                    data.linear_covariates(),
                    self.linear_covariates
                )));
            }
            if data.cluster_count() != self.clusters {
                return Err(Error::Data(format!(
                    "dataset has {} clusters, model expects {}",
                    data.cluster_count(),
                    self.clusters
                )));
            }
        }
        Ok(())
    }
}

/// Probabilities of the three dimension-changing moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionWeights {
    pub birth: f64,
    pub death: f64,
    pub death_birth: f64,
}

impl Default for DimensionWeights {
    fn default() -> Self {
        Self { birth: 0.4, death: 0.4, death_birth: 0.2 }
    }
}

/// Relative weights of the fixed-dimension moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveWeights {
    pub position: f64,
    pub joint_level: f64,
    pub single_level: f64,
    pub origin: f64,
}

impl Default for MoveWeights {
    fn default() -> Self {
        Self { position: 1.0, joint_level: 1.0, single_level: 1.0, origin: 1.0 }
    }
}

/// How the origin levels are initialised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginInit {
    /// Empirical survival proportions, mapped through the link.
    Empirical,
    /// Evenly spaced over the level range.
    Even,
}

/// Run schedule, hyperparameters and proposal settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    /// Iterations kept after burn-in (before thinning).
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Gamma prior shape for the process intensities.
    pub a: f64,
    /// Gamma prior rate for the process intensities.
    pub b: f64,
    /// Spiking penalty for the origin levels; zero gives uniform priors.
    pub d: f64,
    pub dimension_weights: DimensionWeights,
    pub move_weights: MoveWeights,
    pub beta_scale: f64,
    pub gamma_scale: f64,
    /// Standard deviation of a Gaussian prior on each beta; `None` is flat.
    pub beta_prior_sd: Option<f64>,
    pub tau2_shape: f64,
    pub tau2_rate: f64,
    /// Adapt random-walk scales during burn-in.
    pub adapt: bool,
    pub origin_init: OriginInit,
    /// Locations at which survival values are stored in every record.
    pub record_grid: Vec<Vec<f64>>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 50_000,
            burn_in: 10_000,
            thin: 20,
            seed: 1,
            a: 0.1,
            b: 0.1,
            d: 0.0,
            dimension_weights: DimensionWeights::default(),
            move_weights: MoveWeights::default(),
            beta_scale: 0.1,
            gamma_scale: 0.1,
            beta_prior_sd: None,
            tau2_shape: 0.01,
            tau2_rate: 0.01,
            adapt: true,
            origin_init: OriginInit::Empirical,
            record_grid: Vec::new(),
        }
    }
}

impl SamplerConfig {
    /// Long schedule for simulation studies: 500k iterations after 100k burn-in.
    pub fn simulation_scale() -> Self {
        Self { iterations: 500_000, burn_in: 100_000, thin: 50, ..Self::default() }
    }

    /// Short schedule for large real datasets.
    pub fn data_scale() -> Self {
        Self { iterations: 10_000, burn_in: 5_000, thin: 20, ..Self::default() }
    }

    pub fn with_schedule(mut self, iterations: usize, burn_in: usize, thin: usize) -> Self {
        self.iterations = iterations;
        self.burn_in = burn_in;
        self.thin = thin;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::invalid("intensity hyperparameters a and b must be positive"));
        }
        if !(self.d >= 0.0) {
            return Err(Error::invalid("spiking penalty d must be non-negative"));
        }
        let dw = &self.dimension_weights;
        let mw = &self.move_weights;
        let dims = [dw.birth, dw.death, dw.death_birth];
        let fixed = [mw.position, mw.joint_level, mw.single_level, mw.origin];
        for w in dims.iter().chain(&fixed) {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::invalid("move weights must be finite and non-negative"));
            }
        }
        if dims.iter().sum::<f64>() <= 0.0 || fixed.iter().sum::<f64>() <= 0.0 {
            return Err(Error::invalid("move weights must not all be zero"));
        }
        if !(self.beta_scale > 0.0 && self.gamma_scale > 0.0) {
            return Err(Error::invalid("random-walk scales must be positive"));
        }
        if let Some(sd) = self.beta_prior_sd {
            if !(sd > 0.0) {
                return Err(Error::invalid("beta prior standard deviation must be positive"));
            }
        }
        if !(self.tau2_shape > 0.0 && self.tau2_rate > 0.0) {
            return Err(Error::invalid("tau2 prior shape and rate must be positive"));
        }
        Ok(())
    }
}

/// Everything produced by one chain.
#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub records: Vec<SampleRecord>,
    pub stats: MoveStats,
}

/// Runs one chain and collects its thinned records.
pub fn run_chain(data: &Dataset, spec: &ModelSpec, config: &SamplerConfig) -> Result<ChainOutput> {
    let mut chain = Chain::new(data, spec.clone(), config.clone(), 0)?;
    let mut records = Vec::new();
    chain.run(|_, r| {
        records.push(r);
        Ok(())
    })?;
    Ok(ChainOutput { records, stats: chain.stats().clone() })
}

/// Runs `chains` independent chains concurrently. Chain `c` uses stream `c`
/// of the generator seeded by `config.seed`.
pub fn run_chains(data: &Dataset, spec: &ModelSpec, config: &SamplerConfig, chains: usize) -> Result<Vec<ChainOutput>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains as u64)
            .map(|c| {
                scope.spawn(move || -> Result<ChainOutput> {
                    let mut chain = Chain::new(data, spec.clone(), config.clone(), c)?;
                    let mut records = Vec::new();
                    chain.run(|_, r| {
                        records.push(r);
                        Ok(())
                    })?;
                    Ok(ChainOutput { records, stats: chain.stats().clone() })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().map_err(|_| Error::Invariant("chain thread panicked".into()))?)
            .collect()
    })
}
