//! Error metrics, covariate-selection summaries, posterior surfaces and the
//! proportional-odds baseline.
//!
//! Metrics come in two forms: streaming accumulators fed from a running chain
//! (cheap, using the chain's cached envelope values) and functions over stored
//! [`SampleRecord`]s that rebuild each configuration.

mod baseline;

pub use baseline::{fit_po_baseline, po_log_likelihood, BaselineConfig, BaselineFit, BaselineState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{probs_from_lambda, Dataset, LinkSpec, ParametricState, SurvivalCache};
use crate::mpp::Configuration;
use crate::sampler::{ModelSpec, SampleRecord};

/// Running sums behind the per-category and overall mean absolute errors.
#[derive(Clone, Debug)]
pub struct MaeAccumulator {
    levels: usize,
    truth: Vec<f64>,
    responses: Vec<usize>,
    samples: usize,
    per_category: Vec<f64>,
    overall: f64,
    scratch: Vec<f64>,
}

impl MaeAccumulator {
    /// `truth[n]` holds the exact category probabilities of observation `n`.
    pub fn new(truth: &[Vec<f64>], responses: &[usize]) -> Result<Self> {
        if truth.len() != responses.len() {
            return Err(Error::invalid(format!(
                "{} truth rows for {} observations",
                truth.len(),
                responses.len()
            )));
        }
        let levels = truth.first().map_or(0, Vec::len);
        if truth.iter().any(|row| row.len() != levels) {
            return Err(Error::invalid("truth rows differ in length"));
        }
        if responses.iter().any(|&y| y == 0 || y > levels) {
            return Err(Error::invalid("response outside the truth table's categories"));
        }
        Ok(Self {
            levels,
            truth: truth.concat(),
            responses: responses.to_vec(),
            samples: 0,
            per_category: vec![0.0; levels],
            overall: 0.0,
            scratch: vec![0.0; levels],
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Adds one posterior sample given its category probabilities, flattened
    /// as `N x K`.
    pub fn add_probs(&mut self, probs: &[f64]) {
        assert_eq!(probs.len(), self.truth.len(), "probability table has the wrong size");
        let k = self.levels;
        for (n, &y) in self.responses.iter().enumerate() {
            let row = n * k;
            let mut total = 0.0;
            for c in 0..k {
                total += (probs[row + c] - self.truth[row + c]).abs();
            }
            self.overall += total;
            self.per_category[y - 1] += (probs[row + y - 1] - self.truth[row + y - 1]).abs();
        }
        self.samples += 1;
    }

    /// Adds the chain's current state straight from its likelihood cache.
    pub fn add_cache(&mut self, cache: &SurvivalCache, link: &LinkSpec) {
        let k = self.levels;
        let mut scratch = std::mem::take(&mut self.scratch);
        for (n, &y) in self.responses.iter().enumerate() {
            cache.probs_into(n, link, &mut scratch);
            let truth = &self.truth[n * k..(n + 1) * k];
            let mut total = 0.0;
            for c in 0..k {
                total += (scratch[c] - truth[c]).abs();
            }
            self.overall += total;
            self.per_category[y - 1] += (scratch[y - 1] - truth[y - 1]).abs();
        }
        self.scratch = scratch;
        self.samples += 1;
    }

    /// MAE restricted to observations with response `k` (1-based).
    pub fn mae_k(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.levels {
            return Err(Error::invalid(format!("category {k} outside 1..={}", self.levels)));
        }
        let count = self.responses.iter().filter(|&&y| y == k).count();
        if count == 0 {
            return Err(Error::EmptyCategory(k));
        }
        if self.samples == 0 {
            return Err(Error::invalid("no samples"));
        }
        Ok(self.per_category[k - 1] / (count * self.samples) as f64)
    }

    pub fn mae_overall(&self) -> Result<f64> {
        if self.samples == 0 || self.responses.is_empty() {
            return Err(Error::invalid("no samples or no observations"));
        }
        Ok(self.overall / (self.responses.len() * self.levels * self.samples) as f64)
    }
}

/// Category probabilities of every observation under one stored record.
pub fn record_probs(record: &SampleRecord, spec: &ModelSpec, data: &Dataset) -> Result<Vec<f64>> {
    let config = record.to_configuration(spec)?;
    let theta = record.theta_or_empty();
    Ok(config_probs(&config, &theta, &spec.link_spec(), data))
}

fn config_probs(config: &Configuration, theta: &ParametricState, link: &LinkSpec, data: &Dataset) -> Vec<f64> {
    let k = config.levels();
    let mut out = vec![0.0; data.len() * k];
    let mut lambda = vec![0.0; k];
    for n in 0..data.len() {
        config.envelope_into(data.x(n), &mut lambda);
        let offset = theta.offset(data.z(n), data.cluster(n));
        probs_from_lambda(&lambda, offset, link, &mut out[n * k..(n + 1) * k]);
    }
    out
}

fn accumulate(records: &[SampleRecord], spec: &ModelSpec, data: &Dataset, truth: &[Vec<f64>]) -> Result<MaeAccumulator> {
    if records.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let mut acc = MaeAccumulator::new(truth, data.responses())?;
    for r in records {
        acc.add_probs(&record_probs(r, spec, data)?);
    }
    Ok(acc)
}

/// Mean absolute error for category `k` over the observations in that category.
pub fn mae_k(records: &[SampleRecord], spec: &ModelSpec, data: &Dataset, truth: &[Vec<f64>], k: usize) -> Result<f64> {
    accumulate(records, spec, data, truth)?.mae_k(k)
}

/// Mean absolute error over all observations, categories and samples.
pub fn mae_overall(records: &[SampleRecord], spec: &ModelSpec, data: &Dataset, truth: &[Vec<f64>]) -> Result<f64> {
    accumulate(records, spec, data, truth)?.mae_overall()
}

fn uses_covariate(record: &SampleRecord, j: usize) -> impl Iterator<Item = &crate::mpp::SupportPoint> {
    record.points.iter().filter(move |pt| pt.subspace.contains(j))
}

/// Fraction of records with at least one point in a subspace containing
/// covariate `j` (0-based).
pub fn inclusion_probability(records: &[SampleRecord], j: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let hits = records.iter().filter(|r| uses_covariate(r, j).next().is_some()).count();
    Ok(hits as f64 / records.len() as f64)
}

/// Posterior mean number of points in subspaces containing covariate `j`.
pub fn mean_point_count(records: &[SampleRecord], j: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let total: usize = records.iter().map(|r| uses_covariate(r, j).count()).sum();
    Ok(total as f64 / records.len() as f64)
}

/// Where a surface is evaluated and which linear-predictor terms are held fixed.
#[derive(Clone, Debug, Default)]
pub struct SurfaceQuery<'a> {
    pub grid: &'a [Vec<f64>],
    /// Survival level `k` (1-based).
    pub level: usize,
    /// Linear covariates; `None` drops the linear term.
    pub z: Option<&'a [f64]>,
    /// Cluster whose random intercept is added; `None` sets it to zero.
    pub cluster: Option<usize>,
}

/// Running posterior mean of `S(k | x)` over a grid.
#[derive(Clone, Debug)]
pub struct SurfaceAccumulator {
    grid: Vec<Vec<f64>>,
    level: usize,
    z: Option<Vec<f64>>,
    cluster: Option<usize>,
    sums: Vec<f64>,
    samples: usize,
}

impl SurfaceAccumulator {
    pub fn new(query: &SurfaceQuery<'_>) -> Self {
        Self {
            grid: query.grid.to_vec(),
            level: query.level,
            z: query.z.map(<[f64]>::to_vec),
            cluster: query.cluster,
            sums: vec![0.0; query.grid.len()],
            samples: 0,
        }
    }

    pub fn add(&mut self, config: &Configuration, theta: &ParametricState, link: &LinkSpec) -> Result<()> {
        let k = self.level;
        if k == 0 || k > config.levels() {
            return Err(Error::invalid(format!("level {k} outside 1..={}", config.levels())));
        }
        let offset = theta.offset(self.z.as_deref().unwrap_or(&[]), self.cluster);
        for (sum, x) in self.sums.iter_mut().zip(&self.grid) {
            if x.len() != config.covariates() {
                return Err(Error::invalid("grid location has the wrong number of covariates"));
            }
            *sum += if k == 1 { 1.0 } else { link.survival(config.evaluate_lambda(x, k)?, offset) };
        }
        self.samples += 1;
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn mean(&self) -> Vec<f64> {
        let l = self.samples.max(1) as f64;
        self.sums.iter().map(|s| s / l).collect()
    }
}

/// `(1/L) sum_l S(k | x; lambda^(l))` at every grid location.
pub fn posterior_mean_surface(records: &[SampleRecord], spec: &ModelSpec, query: &SurfaceQuery<'_>) -> Result<Vec<f64>> {
    let mut acc = SurfaceAccumulator::new(query);
    let link = spec.link_spec();
    for r in records {
        acc.add(&r.to_configuration(spec)?, &r.theta_or_empty(), &link)?;
    }
    Ok(acc.mean())
}

/// Directly standardized regression function of covariate `j` (0-based):
/// the link-transformed level-`k` envelope averaged over the observed values
/// of the other covariates, with covariate `j` set to each grid value.
/// Kept as a rolling average over the samples.
#[derive(Clone, Debug)]
pub struct StandardizedAccumulator {
    x: Vec<Vec<f64>>,
    covariate: usize,
    grid: Vec<f64>,
    level: usize,
    mean: Vec<f64>,
    samples: usize,
}

impl StandardizedAccumulator {
    pub fn new(data: &Dataset, covariate: usize, grid: &[f64], level: usize) -> Result<Self> {
        if covariate >= data.covariates() {
            return Err(Error::invalid(format!("covariate {} outside 1..={}", covariate + 1, data.covariates())));
        }
        if level < 2 || level > data.levels() {
            return Err(Error::invalid(format!("level {level} outside 2..={}", data.levels())));
        }
        if data.is_empty() {
            return Err(Error::Data("standardization needs observations".into()));
        }
        Ok(Self {
            x: (0..data.len()).map(|n| data.x(n).to_vec()).collect(),
            covariate,
            grid: grid.to_vec(),
            level,
            mean: vec![0.0; grid.len()],
            samples: 0,
        })
    }

    pub fn add(&mut self, config: &Configuration, link: &LinkSpec) -> Result<()> {
        self.samples += 1;
        let weight = 1.0 / self.samples as f64;
        let n = self.x.len() as f64;
        let mut x = vec![0.0; config.covariates()];
        for (g, mean) in self.grid.iter().zip(self.mean.iter_mut()) {
            let mut total = 0.0;
            for row in &self.x {
                x.copy_from_slice(row);
                x[self.covariate] = *g;
                total += link.survival(config.evaluate_lambda(&x, self.level)?, 0.0);
            }
            *mean += (total / n - *mean) * weight;
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn values(&self) -> &[f64] {
        &self.mean
    }
}

pub fn standardized_function(
    records: &[SampleRecord],
    spec: &ModelSpec,
    data: &Dataset,
    covariate: usize,
    grid: &[f64],
    level: usize,
) -> Result<Vec<f64>> {
    let mut acc = StandardizedAccumulator::new(data, covariate, grid, level)?;
    let link = spec.link_spec();
    for r in records {
        acc.add(&r.to_configuration(spec)?, &link)?;
    }
    Ok(acc.values().to_vec())
}

/// Posterior means per observation plus traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub observations: usize,
    pub levels: usize,
    /// Mean `S(k | x_n)`, flattened `N x K`.
    pub mean_survival: Vec<f64>,
    /// Mean `p(k | x_n)`, flattened `N x K`.
    pub mean_probs: Vec<f64>,
    pub log_likelihood: Vec<f64>,
    /// Point counts per subspace, one row per sample.
    pub occupancy: Vec<Vec<usize>>,
    pub samples: usize,
}

impl PosteriorSummary {
    pub fn new(observations: usize, levels: usize) -> Self {
        Self {
            observations,
            levels,
            mean_survival: vec![0.0; observations * levels],
            mean_probs: vec![0.0; observations * levels],
            log_likelihood: Vec::new(),
            occupancy: Vec::new(),
            samples: 0,
        }
    }

    fn push_probs(&mut self, probs: &[f64]) {
        self.samples += 1;
        let w = 1.0 / self.samples as f64;
        let k = self.levels;
        for n in 0..self.observations {
            let row = &probs[n * k..(n + 1) * k];
            let mut tail = 0.0;
            for c in (0..k).rev() {
                tail += row[c];
                let i = n * k + c;
                self.mean_probs[i] += (row[c] - self.mean_probs[i]) * w;
                // survival accumulated from the tail keeps S(1) exactly 1 up to rounding
                let s = if c == 0 { 1.0 } else { tail };
                self.mean_survival[i] += (s - self.mean_survival[i]) * w;
            }
        }
    }

    /// Adds a chain's current state using its likelihood cache.
    pub fn add_cache(&mut self, cache: &SurvivalCache, link: &LinkSpec, record: &SampleRecord) {
        let k = self.levels;
        let mut probs = vec![0.0; self.observations * k];
        for n in 0..self.observations {
            cache.probs_into(n, link, &mut probs[n * k..(n + 1) * k]);
        }
        self.push_probs(&probs);
        self.log_likelihood.push(record.log_likelihood);
        self.occupancy.push(record.counts.clone());
    }

    pub fn add_record(&mut self, record: &SampleRecord, spec: &ModelSpec, data: &Dataset) -> Result<()> {
        if data.len() != self.observations {
            return Err(Error::invalid("dataset size does not match the summary"));
        }
        self.push_probs(&record_probs(record, spec, data)?);
        self.log_likelihood.push(record.log_likelihood);
        self.occupancy.push(record.counts.clone());
        Ok(())
    }

    /// Pools another summary of the same observations, weighting by samples.
    pub fn merge(&mut self, other: &PosteriorSummary) -> Result<()> {
        if other.observations != self.observations || other.levels != self.levels {
            return Err(Error::invalid("summaries describe different data"));
        }
        let total = self.samples + other.samples;
        if total > 0 {
            let w = other.samples as f64 / total as f64;
            for (a, b) in self.mean_probs.iter_mut().zip(&other.mean_probs) {
                *a += (b - *a) * w;
            }
            for (a, b) in self.mean_survival.iter_mut().zip(&other.mean_survival) {
                *a += (b - *a) * w;
            }
        }
        self.samples = total;
        self.log_likelihood.extend_from_slice(&other.log_likelihood);
        self.occupancy.extend(other.occupancy.iter().cloned());
        Ok(())
    }

    pub fn from_records(records: &[SampleRecord], spec: &ModelSpec, data: &Dataset) -> Result<Self> {
        let mut s = Self::new(data.len(), spec.levels);
        for r in records {
            s.add_record(r, spec, data)?;
        }
        Ok(s)
    }
}
