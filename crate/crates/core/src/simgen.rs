//! Synthetic scenarios with closed-form truth.
//!
//! Three families of five-category survival surfaces on `[0,1]^2`: linear,
//! continuous with a flat region near the axes, and axis-aligned step
//! functions. In semi-parametric mode the surfaces are mapped to `[-2, 2]`
//! and shifted by `beta' z` on the logit scale.
//!
//! Observations are generated one at a time from a single stream, so a
//! dataset of size `N` is the prefix of any larger dataset with the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{expit, Dataset};
use crate::sampler::ModelSpec;

pub const LEVELS: usize = 5;
pub const SEMIPARAMETRIC_BETA: [f64; 3] = [0.3, -0.5, 0.1];
pub const SEMIPARAMETRIC_RANGE: (f64, f64) = (-2.0, 2.0);

/// Intercepts and slopes of the linear family in `t = (x1 + x2) / 2`.
const LINEAR: [(f64, f64); 4] = [(0.65, 0.3), (0.35, 0.5), (0.15, 0.5), (0.05, 0.3)];
/// Threshold and (intercept, slope) pairs of the continuous family.
const CONTINUOUS_THRESHOLD: f64 = 0.2;
const CONTINUOUS: [(f64, f64); 4] = [(0.49, 0.5), (0.3, 0.6), (0.2, 0.65), (0.05, 0.6)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Continuous,
    Discontinuous,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Family::Linear),
            "continuous" => Ok(Family::Continuous),
            "discontinuous" => Ok(Family::Discontinuous),
            _ => Err(Error::invalid(format!("unknown family '{s}' (linear, continuous, discontinuous)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Nonparametric,
    Semiparametric,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonparametric" => Ok(Mode::Nonparametric),
            "semiparametric" => Ok(Mode::Semiparametric),
            _ => Err(Error::invalid(format!("unknown mode '{s}' (nonparametric, semiparametric)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub family: Family,
    pub mode: Mode,
    pub n: usize,
    pub seed: u64,
    /// Extra uniform covariates that do not affect the response.
    #[serde(default)]
    pub noise_covariates: usize,
}

impl ScenarioSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self { family, mode: Mode::Nonparametric, n, seed, noise_covariates: 0 }
    }

    pub fn semiparametric(mut self) -> Self {
        self.mode = Mode::Semiparametric;
        self
    }

    pub fn with_noise(mut self, noise_covariates: usize) -> Self {
        self.noise_covariates = noise_covariates;
        self
    }

    pub fn covariates(&self) -> usize {
        2 + self.noise_covariates
    }

    /// Model matching the generating process.
    pub fn model(&self) -> ModelSpec {
        match self.mode {
            Mode::Nonparametric => ModelSpec::nonparametric(LEVELS, self.covariates()),
            Mode::Semiparametric => {
                let (lo, hi) = SEMIPARAMETRIC_RANGE;
                ModelSpec::logit(LEVELS, self.covariates(), lo, hi)
                    .expect("valid range")
                    .with_linear(SEMIPARAMETRIC_BETA.len(), 0)
            }
        }
    }
}

/// Exact survival functions of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthOracle {
    pub family: Family,
    pub mode: Mode,
    /// Linear coefficients; empty in non-parametric mode.
    pub beta: Vec<f64>,
}

impl TruthOracle {
    pub fn new(family: Family, mode: Mode) -> Self {
        let beta = match mode {
            Mode::Nonparametric => Vec::new(),
            Mode::Semiparametric => SEMIPARAMETRIC_BETA.to_vec(),
        };
        Self { family, mode, beta }
    }

    pub fn levels(&self) -> usize {
        LEVELS
    }

    /// Non-parametric survival `S(k | x)` for `k = 1..=5`; only the first two
    /// covariates matter.
    pub fn shape(&self, x: &[f64]) -> [f64; LEVELS] {
        let (x1, x2) = (x[0], x[1]);
        let mut s = [1.0; LEVELS];
        match self.family {
            Family::Linear => {
                let t = (x1 + x2) / 2.0;
                for (k, (c, b)) in LINEAR.iter().enumerate() {
                    s[k + 1] = (c + b * t).clamp(0.0, 1.0);
                }
            }
            Family::Continuous => {
                let th = CONTINUOUS_THRESHOLD;
                let h = ((x1 - th).max(0.0) * (x2 - th).max(0.0)).sqrt() / (1.0 - th);
                for (k, (c, b)) in CONTINUOUS.iter().enumerate() {
                    s[k + 1] = (c + b * h).clamp(0.0, 1.0);
                }
            }
            Family::Discontinuous => {
                let step = |cond: bool| if cond { 1.0 } else { 0.0 };
                let s5 = 0.22 + 0.15 * step(x1 >= 0.5) + 0.15 * step(x2 >= 0.3);
                let s4 = s5 + 0.05 + 0.1 * step(x2 >= 0.6);
                let s3 = s4 + 0.05 + 0.1 * step(x1 >= 0.25 && x2 >= 0.25);
                let s2 = s3 + 0.05 + 0.1 * step(x1 >= 0.8);
                s[1..].copy_from_slice(&[s2, s3, s4, s5]);
            }
        }
        s
    }

    /// Regression levels `lambda_k(x)` on the model's scale.
    pub fn levels_at(&self, x: &[f64]) -> [f64; LEVELS] {
        let mut s = self.shape(x);
        if self.mode == Mode::Semiparametric {
            let (lo, hi) = SEMIPARAMETRIC_RANGE;
            for v in &mut s {
                *v = lo + (hi - lo) * *v;
            }
        }
        s
    }

    /// `S(k | x, z)` for `k = 1..=5`.
    pub fn survival(&self, x: &[f64], z: &[f64]) -> [f64; LEVELS] {
        match self.mode {
            Mode::Nonparametric => self.shape(x),
            Mode::Semiparametric => {
                let eta: f64 = self.beta.iter().zip(z).map(|(b, v)| b * v).sum();
                let lam = self.levels_at(x);
                let mut s = [1.0; LEVELS];
                for k in 1..LEVELS {
                    s[k] = expit(lam[k] + eta);
                }
                s
            }
        }
    }

    /// Table of category probabilities for every observation of `data`.
    pub fn table(&self, data: &Dataset) -> Vec<Vec<f64>> {
        (0..data.len()).map(|n| truth_probs(self, data.x(n), data.z(n)).to_vec()).collect()
    }
}

/// Exact category probabilities `S(k) - S(k+1)`.
pub fn truth_probs(oracle: &TruthOracle, x: &[f64], z: &[f64]) -> [f64; LEVELS] {
    let s = oracle.survival(x, z);
    let mut p = [0.0; LEVELS];
    for k in 0..LEVELS {
        let next = if k + 1 < LEVELS { s[k + 1] } else { 0.0 };
        p[k] = s[k] - next;
    }
    p
}

/// Draws a dataset from the scenario.
pub fn make_scenario(spec: &ScenarioSpec) -> Result<(Dataset, TruthOracle)> {
    if spec.n == 0 {
        return Err(Error::invalid("scenario size must be positive"));
    }
    let oracle = TruthOracle::new(spec.family, spec.mode);
    let p = spec.covariates();
    let q = oracle.beta.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut xs = Vec::with_capacity(spec.n);
    let mut zs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
        let z: Vec<f64> = (0..q).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let probs = truth_probs(&oracle, &x, &z);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut y = LEVELS;
        for (k, pk) in probs.iter().enumerate() {
            acc += pk;
            if u < acc {
                y = k + 1;
                break;
            }
        }
        xs.push(x);
        zs.push(z);
        ys.push(y);
    }
    let mut data = Dataset::new(LEVELS, xs, ys)?;
    if q > 0 {
        data = data.with_linear(zs)?;
    }
    Ok((data, oracle))
}
