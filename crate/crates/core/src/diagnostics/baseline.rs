use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{compensated_sum, log_category_prob, Dataset, LinkSpec};

/// Any coefficient beyond this magnitude on the logit scale is treated as a
/// run-away direction of the likelihood.
pub const DIVERGENCE_BOUND: f64 = 50.0;

/// Schedule for the proportional-odds random-walk sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub scale: f64,
    pub adapt: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { iterations: 50_000, burn_in: 10_000, thin: 20, seed: 1, scale: 0.1, adapt: true }
    }
}

/// `logit S(k | x) = alpha_k + beta' x`; `alpha[0]` is `alpha_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineState {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl BaselineState {
    pub fn is_ordered(&self) -> bool {
        self.alpha.windows(2).all(|w| w[0] > w[1])
    }

    fn to_vec(&self) -> Vec<f64> {
        self.alpha.iter().chain(&self.beta).copied().collect()
    }

    fn from_vec(v: &[f64], alphas: usize) -> Self {
        Self { alpha: v[..alphas].to_vec(), beta: v[alphas..].to_vec() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaselineFit {
    /// Thinned post-burn-in states.
    pub states: Vec<BaselineState>,
    pub log_likelihood: Vec<f64>,
    /// Acceptance rate per coordinate, alphas first.
    pub acceptance: Vec<f64>,
    /// Posterior mode under flat priors, i.e. the maximum-likelihood point.
    pub mode: BaselineState,
    pub mode_log_likelihood: f64,
    /// Set when a coefficient left `[-DIVERGENCE_BOUND, DIVERGENCE_BOUND]`.
    pub diverged: bool,
}

fn design_row(data: &Dataset, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(data.x(n));
    out.extend_from_slice(data.z(n));
}

/// Proportional-odds log-likelihood; monotone and linear covariates both
/// enter the linear predictor. Returns `-inf` for unordered intercepts.
pub fn po_log_likelihood(data: &Dataset, state: &BaselineState) -> f64 {
    if !state.is_ordered() {
        return f64::NEG_INFINITY;
    }
    let link = LinkSpec { kind: crate::likelihood::LinkKind::Logit, range: crate::mpp::Interval::unit() };
    let mut lambda = Vec::with_capacity(state.alpha.len() + 1);
    lambda.push(f64::INFINITY);
    lambda.extend_from_slice(&state.alpha);
    let mut row = Vec::new();
    compensated_sum((0..data.len()).map(|n| {
        design_row(data, n, &mut row);
        let eta: f64 = row.iter().zip(&state.beta).map(|(a, b)| a * b).sum();
        log_category_prob(&lambda, data.y(n), eta, &link)
    }))
}

fn check_identifiable(data: &Dataset) -> Result<()> {
    let k = data.levels();
    let ys = data.responses();
    let lo = ys.iter().copied().min();
    let hi = ys.iter().copied().max();
    match (lo, hi) {
        (None, _) | (_, None) => Err(Error::Data("baseline needs observations".into())),
        (Some(a), Some(b)) if a == b => Err(Error::Data(format!(
            "all responses equal {a}: the proportional-odds likelihood increases without bound"
        ))),
        (Some(a), Some(b)) if a != 1 || b != k => Err(Error::Data(format!(
            "categories 1 and {k} must both be observed (found {a}..{b}); an extreme intercept is unbounded"
        ))),
        _ => Ok(()),
    }
}

fn initial_state(data: &Dataset, covariates: usize) -> BaselineState {
    let k = data.levels();
    let n = data.len() as f64;
    let mut at_least = vec![0usize; k + 2];
    for &y in data.responses() {
        at_least[y] += 1;
    }
    for level in (1..=k).rev() {
        at_least[level] += at_least[level + 1];
    }
    let mut alpha: Vec<f64> = (2..=k)
        .map(|level| {
            let f = ((at_least[level] as f64 + 0.5) / (n + 1.0)).clamp(1e-6, 1.0 - 1e-6);
            (f / (1.0 - f)).ln()
        })
        .collect();
    for i in 1..alpha.len() {
        if alpha[i] >= alpha[i - 1] {
            alpha[i] = alpha[i - 1] - 1e-3;
        }
    }
    BaselineState { alpha, beta: vec![0.0; covariates] }
}

/// Pattern search from `start`, keeping the intercepts ordered.
fn refine_mode(data: &Dataset, start: &BaselineState) -> (BaselineState, f64) {
    let alphas = start.alpha.len();
    let eval = |v: &[f64]| po_log_likelihood(data, &BaselineState::from_vec(v, alphas));
    let mut x = start.to_vec();
    let mut fx = eval(&x);
    let mut step = 0.25;
    while step > 1e-8 {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step;
                let fy = eval(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (BaselineState::from_vec(&x, alphas), fx)
}

/// Random-walk Metropolis over `(alpha, beta)` with flat priors. Proposals
/// that break the intercept ordering are rejected.
pub fn fit_po_baseline(data: &Dataset, config: &BaselineConfig) -> Result<BaselineFit> {
    if config.thin == 0 || !(config.scale > 0.0) {
        return Err(Error::invalid("baseline thin and scale must be positive"));
    }
    check_identifiable(data)?;
    let covariates = data.covariates() + data.linear_covariates();
    let mut state = initial_state(data, covariates);
    let alphas = state.alpha.len();
    let dim = alphas + covariates;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log_scale = vec![config.scale.ln(); dim];
    let mut attempts = vec![0u64; dim];
    let mut accepts = vec![0u64; dim];
    let mut current = po_log_likelihood(data, &state);
    let mut best = (state.clone(), current);
    let mut diverged = false;
    let mut states = Vec::new();
    let mut trace = Vec::new();
    let total = config.burn_in + config.iterations;
    for t in 1..=total {
        for i in 0..dim {
            let step: f64 = rng.sample(StandardNormal);
            let delta = log_scale[i].exp() * step;
            let mut proposal = state.clone();
            if i < alphas {
                proposal.alpha[i] += delta;
            } else {
                proposal.beta[i - alphas] += delta;
            }
            let proposed = po_log_likelihood(data, &proposal);
            let log_alpha = proposed - current;
            let accepted = proposed > f64::NEG_INFINITY && (log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha);
            attempts[i] += 1;
            if accepted {
                accepts[i] += 1;
                state = proposal;
                current = proposed;
                if current > best.1 {
                    best = (state.clone(), current);
                }
            }
            if config.adapt && t <= config.burn_in {
                let gain = (attempts[i] as f64 + 1.0).powf(-0.6);
                let hit = if accepted { 1.0 } else { 0.0 };
                log_scale[i] = (log_scale[i] + gain * (hit - 0.44)).clamp(-12.0, 3.0);
            }
        }
        if state.to_vec().iter().any(|v| v.abs() > DIVERGENCE_BOUND) {
            diverged = true;
        }
        if t > config.burn_in && (t - config.burn_in) % config.thin == 0 {
            states.push(state.clone());
            trace.push(current);
        }
    }
    let (mode, mode_log_likelihood) = refine_mode(data, &best.0);
    if mode.to_vec().iter().any(|v| v.abs() > DIVERGENCE_BOUND) {
        diverged = true;
    }
    let acceptance = attempts.iter().zip(&accepts).map(|(&a, &b)| b as f64 / a.max(1) as f64).collect();
    Ok(BaselineFit { states, log_likelihood: trace, acceptance, mode, mode_log_likelihood, diverged })
}
