use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::record::SampleRecord;
use super::{ModelSpec, OriginInit, SamplerConfig};
use crate::error::{Error, Result};
use crate::likelihood::{Dataset, LinkKind, LinkSpec, ParamChange, ParametricState, SurvivalCache};
use crate::marks;
use crate::mpp::{Change, Configuration, Edit, PointRef, SupportPoint, Undo, CONSTRAINT_SLACK};

const TARGET_ACCEPTANCE: f64 = 0.44;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Birth,
    Death,
    DeathBirth,
    Position,
    JointLevel,
    SingleLevel,
    Origin,
    Beta,
    Gamma,
}

impl MoveKind {
    pub const ALL: [MoveKind; 9] = [
        MoveKind::Birth,
        MoveKind::Death,
        MoveKind::DeathBirth,
        MoveKind::Position,
        MoveKind::JointLevel,
        MoveKind::SingleLevel,
        MoveKind::Origin,
        MoveKind::Beta,
        MoveKind::Gamma,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MoveKind::Birth => "birth",
            MoveKind::Death => "death",
            MoveKind::DeathBirth => "death_birth",
            MoveKind::Position => "position",
            MoveKind::JointLevel => "joint_level",
            MoveKind::SingleLevel => "single_level",
            MoveKind::Origin => "origin",
            MoveKind::Beta => "beta",
            MoveKind::Gamma => "gamma",
        };
        f.write_str(name)
    }
}

/// Attempt and acceptance counters per move type.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveStats {
    attempts: [u64; 9],
    accepts: [u64; 9],
}

impl MoveStats {
    fn record(&mut self, kind: MoveKind, accepted: bool) {
        self.attempts[kind.index()] += 1;
        if accepted {
            self.accepts[kind.index()] += 1;
        }
    }

    pub fn attempts(&self, kind: MoveKind) -> u64 {
        self.attempts[kind.index()]
    }

    pub fn accepts(&self, kind: MoveKind) -> u64 {
        self.accepts[kind.index()]
    }

    pub fn rejects(&self, kind: MoveKind) -> u64 {
        self.attempts(kind) - self.accepts(kind)
    }

    pub fn acceptance_rate(&self, kind: MoveKind) -> Option<f64> {
        let n = self.attempts(kind);
        (n > 0).then(|| self.accepts(kind) as f64 / n as f64)
    }
}

/// Snapshot handed to progress callbacks.
#[derive(Clone, Debug)]
pub struct Progress {
    pub iteration: usize,
    pub total_iterations: usize,
    pub log_likelihood: f64,
    pub total_points: usize,
    pub stats: MoveStats,
}

/// `min(1, exp(log_lik_ratio + log_prior_ratio))`.
pub fn acceptance_probability(log_lik_ratio: f64, log_prior_ratio: f64) -> f64 {
    let a = log_lik_ratio + log_prior_ratio;
    if a.is_nan() {
        0.0
    } else {
        a.min(0.0).exp()
    }
}

/// Log of the prior-proposal factor for a birth in a subspace of volume
/// `volume` currently holding `count` points.
pub fn birth_log_ratio(intensity: f64, volume: f64, count: usize) -> f64 {
    (intensity * volume).ln() - ((count + 1) as f64).ln()
}

pub fn death_log_ratio(intensity: f64, volume: f64, count: usize) -> f64 {
    (count as f64).ln() - (intensity * volume).ln()
}

/// Death in subspace `i` combined with a birth in a different subspace `j`.
pub fn death_birth_log_ratio(
    death_intensity: f64,
    death_volume: f64,
    death_count: usize,
    birth_intensity: f64,
    birth_volume: f64,
    birth_count: usize,
) -> f64 {
    (birth_intensity * birth_volume).ln() + (death_count as f64).ln()
        - (death_intensity * death_volume).ln()
        - ((birth_count + 1) as f64).ln()
}

/// State of one reversible-jump chain over a fixed dataset.
pub struct Chain<'a> {
    data: &'a Dataset,
    spec: ModelSpec,
    link: LinkSpec,
    settings: SamplerConfig,
    chain_id: u64,
    rng: ChaCha8Rng,
    config: Configuration,
    theta: ParametricState,
    cache: SurvivalCache,
    iteration: usize,
    stats: MoveStats,
    beta_log_scale: Vec<f64>,
    gamma_log_scale: f64,
    progress: Option<(usize, Box<dyn FnMut(&Progress) + Send + 'a>)>,
}

impl<'a> Chain<'a> {
    /// Starts a chain from the empty configuration. `chain_id` selects an
    /// independent stream of the generator seeded by `settings.seed`.
    pub fn new(data: &'a Dataset, spec: ModelSpec, settings: SamplerConfig, chain_id: u64) -> Result<Self> {
        spec.check_dataset(data)?;
        settings.validate()?;
        for loc in &settings.record_grid {
            if loc.len() != spec.covariates {
                return Err(Error::invalid("record grid locations must have one value per covariate"));
            }
        }
        let link = spec.link_spec();
        let origin = initial_origin(data, &spec, settings.origin_init);
        let mut config = Configuration::new(spec.covariates, spec.levels, spec.range, spec.pins_top(), origin)?;
        let prior_mean = settings.a / settings.b;
        for slot in 0..config.subspaces().len() {
            config.set_intensity(slot, prior_mean);
        }
        let theta = if spec.linear_covariates > 0 || spec.clusters > 0 {
            ParametricState::zeros(spec.linear_covariates, spec.clusters)
        } else {
            ParametricState::empty()
        };
        let cache = SurvivalCache::new(data, &config, &theta, &link)?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(chain_id);
        Ok(Self {
            data,
            link,
            beta_log_scale: vec![settings.beta_scale.ln(); spec.linear_covariates],
            gamma_log_scale: settings.gamma_scale.ln(),
            spec,
            settings,
            chain_id,
            rng,
            config,
            theta,
            cache,
            iteration: 0,
            stats: MoveStats::default(),
            progress: None,
        })
    }

    /// Replaces the current state, e.g. to start from a given configuration.
    pub fn set_state(&mut self, config: Configuration, theta: ParametricState) -> Result<()> {
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(Error::Invariant(format!("initial configuration invalid: {}", violations[0])));
        }
        if config.covariates() != self.spec.covariates || config.levels() != self.spec.levels {
            return Err(Error::invalid("configuration does not match the model"));
        }
        self.cache = SurvivalCache::new(self.data, &config, &theta, &self.link)?;
        self.config = config;
        self.theta = theta;
        Ok(())
    }

    /// Calls `f` every `every` iterations.
    pub fn set_progress(&mut self, every: usize, f: impl FnMut(&Progress) + Send + 'a) {
        self.progress = Some((every.max(1), Box::new(f)));
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn theta(&self) -> &ParametricState {
        &self.theta
    }

    pub fn cache(&self) -> &SurvivalCache {
        &self.cache
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    pub fn link(&self) -> &LinkSpec {
        &self.link
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn log_likelihood(&self) -> f64 {
        self.cache.log_likelihood()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn stats(&self) -> &MoveStats {
        &self.stats
    }

    pub fn chain_id(&self) -> u64 {
        self.chain_id
    }

    fn in_burn_in(&self) -> bool {
        self.iteration < self.settings.burn_in
    }

    fn accept(&mut self, current: f64, proposed: f64, log_prior_ratio: f64) -> bool {
        if proposed == f64::NEG_INFINITY || proposed.is_nan() {
            return false;
        }
        if current == f64::NEG_INFINITY {
            return true;
        }
        let log_alpha = proposed - current + log_prior_ratio;
        log_alpha >= 0.0 || self.rng.random::<f64>().ln() < log_alpha
    }

    /// Finishes a structural move whose edits are already applied.
    fn settle(&mut self, kind: MoveKind, change: Change, undo: Vec<Undo>, log_prior_ratio: f64) -> bool {
        let current = self.cache.log_likelihood();
        let proposed = self.cache.stage_change(self.data, &self.config, &change, &self.link);
        let accepted = self.accept(current, proposed, log_prior_ratio);
        if accepted {
            self.cache.commit();
        } else {
            self.cache.discard();
            for u in undo.into_iter().rev() {
                self.config.undo(u);
            }
        }
        self.stats.record(kind, accepted);
        accepted
    }

    fn reject(&mut self, kind: MoveKind) -> bool {
        self.stats.record(kind, false);
        false
    }

    fn random_location(&mut self, slot: usize) -> Vec<f64> {
        let id = self.config.subspaces()[slot];
        (0..self.spec.covariates)
            .map(|j| if id.contains(j) { self.rng.random::<f64>() } else { 0.0 })
            .collect()
    }

    fn draw_marks(&mut self, lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
        marks::sample_ordered(lo, hi, &mut self.rng)
            .map(|d| d.marks)
            .map_err(|e| Error::Invariant(format!("mark constraints at iteration {}: {e}", self.iteration)))
    }

    /// New point in a uniformly chosen subspace, uniform location, marks from
    /// their conditional prior.
    pub fn birth_move(&mut self) -> Result<bool> {
        let slot = self.rng.random_range(0..self.config.subspaces().len());
        let id = self.config.subspaces()[slot];
        let location = self.random_location(slot);
        let (lo, hi) = self.config.mark_box(PointRef::Proposed(&location))?;
        let marks = self.draw_marks(&lo, &hi)?;
        let ratio = birth_log_ratio(self.config.intensities()[slot], id.volume(), self.config.counts()[slot]);
        let (change, undo) = self.config.apply(Edit::Birth(SupportPoint { subspace: id, location, marks }))?;
        Ok(self.settle(MoveKind::Birth, change, vec![undo], ratio))
    }

    /// Removes a uniformly chosen point of a uniformly chosen subspace.
    pub fn death_move(&mut self) -> Result<bool> {
        let slot = self.rng.random_range(0..self.config.subspaces().len());
        let count = self.config.counts()[slot];
        if count == 0 {
            return Ok(self.reject(MoveKind::Death));
        }
        let rank = self.rng.random_range(0..count);
        let victim = self.config.nth_point_in(slot, rank).expect("count is positive");
        let id = self.config.subspaces()[slot];
        let ratio = death_log_ratio(self.config.intensities()[slot], id.volume(), count);
        let (change, undo) = self.config.apply(Edit::Death(victim))?;
        Ok(self.settle(MoveKind::Death, change, vec![undo], ratio))
    }

    /// Death in one subspace and birth in a different one, accepted jointly.
    pub fn death_birth_move(&mut self) -> Result<bool> {
        let s = self.config.subspaces().len();
        if s < 2 {
            return Ok(self.reject(MoveKind::DeathBirth));
        }
        let from = self.rng.random_range(0..s);
        let mut to = self.rng.random_range(0..s - 1);
        if to >= from {
            to += 1;
        }
        let from_count = self.config.counts()[from];
        if from_count == 0 {
            return Ok(self.reject(MoveKind::DeathBirth));
        }
        let rank = self.rng.random_range(0..from_count);
        let victim = self.config.nth_point_in(from, rank).expect("count is positive");
        let (from_id, to_id) = (self.config.subspaces()[from], self.config.subspaces()[to]);
        let ratio = death_birth_log_ratio(
            self.config.intensities()[from],
            from_id.volume(),
            from_count,
            self.config.intensities()[to],
            to_id.volume(),
            self.config.counts()[to],
        );
        let (death, undo_death) = self.config.apply(Edit::Death(victim))?;
        let location = self.random_location(to);
        let (lo, hi) = match self.config.mark_box(PointRef::Proposed(&location)) {
            Ok(b) => b,
            Err(e) => {
                self.config.undo(undo_death);
                return Err(e);
            }
        };
        let marks = match self.draw_marks(&lo, &hi) {
            Ok(m) => m,
            Err(e) => {
                self.config.undo(undo_death);
                return Err(e);
            }
        };
        let (birth, undo_birth) = self.config.apply(Edit::Birth(SupportPoint { subspace: to_id, location, marks }))?;
        let change = Change { removed: death.removed, added: birth.added };
        Ok(self.settle(MoveKind::DeathBirth, change, vec![undo_death, undo_birth], ratio))
    }

    /// Moves a point within the box between its nearest neighbours.
    pub fn position_move(&mut self) -> Result<bool> {
        let m = self.config.total_points();
        if m == 0 {
            return Ok(self.reject(MoveKind::Position));
        }
        let index = self.rng.random_range(0..m);
        let bounds = self.config.position_bounds(index)?;
        let location: Vec<f64> = bounds
            .iter()
            .map(|b| if b.width() > 0.0 { b.lower + b.width() * self.rng.random::<f64>() } else { b.lower })
            .collect();
        // Landing exactly on a neighbour's coordinate can create a new
        // domination relation; such proposals have zero prior density.
        let (lo, hi) = self.config.mark_box_moved(index, &location)?;
        let marks = &self.config.points()[index].marks;
        let admissible = marks
            .iter()
            .zip(lo.iter().zip(&hi))
            .all(|(&m, (&l, &h))| m >= l - CONSTRAINT_SLACK && m <= h + CONSTRAINT_SLACK);
        if !admissible {
            return Ok(self.reject(MoveKind::Position));
        }
        let (change, undo) = self.config.apply(Edit::Move { index, location })?;
        Ok(self.settle(MoveKind::Position, change, vec![undo], 0.0))
    }

    /// Redraws the full mark vector of one point from its conditional prior.
    pub fn joint_level_move(&mut self) -> Result<bool> {
        let m = self.config.total_points();
        if m == 0 {
            return Ok(self.reject(MoveKind::JointLevel));
        }
        let index = self.rng.random_range(0..m);
        let (lo, hi) = self.config.mark_box(PointRef::Existing(index))?;
        let marks = self.draw_marks(&lo, &hi)?;
        let (change, undo) = self.config.apply(Edit::Marks { index, marks })?;
        Ok(self.settle(MoveKind::JointLevel, change, vec![undo], 0.0))
    }

    /// Redraws one free level of one point uniformly on its admissible interval.
    pub fn single_level_move(&mut self) -> Result<bool> {
        let m = self.config.total_points();
        if m == 0 {
            return Ok(self.reject(MoveKind::SingleLevel));
        }
        let index = self.rng.random_range(0..m);
        let free = self.config.free_levels();
        let level = self.rng.random_range(free);
        let b = self.config.level_bounds(PointRef::Existing(index), level, true)?;
        let value = if b.width() > 0.0 { b.lower + b.width() * self.rng.random::<f64>() } else { b.lower };
        let mut marks = self.config.points()[index].marks.clone();
        marks[level - 1] = value;
        let (change, undo) = self.config.apply(Edit::Marks { index, marks })?;
        Ok(self.settle(MoveKind::SingleLevel, change, vec![undo], 0.0))
    }

    /// Updates one origin level from its conditional prior: a Beta(1 +
    /// min(total points, d), 1) law scaled to the admissible interval.
    pub fn origin_level_move(&mut self) -> Result<bool> {
        let k = self.spec.levels;
        // level 1 is only free (and then uniform) under a link
        let level = if self.spec.pins_top() {
            self.rng.random_range(2..=k)
        } else {
            self.rng.random_range(1..=k)
        };
        let b = self.config.level_bounds(PointRef::Origin, level, true)?;
        let shape = if level >= 2 {
            1.0 + (self.config.total_points() as f64).min(self.settings.d)
        } else {
            1.0
        };
        let u: f64 = self.rng.random();
        let value = b.lower + b.width() * u.powf(1.0 / shape);
        let mut marks = self.config.origin().marks.clone();
        marks[level - 1] = value.clamp(b.lower, b.upper);
        let (change, undo) = self.config.apply(Edit::OriginMarks(marks))?;
        Ok(self.settle(MoveKind::Origin, change, vec![undo], 0.0))
    }

    /// Conjugate refresh `rho_i ~ Gamma(a + n_i, b + |X_i|)` (rate form).
    pub fn gibbs_intensity(&mut self) -> Result<()> {
        for slot in 0..self.config.subspaces().len() {
            let shape = self.settings.a + self.config.counts()[slot] as f64;
            let rate = self.settings.b + self.config.subspaces()[slot].volume();
            let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Invariant(e.to_string()))?;
            let value = g.sample(&mut self.rng).max(f64::MIN_POSITIVE);
            self.config.set_intensity(slot, value);
        }
        Ok(())
    }

    fn adapt(&mut self, kind: MoveKind, index: usize, accepted: bool) {
        if !(self.settings.adapt && self.in_burn_in()) {
            return;
        }
        let t = self.stats.attempts(kind) as f64;
        let step = (t + 1.0).powf(-0.6);
        let delta = step * (if accepted { 1.0 } else { 0.0 } - TARGET_ACCEPTANCE);
        match kind {
            MoveKind::Beta => self.beta_log_scale[index] = (self.beta_log_scale[index] + delta).clamp(-12.0, 3.0),
            _ => self.gamma_log_scale = (self.gamma_log_scale + delta).clamp(-12.0, 3.0),
        }
    }

    /// One sweep over the linear coefficients, the random intercepts and
    /// their variance.
    pub fn update_parametric(&mut self) -> Result<()> {
        if self.theta.is_empty() {
            return Ok(());
        }
        for j in 0..self.theta.beta.len() {
            let old = self.theta.beta[j];
            let step: f64 = self.rng.sample(StandardNormal);
            let new = old + self.beta_log_scale[j].exp() * step;
            let prior = match self.settings.beta_prior_sd {
                Some(sd) => -(new * new - old * old) / (2.0 * sd * sd),
                None => 0.0,
            };
            self.theta.beta[j] = new;
            let accepted = self.param_step(ParamChange::Beta(j), prior);
            if !accepted {
                self.theta.beta[j] = old;
            }
            self.stats.record(MoveKind::Beta, accepted);
            self.adapt(MoveKind::Beta, j, accepted);
        }
        for c in 0..self.theta.gamma.len() {
            let old = self.theta.gamma[c];
            let step: f64 = self.rng.sample(StandardNormal);
            let new = old + self.gamma_log_scale.exp() * step;
            let prior = -(new * new - old * old) / (2.0 * self.theta.tau2);
            self.theta.gamma[c] = new;
            let accepted = self.param_step(ParamChange::Gamma(c), prior);
            if !accepted {
                self.theta.gamma[c] = old;
            }
            self.stats.record(MoveKind::Gamma, accepted);
            self.adapt(MoveKind::Gamma, c, accepted);
        }
        if !self.theta.gamma.is_empty() {
            let shape = self.settings.tau2_shape + self.theta.gamma.len() as f64 / 2.0;
            let rate = self.settings.tau2_rate + self.theta.gamma.iter().map(|g| g * g).sum::<f64>() / 2.0;
            let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Invariant(e.to_string()))?;
            self.theta.tau2 = 1.0 / g.sample(&mut self.rng).max(f64::MIN_POSITIVE);
        }
        Ok(())
    }

    fn param_step(&mut self, change: ParamChange, log_prior_ratio: f64) -> bool {
        let current = self.cache.log_likelihood();
        let proposed = self.cache.stage_param(self.data, &self.theta, change, &self.link);
        let accepted = self.accept(current, proposed, log_prior_ratio);
        if accepted {
            self.cache.commit();
        } else {
            self.cache.discard();
        }
        accepted
    }

    fn pick(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.rng.random::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return i;
            }
            u -= w;
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    /// One full iteration of the schedule.
    pub fn step(&mut self) -> Result<()> {
        let dw = &self.settings.dimension_weights;
        let dims = [dw.birth, dw.death, dw.death_birth];
        match self.pick(&dims) {
            0 => self.birth_move()?,
            1 => self.death_move()?,
            _ => self.death_birth_move()?,
        };
        let mw = &self.settings.move_weights;
        let fixed = [mw.position, mw.joint_level, mw.single_level, mw.origin];
        match self.pick(&fixed) {
            0 => self.position_move()?,
            1 => self.joint_level_move()?,
            2 => self.single_level_move()?,
            _ => self.origin_level_move()?,
        };
        self.gibbs_intensity()?;
        self.update_parametric()?;
        self.iteration += 1;
        Ok(())
    }

    /// Snapshot of the current state.
    pub fn record(&self) -> SampleRecord {
        let grid_survival = if self.settings.record_grid.is_empty() {
            Vec::new()
        } else {
            let mut out = Vec::with_capacity(self.settings.record_grid.len() * (self.spec.levels - 1));
            let mut lam = vec![0.0; self.spec.levels];
            for loc in &self.settings.record_grid {
                self.config.envelope_into(loc, &mut lam);
                out.extend(lam[1..].iter().map(|&l| self.link.survival(l, 0.0)));
            }
            out
        };
        SampleRecord {
            chain: self.chain_id,
            iteration: self.iteration,
            log_likelihood: self.cache.log_likelihood(),
            counts: self.config.counts().to_vec(),
            intensities: self.config.intensities().to_vec(),
            theta: (!self.theta.is_empty()).then(|| self.theta.clone()),
            origin: self.config.origin().marks.clone(),
            points: self.config.points().to_vec(),
            grid_survival,
        }
    }

    /// Runs burn-in plus `iterations` more iterations, passing every
    /// `thin`-th post-burn-in state to `sink`.
    pub fn run<F>(&mut self, mut sink: F) -> Result<()>
    where
        F: FnMut(&Chain<'a>, SampleRecord) -> Result<()>,
    {
        let burn_in = self.settings.burn_in;
        let total = burn_in + self.settings.iterations;
        let thin = self.settings.thin;
        while self.iteration < total {
            self.step()?;
            let t = self.iteration;
            if t > burn_in && (t - burn_in) % thin == 0 {
                let record = self.record();
                sink(self, record)?;
            }
            if let Some((every, mut f)) = self.progress.take() {
                if t % every == 0 || t == total {
                    f(&Progress {
                        iteration: t,
                        total_iterations: total,
                        log_likelihood: self.cache.log_likelihood(),
                        total_points: self.config.total_points(),
                        stats: self.stats.clone(),
                    });
                }
                self.progress = Some((every, f));
            }
        }
        Ok(())
    }
}

/// Origin marks for a fresh chain.
fn initial_origin(data: &Dataset, spec: &ModelSpec, init: OriginInit) -> Vec<f64> {
    let range = spec.range;
    let k = spec.levels;
    let even = Configuration::evenly_spaced_marks(k, range);
    if data.is_empty() || init == OriginInit::Even {
        return even;
    }
    let n = data.len() as f64;
    let mut at_least = vec![0usize; k + 1];
    for &y in data.responses() {
        at_least[y] += 1;
    }
    for level in (1..k).rev() {
        at_least[level] += at_least[level + 1];
    }
    let mut marks = Vec::with_capacity(k);
    marks.push(range.upper);
    // keep the start strictly inside the range so every category has mass
    let eps = 1e-3;
    for level in 2..=k {
        let frac = (at_least[level] as f64 / n).clamp(eps, 1.0 - eps);
        let v = match spec.link {
            LinkKind::Identity => frac,
            LinkKind::Logit => (frac / (1.0 - frac)).ln(),
        };
        let prev: f64 = marks[level - 2];
        marks.push(v.clamp(range.lower, range.upper).min(prev));
    }
    marks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_formula_examples() {
        // birth: L*/L = 0.5, rho = 2, |X| = 1, n = 3
        let p = acceptance_probability(0.5f64.ln(), birth_log_ratio(2.0, 1.0, 3));
        assert!((p - 0.25).abs() < 1e-12);
        let p = acceptance_probability(2f64.ln(), birth_log_ratio(1.0, 1.0, 0));
        assert_eq!(p, 1.0);
        // death
        let p = acceptance_probability(0.0, death_log_ratio(2.0, 1.0, 4));
        assert_eq!(p, 1.0);
        let p = acceptance_probability(0.1f64.ln(), death_log_ratio(1.0, 1.0, 1));
        assert!((p - 0.1).abs() < 1e-12);
        // death-birth
        let p = acceptance_probability(0.0, death_birth_log_ratio(2.0, 1.0, 2, 0.5, 1.0, 0));
        assert!((p - 0.5).abs() < 1e-12);
        let p = acceptance_probability(0.0, death_birth_log_ratio(1.3, 1.0, 3, 1.3, 1.0, 2));
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(acceptance_probability(f64::NEG_INFINITY, 0.0), 0.0);
    }

    #[test]
    fn empirical_origin_is_ordered_and_inside_range() {
        let x = vec![vec![0.5]; 6];
        let data = Dataset::new(4, x, vec![1, 1, 2, 4, 4, 4]).unwrap();
        let spec = ModelSpec::nonparametric(4, 1);
        let o = initial_origin(&data, &spec, OriginInit::Empirical);
        assert_eq!(o[0], 1.0);
        assert!((o[1] - 4.0 / 6.0).abs() < 1e-12);
        assert!((o[2] - 0.5).abs() < 1e-12);
        assert!((o[3] - 0.5).abs() < 1e-12);
        let spec = ModelSpec::logit(4, 1, -2.0, 2.0).unwrap();
        let o = initial_origin(&data, &spec, OriginInit::Empirical);
        assert!(o.windows(2).all(|w| w[0] >= w[1]));
        assert!(o.iter().all(|v| (-2.0..=2.0).contains(v)));
    }
}
