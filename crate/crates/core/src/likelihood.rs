//! Ordinal likelihood under identity or logit link, with an incremental
//! per-observation cache.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpp::{weakly_below, Change, Configuration, Interval};

/// Observed data: monotone covariates in `[0,1]^p`, a category label in
/// `1..=K`, optional linear covariates and optional cluster membership.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    covariates: usize,
    levels: usize,
    x: Vec<f64>,
    y: Vec<usize>,
    linear: usize,
    z: Vec<f64>,
    clusters: Option<Vec<usize>>,
    cluster_count: usize,
}

impl Dataset {
    pub fn new(levels: usize, x: Vec<Vec<f64>>, y: Vec<usize>) -> Result<Self> {
        if levels < 2 {
            return Err(Error::Data("at least two categories are required".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Data(format!("{} covariate rows but {} responses", x.len(), y.len())));
        }
        let covariates = x.first().map_or(0, Vec::len);
        if covariates == 0 {
            return Err(Error::Data("no monotone covariates".into()));
        }
        let mut flat = Vec::with_capacity(x.len() * covariates);
        for (n, row) in x.iter().enumerate() {
            if row.len() != covariates {
                return Err(Error::Row { row: n + 1, message: format!("expected {covariates} covariates") });
            }
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Row { row: n + 1, message: format!("covariate value {v} outside [0,1]") });
                }
            }
            flat.extend_from_slice(row);
        }
        for (n, &label) in y.iter().enumerate() {
            if label == 0 || label > levels {
                return Err(Error::Row { row: n + 1, message: format!("response {label} outside 1..={levels}") });
            }
        }
        Ok(Self {
            covariates,
            levels,
            x: flat,
            y,
            linear: 0,
            z: Vec::new(),
            clusters: None,
            cluster_count: 0,
        })
    }

    /// A dataset without observations; the likelihood is identically one.
    pub fn empty(covariates: usize, levels: usize) -> Self {
        Self {
            covariates,
            levels,
            x: Vec::new(),
            y: Vec::new(),
            linear: 0,
            z: Vec::new(),
            clusters: None,
            cluster_count: 0,
        }
    }

    pub fn with_linear(mut self, z: Vec<Vec<f64>>) -> Result<Self> {
        if z.len() != self.len() {
            return Err(Error::Data(format!("{} linear covariate rows for {} observations", z.len(), self.len())));
        }
        let q = z.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(z.len() * q);
        for (n, row) in z.iter().enumerate() {
            if row.len() != q {
                return Err(Error::Row { row: n + 1, message: format!("expected {q} linear covariates") });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Row { row: n + 1, message: "non-finite linear covariate".into() });
            }
            flat.extend_from_slice(row);
        }
        self.linear = q;
        self.z = flat;
        Ok(self)
    }

    /// Attaches cluster ids, which must be contiguous from 1.
    pub fn with_clusters(mut self, ids: Vec<usize>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::Data(format!("{} cluster ids for {} observations", ids.len(), self.len())));
        }
        let count = ids.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; count];
        for (n, &c) in ids.iter().enumerate() {
            if c == 0 {
                return Err(Error::Row { row: n + 1, message: "cluster ids start at 1".into() });
            }
            seen[c - 1] = true;
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::Data(format!("cluster id {} has no observations", gap + 1)));
        }
        self.clusters = Some(ids.into_iter().map(|c| c - 1).collect());
        self.cluster_count = count;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn covariates(&self) -> usize {
        self.covariates
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn linear_covariates(&self) -> usize {
        self.linear
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn x(&self, n: usize) -> &[f64] {
        &self.x[n * self.covariates..(n + 1) * self.covariates]
    }

    pub fn y(&self, n: usize) -> usize {
        self.y[n]
    }

    pub fn responses(&self) -> &[usize] {
        &self.y
    }

    pub fn z(&self, n: usize) -> &[f64] {
        &self.z[n * self.linear..(n + 1) * self.linear]
    }

    /// 0-based cluster index of observation `n`.
    pub fn cluster(&self, n: usize) -> Option<usize> {
        self.clusters.as_ref().map(|c| c[n])
    }

    /// The first `n` observations.
    pub fn head(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::invalid(format!("cannot take {n} of {} observations", self.len())));
        }
        let mut out = self.clone();
        out.x.truncate(n * self.covariates);
        out.y.truncate(n);
        out.z.truncate(n * self.linear);
        if let Some(c) = out.clusters.as_mut() {
            c.truncate(n);
            out.cluster_count = c.iter().copied().max().map_or(0, |m| m + 1);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Identity,
    Logit,
}

/// Link function together with the range `A` of the regression levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub kind: LinkKind,
    pub range: Interval,
}

impl LinkSpec {
    pub fn identity() -> Self {
        Self { kind: LinkKind::Identity, range: Interval::unit() }
    }

    pub fn logit(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::invalid(format!("logit range [{lower}, {upper}] must satisfy lower < upper")));
        }
        Ok(Self { kind: LinkKind::Logit, range: Interval::new(lower, upper)? })
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            LinkKind::Identity if self.range != Interval::unit() => {
                Err(Error::invalid("identity link requires the level range [0,1]"))
            }
            LinkKind::Logit if !(self.range.lower < self.range.upper) => {
                Err(Error::invalid("logit link requires a non-degenerate range"))
            }
            _ => Ok(()),
        }
    }

    /// Survival probability for a level value and linear predictor offset.
    #[inline]
    pub fn survival(&self, lambda: f64, offset: f64) -> f64 {
        match self.kind {
            LinkKind::Identity => lambda + offset,
            LinkKind::Logit => expit(lambda + offset),
        }
    }
}

#[inline]
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Linear-predictor parameters of the semi-parametric model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricState {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub tau2: f64,
}

impl ParametricState {
    pub fn empty() -> Self {
        Self { beta: Vec::new(), gamma: Vec::new(), tau2: 1.0 }
    }

    pub fn zeros(linear: usize, clusters: usize) -> Self {
        Self { beta: vec![0.0; linear], gamma: vec![0.0; clusters], tau2: 1.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty() && self.gamma.is_empty()
    }

    /// `sum_j beta_j z_j + gamma_c`.
    #[inline]
    pub fn offset(&self, z: &[f64], cluster: Option<usize>) -> f64 {
        let mut eta = 0.0;
        for (b, v) in self.beta.iter().zip(z) {
            eta += b * v;
        }
        if let Some(c) = cluster {
            if let Some(g) = self.gamma.get(c) {
                eta += g;
            }
        }
        eta
    }
}

/// Log probability of category `y` given all `K` envelope levels.
///
/// Returns `-inf` when the category has zero probability.
#[inline]
pub fn log_category_prob(lambda: &[f64], y: usize, offset: f64, link: &LinkSpec) -> f64 {
    let k = lambda.len();
    let upper = (y > 1).then(|| lambda[y - 1]);
    let lower = (y < k).then(|| lambda[y]);
    match link.kind {
        LinkKind::Identity => {
            let d = upper.unwrap_or(1.0) - lower.unwrap_or(0.0);
            if d > 0.0 {
                d.ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        LinkKind::Logit => match (upper, lower) {
            (None, Some(b)) => -softplus(b + offset),
            (Some(a), None) => -softplus(-(a + offset)),
            (Some(a), Some(b)) => {
                if a <= b {
                    f64::NEG_INFINITY
                } else {
                    interval_log_prob(a + offset, b + offset)
                }
            }
            (None, None) => 0.0,
        },
    }
}

/// `log(expit(a) - expit(b))` for `a > b`.
#[inline]
fn interval_log_prob(a: f64, b: f64) -> f64 {
    if a > -600.0 && b < 600.0 {
        // expit(a) - expit(b) = (1 - e^(b-a)) / ((1 + e^-a)(1 + e^b))
        let ea = (-a).exp();
        let eb = b.exp();
        let gap = if a - b > 0.5 { 1.0 - ea * eb } else { -(b - a).exp_m1() };
        (gap / ((1.0 + ea) * (1.0 + eb))).ln()
    } else {
        -softplus(-a) - softplus(b) + (-(b - a).exp_m1()).ln()
    }
}

/// `S(level | x, z, c)`, with `S(1) = 1` and `S(K+1) = 0`.
pub fn survival(
    level: usize,
    x: &[f64],
    z: &[f64],
    cluster: Option<usize>,
    config: &Configuration,
    theta: &ParametricState,
    link: &LinkSpec,
) -> Result<f64> {
    let k = config.levels();
    if level == 0 || level > k + 1 {
        return Err(Error::invalid(format!("level {level} outside 1..={}", k + 1)));
    }
    if level == 1 {
        return Ok(1.0);
    }
    if level == k + 1 {
        return Ok(0.0);
    }
    let lambda = config.evaluate_lambda(x, level)?;
    Ok(link.survival(lambda, theta.offset(z, cluster)))
}

/// Category probabilities `S(k) - S(k+1)` from the envelope levels.
pub fn probs_from_lambda(lambda: &[f64], offset: f64, link: &LinkSpec, out: &mut [f64]) {
    let k = lambda.len();
    let mut prev = 1.0;
    for level in 1..=k {
        let next = if level < k { link.survival(lambda[level], offset) } else { 0.0 };
        out[level - 1] = prev - next;
        prev = next;
    }
}

pub fn category_probs(
    x: &[f64],
    z: &[f64],
    cluster: Option<usize>,
    config: &Configuration,
    theta: &ParametricState,
    link: &LinkSpec,
) -> Vec<f64> {
    let lambda = config.envelope(x);
    let mut out = vec![0.0; lambda.len()];
    probs_from_lambda(&lambda, theta.offset(z, cluster), link, &mut out);
    out
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Full log-likelihood by direct envelope evaluation at every observation.
pub fn log_likelihood(dataset: &Dataset, config: &Configuration, theta: &ParametricState, link: &LinkSpec) -> f64 {
    let mut lambda = vec![0.0; config.levels()];
    let mut infinite = false;
    let total = compensated_sum((0..dataset.len()).map(|n| {
        config.envelope_into(dataset.x(n), &mut lambda);
        let t = log_category_prob(&lambda, dataset.y(n), theta.offset(dataset.z(n), dataset.cluster(n)), link);
        if t == f64::NEG_INFINITY {
            infinite = true;
            0.0
        } else {
            t
        }
    }));
    if infinite {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// Which linear-predictor parameter a parametric edit touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamChange {
    Beta(usize),
    Gamma(usize),
}

const RESYNC_EVERY: usize = 4096;

#[derive(Debug, Default, Clone)]
struct Staged {
    obs: Vec<usize>,
    lambda: Vec<f64>,
    offset: Vec<f64>,
    term: Vec<f64>,
    delta: f64,
    infinite_delta: isize,
}

/// Per-observation envelope levels, linear predictor offsets and
/// log-likelihood terms, kept equal to a from-scratch evaluation.
///
/// Edits are evaluated in two phases: `stage_*` computes the proposed
/// log-likelihood for the already-edited configuration without touching the
/// cache, then [`SurvivalCache::commit`] or [`SurvivalCache::discard`].
#[derive(Debug, Clone)]
pub struct SurvivalCache {
    levels: usize,
    lambda: Vec<f64>,
    offset: Vec<f64>,
    term: Vec<f64>,
    /// Observation indices sorted by each covariate, with the sorted values.
    order: Vec<Vec<usize>>,
    sorted: Vec<Vec<f64>>,
    by_cluster: Vec<Vec<usize>>,
    sum: f64,
    infinite: usize,
    staged: Staged,
    commits: usize,
    scratch: Vec<f64>,
}

impl SurvivalCache {
    pub fn new(dataset: &Dataset, config: &Configuration, theta: &ParametricState, link: &LinkSpec) -> Result<Self> {
        if !dataset.is_empty() && dataset.covariates() != config.covariates() {
            return Err(Error::invalid("dataset and configuration covariate counts differ"));
        }
        if dataset.levels() != config.levels() {
            return Err(Error::invalid("dataset and configuration level counts differ"));
        }
        let n = dataset.len();
        let k = config.levels();
        let mut lambda = vec![0.0; n * k];
        let mut offset = vec![0.0; n];
        let mut term = vec![0.0; n];
        for i in 0..n {
            let lam = &mut lambda[i * k..(i + 1) * k];
            config.envelope_into(dataset.x(i), lam);
            offset[i] = theta.offset(dataset.z(i), dataset.cluster(i));
            term[i] = log_category_prob(lam, dataset.y(i), offset[i], link);
        }
        let p = if n == 0 { 0 } else { dataset.covariates() };
        let order: Vec<Vec<usize>> = (0..p)
            .map(|j| {
                let mut o: Vec<usize> = (0..n).collect();
                o.sort_by(|&a, &b| dataset.x(a)[j].total_cmp(&dataset.x(b)[j]).then(a.cmp(&b)));
                o
            })
            .collect();
        let sorted = order
            .iter()
            .enumerate()
            .map(|(j, o)| o.iter().map(|&i| dataset.x(i)[j]).collect())
            .collect();
        let mut by_cluster = vec![Vec::new(); dataset.cluster_count()];
        for i in 0..n {
            if let Some(c) = dataset.cluster(i) {
                by_cluster[c].push(i);
            }
        }
        let mut cache = Self {
            levels: k,
            lambda,
            offset,
            term,
            order,
            sorted,
            by_cluster,
            sum: 0.0,
            infinite: 0,
            staged: Staged::default(),
            commits: 0,
            scratch: vec![0.0; k],
        };
        cache.resync();
        Ok(cache)
    }

    fn resync(&mut self) {
        self.infinite = self.term.iter().filter(|t| **t == f64::NEG_INFINITY).count();
        self.sum = compensated_sum(self.term.iter().copied().filter(|t| t.is_finite()));
    }

    /// Current total log-likelihood (`-inf` if any observation has zero probability).
    pub fn log_likelihood(&self) -> f64 {
        if self.infinite > 0 {
            f64::NEG_INFINITY
        } else {
            self.sum
        }
    }

    /// Observations in the staged (pending) edit.
    pub fn touched(&self) -> usize {
        self.staged.obs.len()
    }

    pub fn lambda(&self, n: usize) -> &[f64] {
        &self.lambda[n * self.levels..(n + 1) * self.levels]
    }

    pub fn offset(&self, n: usize) -> f64 {
        self.offset[n]
    }

    /// Category probabilities of observation `n` under the cached state.
    pub fn probs_into(&self, n: usize, link: &LinkSpec, out: &mut [f64]) {
        probs_from_lambda(self.lambda(n), self.offset[n], link, out);
    }

    fn proposed_total(&self) -> f64 {
        if self.infinite as isize + self.staged.infinite_delta > 0 {
            f64::NEG_INFINITY
        } else {
            self.sum + self.staged.delta
        }
    }

    /// Stages new values for observation `n`; `lambda` is `None` when the
    /// envelope is unchanged.
    fn stage_obs(&mut self, n: usize, lambda: Option<&[f64]>, offset: f64, term: f64) {
        let old = self.term[n];
        let s = &mut self.staged;
        if old == f64::NEG_INFINITY {
            s.infinite_delta -= 1;
        } else {
            s.delta -= old;
        }
        if term == f64::NEG_INFINITY {
            s.infinite_delta += 1;
        } else {
            s.delta += term;
        }
        s.obs.push(n);
        if let Some(lambda) = lambda {
            s.lambda.extend_from_slice(lambda);
        }
        s.offset.push(offset);
        s.term.push(term);
    }

    fn clear_stage(&mut self) {
        let s = &mut self.staged;
        s.obs.clear();
        s.lambda.clear();
        s.offset.clear();
        s.term.clear();
        s.delta = 0.0;
        s.infinite_delta = 0;
    }

    /// Stages the effect of a structural edit already applied to `config`,
    /// returning the proposed log-likelihood. Only observations lying above a
    /// removed or added generator are visited.
    pub fn stage_change(&mut self, dataset: &Dataset, config: &Configuration, change: &Change, link: &LinkSpec) -> f64 {
        self.clear_stage();
        if change.is_empty() || dataset.is_empty() {
            return self.proposed_total();
        }
        let p = dataset.covariates();
        let mut corner = vec![f64::INFINITY; p];
        for g in change.removed.iter().chain(&change.added) {
            for (c, &v) in corner.iter_mut().zip(&g.location) {
                *c = c.min(v);
            }
        }
        // scan along the covariate that leaves the fewest candidates
        let (axis, start) = (0..p)
            .map(|j| (j, self.sorted[j].partition_point(|&v| v < corner[j])))
            .max_by_key(|&(j, start)| (start, std::cmp::Reverse(j)))
            .expect("at least one covariate");
        let order = std::mem::take(&mut self.order[axis]);
        let k = self.levels;
        let mut fresh = std::mem::take(&mut self.scratch);
        let mut added_max = vec![f64::NEG_INFINITY; k];
        for &n in &order[start..] {
            let x = dataset.x(n);
            if !weakly_below(&corner, x) {
                continue;
            }
            let old = &self.lambda[n * k..(n + 1) * k];
            let mut hit = false;
            added_max.fill(f64::NEG_INFINITY);
            for g in &change.added {
                if weakly_below(&g.location, x) {
                    hit = true;
                    for (a, &m) in added_max.iter_mut().zip(&g.marks) {
                        *a = a.max(m);
                    }
                }
            }
            // a removed generator only matters at levels where it attained the
            // envelope and no added generator below x reaches as high
            let mut full = false;
            for g in &change.removed {
                if weakly_below(&g.location, x) {
                    hit = true;
                    if (0..k).any(|l| g.marks[l] >= old[l] && added_max[l] < old[l]) {
                        full = true;
                        break;
                    }
                }
            }
            if !hit {
                continue;
            }
            if full {
                config.envelope_into(x, &mut fresh);
            } else {
                for l in 0..k {
                    fresh[l] = old[l].max(added_max[l]);
                }
            }
            if fresh.as_slice() == old {
                continue;
            }
            let term = log_category_prob(&fresh, dataset.y(n), self.offset[n], link);
            let offset = self.offset[n];
            self.stage_obs(n, Some(&fresh), offset, term);
        }
        self.order[axis] = order;
        self.scratch = fresh;
        self.proposed_total()
    }

    /// Stages a change of one linear-predictor parameter; `theta` holds the
    /// proposed values.
    pub fn stage_param(&mut self, dataset: &Dataset, theta: &ParametricState, change: ParamChange, link: &LinkSpec) -> f64 {
        self.clear_stage();
        let k = self.levels;
        let visit = |cache: &mut Self, n: usize| {
            let offset = theta.offset(dataset.z(n), dataset.cluster(n));
            if offset == cache.offset[n] {
                return;
            }
            let term = log_category_prob(&cache.lambda[n * k..(n + 1) * k], dataset.y(n), offset, link);
            cache.stage_obs(n, None, offset, term);
        };
        match change {
            ParamChange::Beta(j) => {
                for n in 0..dataset.len() {
                    if dataset.z(n)[j] != 0.0 {
                        visit(self, n);
                    }
                }
            }
            ParamChange::Gamma(c) => {
                let members = std::mem::take(&mut self.by_cluster[c]);
                for &n in &members {
                    visit(self, n);
                }
                self.by_cluster[c] = members;
            }
        }
        self.proposed_total()
    }

    pub fn commit(&mut self) {
        let k = self.levels;
        let staged = std::mem::take(&mut self.staged);
        let envelopes = !staged.lambda.is_empty();
        for (i, &n) in staged.obs.iter().enumerate() {
            if envelopes {
                self.lambda[n * k..(n + 1) * k].copy_from_slice(&staged.lambda[i * k..(i + 1) * k]);
            }
            self.offset[n] = staged.offset[i];
            self.term[n] = staged.term[i];
        }
        self.sum += staged.delta;
        self.infinite = (self.infinite as isize + staged.infinite_delta) as usize;
        self.staged = staged;
        self.clear_stage();
        self.commits += 1;
        if self.commits % RESYNC_EVERY == 0 {
            self.resync();
        }
    }

    pub fn discard(&mut self) {
        self.clear_stage();
    }

    /// Compares every cached quantity with a from-scratch evaluation.
    pub fn verify(&self, dataset: &Dataset, config: &Configuration, theta: &ParametricState, link: &LinkSpec, tol: f64) -> Result<()> {
        let k = self.levels;
        let mut lam = vec![0.0; k];
        for n in 0..dataset.len() {
            config.envelope_into(dataset.x(n), &mut lam);
            if lam.as_slice() != self.lambda(n) {
                return Err(Error::Invariant(format!("cached envelope differs at observation {n}")));
            }
            let off = theta.offset(dataset.z(n), dataset.cluster(n));
            if (off - self.offset[n]).abs() > tol {
                return Err(Error::Invariant(format!("cached offset differs at observation {n}")));
            }
        }
        let brute = log_likelihood(dataset, config, theta, link);
        let cached = self.log_likelihood();
        let same = (brute == cached) || (brute - cached).abs() <= tol;
        if !same {
            return Err(Error::Invariant(format!("cached log-likelihood {cached} vs recomputed {brute}")));
        }
        Ok(())
    }
}
