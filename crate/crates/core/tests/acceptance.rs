//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits non-zero when any criterion fails. Pass criterion names
//! as arguments to run a subset.

use std::process::ExitCode;
use std::time::Instant;

use monord_core::diagnostics::{
    fit_po_baseline, inclusion_probability, mean_point_count, BaselineConfig, MaeAccumulator,
};
use monord_core::io::{RunManifest, SampleWriter, StreamHeader};
use monord_core::likelihood::{log_likelihood, Dataset};
use monord_core::mpp::{Configuration, Interval, SubspaceId, SupportPoint};
use monord_core::sampler::{Chain, SampleRecord};
use monord_core::simgen::{make_scenario, Family, ScenarioSpec, SEMIPARAMETRIC_BETA};
use monord_core::{ModelSpec, ParametricState, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    ("prior_recovery", prior_recovery),
    ("likelihood_oracle", likelihood_oracle),
    ("structural_invariants", structural_invariants),
    ("gibbs_conjugacy", gibbs_conjugacy),
    ("sample_size_trend", sample_size_trend),
    ("semiparametric_coverage", semiparametric_coverage),
    ("covariate_selection", covariate_selection),
    ("spiking_prior", spiking_prior),
    ("baseline_mode", baseline_mode),
    ("determinism", determinism),
];

fn main() -> ExitCode {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in CRITERIA {
        if !wanted.is_empty() && !wanted.iter().any(|w| name.contains(w.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} [{:.1}s]", outcome.detail, start.elapsed().as_secs_f64());
        ran += 1;
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run_chain<F>(data: &Dataset, spec: &ModelSpec, settings: SamplerConfig, mut sink: F)
where
    F: FnMut(&Chain<'_>, SampleRecord),
{
    let mut chain = Chain::new(data, spec.clone(), settings, 0).expect("chain");
    chain
        .run(|c, r| {
            sink(c, r);
            Ok(())
        })
        .expect("run");
}

fn reduced(seed: u64) -> SamplerConfig {
    SamplerConfig::default().with_schedule(50_000, 10_000, 20).with_seed(seed)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// Monte-Carlo standard error of the mean of a correlated series. The
/// integrated autocorrelation time comes from non-overlapping batch means;
/// the marginal variance is the exact one, since short runs of a
/// heavy-tailed chain understate it.
fn mc_standard_error(v: &[f64], marginal_variance: f64, batches: usize) -> f64 {
    let size = v.len() / batches;
    let means: Vec<f64> = v.chunks_exact(size).map(mean).collect();
    let tau = (size as f64 * variance(&means) / variance(v)).max(1.0);
    (marginal_variance * tau / v.len() as f64).sqrt()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Point counts under the prior match Gamma-Poisson moments obtained by
/// forward simulation.
fn prior_recovery() -> Outcome {
    let (a, b) = (0.1, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let gamma = Gamma::new(a, 1.0 / b).unwrap();
    let draws: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let rho: f64 = gamma.sample(&mut rng);
            if rho > 0.0 {
                Poisson::new(rho).unwrap().sample(&mut rng)
            } else {
                0.0
            }
        })
        .collect();
    let target_mean = mean(&draws);
    let target_var = variance(&draws);
    let squares: Vec<f64> = draws.iter().map(|n| (n - target_mean).powi(2)).collect();
    let squares_var = variance(&squares);

    let start = Instant::now();
    let empty = Dataset::empty(2, 2);
    let settings = SamplerConfig { a, b, ..SamplerConfig::default() }.with_schedule(200_000, 0, 100).with_seed(7);
    let mut counts: Vec<Vec<f64>> = vec![Vec::new(); 3];
    run_chain(&empty, &ModelSpec::nonparametric(2, 2), settings, |_, r| {
        for (i, &n) in r.counts.iter().enumerate() {
            counts[i].push(n as f64);
        }
    });
    let elapsed = start.elapsed().as_secs_f64();
    let mut pass = elapsed <= 120.0 && counts[0].len() == 2000;
    let mut parts = vec![format!("oracle mean {target_mean:.3} var {target_var:.2}")];
    for (i, c) in counts.iter().enumerate() {
        let m = mean(c);
        let se = mc_standard_error(c, target_var, 20);
        let sq: Vec<f64> = c.iter().map(|n| (n - target_mean).powi(2)).collect();
        let v = mean(&sq);
        let vse = mc_standard_error(&sq, squares_var, 20);
        pass &= (m - target_mean).abs() <= 3.0 * se && (v - target_var).abs() <= 3.0 * vse;
        parts.push(format!("subspace {} mean {m:.3} (se {se:.3}) var {v:.2} (se {vse:.2})", i + 1));
    }
    parts.push(format!("chain {elapsed:.1}s"));
    Outcome::new(pass, parts.join("; "))
}

fn random_data(n: usize, p: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| (0..p).map(|_| rng.random::<f64>()).collect()).collect();
    let y = (0..n).map(|_| rng.random_range(1..=k)).collect();
    Dataset::new(k, x, y).unwrap()
}

/// Cached log-likelihood agrees with full recomputation after every edit.
fn likelihood_oracle() -> Outcome {
    let data = random_data(200, 2, 5, 11);
    let mut chain = Chain::new(&data, ModelSpec::nonparametric(5, 2), SamplerConfig::default().with_seed(3), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        chain.birth_move().unwrap();
    }
    let (mut accepted, mut rejected, mut worst) = (0, 0, 0.0f64);
    for _ in 0..1000 {
        let ok = match rng.random_range(0..7) {
            0 => chain.birth_move(),
            1 => chain.death_move(),
            2 => chain.death_birth_move(),
            3 => chain.position_move(),
            4 => chain.joint_level_move(),
            5 => chain.single_level_move(),
            _ => chain.origin_level_move(),
        }
        .unwrap();
        if ok {
            accepted += 1;
        } else {
            rejected += 1;
        }
        let brute = log_likelihood(&data, chain.configuration(), chain.theta(), chain.link());
        worst = worst.max((brute - chain.log_likelihood()).abs());
    }
    Outcome::new(
        worst <= 1e-10 && accepted > 0 && rejected > 0,
        format!("{accepted} accepted, {rejected} rejected edits; max deviation {worst:.2e}"),
    )
}

/// Every emitted record of several model types reconstructs to a valid
/// configuration.
fn structural_invariants() -> Outcome {
    let mut records = 0;
    let mut violations = 0;
    let mut check = |data: &Dataset, spec: &ModelSpec, settings: SamplerConfig| {
        run_chain(data, spec, settings, |_, r| {
            records += 1;
            match r.to_configuration(spec) {
                Ok(c) => violations += c.validate().len(),
                Err(_) => violations += 1,
            }
        });
    };
    let linear = ScenarioSpec::new(Family::Linear, 1000, 31);
    check(&make_scenario(&linear).unwrap().0, &linear.model(), reduced(31));
    let semi = ScenarioSpec::new(Family::Discontinuous, 1000, 32).semiparametric();
    check(&make_scenario(&semi).unwrap().0, &semi.model(), reduced(32));
    let noisy = ScenarioSpec::new(Family::Continuous, 1000, 33).with_noise(1);
    let spiked = SamplerConfig { d: 5.0, ..reduced(33) };
    check(&make_scenario(&noisy).unwrap().0, &noisy.model(), spiked);
    Outcome::new(violations == 0 && records == 7500, format!("{records} records, {violations} violations"))
}

/// Intensity draws for a frozen configuration follow the conjugate Gamma.
fn gibbs_conjugacy() -> Outcome {
    let empty = Dataset::empty(1, 2);
    let mut chain = Chain::new(&empty, ModelSpec::nonparametric(2, 1), SamplerConfig::default().with_seed(5), 0).unwrap();
    let mut config = Configuration::new(1, 2, Interval::unit(), true, vec![1.0, 0.5]).unwrap();
    let subspace = SubspaceId::from_mask(1).unwrap();
    for i in 0..5 {
        let location = vec![0.1 + 0.2 * i as f64];
        config.push_point(SupportPoint { subspace, location, marks: vec![1.0, 0.5] }).unwrap();
    }
    chain.set_state(config, ParametricState::empty()).unwrap();
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            chain.gibbs_intensity().unwrap();
            chain.configuration().intensities()[0]
        })
        .collect();
    let m = mean(&draws);
    let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let (shape, rate) = (5.1, 1.1);
    let (tm, tv) = (shape / rate, shape / (rate * rate));
    let (em, ev) = ((m - tm).abs() / tm, (v - tv).abs() / tv);
    Outcome::new(
        em < 0.01 && ev < 0.01,
        format!("mean {m:.4} vs {tm:.4} ({:.2}%), variance {v:.4} vs {tv:.4} ({:.2}%)", 100.0 * em, 100.0 * ev),
    )
}

fn overall_mae(data: &Dataset, spec: &ModelSpec, truth: &[Vec<f64>], settings: SamplerConfig) -> f64 {
    let mut acc = MaeAccumulator::new(truth, data.responses()).unwrap();
    run_chain(data, spec, settings, |c, _| acc.add_cache(c.cache(), c.link()));
    acc.mae_overall().unwrap()
}

/// Error shrinks from N = 1000 to N = 5000 on paired linear-family data.
fn sample_size_trend() -> Outcome {
    let (mut improved, mut small) = (0, Vec::new());
    let mut large = Vec::new();
    for seed in 1..=20 {
        let spec = ScenarioSpec::new(Family::Linear, 5000, seed);
        let (full, oracle) = make_scenario(&spec).unwrap();
        let part = full.head(1000).unwrap();
        let model = spec.model();
        let mae_small = overall_mae(&part, &model, &oracle.table(&part), reduced(seed));
        let mae_large = overall_mae(&full, &model, &oracle.table(&full), reduced(seed));
        if mae_large < mae_small {
            improved += 1;
        }
        small.push(100.0 * mae_small);
        large.push(100.0 * mae_large);
    }
    let (ms, ml) = (mean(&small), mean(&large));
    Outcome::new(
        improved >= 18 && ms <= 8.0,
        format!("smaller at N=5000 in {improved}/20 pairs; mean MAE x 100 {ms:.2} (N=1000), {ml:.2} (N=5000)"),
    )
}

/// Central 95% intervals of the linear coefficients cover the truth.
fn semiparametric_coverage() -> Outcome {
    let mut covered = [0usize; 3];
    let mut means = [0.0; 3];
    for seed in 1..=20 {
        let spec = ScenarioSpec::new(Family::Linear, 5000, seed).semiparametric();
        let (data, _) = make_scenario(&spec).unwrap();
        let mut draws: [Vec<f64>; 3] = Default::default();
        run_chain(&data, &spec.model(), reduced(seed), |_, r| {
            let theta = r.theta.expect("linear terms");
            for j in 0..3 {
                draws[j].push(theta.beta[j]);
            }
        });
        for j in 0..3 {
            draws[j].sort_by(f64::total_cmp);
            let (lo, hi) = (quantile(&draws[j], 0.025), quantile(&draws[j], 0.975));
            if (lo..=hi).contains(&SEMIPARAMETRIC_BETA[j]) {
                covered[j] += 1;
            }
            means[j] += mean(&draws[j]) / 20.0;
        }
    }
    Outcome::new(
        covered.iter().all(|&c| c >= 18),
        format!(
            "coverage {}/20, {}/20, {}/20; average posterior means {:.3}, {:.3}, {:.3}",
            covered[0], covered[1], covered[2], means[0], means[1], means[2]
        ),
    )
}

/// Active covariates are always included; the noise covariate less often
/// and with fewer points.
fn covariate_selection() -> Outcome {
    let (mut active_ok, mut ranked) = (true, 0);
    let mut noise = Vec::new();
    for seed in 1..=10 {
        let spec = ScenarioSpec::new(Family::Linear, 5000, seed).with_noise(1);
        let (data, _) = make_scenario(&spec).unwrap();
        let mut records = Vec::new();
        run_chain(&data, &spec.model(), reduced(seed), |_, r| records.push(r));
        let inc: Vec<f64> = (0..3).map(|j| inclusion_probability(&records, j).unwrap()).collect();
        let pts: Vec<f64> = (0..3).map(|j| mean_point_count(&records, j).unwrap()).collect();
        active_ok &= inc[0] == 1.0 && inc[1] == 1.0;
        if pts[0] > pts[2] && pts[1] > pts[2] {
            ranked += 1;
        }
        noise.push(inc[2]);
    }
    let avg = mean(&noise);
    let max = noise.iter().cloned().fold(0.0, f64::max);
    Outcome::new(
        active_ok && avg <= 0.8 && ranked == 10,
        format!(
            "active inclusion always 1: {active_ok}; noise inclusion mean {avg:.3} (max {max:.3}); point counts ranked in {ranked}/10"
        ),
    )
}

/// Mean over levels of the absolute error of the posterior mean survival at
/// the origin.
fn origin_error(d: f64, seed: u64) -> f64 {
    let spec = ScenarioSpec::new(Family::Discontinuous, 5000, seed);
    let (data, oracle) = make_scenario(&spec).unwrap();
    let origin = vec![0.0, 0.0];
    let truth = oracle.shape(&origin);
    let settings = SamplerConfig { d, record_grid: vec![origin], ..reduced(seed) };
    let mut sums = [0.0; 4];
    let mut samples = 0.0;
    run_chain(&data, &spec.model(), settings, |_, r| {
        for (s, v) in sums.iter_mut().zip(&r.grid_survival) {
            *s += v;
        }
        samples += 1.0;
    });
    sums.iter().enumerate().map(|(k, s)| (s / samples - truth[k + 1]).abs()).sum::<f64>() / 4.0
}

/// The spiking penalty reduces the error next to the origin.
fn spiking_prior() -> Outcome {
    let mut better = 0;
    let (mut with, mut without) = (Vec::new(), Vec::new());
    for seed in 1..=10 {
        let (e0, e5) = (origin_error(0.0, seed), origin_error(5.0, seed));
        if e5 < e0 {
            better += 1;
        }
        without.push(e0);
        with.push(e5);
    }
    Outcome::new(
        better >= 7,
        format!(
            "lower with d=5 in {better}/10 replicates; mean error {:.4} (d=0), {:.4} (d=5)",
            mean(&without),
            mean(&with)
        ),
    )
}

/// Logistic maximum likelihood by iteratively reweighted least squares.
fn irls_logistic(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len() + 1;
    let mut w = vec![0.0; p];
    for _ in 0..50 {
        let mut h = vec![vec![0.0; p]; p];
        let mut g = vec![0.0; p];
        for (xi, &yi) in x.iter().zip(y) {
            let row: Vec<f64> = std::iter::once(1.0).chain(xi.iter().copied()).collect();
            let eta: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            for i in 0..p {
                g[i] += (yi - mu) * row[i];
                for j in 0..p {
                    h[i][j] += mu * (1.0 - mu) * row[i] * row[j];
                }
            }
        }
        let step = solve(h, g);
        w.iter_mut().zip(&step).for_each(|(a, s)| *a += s);
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-12 {
            break;
        }
    }
    w
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let pivot = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, pivot);
        b.swap(c, pivot);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// With two categories the proportional-odds mode is the logistic MLE.
fn baseline_mode() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let truth = [-0.4, 1.5, -1.0];
    let n = 2000;
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
    let y: Vec<usize> = x
        .iter()
        .map(|xi| {
            let eta = truth[0] + truth[1] * xi[0] + truth[2] * xi[1];
            if rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) {
                2
            } else {
                1
            }
        })
        .collect();
    let indicator: Vec<f64> = y.iter().map(|&v| (v == 2) as u8 as f64).collect();
    let mle = irls_logistic(&x, &indicator);
    let data = Dataset::new(2, x, y).unwrap();
    let fit = fit_po_baseline(&data, &BaselineConfig::default()).unwrap();
    let mode: Vec<f64> = fit.mode.alpha.iter().chain(&fit.mode.beta).copied().collect();
    let worst = mode.iter().zip(&mle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Outcome::new(
        worst <= 0.05 && !fit.diverged,
        format!("mode {mode:.4?}, logistic MLE {mle:.4?}, largest difference {worst:.2e}"),
    )
}

fn stream_bytes(manifest: &RunManifest, data: &Dataset) -> Vec<u8> {
    let header = StreamHeader::new(manifest.model.clone(), 1, manifest.sampler.record_grid.clone());
    let mut writer = SampleWriter::new(Vec::new(), &header).unwrap();
    let mut chain = Chain::new(data, manifest.model.clone(), manifest.sampler.clone(), 0).unwrap();
    chain.run(|_, r| writer.write(&r)).unwrap();
    writer.finish().unwrap()
}

/// Two runs from the same stored manifest write identical streams.
fn determinism() -> Outcome {
    let spec = ScenarioSpec::new(Family::Continuous, 1000, 41).semiparametric();
    let (data, _) = make_scenario(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    let settings = SamplerConfig { d: 5.0, record_grid: vec![vec![0.5, 0.5]], ..reduced(41) };
    RunManifest::new("fit", spec.model(), settings, 1, None, dir.path().into()).save(&path).unwrap();
    let first = stream_bytes(&RunManifest::load(&path).unwrap(), &data);
    let second = stream_bytes(&RunManifest::load(&path).unwrap(), &data);
    Outcome::new(
        first == second && !first.is_empty(),
        format!("{} bytes per stream, identical: {}", first.len(), first == second),
    )
}
