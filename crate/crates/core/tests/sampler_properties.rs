use monord_core::likelihood::Dataset;
use monord_core::mpp::{Configuration, Interval, SubspaceId, SupportPoint};
use monord_core::sampler::{Chain, MoveKind, SampleRecord};
use monord_core::{ModelSpec, ParametricState, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point(mask: u32, location: &[f64], marks: &[f64]) -> SupportPoint {
    SupportPoint { subspace: SubspaceId::from_mask(mask).unwrap(), location: location.to_vec(), marks: marks.to_vec() }
}

fn config_with(levels: usize, origin: Vec<f64>, points: Vec<SupportPoint>) -> Configuration {
    let mut c = Configuration::new(2, levels, Interval::unit(), true, origin).unwrap();
    for p in points {
        c.push_point(p).unwrap();
    }
    assert!(c.validate().is_empty());
    c
}

/// Largest gap between an empirical CDF and `cdf`.
fn ks_statistic(mut values: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical value of the one-sample KS test at level 0.001.
fn ks_critical(n: usize) -> f64 {
    1.949 / (n as f64).sqrt()
}

#[test]
fn flat_likelihood_position_moves_are_always_accepted() {
    let empty = Dataset::empty(2, 3);
    let spec = ModelSpec::nonparametric(3, 2);
    let mut chain = Chain::new(&empty, spec, SamplerConfig::default().with_seed(8), 0).unwrap();
    // equal marks make every relative placement admissible
    let marks = [1.0, 0.6, 0.3];
    let config = config_with(
        3,
        vec![1.0, 0.5, 0.2],
        vec![point(3, &[0.2, 0.7], &marks), point(1, &[0.5, 0.0], &marks), point(2, &[0.0, 0.4], &marks)],
    );
    chain.set_state(config, ParametricState::empty()).unwrap();
    for _ in 0..2000 {
        assert!(chain.position_move().unwrap());
    }
    assert_eq!(chain.stats().accepts(MoveKind::Position), 2000);
    assert!(chain.configuration().validate().is_empty());
}

#[test]
fn position_moves_keep_the_configuration_valid_with_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..150).map(|_| vec![rng.random(), rng.random()]).collect();
    let y = x.iter().map(|v: &Vec<f64>| if v[0] + v[1] > 1.0 { 3 } else if v[0] > 0.5 { 2 } else { 1 }).collect();
    let data = Dataset::new(3, x, y).unwrap();
    let mut chain = Chain::new(&data, ModelSpec::nonparametric(3, 2), SamplerConfig::default().with_seed(2), 0).unwrap();
    for _ in 0..3000 {
        chain.step().unwrap();
    }
    let mut accepted = 0;
    while accepted < 10_000 {
        if chain.position_move().unwrap() {
            accepted += 1;
            assert!(chain.configuration().validate().is_empty());
        }
        if chain.stats().attempts(MoveKind::Position) > 2_000_000 {
            panic!("position moves stopped being accepted");
        }
        if rng.random_bool(0.01) {
            chain.birth_move().unwrap();
        }
    }
}

#[test]
fn joint_level_draws_are_uniform_on_the_constraint_interval() {
    let empty = Dataset::empty(2, 2);
    let mut chain = Chain::new(&empty, ModelSpec::nonparametric(2, 2), SamplerConfig::default().with_seed(17), 0).unwrap();
    let config = config_with(2, vec![1.0, 0.3], vec![point(3, &[0.5, 0.5], &[1.0, 0.8])]);
    chain.set_state(config, ParametricState::empty()).unwrap();
    let mut draws = Vec::new();
    for _ in 0..20_000 {
        assert!(chain.joint_level_move().unwrap());
        draws.push(chain.configuration().points()[0].marks[1]);
    }
    // the level must stay above the origin's level and below the pinned top
    let (lo, hi) = (0.3, 1.0);
    assert!(draws.iter().all(|v| (lo..=hi).contains(v)));
    let d = ks_statistic(draws.clone(), |v| (v - lo) / (hi - lo));
    assert!(d < ks_critical(draws.len()), "KS distance {d}");
}

#[test]
fn single_level_draws_are_uniform_on_the_constraint_interval() {
    let empty = Dataset::empty(2, 2);
    let mut chain = Chain::new(&empty, ModelSpec::nonparametric(2, 2), SamplerConfig::default().with_seed(18), 0).unwrap();
    // the upper point caps the lower one at 0.7
    let config = config_with(
        2,
        vec![1.0, 0.1],
        vec![point(3, &[0.2, 0.2], &[1.0, 0.5]), point(3, &[0.9, 0.9], &[1.0, 0.7])],
    );
    chain.set_state(config, ParametricState::empty()).unwrap();
    let mut lower = Vec::new();
    for _ in 0..40_000 {
        assert!(chain.single_level_move().unwrap());
        let pts = chain.configuration().points();
        let (a, b) = (pts[0].marks[1], pts[1].marks[1]);
        assert!(a <= b);
        lower.push(a.min(b));
    }
    assert!(chain.configuration().validate().is_empty());
    // the pair is uniform on {0.1 <= a <= b <= 1}: min has density 2(1 - v)/0.81 shifted
    let d = ks_statistic(lower.clone(), |v| 1.0 - ((1.0 - v) / 0.9).powi(2));
    // successive states are correlated, so allow a looser bound
    assert!(d < 3.0 * ks_critical(lower.len()), "KS distance {d}");
}

#[test]
fn origin_level_is_beta_six_one_under_the_spiking_prior() {
    let empty = Dataset::empty(2, 2);
    let settings = SamplerConfig { d: 5.0, ..SamplerConfig::default() }.with_seed(23);
    let mut chain = Chain::new(&empty, ModelSpec::nonparametric(2, 2), settings, 0).unwrap();
    let pts = (0..5).map(|i| point(3, &[0.1 + 0.15 * i as f64, 0.9 - 0.15 * i as f64], &[1.0, 1.0])).collect();
    chain.set_state(config_with(2, vec![1.0, 0.5], pts), ParametricState::empty()).unwrap();
    let n = 100_000;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        assert!(chain.origin_level_move().unwrap());
        values.push(chain.configuration().origin().marks[1]);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (6.0f64 / (49.0 * 8.0)).sqrt();
    assert!((mean - 6.0 / 7.0).abs() < 4.0 * sd / (n as f64).sqrt(), "mean {mean}");
    let d = ks_statistic(values, |v| v.powi(6));
    assert!(d < ks_critical(n), "KS distance {d}");
}

#[test]
fn origin_level_is_uniform_without_spiking() {
    let empty = Dataset::empty(2, 2);
    let mut chain = Chain::new(&empty, ModelSpec::nonparametric(2, 2), SamplerConfig::default().with_seed(24), 0).unwrap();
    let pts = (0..5).map(|i| point(3, &[0.1 * i as f64 + 0.1, 0.5], &[1.0, 0.8])).collect();
    chain.set_state(config_with(2, vec![1.0, 0.5], pts), ParametricState::empty()).unwrap();
    let values: Vec<f64> = (0..20_000)
        .map(|_| {
            chain.origin_level_move().unwrap();
            chain.configuration().origin().marks[1]
        })
        .collect();
    let d = ks_statistic(values.clone(), |v| v / 0.8);
    assert!(d < ks_critical(values.len()), "KS distance {d}");
}

/// For a reversible chain in equilibrium the number of transitions from any
/// set of states to another equals the number in the opposite direction.
#[test]
fn single_level_transitions_are_reversible() {
    let data = Dataset::new(
        2,
        vec![vec![0.1, 0.1], vec![0.4, 0.6], vec![0.6, 0.3], vec![0.8, 0.9], vec![0.95, 0.5], vec![0.3, 0.95]],
        vec![1, 2, 1, 2, 2, 1],
    )
    .unwrap();
    let settings = SamplerConfig::default().with_seed(31);
    let mut chain = Chain::new(&data, ModelSpec::nonparametric(2, 2), settings, 0).unwrap();
    let config = config_with(
        2,
        vec![1.0, 0.2],
        vec![point(3, &[0.35, 0.5], &[1.0, 0.4]), point(3, &[0.7, 0.8], &[1.0, 0.6])],
    );
    chain.set_state(config, ParametricState::empty()).unwrap();
    let bins = 4;
    let cell = |c: &Configuration| {
        let p = c.points();
        let b = |v: f64| (((v - 0.2) / 0.8 * bins as f64) as usize).min(bins - 1);
        b(p[0].marks[1]) * bins + b(p[1].marks[1])
    };
    for _ in 0..5_000 {
        chain.single_level_move().unwrap();
    }
    let states = bins * bins;
    let mut flow = vec![0u64; states * states];
    let mut prev = cell(chain.configuration());
    for _ in 0..400_000 {
        chain.single_level_move().unwrap();
        let next = cell(chain.configuration());
        flow[prev * states + next] += 1;
        prev = next;
    }
    let mut checked = 0;
    for i in 0..states {
        for j in i + 1..states {
            let (a, b) = (flow[i * states + j] as f64, flow[j * states + i] as f64);
            if a + b < 200.0 {
                continue;
            }
            checked += 1;
            assert!((a - b).abs() < 5.0 * (a + b).sqrt(), "flows {i}->{j}: {a} vs {b}");
        }
    }
    assert!(checked >= 4, "too few populated transitions");
    let rate = chain.stats().acceptance_rate(MoveKind::SingleLevel).unwrap();
    assert!(rate > 0.05 && rate < 0.999, "the likelihood should reject some proposals: {rate}");
}

#[test]
fn attempts_equal_accepts_plus_rejects() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let x: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.random(), rng.random()]).collect();
    let y = (0..100).map(|_| rng.random_range(1..=3)).collect();
    let data = Dataset::new(3, x, y).unwrap();
    let mut chain = Chain::new(&data, ModelSpec::nonparametric(3, 2), SamplerConfig::default().with_seed(3), 0).unwrap();
    for _ in 0..2_000 {
        chain.step().unwrap();
    }
    let s = chain.stats();
    for kind in MoveKind::ALL {
        assert_eq!(s.attempts(kind), s.accepts(kind) + s.rejects(kind), "{kind}");
    }
    let dimension: u64 = [MoveKind::Birth, MoveKind::Death, MoveKind::DeathBirth].iter().map(|&k| s.attempts(k)).sum();
    let fixed: u64 = [MoveKind::Position, MoveKind::JointLevel, MoveKind::SingleLevel, MoveKind::Origin]
        .iter()
        .map(|&k| s.attempts(k))
        .sum();
    assert_eq!(dimension, 2_000);
    assert_eq!(fixed, 2_000);
    assert_eq!(chain.iteration(), 2_000);
}

#[test]
fn zero_iterations_emit_nothing() {
    let data = Dataset::new(2, vec![vec![0.5]], vec![1]).unwrap();
    let settings = SamplerConfig::default().with_schedule(0, 50, 1);
    let mut chain = Chain::new(&data, ModelSpec::nonparametric(2, 1), settings, 0).unwrap();
    let mut emitted = 0;
    chain
        .run(|_, _| {
            emitted += 1;
            Ok(())
        })
        .unwrap();
    assert_eq!(emitted, 0);
    assert_eq!(chain.iteration(), 50);
}

fn collect(data: &Dataset, spec: &ModelSpec, settings: &SamplerConfig, chain_id: u64) -> Vec<SampleRecord> {
    let mut chain = Chain::new(data, spec.clone(), settings.clone(), chain_id).unwrap();
    let mut out = Vec::new();
    chain
        .run(|_, r| {
            out.push(r);
            Ok(())
        })
        .unwrap();
    out
}

#[test]
fn same_seed_same_stream_and_chains_differ() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let x: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.random(), rng.random()]).collect();
    let z: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.random::<f64>() - 0.5]).collect();
    let y = (0..80).map(|_| rng.random_range(1..=4)).collect();
    let data = Dataset::new(4, x, y).unwrap().with_linear(z).unwrap();
    let spec = ModelSpec::logit(4, 2, -5.0, 5.0).unwrap().with_linear(1, 0);
    let settings = SamplerConfig::default().with_schedule(1_000, 200, 10).with_seed(77);
    let a = collect(&data, &spec, &settings, 0);
    let b = collect(&data, &spec, &settings, 0);
    assert_eq!(a.len(), 100);
    let bytes = |r: &[SampleRecord]| r.iter().map(|x| serde_json::to_string(x).unwrap()).collect::<Vec<_>>();
    assert_eq!(bytes(&a), bytes(&b));
    let c = collect(&data, &spec, &settings, 1);
    assert_ne!(bytes(&a), bytes(&c));
    for r in &a {
        let config = r.to_configuration(&spec).unwrap();
        assert!(config.validate().is_empty());
    }
}

#[test]
fn records_follow_the_thinning_schedule() {
    let data = Dataset::new(2, vec![vec![0.2], vec![0.8]], vec![1, 2]).unwrap();
    let settings = SamplerConfig::default().with_schedule(95, 10, 20);
    let recs = collect(&data, &ModelSpec::nonparametric(2, 1), &settings, 0);
    let its: Vec<usize> = recs.iter().map(|r| r.iteration).collect();
    assert_eq!(its, vec![30, 50, 70, 90]);
}

#[test]
fn record_grid_survival_matches_reconstruction() {
    let data = Dataset::new(3, vec![vec![0.2, 0.3], vec![0.8, 0.6], vec![0.5, 0.9]], vec![1, 3, 2]).unwrap();
    let grid = vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 1.0]];
    let settings = SamplerConfig { record_grid: grid.clone(), ..SamplerConfig::default() }.with_schedule(500, 100, 50);
    let spec = ModelSpec::nonparametric(3, 2);
    for r in collect(&data, &spec, &settings, 0) {
        let config = r.to_configuration(&spec).unwrap();
        for (g, x) in grid.iter().enumerate() {
            let lam = config.envelope(x);
            assert_eq!(&r.grid_survival[g * 2..g * 2 + 2], &lam[1..]);
        }
    }
}

#[test]
fn gibbs_intensity_matches_gamma_moments() {
    let empty = Dataset::empty(1, 2);
    let mut chain = Chain::new(&empty, ModelSpec::nonparametric(2, 1), SamplerConfig::default().with_seed(61), 0).unwrap();
    let pts = (0..5).map(|i| point(1, &[0.1 + 0.2 * i as f64], &[1.0, 0.5])).collect();
    let mut c = Configuration::new(1, 2, Interval::unit(), true, vec![1.0, 0.5]).unwrap();
    for p in Vec::<SupportPoint>::into_iter(pts) {
        c.push_point(p).unwrap();
    }
    chain.set_state(c, ParametricState::empty()).unwrap();
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            chain.gibbs_intensity().unwrap();
            chain.configuration().intensities()[0]
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let (m, v) = (5.1 / 1.1, 5.1 / (1.1 * 1.1));
    assert!(((mean - m) / m).abs() < 0.01, "mean {mean} vs {m}");
    assert!(((var - v) / v).abs() < 0.03, "variance {var} vs {v}");
}
