use monord_core::likelihood::{log_likelihood, Dataset, LinkSpec, ParamChange, ParametricState, SurvivalCache};
use monord_core::mpp::{Configuration, Edit, Interval, SubspaceId, SupportPoint};
use monord_core::sampler::Chain;
use monord_core::{ModelSpec, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(n: usize, p: usize, k: usize, linear: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| (0..p).map(|_| rng.random::<f64>()).collect()).collect();
    let y = (0..n).map(|_| rng.random_range(1..=k)).collect();
    let mut data = Dataset::new(k, x, y).unwrap();
    if linear > 0 {
        let z = (0..n).map(|_| (0..linear).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).collect();
        data = data.with_linear(z).unwrap();
    }
    data
}

fn assert_oracle(chain: &Chain<'_>, step: usize) {
    let brute = log_likelihood(chain.data(), chain.configuration(), chain.theta(), chain.link());
    let cached = chain.log_likelihood();
    assert!(
        brute == cached || (brute - cached).abs() <= 1e-10,
        "step {step}: cached {cached} vs brute force {brute}"
    );
}

/// Drives every move type in random order and compares the cached total
/// with a full recomputation after each accepted or rejected edit.
fn replay(spec: ModelSpec, data: &Dataset, seed: u64) -> (u64, u64) {
    let cfg = SamplerConfig::default().with_seed(seed);
    let mut chain = Chain::new(data, spec, cfg, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (mut accepted, mut rejected) = (0u64, 0u64);
    // grow a non-trivial configuration first
    for _ in 0..60 {
        chain.birth_move().unwrap();
    }
    for step in 0..1000 {
        let outcome = match rng.random_range(0..8) {
            0 => chain.birth_move().unwrap(),
            1 => chain.death_move().unwrap(),
            2 => chain.death_birth_move().unwrap(),
            3 => chain.position_move().unwrap(),
            4 => chain.joint_level_move().unwrap(),
            5 => chain.single_level_move().unwrap(),
            6 => chain.origin_level_move().unwrap(),
            _ => {
                chain.update_parametric().unwrap();
                true
            }
        };
        if outcome {
            accepted += 1;
        } else {
            rejected += 1;
        }
        assert_oracle(&chain, step);
        assert!(chain.configuration().validate().is_empty(), "step {step}: invalid configuration");
    }
    chain.cache().verify(data, chain.configuration(), chain.theta(), chain.link(), 1e-10).unwrap();
    (accepted, rejected)
}

#[test]
fn identity_link_cache_matches_recomputation_over_1000_edits() {
    let data = random_data(200, 2, 5, 0, 11);
    let (acc, rej) = replay(ModelSpec::nonparametric(5, 2), &data, 3);
    assert!(acc > 50 && rej > 50, "need both outcomes: {acc} accepted, {rej} rejected");
}

#[test]
fn logit_link_with_linear_terms_matches_recomputation() {
    let data = random_data(200, 2, 5, 2, 12);
    let spec = ModelSpec::logit(5, 2, -3.0, 3.0).unwrap().with_linear(2, 0);
    let (acc, rej) = replay(spec, &data, 4);
    assert!(acc > 50 && rej > 50);
}

#[test]
fn three_covariates_match_recomputation() {
    let data = random_data(150, 3, 3, 0, 13);
    replay(ModelSpec::nonparametric(3, 3), &data, 5);
}

/// Applies edits directly, staging and then committing or discarding at
/// random, without going through the sampler.
#[test]
fn staged_edits_commit_and_discard_exactly() {
    let data = random_data(200, 2, 5, 0, 21);
    let link = LinkSpec::identity();
    let theta = ParametricState::empty();
    let origin = Configuration::evenly_spaced_marks(5, Interval::unit());
    let mut config = Configuration::new(2, 5, Interval::unit(), true, origin).unwrap();
    let mut cache = SurvivalCache::new(&data, &config, &theta, &link).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let top = SubspaceId::from_mask(3).unwrap();
    for step in 0..1000 {
        let before = cache.log_likelihood();
        let snapshot = config.clone();
        let edit = if config.total_points() == 0 || rng.random_bool(0.6) {
            // marks at or above the origin keep the configuration valid when
            // every point sits in the full subspace with identical marks
            Edit::Birth(SupportPoint { subspace: top, location: vec![rng.random(), rng.random()], marks: vec![1.0; 5] })
        } else {
            Edit::Death(rng.random_range(0..config.total_points()))
        };
        let (change, undo) = config.apply(edit).unwrap();
        let proposed = cache.stage_change(&data, &config, &change, &link);
        let brute = log_likelihood(&data, &config, &theta, &link);
        assert!(proposed == brute || (proposed - brute).abs() <= 1e-10, "step {step}: staged {proposed} vs {brute}");
        if rng.random_bool(0.5) {
            cache.commit();
        } else {
            cache.discard();
            config.undo(undo);
            assert_eq!(config, snapshot);
            assert_eq!(cache.log_likelihood(), before);
        }
        cache.verify(&data, &config, &theta, &link, 1e-10).unwrap();
    }
}

#[test]
fn parametric_staging_touches_only_affected_rows() {
    let mut data = random_data(50, 1, 3, 2, 31);
    // second linear covariate is zero for every row: changing its coefficient is free
    let z: Vec<Vec<f64>> = (0..50).map(|n| vec![data.z(n)[0], 0.0]).collect();
    data = data.with_linear(z).unwrap();
    let link = LinkSpec::logit(-2.0, 2.0).unwrap();
    let config = Configuration::new(1, 3, link.range, false, vec![1.0, 0.0, -1.0]).unwrap();
    let mut theta = ParametricState::zeros(2, 0);
    let mut cache = SurvivalCache::new(&data, &config, &theta, &link).unwrap();
    theta.beta[1] = 5.0;
    let proposed = cache.stage_param(&data, &theta, ParamChange::Beta(1), &link);
    assert_eq!(cache.touched(), 0);
    assert_eq!(proposed, cache.log_likelihood());
    cache.discard();
    theta.beta[1] = 0.0;
    theta.beta[0] = 0.7;
    let proposed = cache.stage_param(&data, &theta, ParamChange::Beta(0), &link);
    assert_eq!(cache.touched(), 50);
    assert!((proposed - log_likelihood(&data, &config, &theta, &link)).abs() <= 1e-10);
    cache.commit();
    cache.verify(&data, &config, &theta, &link, 1e-10).unwrap();
}
