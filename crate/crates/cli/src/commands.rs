use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use monord_core::diagnostics::{
    fit_po_baseline, inclusion_probability, mean_point_count, record_probs, MaeAccumulator, PosteriorSummary,
    StandardizedAccumulator, SurfaceAccumulator, SurfaceQuery,
};
use monord_core::io::{
    create_file, load_dataset, read_samples, read_truth, write_dataset, write_json, write_truth, write_truth_grid,
    DataRef, FileConfig, LoadedData, RunManifest, SampleWriter, StreamHeader, Transform,
};
use monord_core::likelihood::probs_from_lambda;
use monord_core::mpp::enumerate_subspaces_with_limit;
use monord_core::sampler::{Chain, MoveKind, MoveStats};
use monord_core::simgen::{make_scenario, Mode, ScenarioSpec};
use monord_core::{Dataset, ModelSpec, ParametricState, SampleRecord, SamplerConfig};

use crate::args::{BaselineArgs, DiagArgs, FitArgs, PredictArgs, PriorCheckArgs, ScheduleArgs, SimulateArgs};
use crate::output::{csv, describe, ensure_dir, fmt, numbered, subspace_label};
use crate::Usage;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SAMPLES_FILE: &str = "samples.ndjson";

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => Ok(FileConfig::load(p)?),
        None => Ok(FileConfig::default()),
    }
}

fn apply_schedule(cfg: &mut SamplerConfig, s: &ScheduleArgs) -> Result<()> {
    if let Some(v) = s.seed {
        cfg.seed = v;
    }
    if let Some(v) = s.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = s.burn_in {
        cfg.burn_in = v;
    }
    if let Some(v) = s.thin {
        cfg.thin = v;
    }
    cfg.validate()?;
    Ok(())
}

fn chain_count(n: Option<usize>) -> Result<usize> {
    match n.unwrap_or(1) {
        0 => Err(usage("--chains must be at least 1")),
        n => Ok(n),
    }
}

/// What one chain leaves behind besides its part file.
struct ChainOutput {
    summary: PosteriorSummary,
    stats: MoveStats,
    thetas: Vec<ParametricState>,
    trace: Vec<(usize, Vec<usize>, Vec<f64>)>,
}

fn part_path(out: &Path, chain: usize) -> PathBuf {
    out.join(format!("samples.chain{chain}.part"))
}

fn run_one(
    data: &Dataset,
    spec: &ModelSpec,
    sampler: &SamplerConfig,
    chain_id: usize,
    out: &Path,
    progress: Option<usize>,
) -> Result<ChainOutput> {
    let mut writer = SampleWriter::headless(create_file(&part_path(out, chain_id))?);
    let mut chain = Chain::new(data, spec.clone(), sampler.clone(), chain_id as u64)?;
    if let Some(every) = progress.filter(|&e| e > 0) {
        chain.set_progress(every, move |p| {
            eprintln!(
                "chain {chain_id}: iteration {}/{} log-likelihood {:.3} points {}",
                p.iteration, p.total_iterations, p.log_likelihood, p.total_points
            );
        });
    }
    let mut summary = PosteriorSummary::new(data.len(), spec.levels);
    let mut thetas = Vec::new();
    let mut trace = Vec::new();
    chain.run(|c, rec| {
        summary.add_cache(c.cache(), c.link(), &rec);
        if let Some(t) = &rec.theta {
            thetas.push(t.clone());
        }
        trace.push((rec.iteration, rec.counts.clone(), rec.intensities.clone()));
        writer.write(&rec)
    })?;
    writer.finish()?.flush().context("flushing sample part file")?;
    Ok(ChainOutput { summary, stats: chain.stats().clone(), thetas, trace })
}

/// Runs chains concurrently, each into its own part file, then concatenates
/// the parts in chain order behind a single header.
fn run_chains(
    data: &Dataset,
    spec: &ModelSpec,
    sampler: &SamplerConfig,
    chains: usize,
    out: &Path,
    progress: Option<usize>,
) -> Result<Vec<ChainOutput>> {
    let results: Vec<Result<ChainOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> =
            (0..chains).map(|c| s.spawn(move || run_one(data, spec, sampler, c, out, progress))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("sampler thread panicked"))))
            .collect()
    });
    let outputs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let header = StreamHeader::new(spec.clone(), chains, sampler.record_grid.clone());
    let mut merged = SampleWriter::new(create_file(&out.join(SAMPLES_FILE))?, &header)?.finish()?;
    for c in 0..chains {
        let part = part_path(out, c);
        let mut f = File::open(&part).with_context(|| format!("reading {}", part.display()))?;
        std::io::copy(&mut f, &mut merged).context("merging sample files")?;
        std::fs::remove_file(&part).with_context(|| format!("removing {}", part.display()))?;
    }
    merged.flush().context("writing sample stream")?;
    Ok(outputs)
}

fn write_acceptance(path: &Path, outputs: &[ChainOutput]) -> Result<()> {
    let mut rows = Vec::new();
    for (c, o) in outputs.iter().enumerate() {
        for kind in MoveKind::ALL {
            let n = o.stats.attempts(kind);
            if n == 0 {
                continue;
            }
            let rate = o.stats.acceptance_rate(kind).unwrap_or(f64::NAN);
            rows.push(vec![c.to_string(), kind.to_string(), n.to_string(), o.stats.accepts(kind).to_string(), fmt(rate)]);
        }
    }
    csv(path, &["chain", "move", "attempts", "accepts", "rate"], rows)
}

fn write_parameters(path: &Path, thetas: &[&ParametricState], data: &LoadedData) -> Result<()> {
    let Some(first) = thetas.first() else { return Ok(()) };
    let mut rows = Vec::new();
    let mut push = |name: String, values: Vec<f64>| {
        let d = describe(&values);
        rows.push(std::iter::once(name).chain(d.iter().map(|v| fmt(*v))).collect());
    };
    for j in 0..first.beta.len() {
        let name = data.schema.linear.get(j).cloned().unwrap_or_else(|| format!("z{}", j + 1));
        push(format!("beta_{name}"), thetas.iter().map(|t| t.beta[j]).collect());
    }
    for c in 0..first.gamma.len() {
        let label = data.cluster_labels.get(c).cloned().unwrap_or_else(|| (c + 1).to_string());
        push(format!("gamma_{label}"), thetas.iter().map(|t| t.gamma[c]).collect());
    }
    if !first.gamma.is_empty() {
        push("tau2".into(), thetas.iter().map(|t| t.tau2).collect());
    }
    csv(path, &["parameter", "mean", "sd", "q025", "median", "q975"], rows)
}

fn write_summary(path: &Path, summary: &PosteriorSummary, data: &Dataset) -> Result<()> {
    let k = summary.levels;
    let mut header = vec!["row".to_string(), "y".to_string()];
    header.extend(numbered("p", 1, k));
    header.extend(numbered("S", 2, k));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..summary.observations)
        .map(|n| {
            let mut r = vec![(n + 1).to_string(), data.y(n).to_string()];
            r.extend(summary.mean_probs[n * k..(n + 1) * k].iter().map(|v| fmt(*v)));
            r.extend(summary.mean_survival[n * k + 1..(n + 1) * k].iter().map(|v| fmt(*v)));
            r
        })
        .collect();
    csv(path, &header, rows)
}

pub fn fit(a: FitArgs) -> Result<()> {
    let out = a.out.resolve();
    let (spec, mut sampler, chains, loaded, data_path) = match &a.manifest {
        Some(path) => {
            let m = RunManifest::load(path)?;
            let dref = m.data.ok_or_else(|| usage(format!("{}: manifest has no dataset", path.display())))?;
            let loaded = load_dataset(&dref.path, &dref.schema)?;
            m.model.check_dataset(&loaded.dataset)?;
            (m.model, m.sampler, a.chains.unwrap_or(m.chains), loaded, dref.path)
        }
        None => {
            let cfg = load_config(a.schedule.config.as_deref())?;
            let path = a
                .data
                .clone()
                .or(cfg.data.path.clone())
                .ok_or_else(|| usage("no dataset: pass --data or set [data] path in the config"))?;
            let loaded = load_dataset(&path, &cfg.data.schema)?;
            let spec = cfg.model.resolve(&loaded.dataset)?;
            spec.check_dataset(&loaded.dataset)?;
            (spec, cfg.sampler, a.chains.unwrap_or(1), loaded, path)
        }
    };
    apply_schedule(&mut sampler, &a.schedule)?;
    let chains = chain_count(Some(chains))?;
    for name in &loaded.degenerate {
        eprintln!("warning: covariate '{name}' is constant after transformation");
    }
    ensure_dir(&out)?;
    let data_path = std::fs::canonicalize(&data_path).unwrap_or(data_path);
    let manifest = RunManifest::new(
        "fit",
        spec.clone(),
        sampler.clone(),
        chains,
        Some(DataRef { path: data_path, schema: loaded.schema.clone() }),
        out.clone(),
    );
    manifest.save(&out.join(MANIFEST_FILE))?;

    let data = &loaded.dataset;
    let outputs = run_chains(data, &spec, &sampler, chains, &out, a.progress)?;
    let mut summary = PosteriorSummary::new(data.len(), spec.levels);
    for o in &outputs {
        summary.merge(&o.summary)?;
    }
    write_summary(&out.join("summary.csv"), &summary, data)?;
    write_acceptance(&out.join("acceptance.csv"), &outputs)?;
    let thetas: Vec<&ParametricState> = outputs.iter().flat_map(|o| o.thetas.iter()).collect();
    write_parameters(&out.join("parameters.csv"), &thetas, &loaded)?;

    let mean_ll = if summary.log_likelihood.is_empty() {
        f64::NAN
    } else {
        summary.log_likelihood.iter().sum::<f64>() / summary.log_likelihood.len() as f64
    };
    eprintln!(
        "{} samples from {chains} chain(s), mean log-likelihood {mean_ll:.3}; results in {}",
        summary.samples,
        out.display()
    );
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let out = a.out.resolve();
    let mut spec = ScenarioSpec::new(a.family, a.n, a.seed).with_noise(a.noise);
    if a.mode == Mode::Semiparametric {
        spec = spec.semiparametric();
    }
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let (data, oracle) = make_scenario(&spec)?;
    ensure_dir(&out)?;
    write_dataset(&out.join("data.csv"), &data)?;
    write_truth(&out.join("truth.csv"), &data, &oracle)?;
    write_truth_grid(&out.join("truth_grid.csv"), &oracle, a.grid)?;
    write_json(&out.join("scenario.json"), &spec)?;

    let model = spec.model();
    let mut cfg = FileConfig::default();
    cfg.model.levels = Some(model.levels);
    cfg.model.link = model.link;
    cfg.model.range = (model.link != monord_core::LinkKind::Identity).then_some([model.range.lower, model.range.upper]);
    cfg.sampler.seed = a.seed;
    cfg.data.path = Some("data.csv".into());
    cfg.data.schema.transform = Transform::Identity;
    std::fs::write(out.join("model.toml"), cfg.to_toml()?).context("writing model.toml")?;
    eprintln!("{} observations written to {}", data.len(), out.display());
    Ok(())
}

pub fn prior_check(a: PriorCheckArgs) -> Result<()> {
    let out = a.out.resolve();
    let mut cfg = load_config(a.schedule.config.as_deref())?;
    apply_schedule(&mut cfg.sampler, &a.schedule)?;
    let chains = chain_count(a.chains)?;
    let spec = cfg.model.resolve_counts(a.levels, a.covariates, 0, 0)?;
    let data = Dataset::empty(spec.covariates, spec.levels);
    ensure_dir(&out)?;
    RunManifest::new("prior-check", spec.clone(), cfg.sampler.clone(), chains, None, out.clone())
        .save(&out.join(MANIFEST_FILE))?;
    let outputs = run_chains(&data, &spec, &cfg.sampler, chains, &out, None)?;

    let subspaces = enumerate_subspaces_with_limit(spec.covariates, spec.max_covariates)?;
    let labels: Vec<String> = subspaces.iter().map(|s| subspace_label(*s)).collect();
    let mut header = vec!["chain".to_string(), "iteration".to_string()];
    header.extend(labels.iter().map(|l| format!("n_{l}")));
    header.extend(labels.iter().map(|l| format!("rho_{l}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for (c, o) in outputs.iter().enumerate() {
        for (it, counts, rho) in &o.trace {
            let mut r = vec![c.to_string(), it.to_string()];
            r.extend(counts.iter().map(usize::to_string));
            r.extend(rho.iter().map(|v| fmt(*v)));
            rows.push(r);
        }
    }
    csv(&out.join("prior_draws.csv"), &header, rows)?;

    let (pa, pb) = (cfg.sampler.a, cfg.sampler.b);
    let mut rows = Vec::new();
    for (i, (id, label)) in subspaces.iter().zip(&labels).enumerate() {
        let counts: Vec<f64> = outputs.iter().flat_map(|o| o.trace.iter().map(|t| t.1[i] as f64)).collect();
        let rho: Vec<f64> = outputs.iter().flat_map(|o| o.trace.iter().map(|t| t.2[i])).collect();
        let c = describe(&counts);
        let r = describe(&rho);
        let vol = id.volume();
        let mean = pa * vol / pb;
        let var = mean + pa * vol * vol / (pb * pb);
        rows.push(vec![
            label.clone(),
            id.dimension().to_string(),
            fmt(c[0]),
            fmt(c[1] * c[1]),
            fmt(r[0]),
            fmt(r[1] * r[1]),
            fmt(mean),
            fmt(var),
            fmt(pa / pb),
        ]);
    }
    csv(
        &out.join("prior_marginals.csv"),
        &[
            "subspace",
            "dimension",
            "count_mean",
            "count_var",
            "intensity_mean",
            "intensity_var",
            "expected_count_mean",
            "expected_count_var",
            "expected_intensity_mean",
        ],
        rows,
    )?;
    eprintln!("prior check written to {}", out.display());
    Ok(())
}

/// A finished run: its manifest and all stored samples.
struct Run {
    manifest: RunManifest,
    records: Vec<SampleRecord>,
}

impl Run {
    fn open(dir: &Path) -> Result<Self> {
        let manifest = RunManifest::load(&dir.join(MANIFEST_FILE))?;
        let (header, records) = read_samples(&dir.join(SAMPLES_FILE))?;
        if header.model != manifest.model {
            return Err(monord_core::Error::Format("sample stream and manifest describe different models".into()).into());
        }
        if records.is_empty() {
            return Err(monord_core::Error::Format(format!("{}: no samples", dir.display())).into());
        }
        Ok(Self { manifest, records })
    }

    fn training(&self) -> Result<LoadedData> {
        let dref = self.manifest.data.as_ref().ok_or_else(|| usage("the run has no dataset"))?;
        let loaded = load_dataset(&dref.path, &dref.schema)?;
        self.manifest.model.check_dataset(&loaded.dataset)?;
        Ok(loaded)
    }
}

pub fn predict(a: PredictArgs) -> Result<()> {
    if a.resolution < 2 {
        return Err(usage("--resolution must be at least 2"));
    }
    let out = a.out.resolve();
    let run = Run::open(&a.run)?;
    let spec = &run.manifest.model;
    let link = spec.link_spec();
    let k = spec.levels;
    let configs = run
        .records
        .iter()
        .map(|r| Ok((r.to_configuration(spec)?, r.theta_or_empty())))
        .collect::<monord_core::Result<Vec<_>>>()?;
    let grid: Vec<f64> = (0..a.resolution).map(|i| i as f64 / (a.resolution - 1) as f64).collect();
    ensure_dir(&out)?;

    if let Some(path) = &a.data {
        let training = run.training()?;
        let rows = training.covariates_from(path)?;
        let mut mean = vec![0.0; rows.len() * k];
        let mut lam = vec![0.0; k];
        let mut probs = vec![0.0; k];
        for (config, theta) in &configs {
            for n in 0..rows.len() {
                config.envelope_into(&rows.x[n], &mut lam);
                let offset = theta.offset(&rows.z[n], rows.cluster[n]);
                probs_from_lambda(&lam, offset, &link, &mut probs);
                for (m, p) in mean[n * k..(n + 1) * k].iter_mut().zip(&probs) {
                    *m += p;
                }
            }
        }
        let l = configs.len() as f64;
        let mut header = vec!["row".to_string()];
        header.extend(numbered("p", 1, k));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let table = (0..rows.len())
            .map(|n| std::iter::once((n + 1).to_string()).chain(mean[n * k..(n + 1) * k].iter().map(|v| fmt(v / l))).collect())
            .collect();
        csv(&out.join("predictions.csv"), &header, table)?;
        return Ok(());
    }

    if let Some(j) = a.standardized {
        if j == 0 || j > spec.covariates {
            return Err(usage(format!("--standardized must be in 1..={}", spec.covariates)));
        }
        let training = run.training()?;
        let mut accs = (2..=k)
            .map(|level| StandardizedAccumulator::new(&training.dataset, j - 1, &grid, level))
            .collect::<monord_core::Result<Vec<_>>>()?;
        for (config, _) in &configs {
            for acc in &mut accs {
                acc.add(config, &link)?;
            }
        }
        let mut header = vec!["x".to_string()];
        header.extend(numbered("S", 2, k));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = grid
            .iter()
            .enumerate()
            .map(|(i, g)| std::iter::once(fmt(*g)).chain(accs.iter().map(|acc| fmt(acc.values()[i]))).collect())
            .collect();
        csv(&out.join(format!("standardized_x{j}.csv")), &header, rows)?;
        return Ok(());
    }

    let p = spec.covariates;
    let points: Vec<Vec<f64>> = if p == 1 {
        grid.iter().map(|&g| vec![g]).collect()
    } else {
        grid.iter()
            .flat_map(|&g1| grid.iter().map(move |&g2| (g1, g2)))
            .map(|(g1, g2)| {
                let mut x = vec![a.fix; p];
                x[0] = g1;
                x[1] = g2;
                x
            })
            .collect()
    };
    let mut accs: Vec<SurfaceAccumulator> = (2..=k)
        .map(|level| SurfaceAccumulator::new(&SurfaceQuery { grid: &points, level, z: None, cluster: None }))
        .collect();
    for (config, theta) in &configs {
        for acc in &mut accs {
            acc.add(config, theta, &link)?;
        }
    }
    let means: Vec<Vec<f64>> = accs.iter().map(SurfaceAccumulator::mean).collect();
    let mut header = numbered("x", 1, p);
    header.extend(numbered("S", 2, k));
    header.extend(numbered("p", 1, k));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let s: Vec<f64> = std::iter::once(1.0).chain(means.iter().map(|m| m[i])).chain(std::iter::once(0.0)).collect();
            let mut r: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
            r.extend(s[1..k].iter().map(|v| fmt(*v)));
            r.extend(s.windows(2).map(|w| fmt(w[0] - w[1])));
            r
        })
        .collect();
    csv(&out.join("surface.csv"), &header, rows)?;
    Ok(())
}

pub fn diag(a: DiagArgs) -> Result<()> {
    let out = a.out.resolve();
    let run = Run::open(&a.run)?;
    let spec = &run.manifest.model;
    ensure_dir(&out)?;

    let subspaces = enumerate_subspaces_with_limit(spec.covariates, spec.max_covariates)?;
    let mut header = vec!["chain".to_string(), "iteration".to_string(), "log_likelihood".to_string(), "total_points".to_string()];
    header.extend(subspaces.iter().map(|s| format!("n_{}", subspace_label(*s))));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = run
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.chain.to_string(), r.iteration.to_string(), fmt(r.log_likelihood), r.total_points().to_string()];
            row.extend(r.counts.iter().map(usize::to_string));
            row
        })
        .collect();
    csv(&out.join("trace.csv"), &header, rows)?;

    let names = run.manifest.data.as_ref().map(|d| d.schema.monotone.clone()).unwrap_or_default();
    let mut rows = Vec::new();
    for j in 0..spec.covariates {
        let name = names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1));
        rows.push(vec![
            (j + 1).to_string(),
            name,
            fmt(inclusion_probability(&run.records, j)?),
            fmt(mean_point_count(&run.records, j)?),
        ]);
    }
    csv(&out.join("inclusion.csv"), &["covariate", "name", "inclusion_probability", "mean_point_count"], rows)?;

    if let Some(truth_path) = &a.truth {
        let training = run.training()?;
        let data = &training.dataset;
        let truth = read_truth(truth_path)?;
        let mut acc = MaeAccumulator::new(&truth, data.responses())?;
        for r in &run.records {
            acc.add_probs(&record_probs(r, spec, data)?);
        }
        let mut rows = Vec::new();
        for k in 1..=spec.levels {
            let count = data.responses().iter().filter(|&&y| y == k).count();
            let v = acc.mae_k(k).map(fmt).unwrap_or_else(|_| "NA".into());
            rows.push(vec![k.to_string(), v, count.to_string()]);
        }
        let overall = acc.mae_overall()?;
        rows.push(vec!["overall".into(), fmt(overall), data.len().to_string()]);
        csv(&out.join("mae.csv"), &["category", "mae", "observations"], rows)?;
        println!("overall MAE x 100: {:.3}", 100.0 * overall);
    }
    Ok(())
}

pub fn baseline(a: BaselineArgs) -> Result<()> {
    let out = a.out.resolve();
    let mut cfg = load_config(a.schedule.config.as_deref())?;
    let path = a
        .data
        .clone()
        .or(cfg.data.path.clone())
        .ok_or_else(|| usage("no dataset: pass --data or set [data] path in the config"))?;
    let s = &a.schedule;
    let b = &mut cfg.baseline;
    if let Some(v) = s.seed {
        b.seed = v;
    }
    if let Some(v) = s.iterations {
        b.iterations = v;
    }
    if let Some(v) = s.burn_in {
        b.burn_in = v;
    }
    if let Some(v) = s.thin {
        b.thin = v;
    }
    let loaded = load_dataset(&path, &cfg.data.schema)?;
    let fit = fit_po_baseline(&loaded.dataset, &cfg.baseline)?;
    ensure_dir(&out)?;

    let k = loaded.dataset.levels();
    let mut names: Vec<String> = (2..=k).map(|l| format!("alpha{l}")).collect();
    names.extend(loaded.schema.monotone.iter().chain(&loaded.schema.linear).map(|n| format!("beta_{n}")));
    let alphas = k - 1;
    let mut rows = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let values: Vec<f64> = fit
            .states
            .iter()
            .map(|s| if i < alphas { s.alpha[i] } else { s.beta[i - alphas] })
            .collect();
        let mode = if i < alphas { fit.mode.alpha[i] } else { fit.mode.beta[i - alphas] };
        let d = describe(&values);
        let acc = fit.acceptance.get(i).copied().unwrap_or(f64::NAN);
        rows.push(vec![name.clone(), fmt(mode), fmt(d[0]), fmt(d[1]), fmt(d[2]), fmt(d[4]), fmt(acc)]);
    }
    csv(&out.join("baseline.csv"), &["parameter", "mode", "mean", "sd", "q025", "q975", "acceptance"], rows)?;
    let rows = fit.log_likelihood.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), fmt(*v)]).collect();
    csv(&out.join("baseline_loglik.csv"), &["sample", "log_likelihood"], rows)?;
    if fit.diverged {
        eprintln!("warning: a coefficient drifted beyond the divergence bound; the data may be separable");
    }
    eprintln!("baseline mode log-likelihood {:.3}; results in {}", fit.mode_log_likelihood, out.display());
    Ok(())
}
