use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde_json::json;
use skewmix::datasets::{galaxy_config, GALAXY_VELOCITIES};
use skewmix::dp_mixture::{run_chain, AlphaUpdate, BaseMeasure, ChainConfig, KernelFamily, PosteriorSummary};
use skewmix::eval::{
    batch_means_ess, evaluation_grid, kl_divergence, kl_divergence_pmf, l2_distance, l2_distance_pmf, monitor_points,
    occupied_cluster_posterior, trace_diagnostics, DensityGrid, DEFAULT_GRID_POINTS,
};
use skewmix::rounded::{
    base_measure_for_counts, pmf_from_latent, posterior_mean_pmf, run_chain_discrete, validate_counts, RoundingGrid,
};
use skewmix::sim::{
    render_table, replicate_data, run_study, scenario_law, summarize, ScenarioOptions, StudyConfig, StudyRecord,
    DEFAULT_REPLICATES, GAUSSIAN_PRECISION_PRIOR, SCENARIOS,
};

use super::args::Cli;
use super::bundle::{replace_file, Bundle};
use super::config::{join, parse_list, Mode, Resolved, Settings};
use super::input::{read_counts, read_reals};
use super::CliError;

const DEFAULT_SEED: u64 = 1;
/// Points (or count values) whose density traces are written out.
const MONITOR_POINTS: usize = 5;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mode = cli.command.mode();
    let args = cli.command.args();
    let settings = args.settings(mode)?;
    match mode {
        Mode::FitDensity => fit_density(&settings, args.force),
        Mode::FitPmf => fit_pmf(&settings, args.force),
        Mode::Simulate => simulate(&settings, args.force),
        Mode::Eval => evaluate(&settings),
    }
}

fn required<'a>(s: &'a Settings, key: &str) -> Result<&'a str, CliError> {
    s.raw(key).ok_or_else(|| CliError::Usage(format!("--{key} is required")))
}

fn kernel(s: &Settings) -> Result<KernelFamily, CliError> {
    Ok(s.get("kernel")?.unwrap_or(KernelFamily::SkewNormal))
}

/// Chain settings over `defaults`, recorded in key order.
fn resolve_chain(s: &Settings, defaults: ChainConfig, r: &mut Resolved) -> Result<ChainConfig, CliError> {
    let mut c = defaults;
    c.n_iter = s.get_in("iters", c.n_iter, 2, 100_000_000)?;
    c.burn_in = s.get_in("burnin", c.burn_in, 0, c.n_iter - 1)?;
    c.thin = s.get_in("thin", c.thin, 1, c.n_iter)?;
    c.seed = s.get("seed")?.unwrap_or(c.seed);
    c.h_max = s.get_in("hmax", c.h_max, 1, 10_000)?;
    c.alpha_update = s.get::<AlphaUpdate>("alpha-update")?.unwrap_or(c.alpha_update);
    c.shape_moves = s.get_in("shape-moves", c.shape_moves, 1, 1000)?;
    r.push("kernel", c.kernel);
    r.push("iters", c.n_iter);
    r.push("burnin", c.burn_in);
    r.push("thin", c.thin);
    r.push("seed", c.seed);
    r.push("hmax", c.h_max);
    r.push("alpha-update", c.alpha_update.as_str());
    r.push("shape-moves", c.shape_moves);
    Ok(c)
}

fn resolve_base(s: &Settings, defaults: BaseMeasure, r: &mut Resolved) -> Result<BaseMeasure, CliError> {
    let mut b = defaults;
    for (key, slot) in [
        ("xi0", &mut b.xi0),
        ("kappa", &mut b.kappa),
        ("a", &mut b.a),
        ("b", &mut b.b),
        ("psi0", &mut b.psi0),
        ("a-alpha", &mut b.a_alpha),
        ("b-alpha", &mut b.b_alpha),
    ] {
        if let Some(v) = s.get::<f64>(key)? {
            *slot = v;
        }
        r.push(key, *slot);
    }
    b.validate()?;
    Ok(b)
}

/// Parses the chain and prior settings against placeholder defaults, so a
/// bad setting is reported before any data is read.
fn precheck(s: &Settings, kernel: KernelFamily) -> Result<(), CliError> {
    let probe = BaseMeasure::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)?;
    let mut scratch = Resolved::default();
    resolve_chain(s, ChainConfig::new(probe, kernel, DEFAULT_SEED), &mut scratch)?;
    resolve_base(s, probe, &mut scratch)?;
    Ok(())
}

/// Default prior from the data; the Gaussian baseline takes `a = b = 1`.
fn default_base(mut base: BaseMeasure, kernel: KernelFamily) -> BaseMeasure {
    if kernel == KernelFamily::Gaussian {
        base.a = GAUSSIAN_PRECISION_PRIOR;
        base.b = GAUSSIAN_PRECISION_PRIOR;
    }
    base
}

fn parse_rounding(spec: &str) -> Result<RoundingGrid, CliError> {
    match spec {
        "count" => Ok(RoundingGrid::count()),
        "floor" => Ok(RoundingGrid::floor()),
        _ => match spec.strip_prefix("custom:") {
            Some(path) => RoundingGrid::from_file(Path::new(path)).map_err(|e| match e {
                skewmix::Error::Parse { .. } => CliError::Usage(format!("{path}: {e}")),
                other => other.into(),
            }),
            None => Err(CliError::Usage(format!(
                "unknown rounding `{spec}` (expected count, floor or custom:<file>)"
            ))),
        },
    }
}

fn output_path(s: &Settings) -> Result<PathBuf, CliError> {
    required(s, "output").map(PathBuf::from)
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Other(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Other(e.to_string()))
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("a JSON value always serializes");
    out.push(b'\n');
    out
}

/// Files shared by both fitting commands.
fn write_summaries(
    bundle: &Bundle,
    summary: &PosteriorSummary,
    monitor_names: &[String],
    monitor_traces: &[Vec<f64>],
) -> Result<serde_json::Value, CliError> {
    let clusters = occupied_cluster_posterior(summary);
    bundle.write(
        "clusters.csv",
        csv_bytes(
            &["k".into(), "probability".into()],
            clusters.probabilities.iter().enumerate().map(|(k, p)| vec![k.to_string(), p.to_string()]),
        )?,
    )?;

    let alpha = summary.alpha_trace();
    let occupied = summary.occupied_counts();
    let mut header = vec!["draw".to_string(), "alpha".into(), "occupied".into()];
    header.extend(monitor_names.iter().cloned());
    let rows = (0..summary.len()).map(|i| {
        let mut row = vec![(i + 1).to_string(), alpha[i].to_string(), occupied[i].to_string()];
        row.extend(monitor_traces.iter().map(|t| t[i].to_string()));
        row
    });
    bundle.write("trace.csv", csv_bytes(&header, rows)?)?;

    let occupied_f: Vec<f64> = occupied.iter().map(|&k| k as f64).collect();
    let monitors: Vec<_> = monitor_names
        .iter()
        .zip(monitor_traces)
        .map(|(name, t)| json!({"column": name, "ess": batch_means_ess(t)}))
        .collect();
    Ok(json!({
        "retained_draws": summary.len(),
        "posterior_mean_alpha": summary.mean_alpha(),
        "posterior_mean_occupied": clusters.mean,
        "occupied_cluster_probabilities": clusters.probabilities,
        "shape_acceptance_rate": summary.diagnostics.shape_acceptance_rate(),
        "ess": {"alpha": batch_means_ess(&alpha), "occupied": batch_means_ess(&occupied_f), "monitors": monitors},
    }))
}

fn manifest(mode: Mode, chain: &ChainConfig, n_obs: usize, r: &Resolved, extra: serde_json::Value) -> serde_json::Value {
    let mut m = json!({
        "command": mode.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "kernel": chain.kernel.as_str(),
        "seed": chain.seed,
        "observations": n_obs,
        "config": r.to_json(),
    });
    if let (Some(m), serde_json::Value::Object(extra)) = (m.as_object_mut(), extra) {
        m.extend(extra);
    }
    m
}

fn fit_density(s: &Settings, force: bool) -> Result<(), CliError> {
    let output = output_path(s)?;
    let mut r = Resolved::default();
    let galaxy = match s.raw("preset") {
        None | Some("none") => false,
        Some("galaxy") => true,
        Some(other) => return Err(CliError::Usage(format!("unknown preset `{other}` (expected galaxy)"))),
    };
    let kernel = kernel(s)?;
    precheck(s, kernel)?;
    let grid_points = s.get_in("grid-points", DEFAULT_GRID_POINTS, 2, 1_000_000)?;
    let data = if galaxy {
        if s.raw("input").is_some() {
            return Err(CliError::Usage("--input cannot be combined with --preset galaxy".into()));
        }
        r.push("preset", "galaxy");
        GALAXY_VELOCITIES.to_vec()
    } else {
        let input = required(s, "input")?;
        r.push("input", input);
        read_reals(Path::new(input))?
    };

    let defaults = if galaxy {
        galaxy_config(kernel, DEFAULT_SEED)?
    } else {
        ChainConfig::new(default_base(BaseMeasure::from_data(&data)?, kernel), kernel, DEFAULT_SEED)
    };
    let mut chain = resolve_chain(s, defaults, &mut r)?;
    chain.base = resolve_base(s, chain.base, &mut r)?;
    chain.validate()?;
    r.push("grid-points", grid_points);

    let summary = run_chain(&data, &chain)?;
    let grid = evaluation_grid(&data, grid_points)?;
    let density = summary.posterior_mean_density(&grid);
    let traces = trace_diagnostics(&summary, &monitor_points(&data, MONITOR_POINTS));

    let bundle = Bundle::stage(&output, force)?;
    bundle.write("config.txt", r.render(Mode::FitDensity))?;
    bundle.write(
        "density.csv",
        csv_bytes(
            &["x".into(), "density".into()],
            grid.iter().zip(&density).map(|(x, f)| vec![x.to_string(), f.to_string()]),
        )?,
    )?;
    let names: Vec<String> = traces.iter().map(|t| format!("density_at_{}", t.x)).collect();
    let values: Vec<Vec<f64>> = traces.into_iter().map(|t| t.values).collect();
    let mut extra = write_summaries(&bundle, &summary, &names, &values)?;
    extra["files"] = json!(["config.txt", "density.csv", "clusters.csv", "trace.csv"]);
    bundle.write("manifest.json", json_bytes(&manifest(Mode::FitDensity, &chain, data.len(), &r, extra)))?;
    bundle.commit()?;
    eprintln!(
        "fit-density: {} draws, E(k|-) = {:.3}, E(alpha|-) = {:.3}; wrote {}",
        summary.len(),
        summary.mean_occupied(),
        summary.mean_alpha(),
        output.display()
    );
    Ok(())
}

fn fit_pmf(s: &Settings, force: bool) -> Result<(), CliError> {
    let output = output_path(s)?;
    let mut r = Resolved::default();
    let input = required(s, "input")?;
    r.push("input", input);
    let rounding_spec = s.raw("rounding").unwrap_or("count");
    let grid = parse_rounding(rounding_spec)?;
    let kernel = kernel(s)?;
    precheck(s, kernel)?;
    let data = read_counts(Path::new(input))?;
    validate_counts(&data, &grid)?;

    let defaults = ChainConfig::new(default_base(base_measure_for_counts(&data, &grid)?, kernel), kernel, DEFAULT_SEED);
    let mut chain = resolve_chain(s, defaults, &mut r)?;
    chain.base = resolve_base(s, chain.base, &mut r)?;
    chain.validate()?;
    r.push("rounding", rounding_spec);

    let summary = run_chain_discrete(&data, &grid, &chain)?;
    let max_y = data.iter().copied().max().unwrap_or(0);
    let pmf = posterior_mean_pmf(&summary, &grid, max_y);
    let as_real: Vec<f64> = data.iter().map(|&y| y as f64).collect();
    let monitors: Vec<u64> = monitor_points(&as_real, MONITOR_POINTS).into_iter().map(|y| y as u64).collect();
    let traces: Vec<Vec<f64>> = monitors
        .iter()
        .map(|&j| summary.draws.iter().map(|d| pmf_from_latent(d, &grid, j)).collect())
        .collect();

    let bundle = Bundle::stage(&output, force)?;
    bundle.write("config.txt", r.render(Mode::FitPmf))?;
    bundle.write(
        "pmf.csv",
        csv_bytes(
            &["j".into(), "probability".into()],
            pmf.values.iter().enumerate().map(|(j, p)| vec![j.to_string(), p.to_string()]),
        )?,
    )?;
    let names: Vec<String> = monitors.iter().map(|j| format!("pmf_at_{j}")).collect();
    let mut extra = write_summaries(&bundle, &summary, &names, &traces)?;
    extra["files"] = json!(["config.txt", "pmf.csv", "clusters.csv", "trace.csv"]);
    extra["rounding"] = json!({"scheme": grid.scheme_name(), "thresholds": grid.thresholds()});
    extra["pmf_mass"] = json!(pmf.values.iter().sum::<f64>());
    extra["imputation_fallbacks"] = json!(summary.diagnostics.imputation_fallbacks);
    bundle.write("manifest.json", json_bytes(&manifest(Mode::FitPmf, &chain, data.len(), &r, extra)))?;
    bundle.commit()?;
    eprintln!(
        "fit-pmf: {} draws, E(k|-) = {:.3}, E(alpha|-) = {:.3}; wrote {}",
        summary.len(),
        summary.mean_occupied(),
        summary.mean_alpha(),
        output.display()
    );
    Ok(())
}

fn scenario_options(s: &Settings, r: &mut Resolved) -> Result<ScenarioOptions, CliError> {
    let options = ScenarioOptions {
        s1_variance: s.get("s1-variance")?.unwrap_or(false),
        s3_gamma_scale: s.get("s3-gamma-scale")?.unwrap_or(false),
    };
    r.push("s1-variance", options.s1_variance);
    r.push("s3-gamma-scale", options.s3_gamma_scale);
    Ok(options)
}

fn check_scenario(id: u8) -> Result<u8, CliError> {
    if SCENARIOS.contains(&id) {
        Ok(id)
    } else {
        Err(CliError::Usage(format!("unknown scenario {id}; expected 1 to 8")))
    }
}

/// Keys that may change between runs sharing one results file.
const STUDY_EXTENT_KEYS: [&str; 4] = ["scenario", "n", "kernel", "replicates"];

fn study_identity(config_text: &str) -> Vec<&str> {
    config_text
        .lines()
        .filter(|l| {
            let key = l.split('=').next().unwrap_or("").trim();
            !STUDY_EXTENT_KEYS.contains(&key)
        })
        .collect()
}

fn read_records(path: &Path) -> Result<Vec<StudyRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, row) in reader.deserialize::<StudyRecord>().enumerate() {
        match row {
            Ok(rec) => out.push(rec),
            // An interrupted append can leave a torn last line; that cell is rerun.
            Err(e) => eprintln!("warning: {}: skipping record {}: {e}", path.display(), k + 1),
        }
    }
    Ok(out)
}

fn simulate(s: &Settings, force: bool) -> Result<(), CliError> {
    let output = output_path(s)?;
    let mut r = Resolved::default();
    let scenarios: Vec<u8> = match s.raw("scenario") {
        None | Some("all") => SCENARIOS.collect(),
        Some(text) => parse_list::<u8>("scenario", text)?
            .into_iter()
            .map(check_scenario)
            .collect::<Result<_, _>>()?,
    };
    let sample_sizes: Vec<usize> = parse_list("n", s.raw("n").unwrap_or("50,100,200"))?;
    let kernels = match s.raw("kernel") {
        None | Some("both") => vec![KernelFamily::Gaussian, KernelFamily::SkewNormal],
        Some(_) => vec![kernel(s)?],
    };
    let defaults = StudyConfig::default();
    let mut config = StudyConfig {
        scenarios,
        sample_sizes,
        kernels,
        replicates: s.get_in("replicates", DEFAULT_REPLICATES, 1, 1_000_000)?,
        seed: s.get("seed")?.unwrap_or(DEFAULT_SEED),
        ..defaults.clone()
    };
    config.n_iter = s.get_in("iters", defaults.n_iter, 2, 100_000_000)?;
    config.burn_in = s.get_in("burnin", defaults.burn_in, 0, config.n_iter - 1)?;
    config.thin = s.get_in("thin", defaults.thin, 1, config.n_iter)?;
    config.h_max = s.get_in("hmax", defaults.h_max, 1, 10_000)?;
    config.grid_points = s.get_in("grid-points", defaults.grid_points, 2, 1_000_000)?;
    let rounding_spec = s.raw("rounding").unwrap_or("count");
    config.rounding = parse_rounding(rounding_spec)?;

    r.push("scenario", join(&config.scenarios));
    r.push("n", join(&config.sample_sizes));
    r.push(
        "kernel",
        if config.kernels.len() == 2 { "both" } else { config.kernels[0].as_str() },
    );
    r.push("replicates", config.replicates);
    r.push("seed", config.seed);
    r.push("iters", config.n_iter);
    r.push("burnin", config.burn_in);
    r.push("thin", config.thin);
    r.push("hmax", config.h_max);
    r.push("grid-points", config.grid_points);
    r.push("rounding", rounding_spec);
    config.options = scenario_options(s, &mut r)?;
    config.validate()?;
    let config_text = r.render(Mode::Simulate);

    if force && output.exists() {
        fs::remove_dir_all(&output).map_err(|e| CliError::Other(format!("{}: {e}", output.display())))?;
    }
    let results_path = output.join("results.csv");
    let config_path = output.join("config.txt");
    if results_path.exists() {
        let previous = fs::read_to_string(&config_path).map_err(|_| {
            CliError::Usage(format!("{} holds results but no config.txt", output.display()))
        })?;
        if study_identity(&previous) != study_identity(&config_text) {
            return Err(CliError::Usage(format!(
                "{} holds results from different settings; use another --output or --force",
                output.display()
            )));
        }
    }
    fs::create_dir_all(&output).map_err(|e| CliError::Other(format!("{}: {e}", output.display())))?;
    let previous: Vec<StudyRecord> = if results_path.exists() { read_records(&results_path)? } else { Vec::new() };
    let done: Vec<StudyRecord> = previous.iter().filter(|r| r.error.is_none()).cloned().collect();
    replace_file(&config_path, &config_text)?;

    // Single writer: every finished replicate is appended here, on this thread.
    let fresh = !results_path.exists();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&results_path)
        .map_err(|e| CliError::Other(format!("{}: {e}", results_path.display())))?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    let total = config.keys().len();
    let mut finished = config.keys().iter().filter(|k| done.iter().any(|d| d.key() == **k)).count();
    let records = run_study(&config, &done, |rec| {
        writer
            .serialize(rec)
            .and_then(|_| writer.flush().map_err(csv::Error::from))
            .map_err(|e| skewmix::Error::InvalidData(format!("cannot append to results: {e}")))?;
        finished += 1;
        match &rec.error {
            None => eprintln!(
                "[{finished}/{total}] scenario {} n={} {} replicate {}: KL {:.4} L2 {:.4}",
                rec.scenario, rec.n, rec.kernel, rec.replicate, rec.kl, rec.l2
            ),
            Some(e) => eprintln!(
                "[{finished}/{total}] scenario {} n={} {} replicate {} failed: {e}",
                rec.scenario, rec.n, rec.kernel, rec.replicate
            ),
        }
        Ok(())
    })
    .map_err(|e| match e {
        skewmix::Error::InvalidData(m) => CliError::Other(m),
        other => other.into(),
    })?;
    drop(writer);

    // Rewrite sorted, keeping cells of earlier runs outside this study.
    let mut all: BTreeMap<_, StudyRecord> = previous.into_iter().map(|r| (r.key(), r)).collect();
    all.extend(records.iter().map(|r| (r.key(), r.clone())));
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in all.values() {
        w.serialize(rec).map_err(|e| CliError::Other(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    replace_file(&results_path, bytes)?;

    let data_dir = output.join("data");
    fs::create_dir_all(&data_dir).map_err(|e| CliError::Other(format!("{}: {e}", data_dir.display())))?;
    for key in config.keys().iter().filter(|k| k.kernel == config.kernels[0]) {
        let sample = replicate_data(&config, *key)?;
        let name = format!("scenario{}_n{}_rep{}.txt", key.scenario, key.n, key.replicate);
        replace_file(&data_dir.join(name), sample.to_string())?;
    }

    let summaries = summarize(&records);
    let table = render_table(&summaries);
    replace_file(&output.join("table.txt"), &table)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let m = json!({
        "command": Mode::Simulate.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "records": records.len(),
        "failed": failed,
        "scenario_options": config.options,
        "rounding": {"scheme": config.rounding.scheme_name(), "thresholds": config.rounding.thresholds()},
        "cells": summaries,
        "files": ["config.txt", "results.csv", "table.txt", "data/"],
        "config": r.to_json(),
    });
    replace_file(&output.join("manifest.json"), json_bytes(&m))?;
    print!("{table}");
    if failed > 0 {
        eprintln!("{failed} replicate(s) failed; see the error column of {}", results_path.display());
    }
    Ok(())
}

fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let data_err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(data_err)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for row in reader.deserialize::<(f64, f64)>() {
        let (x, y) = row.map_err(data_err)?;
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

fn evaluate(s: &Settings) -> Result<(), CliError> {
    let mut r = Resolved::default();
    let bundle = PathBuf::from(required(s, "input")?);
    let id = check_scenario(
        s.get("scenario")?
            .ok_or_else(|| CliError::Usage("--scenario is required".into()))?,
    )?;
    r.push("scenario", id);
    let options = scenario_options(s, &mut r)?;
    let law = scenario_law(id, options)?;

    let density = bundle.join("density.csv");
    let pmf = bundle.join("pmf.csv");
    let (kl, l2) = if density.exists() {
        if law.is_discrete() {
            return Err(CliError::Usage(format!("scenario {id} is discrete but the bundle holds a density")));
        }
        let (xs, fs_) = read_two_columns(&density)?;
        let estimate = DensityGrid::new(xs.clone(), fs_)?;
        let truth = DensityGrid::from_fn(xs, |x| law.density(x))?;
        (kl_divergence(&truth, &estimate)?, l2_distance(&truth, &estimate)?)
    } else if pmf.exists() {
        if !law.is_discrete() {
            return Err(CliError::Usage(format!("scenario {id} is continuous but the bundle holds a pmf")));
        }
        let (_, mut estimate) = read_two_columns(&pmf)?;
        let mut truth = law.pmf_table();
        let len = truth.len().max(estimate.len());
        truth.resize(len, 0.0);
        estimate.resize(len, 0.0);
        (kl_divergence_pmf(&truth, &estimate), l2_distance_pmf(&truth, &estimate))
    } else {
        return Err(CliError::Data(format!("{} holds neither density.csv nor pmf.csv", bundle.display())));
    };
    let report = json!({
        "scenario": id,
        "kl": kl.value,
        "kl_infinite": kl.infinite,
        "l2": l2,
        "config": r.to_json(),
    });
    let bytes = json_bytes(&report);
    if let Some(out) = s.raw("output") {
        replace_file(Path::new(out), &bytes)?;
    }
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}
