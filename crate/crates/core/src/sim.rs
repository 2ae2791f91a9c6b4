//! Simulation scenarios and the replicate harness comparing the skew-normal
//! and Gaussian kernels.
//!
//! Scenarios 1–4 are continuous:
//!
//! | id | law |
//! |----|-----|
//! | 1 | 0.35 N(−2, 1) + 0.5 N(4, 2) + 0.15 N(5, 2.5) |
//! | 2 | 0.65 SN(0, 1, 5) + 0.35 SN(4, 2, 3) |
//! | 3 | 0.25 Ga(2, 1) + 0.75 N(3, 1) |
//! | 4 | exponential with mean 2 |
//!
//! and 5–8 are counts:
//!
//! | id | law |
//! |----|-----|
//! | 5 | p(2) = p(4) = 0.2, p(3) = 0.6 |
//! | 6 | COM-Poisson(λ = 3, ν = 5) |
//! | 7 | 0.65 Po(2.5) + 0.35 (9 + Po(0.5)) |
//! | 8 | 0.6 Po(0.5) + 0.4 R-Po(0.5, 12) |
//!
//! R-Po(λ, γ) has `p(j) ∝ λ^{γ−j}` on `0..=γ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp_mixture::{run_chain, BaseMeasure, ChainConfig, KernelFamily, DEFAULT_BURN_IN, DEFAULT_H_MAX, DEFAULT_N_ITER};
use crate::error::{Error, Result};
use crate::eval::{evaluation_grid, kl_divergence, kl_divergence_pmf, l2_distance, l2_distance_pmf, DensityGrid, DEFAULT_GRID_POINTS};
use crate::rng::{chain_rng, stream_id};
use crate::rounded::{base_measure_for_counts, posterior_mean_pmf, run_chain_discrete, RoundingGrid};
use crate::skew_normal::SkewNormalParams;

/// Probability left out when a count law is tabulated.
pub const PMF_TAIL: f64 = 1e-12;

/// One component of a scenario law.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Normal { mean: f64, sd: f64 },
    SkewNormal(SkewNormalParams),
    Gamma { shape: f64, rate: f64 },
    Exponential { mean: f64 },
    /// `shift + Po(lambda)`.
    Poisson { lambda: f64, shift: u64 },
    /// Finite pmf on `0..pmf.len()`, used for the 3-value, COM-Poisson and
    /// reversed-Poisson laws.
    Table { pmf: Vec<f64> },
}

fn ln_factorial(j: u64) -> f64 {
    libm::lgamma(j as f64 + 1.0)
}

impl Component {
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Component::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            Component::SkewNormal(p) => p.pdf(x),
            Component::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - libm::lgamma(shape)).exp()
                }
            }
            Component::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Component::Poisson { .. } | Component::Table { .. } => f64::NAN,
        }
    }

    pub fn pmf(&self, j: u64) -> f64 {
        match self {
            Component::Poisson { lambda, shift } => {
                if j < *shift {
                    0.0
                } else {
                    let k = j - shift;
                    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
                }
            }
            Component::Table { pmf } => pmf.get(j as usize).copied().unwrap_or(0.0),
            _ => f64::NAN,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Component::Normal { mean, .. } => *mean,
            Component::SkewNormal(p) => p.mean(),
            Component::Gamma { shape, rate } => shape / rate,
            Component::Exponential { mean } => *mean,
            Component::Poisson { lambda, shift } => *shift as f64 + lambda,
            Component::Table { pmf } => pmf.iter().enumerate().map(|(j, p)| j as f64 * p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Component::Normal { sd, .. } => sd * sd,
            Component::SkewNormal(p) => p.variance(),
            Component::Gamma { shape, rate } => shape / (rate * rate),
            Component::Exponential { mean } => mean * mean,
            Component::Poisson { lambda, .. } => *lambda,
            Component::Table { pmf } => {
                let m = self.mean();
                pmf.iter().enumerate().map(|(j, p)| (j as f64 - m).powi(2) * p).sum()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Component::Normal { mean, sd } => Normal::new(*mean, *sd).expect("valid normal").sample(rng),
            Component::SkewNormal(p) => p.sample(rng),
            Component::Gamma { shape, rate } => Gamma::new(*shape, 1.0 / rate).expect("valid gamma").sample(rng),
            Component::Exponential { mean } => Exp::new(1.0 / mean).expect("valid exponential").sample(rng),
            Component::Poisson { lambda, shift } => {
                *shift as f64 + Poisson::new(*lambda).expect("valid poisson").sample(rng)
            }
            Component::Table { pmf } => {
                let u: f64 = rng.random();
                let mut cum = 0.0;
                for (j, p) in pmf.iter().enumerate() {
                    cum += p;
                    if u < cum {
                        return j as f64;
                    }
                }
                (pmf.len() - 1) as f64
            }
        }
    }

    fn is_discrete(&self) -> bool {
        matches!(self, Component::Poisson { .. } | Component::Table { .. })
    }
}

/// COM-Poisson pmf `λ^j / (j!)^ν / Z`, tabulated until the terms left out
/// are below `PMF_TAIL · 1e-3` of `Z`.
pub fn com_poisson_pmf(lambda: f64, nu: f64) -> Vec<f64> {
    let mut ln_terms = Vec::new();
    let mut j = 0u64;
    loop {
        let t = j as f64 * lambda.ln() - nu * ln_factorial(j);
        ln_terms.push(t);
        // Past the mode successive ratios λ/(j+1)^ν fall below 1/2, so the
        // remaining tail is at most the current term.
        let ratio = lambda / ((j + 1) as f64).powf(nu);
        let max = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if ratio < 0.5 && t - max < (PMF_TAIL * 1e-3).ln() {
            break;
        }
        j += 1;
    }
    normalize_ln(&ln_terms)
}

/// Reversed Poisson `p(j) ∝ λ^{γ−j} e^{−λ}` on `0..=γ`.
pub fn reversed_poisson_pmf(lambda: f64, gamma: u64) -> Vec<f64> {
    let ln_terms: Vec<f64> = (0..=gamma).map(|j| (gamma - j) as f64 * lambda.ln() - lambda).collect();
    normalize_ln(&ln_terms)
}

fn normalize_ln(ln_terms: &[f64]) -> Vec<f64> {
    let max = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_terms.iter().map(|t| (t - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

/// Finite mixture used as a true law.
#[derive(Debug, Clone, PartialEq)]
pub struct Law {
    pub components: Vec<(f64, Component)>,
}

impl Law {
    pub fn is_discrete(&self) -> bool {
        self.components.iter().all(|(_, c)| c.is_discrete())
    }

    pub fn density(&self, x: f64) -> f64 {
        self.components.iter().map(|(w, c)| w * c.density(x)).sum()
    }

    pub fn pmf(&self, j: u64) -> f64 {
        self.components.iter().map(|(w, c)| w * c.pmf(j)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|(w, c)| w * c.mean()).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components
            .iter()
            .map(|(w, c)| w * (c.variance() + c.mean() * c.mean()))
            .sum::<f64>()
            - m * m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (w, c) in &self.components {
            cum += w;
            if u < cum {
                return c.sample(rng);
            }
        }
        self.components.last().expect("law has components").1.sample(rng)
    }

    /// Smallest `J` with `Σ_{j ≤ J} p(j) ≥ 1 − PMF_TAIL`.
    pub fn pmf_bound(&self) -> u64 {
        let mut cum = 0.0;
        let mut j = 0;
        loop {
            cum += self.pmf(j);
            if cum >= 1.0 - PMF_TAIL {
                return j;
            }
            j += 1;
        }
    }

    /// True pmf on `0..=pmf_bound()`.
    pub fn pmf_table(&self) -> Vec<f64> {
        (0..=self.pmf_bound()).map(|j| self.pmf(j)).collect()
    }
}

/// Readings of the ambiguous scenario parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    /// Read the second arguments of scenario 1's normals as variances
    /// instead of standard deviations.
    pub s1_variance: bool,
    /// Read the second argument of scenario 3's gamma as a scale instead of
    /// a rate.
    pub s3_gamma_scale: bool,
}

pub const SCENARIOS: std::ops::RangeInclusive<u8> = 1..=8;

pub fn is_discrete_scenario(id: u8) -> bool {
    (5..=8).contains(&id)
}

/// True law of scenario `id`.
pub fn scenario_law(id: u8, options: ScenarioOptions) -> Result<Law> {
    let sn = |xi, omega, lambda| SkewNormalParams::new(xi, omega, lambda).map(Component::SkewNormal);
    let normal = |mean: f64, second: f64, variance: bool| Component::Normal {
        mean,
        sd: if variance { second.sqrt() } else { second },
    };
    let components = match id {
        1 => {
            let v = options.s1_variance;
            vec![(0.35, normal(-2.0, 1.0, v)), (0.5, normal(4.0, 2.0, v)), (0.15, normal(5.0, 2.5, v))]
        }
        2 => vec![(0.65, sn(0.0, 1.0, 5.0)?), (0.35, sn(4.0, 2.0, 3.0)?)],
        3 => {
            let second = 1.0;
            let rate = if options.s3_gamma_scale { 1.0 / second } else { second };
            vec![(0.25, Component::Gamma { shape: 2.0, rate }), (0.75, normal(3.0, 1.0, false))]
        }
        4 => vec![(1.0, Component::Exponential { mean: 2.0 })],
        5 => vec![(
            1.0,
            Component::Table {
                pmf: vec![0.0, 0.0, 0.2, 0.6, 0.2],
            },
        )],
        6 => vec![(1.0, Component::Table { pmf: com_poisson_pmf(3.0, 5.0) })],
        7 => vec![
            (0.65, Component::Poisson { lambda: 2.5, shift: 0 }),
            (0.35, Component::Poisson { lambda: 0.5, shift: 9 }),
        ],
        8 => vec![
            (0.6, Component::Poisson { lambda: 0.5, shift: 0 }),
            (
                0.4,
                Component::Table {
                    pmf: reversed_poisson_pmf(0.5, 12),
                },
            ),
        ],
        _ => return Err(Error::InvalidConfig(format!("unknown scenario {id}; expected 1 to 8"))),
    };
    Ok(Law { components })
}

/// Simulated sample; counts are stored exactly as integers.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Continuous(Vec<f64>),
    Counts(Vec<u64>),
}

impl Sample {
    pub fn len(&self) -> usize {
        match self {
            Sample::Continuous(v) => v.len(),
            Sample::Counts(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn sample_law<R: Rng + ?Sized>(law: &Law, n: usize, rng: &mut R) -> Sample {
    if law.is_discrete() {
        Sample::Counts((0..n).map(|_| law.sample(rng) as u64).collect())
    } else {
        Sample::Continuous((0..n).map(|_| law.sample(rng)).collect())
    }
}

/// Settings of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenarios: Vec<u8>,
    pub sample_sizes: Vec<usize>,
    pub kernels: Vec<KernelFamily>,
    pub replicates: usize,
    pub seed: u64,
    pub h_max: usize,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub grid_points: usize,
    pub rounding: RoundingGrid,
    pub options: ScenarioOptions,
}

pub const DEFAULT_REPLICATES: usize = 20;

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            scenarios: SCENARIOS.collect(),
            sample_sizes: vec![50, 100, 200],
            kernels: vec![KernelFamily::Gaussian, KernelFamily::SkewNormal],
            replicates: DEFAULT_REPLICATES,
            seed: 1,
            h_max: DEFAULT_H_MAX,
            n_iter: DEFAULT_N_ITER,
            burn_in: DEFAULT_BURN_IN,
            thin: 1,
            grid_points: DEFAULT_GRID_POINTS,
            rounding: RoundingGrid::count(),
            options: ScenarioOptions::default(),
        }
    }
}

/// Precision hyperparameters `a = b` of the Gaussian baseline.
pub const GAUSSIAN_PRECISION_PRIOR: f64 = 1.0;

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        for &id in &self.scenarios {
            scenario_law(id, self.options)?;
        }
        if self.sample_sizes.iter().any(|&n| n < 2) {
            return Err(Error::InvalidConfig("sample sizes must be at least 2".into()));
        }
        if self.kernels.is_empty() || self.replicates == 0 {
            return Err(Error::InvalidConfig("a study needs at least one kernel and one replicate".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidConfig("grid points must be at least 2".into()));
        }
        let probe = BaseMeasure::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)?;
        self.chain_config(probe, KernelFamily::SkewNormal, 0).validate()
    }

    /// Every `(scenario, n, kernel, replicate)` cell in table order.
    pub fn keys(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &scenario in &self.scenarios {
            for &n in &self.sample_sizes {
                for &kernel in &self.kernels {
                    for replicate in 0..self.replicates {
                        out.push(CellKey {
                            scenario,
                            n,
                            kernel,
                            replicate,
                        });
                    }
                }
            }
        }
        out
    }

    fn chain_config(&self, base: BaseMeasure, kernel: KernelFamily, stream: u64) -> ChainConfig {
        ChainConfig {
            h_max: self.h_max,
            n_iter: self.n_iter,
            burn_in: self.burn_in,
            thin: self.thin,
            stream,
            ..ChainConfig::new(base, kernel, self.seed)
        }
    }
}

/// Identity of one replicate fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub scenario: u8,
    pub n: usize,
    pub kernel: KernelFamily,
    pub replicate: usize,
}

impl CellKey {
    fn kernel_code(&self) -> u64 {
        match self.kernel {
            KernelFamily::Gaussian => 1,
            KernelFamily::SkewNormal => 2,
        }
    }

    /// Stream of the simulated data; shared by both kernels so they fit the
    /// same data set.
    pub fn data_stream(&self) -> u64 {
        stream_id(&[self.scenario as u64, self.n as u64, self.replicate as u64, 0])
    }

    pub fn chain_stream(&self) -> u64 {
        stream_id(&[self.scenario as u64, self.n as u64, self.replicate as u64, self.kernel_code()])
    }
}

/// Outcome of one replicate fit. A failed fit has `error` set and NaN
/// metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub scenario: u8,
    pub n: usize,
    pub kernel: KernelFamily,
    pub replicate: usize,
    pub kl: f64,
    pub l2: f64,
    pub mean_k: f64,
    pub mean_alpha: f64,
    pub error: Option<String>,
}

impl StudyRecord {
    pub fn key(&self) -> CellKey {
        CellKey {
            scenario: self.scenario,
            n: self.n,
            kernel: self.kernel,
            replicate: self.replicate,
        }
    }

    fn failed(key: CellKey, message: String) -> Self {
        StudyRecord {
            scenario: key.scenario,
            n: key.n,
            kernel: key.kernel,
            replicate: key.replicate,
            kl: f64::NAN,
            l2: f64::NAN,
            mean_k: f64::NAN,
            mean_alpha: f64::NAN,
            error: Some(message),
        }
    }
}

/// Simulated data of a replicate.
pub fn replicate_data(config: &StudyConfig, key: CellKey) -> Result<Sample> {
    let law = scenario_law(key.scenario, config.options)?;
    let mut rng = chain_rng(config.seed, key.data_stream());
    Ok(sample_law(&law, key.n, &mut rng))
}

/// Simulates, fits and scores one replicate.
pub fn run_replicate(config: &StudyConfig, key: CellKey) -> Result<StudyRecord> {
    let law = scenario_law(key.scenario, config.options)?;
    let sample = replicate_data(config, key)?;
    let gaussian = key.kernel == KernelFamily::Gaussian;
    let (kl, l2, summary) = match sample {
        Sample::Continuous(data) => {
            let mut base = BaseMeasure::from_data(&data)?;
            if gaussian {
                base.a = GAUSSIAN_PRECISION_PRIOR;
                base.b = GAUSSIAN_PRECISION_PRIOR;
            }
            let chain = config.chain_config(base, key.kernel, key.chain_stream());
            let summary = run_chain(&data, &chain)?;
            let points = evaluation_grid(&data, config.grid_points)?;
            let truth = DensityGrid::from_fn(points.clone(), |x| law.density(x))?;
            let estimate = DensityGrid::new(points.clone(), summary.posterior_mean_density(&points))?;
            let kl = kl_divergence(&truth, &estimate)?;
            (kl.value, l2_distance(&truth, &estimate)?, summary)
        }
        Sample::Counts(data) => {
            let mut base = base_measure_for_counts(&data, &config.rounding)?;
            if gaussian {
                base.a = GAUSSIAN_PRECISION_PRIOR;
                base.b = GAUSSIAN_PRECISION_PRIOR;
            }
            let chain = config.chain_config(base, key.kernel, key.chain_stream());
            let summary = run_chain_discrete(&data, &config.rounding, &chain)?;
            let truth = law.pmf_table();
            let max_y = data.iter().copied().max().unwrap_or(0).max(truth.len() as u64 - 1);
            let estimate = posterior_mean_pmf(&summary, &config.rounding, max_y);
            let kl = kl_divergence_pmf(&truth, &estimate.values);
            (kl.value, l2_distance_pmf(&truth, &estimate.values), summary)
        }
    };
    Ok(StudyRecord {
        scenario: key.scenario,
        n: key.n,
        kernel: key.kernel,
        replicate: key.replicate,
        kl,
        l2,
        mean_k: summary.mean_occupied(),
        mean_alpha: summary.mean_alpha(),
        error: None,
    })
}

fn run_guarded(config: &StudyConfig, key: CellKey) -> StudyRecord {
    match catch_unwind(AssertUnwindSafe(|| run_replicate(config, key))) {
        Ok(Ok(record)) => record,
        Ok(Err(e)) => StudyRecord::failed(key, e.to_string()),
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "replicate panicked".into());
            StudyRecord::failed(key, format!("panic: {message}"))
        }
    }
}

/// Runs every cell of the study not already in `done`, in parallel. Each
/// finished record is handed to `sink` on the calling thread as it
/// completes. Returns all records, old and new, sorted by key.
pub fn run_study<F>(config: &StudyConfig, done: &[StudyRecord], mut sink: F) -> Result<Vec<StudyRecord>>
where
    F: FnMut(&StudyRecord) -> Result<()>,
{
    config.validate()?;
    let wanted: BTreeSet<CellKey> = config.keys().into_iter().collect();
    let mut records: BTreeMap<CellKey, StudyRecord> = done
        .iter()
        .filter(|r| wanted.contains(&r.key()))
        .map(|r| (r.key(), r.clone()))
        .collect();
    let todo: Vec<CellKey> = wanted.iter().filter(|k| !records.contains_key(k)).copied().collect();

    let (tx, rx) = mpsc::channel();
    let mut sink_result = Ok(());
    std::thread::scope(|scope| {
        scope.spawn(move || {
            todo.par_iter()
                .for_each_with(tx, |tx, &key| {
                    // The receiver only disappears if the sink failed.
                    let _ = tx.send(run_guarded(config, key));
                });
        });
        for record in rx {
            if sink_result.is_ok() {
                sink_result = sink(&record);
            }
            records.insert(record.key(), record);
        }
    });
    sink_result?;
    Ok(records.into_values().collect())
}

/// Mean metrics of one `(scenario, n, kernel)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub scenario: u8,
    pub n: usize,
    pub kernel: KernelFamily,
    pub completed: usize,
    pub failed: usize,
    pub kl: f64,
    pub l2: f64,
    pub mean_k: f64,
    pub mean_alpha: f64,
}

/// Averages completed replicates per cell, in key order.
pub fn summarize(records: &[StudyRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(u8, usize, KernelFamily), Vec<&StudyRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.scenario, r.n, r.kernel)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((scenario, n, kernel), rs)| {
            let ok: Vec<&&StudyRecord> = rs.iter().filter(|r| r.error.is_none()).collect();
            let avg = |f: fn(&StudyRecord) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            CellSummary {
                scenario,
                n,
                kernel,
                completed: ok.len(),
                failed: rs.len() - ok.len(),
                kl: avg(|r| r.kl),
                l2: avg(|r| r.l2),
                mean_k: avg(|r| r.mean_k),
                mean_alpha: avg(|r| r.mean_alpha),
            }
        })
        .collect()
}

/// Column headers of the rendered table.
pub const TABLE_COLUMNS: [&str; 4] = ["KL", "L2", "E(k|-)", "E(alpha|-)"];

/// Mean table with one block per scenario and one row per `(n, kernel)`.
pub fn render_table(summaries: &[CellSummary]) -> String {
    let mut out = String::new();
    let mut scenario = None;
    for s in summaries {
        if scenario != Some(s.scenario) {
            if scenario.is_some() {
                out.push('\n');
            }
            scenario = Some(s.scenario);
            let _ = writeln!(out, "Scenario {}", s.scenario);
            let _ = writeln!(
                out,
                "{:>5}  {:<12} {:>8} {:>8} {:>8} {:>10} {:>5}",
                "n", "kernel", TABLE_COLUMNS[0], TABLE_COLUMNS[1], TABLE_COLUMNS[2], TABLE_COLUMNS[3], "reps"
            );
        }
        let _ = write!(
            out,
            "{:>5}  {:<12} {:>8.3} {:>8.3} {:>8.3} {:>10.3} {:>5}",
            s.n, s.kernel, s.kl, s.l2, s.mean_k, s.mean_alpha, s.completed
        );
        if s.failed > 0 {
            let _ = write!(out, "  ({} failed)", s.failed);
        }
        out.push('\n');
    }
    out
}

impl fmt::Display for Sample {
    /// One value per line, the format read back by the fitting commands.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sample::Continuous(v) => v.iter().try_for_each(|x| writeln!(f, "{x}")),
            Sample::Counts(v) => v.iter().try_for_each(|x| writeln!(f, "{x}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_value_pmf() {
        let law = scenario_law(5, ScenarioOptions::default()).unwrap();
        assert_eq!(law.pmf(3), 0.6);
        assert_eq!(law.pmf(5), 0.0);
        assert_eq!(law.pmf_bound(), 4);
    }

    #[test]
    fn reversed_poisson_support_ends_at_gamma() {
        let p = reversed_poisson_pmf(0.5, 12);
        assert_eq!(p.len(), 13);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p[12] > p[11]);
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        assert!(scenario_law(9, ScenarioOptions::default()).is_err());
        assert!(scenario_law(0, ScenarioOptions::default()).is_err());
    }

    #[test]
    fn s1_variance_reading() {
        let sd = scenario_law(1, ScenarioOptions::default()).unwrap();
        let var = scenario_law(
            1,
            ScenarioOptions {
                s1_variance: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sd.variance() > var.variance());
    }

    #[test]
    fn keys_cover_every_cell() {
        let cfg = StudyConfig {
            scenarios: vec![4],
            sample_sizes: vec![50],
            replicates: 2,
            ..Default::default()
        };
        assert_eq!(cfg.keys().len(), 4);
        let k = cfg.keys();
        assert_eq!(k[0].data_stream(), k[2].data_stream());
        assert_ne!(k[0].chain_stream(), k[2].chain_stream());
    }
}
