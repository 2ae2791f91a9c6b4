//! Distances between estimated and true distributions, and posterior
//! summaries of fitted chains.

use serde::Serialize;

use crate::dp_mixture::{mean_and_variance, PosteriorSummary};
use crate::error::{Error, Result};

/// Values of a density at ascending grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidData(format!(
                "{} grid points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.len() < 2 {
            return Err(Error::InvalidData("a density grid needs at least two points".into()));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData("grid points must be finite and strictly ascending".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidData(format!("density value {v} is not a finite nonnegative number")));
        }
        Ok(DensityGrid { points, values })
    }

    /// Evaluates `f` on `points`.
    pub fn from_fn(points: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = points.iter().map(|&x| f(x)).collect();
        DensityGrid::new(points, values)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid integral of the values.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.points, &self.values)
    }

    fn check_same_points(&self, other: &DensityGrid) -> Result<()> {
        if self.points != other.points {
            return Err(Error::InvalidData("densities are tabulated on different grids".into()));
        }
        Ok(())
    }
}

/// Trapezoid rule for `y` tabulated at ascending `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Below this the reference density counts as zero (`0 · ln 0 = 0`).
pub const KL_DENSITY_FLOOR: f64 = 1e-300;

/// Kullback–Leibler divergence. When the reference has mass where the
/// estimate has none the value is `+∞` and `infinite` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlDivergence {
    pub value: f64,
    pub infinite: bool,
}

impl KlDivergence {
    fn finite(value: f64) -> Self {
        KlDivergence { value, infinite: false }
    }

    fn unbounded() -> Self {
        KlDivergence {
            value: f64::INFINITY,
            infinite: true,
        }
    }
}

fn kl_term(f: f64, g: f64) -> Option<f64> {
    if f < KL_DENSITY_FLOOR {
        Some(0.0)
    } else if g <= 0.0 {
        None
    } else {
        Some(f * (f / g).ln())
    }
}

/// `∫ f ln(f/g)` by the trapezoid rule on the common grid.
pub fn kl_divergence(f: &DensityGrid, g: &DensityGrid) -> Result<KlDivergence> {
    f.check_same_points(g)?;
    let mut terms = Vec::with_capacity(f.values.len());
    for (&fv, &gv) in f.values.iter().zip(&g.values) {
        match kl_term(fv, gv) {
            Some(t) => terms.push(t),
            None => return Ok(KlDivergence::unbounded()),
        }
    }
    Ok(KlDivergence::finite(trapezoid(&f.points, &terms)))
}

/// `Σ_j f(j) ln(f(j)/g(j))` for pmfs on `0, 1, …`; a missing tail entry is 0.
pub fn kl_divergence_pmf(f: &[f64], g: &[f64]) -> KlDivergence {
    let mut total = 0.0;
    for (j, &fv) in f.iter().enumerate() {
        match kl_term(fv, g.get(j).copied().unwrap_or(0.0)) {
            Some(t) => total += t,
            None => return KlDivergence::unbounded(),
        }
    }
    KlDivergence::finite(total)
}

/// `(∫ (f − g)²)^{1/2}` by the trapezoid rule on the common grid.
pub fn l2_distance(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    f.check_same_points(g)?;
    let sq: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok(trapezoid(&f.points, &sq).sqrt())
}

/// `(Σ_j (f(j) − g(j))²)^{1/2}`; a missing tail entry is 0.
pub fn l2_distance_pmf(f: &[f64], g: &[f64]) -> f64 {
    let n = f.len().max(g.len());
    (0..n)
        .map(|j| {
            let d = f.get(j).copied().unwrap_or(0.0) - g.get(j).copied().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Sample standard deviations added on each side of the data range.
pub const GRID_PADDING_SDS: f64 = 4.0;

/// `points` equispaced values over `[min − 4 sd, max + 4 sd]` of the data.
/// A constant sample uses unit sd.
pub fn evaluation_grid(data: &[f64], points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidConfig("an evaluation grid needs at least two points".into()));
    }
    let (_, var) = mean_and_variance(data)?;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min) - GRID_PADDING_SDS * sd;
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max) + GRID_PADDING_SDS * sd;
    Ok(linspace(lo, hi, points))
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { hi } else { lo + k as f64 * step })
        .collect()
}

/// Posterior of the number of occupied components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPosterior {
    /// `probabilities[k]` is the share of draws with `k` occupied components.
    pub probabilities: Vec<f64>,
    pub mean: f64,
}

impl ClusterPosterior {
    pub fn from_counts(counts: &[usize]) -> Self {
        let Some(&max) = counts.iter().max() else {
            return ClusterPosterior {
                probabilities: Vec::new(),
                mean: f64::NAN,
            };
        };
        let mut hist = vec![0usize; max + 1];
        counts.iter().for_each(|&k| hist[k] += 1);
        let n = counts.len() as f64;
        ClusterPosterior {
            probabilities: hist.iter().map(|&c| c as f64 / n).collect(),
            mean: counts.iter().sum::<usize>() as f64 / n,
        }
    }
}

pub fn occupied_cluster_posterior(summary: &PosteriorSummary) -> ClusterPosterior {
    ClusterPosterior::from_counts(&summary.occupied_counts())
}

/// Batch-means effective sample size with batches of `⌊√n⌋` draws. A trace
/// with zero batch-means variance returns `+∞`.
pub fn batch_means_ess(trace: &[f64]) -> f64 {
    let n = trace.len();
    let size = (n as f64).sqrt().floor() as usize;
    if size == 0 || n / size < 2 {
        return f64::NAN;
    }
    if trace.iter().all(|&v| v == trace[0]) {
        return f64::INFINITY;
    }
    let batches = n / size;
    let used = &trace[..batches * size];
    let grand = used.iter().sum::<f64>() / used.len() as f64;
    let var = trace.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>() / (n - 1) as f64;
    let bm_var = used
        .chunks_exact(size)
        .map(|c| {
            let m = c.iter().sum::<f64>() / size as f64;
            (m - grand) * (m - grand)
        })
        .sum::<f64>()
        / (batches - 1) as f64;
    let sigma2 = size as f64 * bm_var;
    if sigma2 <= 0.0 {
        return f64::INFINITY;
    }
    n as f64 * var / sigma2
}

/// Trace of the density at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointTrace {
    pub x: f64,
    pub values: Vec<f64>,
    pub ess: f64,
}

pub fn trace_diagnostics(summary: &PosteriorSummary, points: &[f64]) -> Vec<PointTrace> {
    points
        .iter()
        .map(|&x| {
            let values = summary.density_trace(x);
            let ess = batch_means_ess(&values);
            PointTrace { x, values, ess }
        })
        .collect()
}

/// `count` points at evenly spaced quantile levels of the data, used to
/// monitor mixing of the density.
pub fn monitor_points(data: &[f64], count: usize) -> Vec<f64> {
    if data.is_empty() || count == 0 {
        return Vec::new();
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = (0..count)
        .map(|i| {
            let u = (i as f64 + 1.0) / (count as f64 + 1.0);
            sorted[((u * sorted.len() as f64) as usize).min(sorted.len() - 1)]
        })
        .collect();
    out.dedup();
    out
}
