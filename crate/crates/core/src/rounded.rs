//! Rounded skew-normal mixtures for counts.
//!
//! An observed integer `y` is `h(y*)` for a latent continuous `y*` drawn from
//! the skew-normal mixture, where `h(y*) = j` when `y*` falls in cell `j`,
//! `(a_j, a_{j+1}]`, with `a_0 = −∞`. The sampler imputes `y*` and then runs
//! the continuous updates on it.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dp_mixture::{
    run_sweeps, sample_log_categorical, BaseMeasure, ChainConfig, ChainState, Draw, Gibbs, PosteriorSummary,
};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::skew_normal::{solve_increasing, SkewNormalParams};
use crate::special::norm_cdf;

/// Built-in threshold conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingScheme {
    /// `a_j = j` for `j ≥ 1`; cell `j` is `(j, j + 1]` and cell 0 is `(−∞, 1]`.
    Count,
    /// Same thresholds with left-closed cells `[j, j + 1)`, so that
    /// `h(y*) = ⌊y*⌋` for `y* ≥ 1`.
    Floor,
    /// Thresholds read from a file.
    Custom,
}

/// Threshold sequence `−∞ = a_0 < a_1 < …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingGrid {
    scheme: RoundingScheme,
    /// Finite thresholds `a_1 < … < a_K` of a custom grid; the last cell is
    /// `(a_K, ∞)`. Empty for the built-in schemes.
    thresholds: Vec<f64>,
}

impl RoundingGrid {
    pub fn count() -> Self {
        RoundingGrid {
            scheme: RoundingScheme::Count,
            thresholds: Vec::new(),
        }
    }

    pub fn floor() -> Self {
        RoundingGrid {
            scheme: RoundingScheme::Floor,
            thresholds: Vec::new(),
        }
    }

    /// Custom grid from its finite thresholds `a_1 < … < a_K`.
    pub fn custom(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::InvalidConfig("a custom rounding grid needs at least one finite threshold".into()));
        }
        for (k, w) in thresholds.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::Parse {
                    line: k + 2,
                    message: format!("thresholds must be strictly increasing ({} then {})", w[0], w[1]),
                });
            }
        }
        if let Some(k) = thresholds.iter().position(|t| !t.is_finite()) {
            return Err(Error::Parse {
                line: k + 1,
                message: "thresholds after the first must be finite".into(),
            });
        }
        Ok(RoundingGrid {
            scheme: RoundingScheme::Custom,
            thresholds,
        })
    }

    /// Parses one threshold per line, ascending. A first line of `-inf` is
    /// accepted and otherwise implied. Blank lines and `#` comments are skipped.
    pub fn parse_thresholds(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                line: k + 1,
                message: format!("`{line}` is not a number"),
            })?;
            if v == f64::NEG_INFINITY && values.is_empty() {
                continue;
            }
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: k + 1,
                    message: format!("threshold `{line}` must be finite"),
                });
            }
            if let Some(&prev) = values.last() {
                if !(v > prev) {
                    return Err(Error::Parse {
                        line: k + 1,
                        message: format!("thresholds must be strictly increasing ({prev} then {v})"),
                    });
                }
            }
            values.push(v);
        }
        RoundingGrid::custom(values)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read threshold file {}: {e}", path.display())))?;
        RoundingGrid::parse_thresholds(&text)
    }

    pub fn scheme(&self) -> RoundingScheme {
        self.scheme
    }

    /// Finite thresholds of a custom grid.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Largest observable value, if the grid has finitely many cells.
    pub fn max_value(&self) -> Option<u64> {
        match self.scheme {
            RoundingScheme::Custom => Some(self.thresholds.len() as u64),
            _ => None,
        }
    }

    /// `a_j`.
    pub fn threshold(&self, j: u64) -> f64 {
        if j == 0 {
            return f64::NEG_INFINITY;
        }
        match self.scheme {
            RoundingScheme::Count | RoundingScheme::Floor => j as f64,
            RoundingScheme::Custom => self
                .thresholds
                .get((j - 1) as usize)
                .copied()
                .unwrap_or(f64::INFINITY),
        }
    }

    /// `(a_j, a_{j+1})`.
    pub fn cell(&self, j: u64) -> (f64, f64) {
        (self.threshold(j), self.threshold(j + 1))
    }

    /// `h(y*)`.
    pub fn round_value(&self, y_star: f64) -> u64 {
        match self.scheme {
            RoundingScheme::Count => {
                if y_star <= 1.0 {
                    0
                } else {
                    (y_star.ceil() - 1.0) as u64
                }
            }
            RoundingScheme::Floor => {
                if y_star < 1.0 {
                    0
                } else {
                    y_star.floor() as u64
                }
            }
            RoundingScheme::Custom => self.thresholds.partition_point(|&t| t < y_star) as u64,
        }
    }

    /// A representative latent value for cell `j`: its midpoint, or half a
    /// neighbouring cell width beyond the finite end of an infinite cell.
    pub fn representative(&self, j: u64) -> f64 {
        let (lo, hi) = self.cell(j);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (false, true) => {
                let width = self.threshold(j + 2) - hi;
                hi - 0.5 * if width.is_finite() { width } else { 1.0 }
            }
            (true, false) => {
                let width = if j >= 1 { lo - self.threshold(j - 1) } else { f64::INFINITY };
                lo + 0.5 * if width.is_finite() { width } else { 1.0 }
            }
            (false, false) => 0.0,
        }
    }

    /// Moves `x` into cell `j` if rounding error left it just outside.
    fn clamp_into(&self, j: u64, x: f64) -> f64 {
        let (lo, hi) = self.cell(j);
        let mut x = x;
        if self.scheme == RoundingScheme::Floor {
            // Cells are [lo, hi).
            if x < lo {
                x = lo;
            }
            if x >= hi {
                x = hi.next_down();
            }
        } else {
            if x <= lo {
                x = lo.next_up();
            }
            if x > hi {
                x = hi;
            }
        }
        x
    }

    /// Text form used in configuration files: `count`, `floor`, or `custom`.
    pub fn scheme_name(&self) -> &'static str {
        match self.scheme {
            RoundingScheme::Count => "count",
            RoundingScheme::Floor => "floor",
            RoundingScheme::Custom => "custom",
        }
    }
}

/// Cells whose probability under the distribution functions is below this
/// are integrated directly to keep relative precision.
const TAIL_MASS: f64 = 1e-10;

/// Width, in scales, of the window kept past the point where the log density
/// is largest; beyond it the density has dropped by more than e^-700.
const WINDOW_SCALES: f64 = 40.0;

/// Approximate mode of a skew-normal.
fn approx_mode(p: &SkewNormalParams) -> f64 {
    let delta = p.delta();
    let mu = delta * (2.0 / std::f64::consts::PI).sqrt();
    let sigma = (1.0 - mu * mu).sqrt();
    let skew = 0.5 * (4.0 - std::f64::consts::PI) * mu.powi(3) / sigma.powi(3);
    let lambda = p.lambda();
    let shift = if lambda == 0.0 {
        0.0
    } else {
        0.5 * lambda.signum() * (-2.0 * std::f64::consts::PI / lambda.abs()).exp()
    };
    p.xi() + p.omega() * (mu - 0.5 * skew * sigma - shift)
}

/// One monotone stretch of a cell. When the density decays quickly away
/// from the reference end the integral is taken in `t = 1 − e^{−s d / 8}`,
/// with `d` the distance from that end and `s` the decay rate of the tangent
/// to the log density there. The integrand in `t` is then close to
/// `(1 − t)^7`, which a single Kronrod panel handles.
#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    /// 0 for plain integration in `x`.
    decay: f64,
    anchored_at_a: bool,
}

const SUBSTITUTION_SLOWDOWN: f64 = 8.0;

/// Below this many e-folds across a piece plain integration is cheaper.
const SUBSTITUTION_EFOLDS: f64 = 1.0;

impl Piece {
    const EMPTY: Piece = Piece {
        a: 0.0,
        b: 0.0,
        decay: 0.0,
        anchored_at_a: true,
    };

    fn plain(a: f64, b: f64) -> Self {
        Piece {
            a,
            b,
            decay: 0.0,
            anchored_at_a: true,
        }
    }

    fn anchored(a: f64, b: f64, decay: f64, anchored_at_a: bool) -> Self {
        if decay * (b - a) > SUBSTITUTION_EFOLDS {
            Piece {
                a,
                b,
                decay,
                anchored_at_a,
            }
        } else {
            Piece::plain(a, b)
        }
    }

    fn is_empty(&self) -> bool {
        self.b <= self.a
    }

    /// ∫ exp(ln f − reference) over `[a, min(b, upto)]`.
    fn integral(&self, p: &SkewNormalParams, reference: f64, upto: f64) -> f64 {
        let c = self.b.min(upto);
        if c <= self.a {
            return 0.0;
        }
        if self.decay == 0.0 {
            return integrate_piece(|x| (p.ln_pdf(x) - reference).exp(), self.a, c);
        }
        let s = self.decay / SUBSTITUTION_SLOWDOWN;
        if self.anchored_at_a {
            let a = self.a;
            let t_hi = -(-s * (c - a)).exp_m1();
            integrate_piece(
                |t: f64| {
                    let x = a - (-t).ln_1p() / s;
                    (p.ln_pdf(x) - reference + s * (x - a)).exp() / s
                },
                0.0,
                t_hi,
            )
        } else {
            let b = self.b;
            let t_of = |x: f64| -(-s * (b - x)).exp_m1();
            integrate_piece(
                |t: f64| {
                    let x = b + (-t).ln_1p() / s;
                    (p.ln_pdf(x) - reference + s * (b - x)).exp() / s
                },
                t_of(c),
                t_of(self.a),
            )
        }
    }
}

/// Integration pieces for the log-scaled density over a cell: a reference
/// log density and at most two pieces, each monotone apart from a small
/// neighbourhood of the split point.
struct CellWindow {
    reference: f64,
    pieces: [Piece; 2],
}

/// Log-density drop past which a monotone piece is cut; by concavity the
/// neglected part is below `e^-46` of the integral.
const TANGENT_DROP: f64 = 46.0;

impl CellWindow {
    fn new(p: &SkewNormalParams, lo: f64, hi: f64) -> Self {
        let reach = WINDOW_SCALES * p.omega();
        let mode = approx_mode(p);
        if mode <= lo {
            let decay = (-p.ln_pdf_slope(lo)).max(0.0);
            let reach = if decay > 0.0 { reach.min(TANGENT_DROP / decay) } else { reach };
            CellWindow {
                reference: p.ln_pdf(lo),
                pieces: [Piece::anchored(lo, hi.min(lo + reach), decay, true), Piece::EMPTY],
            }
        } else if mode >= hi {
            let decay = p.ln_pdf_slope(hi).max(0.0);
            let reach = if decay > 0.0 { reach.min(TANGENT_DROP / decay) } else { reach };
            CellWindow {
                reference: p.ln_pdf(hi),
                pieces: [Piece::anchored(lo.max(hi - reach), hi, decay, false), Piece::EMPTY],
            }
        } else {
            CellWindow {
                reference: p.ln_pdf(mode),
                pieces: [Piece::plain(lo.max(mode - reach), mode), Piece::plain(mode, hi.min(mode + reach))],
            }
        }
    }

    fn integrand<'a>(&self, p: &'a SkewNormalParams) -> impl Fn(f64) -> f64 + 'a {
        let r = self.reference;
        move |x| (p.ln_pdf(x) - r).exp()
    }

    /// ∫ exp(ln f − reference) over the window, up to `x`.
    fn partial(&self, p: &SkewNormalParams, x: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|piece| !piece.is_empty())
            .map(|piece| piece.integral(p, self.reference, x))
            .sum()
    }

    fn total(&self, p: &SkewNormalParams) -> f64 {
        self.partial(p, f64::INFINITY)
    }

    fn span(&self) -> (f64, f64) {
        let lo = self.pieces[0].a;
        let hi = if self.pieces[1].is_empty() {
            self.pieces[0].b
        } else {
            self.pieces[1].b
        };
        (lo, hi)
    }
}

fn integrate_piece<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::integrate(f, a, b, 1e-300, 1e-11, 400).value
}

/// `ln P(a_j < Y* ≤ a_{j+1})` for a single skew-normal `Y*`, finite even
/// when the probability underflows.
pub fn ln_cell_mass(p: &SkewNormalParams, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => return 0.0,
        (false, true) => {
            let m = p.cdf(hi);
            if m >= TAIL_MASS {
                return m.ln();
            }
        }
        (true, false) => {
            let m = p.sf(lo);
            if m >= TAIL_MASS {
                return m.ln();
            }
        }
        (true, true) => {}
    }
    let w = CellWindow::new(p, lo, hi);
    let total = w.total(p);
    if total > 0.0 && total.is_finite() {
        w.reference + total.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `P(h(Y*) = j)` for a single skew-normal `Y*`.
pub fn cell_probability(p: &SkewNormalParams, grid: &RoundingGrid, j: u64) -> f64 {
    let (lo, hi) = grid.cell(j);
    ln_cell_mass(p, lo, hi).exp()
}

/// `P(h(Y*) = j)` for the mixture of one retained draw.
pub fn pmf_from_latent(draw: &Draw, grid: &RoundingGrid, j: u64) -> f64 {
    draw.weights
        .iter()
        .zip(&draw.atoms)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, p)| w * cell_probability(p, grid, j))
        .sum()
}

/// Outcome of one latent imputation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imputation {
    pub value: f64,
    /// The cell probability could not be resolved and the cell's
    /// representative point was used.
    pub fallback: bool,
}

/// Cell mass above which imputation uses rejection from the untruncated
/// kernel; the expected number of proposals is at most 1/0.05.
const REJECTION_MASS: f64 = 0.05;
const MAX_REJECTION_TRIES: usize = 200;

/// Draws `y*` from `p` truncated to cell `y`. `ln_mass` is the cell's log
/// probability if already known.
pub fn impute_latent<R: Rng + ?Sized>(
    y: u64,
    p: &SkewNormalParams,
    grid: &RoundingGrid,
    ln_mass: Option<f64>,
    rng: &mut R,
) -> Imputation {
    let (lo, hi) = grid.cell(y);
    let ln_mass = ln_mass.unwrap_or_else(|| ln_cell_mass(p, lo, hi));
    if ln_mass >= REJECTION_MASS.ln() {
        for _ in 0..MAX_REJECTION_TRIES {
            let x = p.sample(rng);
            if grid.round_value(x) == y {
                return Imputation {
                    value: x,
                    fallback: false,
                };
            }
        }
    }
    let u: f64 = rng.random();
    match invert_in_cell(p, lo, hi, ln_mass, u) {
        Some(x) => Imputation {
            value: grid.clamp_into(y, x),
            fallback: false,
        },
        None => Imputation {
            value: grid.representative(y),
            fallback: true,
        },
    }
}

/// Solves `P(lo < Y* ≤ x) = u P(lo < Y* ≤ hi)` for `x` by Newton steps on
/// the integrated density.
fn invert_in_cell(p: &SkewNormalParams, lo: f64, hi: f64, ln_mass: f64, u: f64) -> Option<f64> {
    if !ln_mass.is_finite() {
        return None;
    }
    let w = CellWindow::new(p, lo, hi);
    let total = w.total(p);
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let target = u * total;
    let (a, b) = w.span();
    let f = w.integrand(p);
    let x = solve_increasing(|x| w.partial(p, x) - target, |x| f(x), a, b, 0.5 * (a + b));
    x.is_finite().then_some(x)
}

/// Distinct observed values and, per observation, the index of its value.
#[derive(Debug, Clone)]
struct Distinct {
    values: Vec<u64>,
    index: Vec<usize>,
}

impl Distinct {
    fn new(data: &[u64]) -> Self {
        let mut values = data.to_vec();
        values.sort_unstable();
        values.dedup();
        let index = data.iter().map(|y| values.binary_search(y).expect("present")).collect();
        Distinct { values, index }
    }
}

/// Gibbs updates for rounded data.
#[derive(Debug, Clone)]
pub struct RoundedGibbs {
    pub gibbs: Gibbs,
    pub grid: RoundingGrid,
    distinct: Distinct,
    /// `ln P(cell of value u | atom h)` at `[u * H_max + h]`, valid for the
    /// atoms used in the last allocation update.
    ln_masses: Vec<f64>,
    ln_p: Vec<f64>,
    scratch: Vec<f64>,
    pub fallbacks: u64,
}

impl RoundedGibbs {
    pub fn new(gibbs: Gibbs, grid: RoundingGrid, data: &[u64]) -> Self {
        RoundedGibbs {
            gibbs,
            grid,
            distinct: Distinct::new(data),
            ln_masses: Vec::new(),
            ln_p: Vec::new(),
            scratch: Vec::new(),
            fallbacks: 0,
        }
    }

    /// `Pr(S_i = h) ∝ π_h P(h(Y*) = y_i | atom h)`, in log space.
    pub fn update_allocations_discrete<R: Rng + ?Sized>(&mut self, state: &mut ChainState, data: &[u64], rng: &mut R) {
        assert_eq!(data.len(), state.n());
        let h_max = state.h_max();
        let n_values = self.distinct.values.len();
        self.ln_masses.clear();
        self.ln_masses.resize(n_values * h_max, f64::NEG_INFINITY);
        for (u, &y) in self.distinct.values.iter().enumerate() {
            let (lo, hi) = self.grid.cell(y);
            for h in 0..h_max {
                if state.ln_weights()[h] > f64::NEG_INFINITY {
                    self.ln_masses[u * h_max + h] = ln_cell_mass(&state.atoms()[h], lo, hi);
                }
            }
        }
        let mut alloc = Vec::with_capacity(data.len());
        for i in 0..data.len() {
            let u = self.distinct.index[i];
            self.ln_p.clear();
            self.ln_p
                .extend((0..h_max).map(|h| state.ln_weights()[h] + self.ln_masses[u * h_max + h]));
            alloc.push(sample_log_categorical(&self.ln_p, &mut self.scratch, rng));
        }
        state.set_alloc(&alloc);
    }

    /// Draws every `y*_i` from its allocated atom truncated to the cell of
    /// `y_i`. Uses the cell masses of the last allocation update when they
    /// are current.
    pub fn impute_all<R: Rng + ?Sized>(
        &mut self,
        state: &ChainState,
        data: &[u64],
        latent: &mut [f64],
        cached: bool,
        rng: &mut R,
    ) {
        let h_max = state.h_max();
        for (i, &y) in data.iter().enumerate() {
            let h = state.alloc()[i];
            let ln_mass = cached.then(|| self.ln_masses[self.distinct.index[i] * h_max + h]);
            let imp = impute_latent(y, &state.atoms()[h], &self.grid, ln_mass, rng);
            self.fallbacks += u64::from(imp.fallback);
            latent[i] = imp.value;
        }
    }

    /// One sweep: discrete allocations (latent values integrated out), then
    /// imputation given the new allocations, then the continuous updates on
    /// the imputed values.
    pub fn sweep<R: Rng + ?Sized>(&mut self, state: &mut ChainState, data: &[u64], latent: &mut [f64], rng: &mut R) {
        self.update_allocations_discrete(state, data, rng);
        self.impute_all(state, data, latent, true, rng);
        self.gibbs.update_given_allocations(state, latent, rng);
    }
}

/// Default prior for counts: `ξ0` and `κ` are the mean and variance of the
/// cell representatives of the data; everything else as for continuous data.
pub fn base_measure_for_counts(data: &[u64], grid: &RoundingGrid) -> Result<BaseMeasure> {
    let reps: Vec<f64> = data.iter().map(|&y| grid.representative(y)).collect();
    BaseMeasure::from_data(&reps)
}

pub fn validate_counts(data: &[u64], grid: &RoundingGrid) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidData("no observations".into()));
    }
    if let Some(max) = grid.max_value() {
        if let Some(i) = data.iter().position(|&y| y > max) {
            return Err(Error::InvalidData(format!(
                "observation {} ({}) exceeds the last cell ({max}) of the rounding grid",
                i + 1,
                data[i]
            )));
        }
    }
    Ok(())
}

/// Fits the rounded mixture to counts.
pub fn run_chain_discrete(data: &[u64], grid: &RoundingGrid, config: &ChainConfig) -> Result<PosteriorSummary> {
    validate_counts(data, grid)?;
    config.validate()?;
    let mut sampler = RoundedGibbs::new(config.gibbs(), grid.clone(), data);
    let mut latent = vec![0.0; data.len()];
    let (mut summary, _, _) = run_sweeps(config, data.len(), |state, rng| {
        sampler.sweep(state, data, &mut latent, rng)
    });
    summary.diagnostics.imputation_fallbacks = sampler.fallbacks;
    Ok(summary)
}

/// Posterior mean pmf on `0..=j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfEstimate {
    pub values: Vec<f64>,
    pub j_max: u64,
}

/// Posterior mean of the latent distribution function must exceed this at
/// `a_{j_max + 1}`.
pub const PMF_COVERAGE: f64 = 1.0 - 1e-8;

/// Contributions below this are dropped when summing an atom's upper tail.
const NEGLIGIBLE_MASS: f64 = 1e-18;

/// Largest value the pmf search reaches on a grid without a last cell.
pub const PMF_SEARCH_LIMIT: u64 = 1 << 20;

/// Averages the pmf over draws and cuts at the smallest `j` whose cumulative
/// mass reaches [`PMF_COVERAGE`]. The search starts at `max(10 · max_y, 10)`
/// and grows fourfold, up to the grid's last cell or [`PMF_SEARCH_LIMIT`].
pub fn posterior_mean_pmf(summary: &PosteriorSummary, grid: &RoundingGrid, max_y: u64) -> PmfEstimate {
    let limit = grid.max_value().unwrap_or(PMF_SEARCH_LIMIT);
    let mut cap = max_y.saturating_mul(10).max(10).min(limit);
    let mut sums = pmf_sums(summary, grid, 0, cap);
    let n = summary.draws.len().max(1) as f64;
    loop {
        let mut cum = 0.0;
        let covered = sums.iter().position(|v| {
            cum += v / n;
            cum >= PMF_COVERAGE
        });
        if covered.is_some() || cap >= limit {
            let j_max = covered.map_or(cap, |j| j as u64);
            return PmfEstimate {
                values: sums[..=j_max as usize].iter().map(|v| v / n).collect(),
                j_max,
            };
        }
        let next = cap.saturating_mul(4).min(limit);
        sums.extend(pmf_sums(summary, grid, cap + 1, next));
        cap = next;
    }
}

/// Posterior mean pmf on `0..=cap`.
pub fn posterior_mean_pmf_upto(summary: &PosteriorSummary, grid: &RoundingGrid, cap: u64) -> Vec<f64> {
    let n = summary.draws.len().max(1) as f64;
    let mut out = pmf_sums(summary, grid, 0, cap);
    out.iter_mut().for_each(|v| *v /= n);
    out
}

/// `Σ_draws Σ_h w_h P(cell j | atom h)` for `j` in `from..=to`.
fn pmf_sums(summary: &PosteriorSummary, grid: &RoundingGrid, from: u64, to: u64) -> Vec<f64> {
    let mut out = vec![0.0; (to - from) as usize + 1];
    for draw in &summary.draws {
        for (&w, p) in draw.weights.iter().zip(&draw.atoms) {
            if w <= 0.0 {
                continue;
            }
            for j in from..=to {
                let (lo, hi) = grid.cell(j);
                if hi.is_finite() && hi < p.xi() && w * 2.0 * norm_cdf(p.standardize(hi)) < NEGLIGIBLE_MASS {
                    // Everything up to `hi` is at most 2Φ(z).
                    continue;
                }
                if lo.is_finite() && lo > p.xi() {
                    // Remaining upper tail is at most 2Φ(−z).
                    let bound = 2.0 * norm_cdf(-p.standardize(lo));
                    if w * bound < NEGLIGIBLE_MASS {
                        break;
                    }
                }
                out[(j - from) as usize] += w * ln_cell_mass(p, lo, hi).exp();
            }
        }
    }
    out
}
