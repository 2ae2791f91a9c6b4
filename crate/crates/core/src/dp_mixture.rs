//! Blocked Gibbs sampler for Dirichlet-process mixtures of skew-normal
//! kernels, truncated at a fixed number of sticks, with the Gaussian
//! location-scale mixture as a special case.
//!
//! One sweep updates, in order:
//!
//! 1. allocations `S_i`, with the latent half-normal terms integrated out;
//! 2. the concentration `α`;
//! 3. the sticks `V_h`;
//! 4. the latent half-normal terms `η_i`;
//! 5. each atom's `(ξ_h, ω_h)` given `η`;
//! 6. each atom's shape `λ_h`, again with `η` integrated out.
//!
//! Steps 1 and 6 are partially collapsed. This is valid because `η` is
//! redrawn in step 4 before anything conditions on it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{chain_rng, ChainRng};
use crate::skew_normal::{truncated_positive_normal, SkewNormalParams, SunConditional};
use crate::special::ln_norm_cdf;

/// Kernel family of the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    /// Skew-normal with every shape pinned at zero.
    Gaussian,
    SkewNormal,
}

impl KernelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelFamily::SkewNormal => "skew-normal",
            KernelFamily::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skew-normal" | "skew_normal" | "sn" => Ok(KernelFamily::SkewNormal),
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            other => Err(Error::InvalidConfig(format!(
                "unknown kernel `{other}` (expected skew-normal or gaussian)"
            ))),
        }
    }
}

/// How the concentration parameter is refreshed in step 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaUpdate {
    /// Escobar and West's auxiliary-variable draw from `p(α | k, n)`. This is
    /// the conditional under the untruncated process; with a small number of
    /// sticks it is only approximately invariant.
    EscobarWest,
    /// Conjugate draw from `p(α | V_1, …, V_{H-1})`, exact under truncation.
    StickConditional,
}

impl AlphaUpdate {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlphaUpdate::EscobarWest => "escobar-west",
            AlphaUpdate::StickConditional => "stick-conditional",
        }
    }
}

impl FromStr for AlphaUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "escobar-west" | "escobar_west" => Ok(AlphaUpdate::EscobarWest),
            "stick-conditional" | "stick_conditional" | "sticks" => Ok(AlphaUpdate::StickConditional),
            other => Err(Error::InvalidConfig(format!(
                "unknown alpha update `{other}` (expected escobar-west or stick-conditional)"
            ))),
        }
    }
}

/// Hyperparameters of the atom prior
/// `N(ξ; ξ0, κω²) × Ga(ω⁻²; a, b) × N(λ; 0, ψ0)` and of `α ~ Ga(a_α, b_α)`.
/// Gamma distributions use the shape–rate parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseMeasure {
    pub xi0: f64,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub psi0: f64,
    pub a_alpha: f64,
    pub b_alpha: f64,
}

pub const DEFAULT_PSI0: f64 = 10.0;
pub const DEFAULT_A: f64 = 0.5;
pub const DEFAULT_B: f64 = 0.5;
pub const DEFAULT_A_ALPHA: f64 = 1.0;
pub const DEFAULT_B_ALPHA: f64 = 1.0;

impl BaseMeasure {
    pub fn new(xi0: f64, kappa: f64, a: f64, b: f64, psi0: f64, a_alpha: f64, b_alpha: f64) -> Result<Self> {
        let base = BaseMeasure {
            xi0,
            kappa,
            a,
            b,
            psi0,
            a_alpha,
            b_alpha,
        };
        base.validate()?;
        Ok(base)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.xi0.is_finite() {
            return Err(Error::param("xi0", format!("must be finite, got {}", self.xi0)));
        }
        let positive = [
            ("kappa", self.kappa),
            ("a", self.a),
            ("b", self.b),
            ("psi0", self.psi0),
            ("a_alpha", self.a_alpha),
            ("b_alpha", self.b_alpha),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Default prior centred on the data: `ξ0` = sample mean, `κ` = sample
    /// variance (1 when the sample has no spread), `ψ0 = 10`, `a = b = 1/2`,
    /// `α ~ Ga(1, 1)`.
    pub fn from_data(data: &[f64]) -> Result<Self> {
        let (mean, var) = mean_and_variance(data)?;
        let kappa = if var > 0.0 { var } else { 1.0 };
        BaseMeasure::new(mean, kappa, DEFAULT_A, DEFAULT_B, DEFAULT_PSI0, DEFAULT_A_ALPHA, DEFAULT_B_ALPHA)
    }

    pub fn with_alpha_prior(mut self, a_alpha: f64, b_alpha: f64) -> Result<Self> {
        self.a_alpha = a_alpha;
        self.b_alpha = b_alpha;
        self.validate()?;
        Ok(self)
    }

    /// One atom from the prior.
    pub fn sample_atom<R: Rng + ?Sized>(&self, kernel: KernelFamily, rng: &mut R) -> SkewNormalParams {
        let tau = gamma_rate(self.a, self.b, rng);
        self.atom_given_precision(tau, self.xi0, self.kappa, kernel, rng)
    }

    fn atom_given_precision<R: Rng + ?Sized>(
        &self,
        tau: f64,
        mean: f64,
        kappa: f64,
        kernel: KernelFamily,
        rng: &mut R,
    ) -> SkewNormalParams {
        let omega = precision_to_scale(tau);
        let z: f64 = StandardNormal.sample(rng);
        let xi = mean + (kappa / tau).sqrt() * z;
        let lambda = match kernel {
            KernelFamily::SkewNormal => {
                let z: f64 = StandardNormal.sample(rng);
                self.psi0.sqrt() * z
            }
            KernelFamily::Gaussian => 0.0,
        };
        checked_atom(xi, omega, lambda)
    }

    /// Draw of `α` from its prior.
    pub fn sample_alpha<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        gamma_rate(self.a_alpha, self.b_alpha, rng).max(f64::MIN_POSITIVE)
    }
}

/// Sample mean and (n − 1)-denominator variance; the variance is 0 for n = 1.
pub fn mean_and_variance(data: &[f64]) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::InvalidData("no observations".into()));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!(
            "observation {} is not finite ({})",
            i + 1,
            data[i]
        )));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = if data.len() > 1 {
        data.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, var))
}

fn precision_to_scale(tau: f64) -> f64 {
    // Keep ω strictly positive and finite even for extreme gamma draws.
    (1.0 / tau.max(1e-300)).sqrt().clamp(1e-150, 1e150)
}

fn checked_atom(xi: f64, omega: f64, lambda: f64) -> SkewNormalParams {
    let xi = if xi.is_finite() { xi } else { xi.signum() * f64::MAX.sqrt() };
    SkewNormalParams::new(xi, omega, lambda).expect("atom parameters are finite by construction")
}

/// Draw from Ga(shape, rate).
pub(crate) fn gamma_rate<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    ln_gamma_variate(shape, rng).exp() / rate
}

/// `ln X` for `X ~ Ga(shape, 1)`. Small shapes use `X = Y U^{1/shape}` with
/// `Y ~ Ga(shape + 1)` so the logarithm stays finite when `X` underflows.
pub(crate) fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("positive shape");
        return g.sample(rng).ln();
    }
    let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape");
    let y: f64 = g.sample(rng);
    let u: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    y.ln() + u.ln() / shape
}

/// `(ln B, ln(1 − B))` for `B ~ Be(p, q)`.
pub(crate) fn ln_beta_variate<R: Rng + ?Sized>(p: f64, q: f64, rng: &mut R) -> (f64, f64) {
    let lx = ln_gamma_variate(p, rng);
    let ly = ln_gamma_variate(q, rng);
    let m = lx.max(ly);
    let ln_sum = m + ((lx - m).exp() + (ly - m).exp()).ln();
    (lx - ln_sum, ly - ln_sum)
}

/// Full state of the blocked sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    atoms: Vec<SkewNormalParams>,
    ln_sticks: Vec<f64>,
    ln_one_minus_sticks: Vec<f64>,
    ln_weights: Vec<f64>,
    weights: Vec<f64>,
    alloc: Vec<usize>,
    counts: Vec<usize>,
    eta: Vec<f64>,
    alpha: f64,
    proposal_sd: Vec<f64>,
    adapt_steps: Vec<u64>,
    adapting: bool,
    shape_proposals: u64,
    shape_accepts: u64,
}

const INITIAL_PROPOSAL_SD: f64 = 1.0;
const TARGET_ACCEPTANCE: f64 = 0.35;

impl ChainState {
    /// A state for `n` observations drawn entirely from the prior: `α`, the
    /// sticks, the atoms, the allocations, and the half-normal terms.
    pub fn sample_prior<R: Rng + ?Sized>(
        n: usize,
        h_max: usize,
        base: &BaseMeasure,
        kernel: KernelFamily,
        rng: &mut R,
    ) -> Self {
        assert!(h_max >= 1, "at least one stick is required");
        let alpha = base.sample_alpha(rng);
        let atoms = (0..h_max).map(|_| base.sample_atom(kernel, rng)).collect();
        let mut state = ChainState {
            atoms,
            ln_sticks: vec![0.0; h_max],
            ln_one_minus_sticks: vec![f64::NEG_INFINITY; h_max],
            ln_weights: vec![0.0; h_max],
            weights: vec![0.0; h_max],
            alloc: vec![0; n],
            counts: vec![0; h_max],
            eta: vec![0.0; n],
            alpha,
            proposal_sd: vec![INITIAL_PROPOSAL_SD; h_max],
            adapt_steps: vec![0; h_max],
            adapting: false,
            shape_proposals: 0,
            shape_accepts: 0,
        };
        for h in 0..h_max - 1 {
            let (lv, l1v) = ln_beta_variate(1.0, alpha, rng);
            state.ln_sticks[h] = lv;
            state.ln_one_minus_sticks[h] = l1v;
        }
        state.refresh_weights();
        for i in 0..n {
            let h = sample_categorical(&state.weights, rng);
            state.alloc[i] = h;
            state.counts[h] += 1;
            let omega = state.atoms[h].omega();
            state.eta[i] = truncated_positive_normal(0.0, omega * omega, rng);
        }
        state
    }

    /// One observation per allocation, drawn from the allocated atom.
    pub fn simulate_data<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.alloc.iter().map(|&h| self.atoms[h].sample(rng)).collect()
    }

    pub fn h_max(&self) -> usize {
        self.atoms.len()
    }

    pub fn n(&self) -> usize {
        self.alloc.len()
    }

    pub fn atoms(&self) -> &[SkewNormalParams] {
        &self.atoms
    }

    pub fn set_atom(&mut self, h: usize, atom: SkewNormalParams) {
        self.atoms[h] = atom;
    }

    /// Stick proportions `V_h`; the last is always 1.
    pub fn sticks(&self) -> Vec<f64> {
        self.ln_sticks.iter().map(|v| v.exp()).collect()
    }

    /// Sets the sticks from `(ln V_h, ln(1 − V_h))` pairs for `h < H_max`; the
    /// last stick is fixed at 1.
    pub fn set_ln_sticks(&mut self, ln_sticks: &[(f64, f64)]) {
        assert_eq!(ln_sticks.len() + 1, self.h_max());
        for (h, &(lv, l1v)) in ln_sticks.iter().enumerate() {
            self.ln_sticks[h] = lv;
            self.ln_one_minus_sticks[h] = l1v;
        }
        self.refresh_weights();
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    /// Zero-based allocation of each observation.
    pub fn alloc(&self) -> &[usize] {
        &self.alloc
    }

    pub fn set_alloc(&mut self, alloc: &[usize]) {
        assert_eq!(alloc.len(), self.n());
        self.counts.iter_mut().for_each(|c| *c = 0);
        for (slot, &h) in self.alloc.iter_mut().zip(alloc) {
            assert!(h < self.atoms.len());
            *slot = h;
            self.counts[h] += 1;
        }
    }

    /// Number of observations allocated to each atom.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn set_eta(&mut self, eta: &[f64]) {
        assert_eq!(eta.len(), self.n());
        assert!(eta.iter().all(|&e| e > 0.0));
        self.eta.copy_from_slice(eta);
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        assert!(alpha > 0.0);
        self.alpha = alpha;
    }

    /// Number of atoms with at least one observation.
    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Enables Robbins–Monro tuning of the shape proposals.
    pub fn set_adapting(&mut self, adapting: bool) {
        self.adapting = adapting;
    }

    pub fn proposal_sd(&self) -> &[f64] {
        &self.proposal_sd
    }

    /// `(proposals, accepted)` for shape moves made while not adapting.
    pub fn shape_moves(&self) -> (u64, u64) {
        (self.shape_proposals, self.shape_accepts)
    }

    fn refresh_weights(&mut self) {
        let h_max = self.h_max();
        self.ln_sticks[h_max - 1] = 0.0;
        self.ln_one_minus_sticks[h_max - 1] = f64::NEG_INFINITY;
        let mut ln_rest = 0.0;
        for h in 0..h_max {
            self.ln_weights[h] = self.ln_sticks[h] + ln_rest;
            self.weights[h] = self.ln_weights[h].exp();
            ln_rest += self.ln_one_minus_sticks[h];
        }
    }
}

fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (h, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return h;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Draws an index with probabilities proportional to `exp(ln_p)`, using
/// `scratch` for the normalized weights. Entries equal to −∞ are never drawn.
pub(crate) fn sample_log_categorical<R: Rng + ?Sized>(ln_p: &[f64], scratch: &mut Vec<f64>, rng: &mut R) -> usize {
    let max = ln_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scratch.clear();
    if max == f64::NEG_INFINITY {
        // Nothing has positive probability; fall back to the first index.
        return 0;
    }
    scratch.extend(ln_p.iter().map(|&l| (l - max).exp()));
    sample_categorical(scratch, rng)
}

/// The update operators of the sampler for a fixed prior and kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gibbs {
    pub base: BaseMeasure,
    pub kernel: KernelFamily,
    pub alpha_update: AlphaUpdate,
    /// Metropolis moves per atom per sweep in the shape update.
    pub shape_moves: usize,
}

impl Gibbs {
    pub fn new(base: BaseMeasure, kernel: KernelFamily) -> Self {
        Gibbs {
            base,
            kernel,
            alpha_update: AlphaUpdate::StickConditional,
            shape_moves: DEFAULT_SHAPE_MOVES,
        }
    }

    /// Step 1: `Pr(S_i = h) ∝ π_h f_SN(y_i; ξ_h, ω_h, λ_h)`, normalized in log
    /// space.
    pub fn update_allocations<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &[f64], rng: &mut R) {
        assert_eq!(data.len(), state.n());
        let h_max = state.h_max();
        let consts: Vec<f64> = (0..h_max)
            .map(|h| state.ln_weights[h] + std::f64::consts::LN_2 - state.atoms[h].omega().ln())
            .collect();
        let mut ln_p = vec![0.0; h_max];
        let mut scratch = Vec::with_capacity(h_max);
        state.counts.iter_mut().for_each(|c| *c = 0);
        for (i, &y) in data.iter().enumerate() {
            for h in 0..h_max {
                ln_p[h] = if consts[h] == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    let atom = &state.atoms[h];
                    let z = atom.standardize(y);
                    let skew = if atom.lambda() == 0.0 {
                        -std::f64::consts::LN_2
                    } else {
                        ln_norm_cdf(atom.lambda() * z)
                    };
                    consts[h] - 0.5 * z * z + skew
                };
            }
            let h = sample_log_categorical(&ln_p, &mut scratch, rng);
            state.alloc[i] = h;
            state.counts[h] += 1;
        }
    }

    /// Step 2.
    pub fn update_alpha<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let alpha = match self.alpha_update {
            AlphaUpdate::EscobarWest => escobar_west(
                state.alpha,
                state.occupied(),
                state.n(),
                self.base.a_alpha,
                self.base.b_alpha,
                rng,
            ),
            AlphaUpdate::StickConditional => {
                let h_max = state.h_max();
                let ln_rest: f64 = state.ln_one_minus_sticks[..h_max - 1].iter().sum();
                gamma_rate(self.base.a_alpha + (h_max - 1) as f64, self.base.b_alpha - ln_rest, rng)
            }
        };
        state.alpha = alpha.max(f64::MIN_POSITIVE);
    }

    /// Step 3: `V_h ~ Be(1 + n_h, α + Σ_{l>h} n_l)` for `h < H_max`, `V_{H_max} = 1`.
    pub fn update_sticks<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let h_max = state.h_max();
        let mut tail: usize = state.counts.iter().sum();
        for h in 0..h_max - 1 {
            tail -= state.counts[h];
            let (lv, l1v) = ln_beta_variate(1.0 + state.counts[h] as f64, state.alpha + tail as f64, rng);
            state.ln_sticks[h] = lv;
            state.ln_one_minus_sticks[h] = l1v;
        }
        state.refresh_weights();
    }

    /// Step 4: `η_i ~ N(δ(y_i − ξ), ω²(1 − δ²))` truncated to `(0, ∞)`, using
    /// the atom of `S_i`.
    pub fn update_eta<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &[f64], rng: &mut R) {
        for (i, &y) in data.iter().enumerate() {
            let p = state.atoms[state.alloc[i]];
            let omega2 = p.omega() * p.omega();
            state.eta[i] = truncated_positive_normal(p.delta() * (y - p.xi()), omega2 * p.one_minus_delta_sq(), rng);
        }
    }

    /// Step 5 for atom `h`.
    ///
    /// With `τ = ω⁻²`, `c = 1 − δ²`, `r_i = y_i − δη_i` over the `n` members,
    /// the augmented likelihood and prior give, after integrating out `ξ`,
    ///
    /// `τ ~ Ga(a + n, b + ½[Ση_i² + Σ(r_i − r̄)²/c + n(r̄ − ξ0)²/(c + nκ)])`
    ///
    /// and then `ξ | τ ~ N((κΣr_i + cξ0)/(nκ + c), κc/((nκ + c)τ))`.
    ///
    /// For the Gaussian kernel the half-normal terms carry no information
    /// about the atom and are integrated out instead, giving the usual
    /// normal–gamma update with shape `a + n/2`.
    pub fn update_atom_location_scale<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        data: &[f64],
        h: usize,
        rng: &mut R,
    ) {
        let members = state.alloc.iter().enumerate().filter(|&(_, &s)| s == h).map(|(i, _)| i);
        let current = state.atoms[h];
        let stats = match self.kernel {
            KernelFamily::SkewNormal => ClusterStats::skew(members, data, &state.eta, current.delta()),
            KernelFamily::Gaussian => ClusterStats::gaussian(members, data),
        };
        state.atoms[h] = self.draw_location_scale(&stats, current.one_minus_delta_sq(), current.lambda(), rng);
    }

    fn draw_location_scale<R: Rng + ?Sized>(
        &self,
        stats: &ClusterStats,
        c: f64,
        lambda: f64,
        rng: &mut R,
    ) -> SkewNormalParams {
        let base = &self.base;
        let kappa = base.kappa;
        if stats.n == 0 {
            let tau = gamma_rate(base.a, base.b, rng);
            let z: f64 = StandardNormal.sample(rng);
            return checked_atom(base.xi0 + (kappa / tau).sqrt() * z, precision_to_scale(tau), lambda);
        }
        let n = stats.n as f64;
        let mean = stats.sum / n;
        let (shape, rate, c) = match self.kernel {
            KernelFamily::SkewNormal => {
                let denom = c + n * kappa;
                let quad = stats.sum_eta_sq + stats.ss / c + n * (mean - base.xi0).powi(2) / denom;
                (base.a + n, base.b + 0.5 * quad, c)
            }
            KernelFamily::Gaussian => {
                let denom = 1.0 + n * kappa;
                let quad = stats.ss + n * (mean - base.xi0).powi(2) / denom;
                (base.a + 0.5 * n, base.b + 0.5 * quad, 1.0)
            }
        };
        let tau = gamma_rate(shape, rate, rng);
        let denom = n * kappa + c;
        let mu = (kappa * stats.sum + c * base.xi0) / denom;
        let kappa_hat = kappa * c / denom;
        let z: f64 = StandardNormal.sample(rng);
        checked_atom(mu + (kappa_hat / tau).sqrt() * z, precision_to_scale(tau), lambda)
    }

    /// Step 6 for atom `h`: Metropolis moves on `N(λ; 0, ψ0) ∏ Φ(λ z_i)` with
    /// `z_i = (y_i − ξ_h)/ω_h` over the members. No-op for the Gaussian kernel.
    pub fn update_atom_shape<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &[f64], h: usize, rng: &mut R) {
        if self.kernel == KernelFamily::Gaussian {
            return;
        }
        let atom = state.atoms[h];
        let z: Vec<f64> = state
            .alloc
            .iter()
            .zip(data)
            .filter(|(&s, _)| s == h)
            .map(|(_, &y)| atom.standardize(y))
            .collect();
        let target = SunConditional::new(self.base.psi0, z).expect("valid prior variance and residuals");
        let mut lambda = atom.lambda();
        for _ in 0..self.shape_moves.max(1) {
            let draw = target.sample(lambda, state.proposal_sd[h], rng);
            lambda = draw.value;
            let Some(accepted) = draw.accepted else {
                // Exact prior draw; further moves are unnecessary.
                break;
            };
            if state.adapting {
                state.adapt_steps[h] += 1;
                let gain = (state.adapt_steps[h] as f64).powf(-0.6);
                let step = gain * (if accepted { 1.0 } else { 0.0 } - TARGET_ACCEPTANCE);
                state.proposal_sd[h] = (state.proposal_sd[h].ln() + step).exp().clamp(1e-3, 1e3);
            } else {
                state.shape_proposals += 1;
                state.shape_accepts += u64::from(accepted);
            }
        }
        state.atoms[h] = checked_atom(atom.xi(), atom.omega(), lambda);
    }

    /// Steps 2–6 given current allocations.
    pub fn update_given_allocations<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &[f64], rng: &mut R) {
        self.update_alpha(state, rng);
        self.update_sticks(state, rng);
        self.update_eta(state, data, rng);
        let h_max = state.h_max();
        let stats = match self.kernel {
            KernelFamily::SkewNormal => None,
            KernelFamily::Gaussian => Some(gaussian_stats_all(state, data)),
        };
        for h in 0..h_max {
            match &stats {
                Some(all) => {
                    let current = state.atoms[h];
                    state.atoms[h] = self.draw_location_scale(&all[h], 1.0, current.lambda(), rng);
                }
                None => {
                    self.update_atom_location_scale(state, data, h, rng);
                    self.update_atom_shape(state, data, h, rng);
                }
            }
        }
    }

    /// One full sweep (steps 1–6) on continuous data.
    pub fn sweep<R: Rng + ?Sized>(&self, state: &mut ChainState, data: &[f64], rng: &mut R) {
        self.update_allocations(state, data, rng);
        self.update_given_allocations(state, data, rng);
    }
}

pub const DEFAULT_SHAPE_MOVES: usize = 5;

/// Escobar–West draw of `α` given `k` occupied clusters among `n`
/// observations under the prior `Ga(a, b)`.
pub fn escobar_west<R: Rng + ?Sized>(alpha: f64, k: usize, n: usize, a: f64, b: f64, rng: &mut R) -> f64 {
    assert!(k >= 1 && n >= 1);
    let (ln_eta, _) = ln_beta_variate(alpha + 1.0, n as f64, rng);
    let rate = b - ln_eta;
    let k = k as f64;
    let odds = (a + k - 1.0) / (n as f64 * rate);
    let shape = if rng.random::<f64>() * (1.0 + odds) < odds {
        a + k
    } else {
        a + k - 1.0
    };
    if shape <= 0.0 {
        // Only reachable when a + k − 1 = 0, which needs a = 0; guard anyway.
        return f64::MIN_POSITIVE;
    }
    gamma_rate(shape, rate, rng).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, Default)]
struct ClusterStats {
    n: usize,
    /// Σ r_i (skew-normal) or Σ y_i (Gaussian).
    sum: f64,
    /// Centered sum of squares of the same quantity.
    ss: f64,
    sum_eta_sq: f64,
}

impl ClusterStats {
    fn skew(members: impl Iterator<Item = usize>, data: &[f64], eta: &[f64], delta: f64) -> Self {
        let mut s = Welford::default();
        let mut sum_eta_sq = 0.0;
        for i in members {
            s.push(data[i] - delta * eta[i]);
            sum_eta_sq += eta[i] * eta[i];
        }
        ClusterStats {
            n: s.n,
            sum: s.mean * s.n as f64,
            ss: s.m2,
            sum_eta_sq,
        }
    }

    fn gaussian(members: impl Iterator<Item = usize>, data: &[f64]) -> Self {
        let mut s = Welford::default();
        for i in members {
            s.push(data[i]);
        }
        ClusterStats {
            n: s.n,
            sum: s.mean * s.n as f64,
            ss: s.m2,
            sum_eta_sq: 0.0,
        }
    }
}

fn gaussian_stats_all(state: &ChainState, data: &[f64]) -> Vec<ClusterStats> {
    let mut acc = vec![Welford::default(); state.h_max()];
    for (&h, &y) in state.alloc.iter().zip(data) {
        acc[h].push(y);
    }
    acc.into_iter()
        .map(|s| ClusterStats {
            n: s.n,
            sum: s.mean * s.n as f64,
            ss: s.m2,
            sum_eta_sq: 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }
}

/// Settings of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub h_max: usize,
    /// Total sweeps, burn-in included.
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Stream of the ChaCha generator; lets many chains share one seed.
    pub stream: u64,
    pub kernel: KernelFamily,
    pub base: BaseMeasure,
    pub alpha_update: AlphaUpdate,
    pub shape_moves: usize,
}

pub const DEFAULT_H_MAX: usize = 50;
pub const DEFAULT_N_ITER: usize = 6000;
pub const DEFAULT_BURN_IN: usize = 1000;

impl ChainConfig {
    pub fn new(base: BaseMeasure, kernel: KernelFamily, seed: u64) -> Self {
        ChainConfig {
            h_max: DEFAULT_H_MAX,
            n_iter: DEFAULT_N_ITER,
            burn_in: DEFAULT_BURN_IN,
            thin: 1,
            seed,
            stream: 0,
            kernel,
            base,
            alpha_update: AlphaUpdate::StickConditional,
            shape_moves: DEFAULT_SHAPE_MOVES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.h_max == 0 {
            return Err(Error::InvalidConfig("h_max must be at least 1".into()));
        }
        if self.n_iter <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.n_iter, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        Ok(())
    }

    pub fn gibbs(&self) -> Gibbs {
        Gibbs {
            base: self.base,
            kernel: self.kernel,
            alpha_update: self.alpha_update,
            shape_moves: self.shape_moves,
        }
    }

    pub fn retained(&self) -> usize {
        (self.n_iter - self.burn_in).div_ceil(self.thin)
    }
}

/// One retained draw of the mixing measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub alpha: f64,
    pub weights: Vec<f64>,
    pub atoms: Vec<SkewNormalParams>,
    /// Number of occupied atoms.
    pub occupied: usize,
}

impl Draw {
    fn from_state(state: &ChainState) -> Self {
        Draw {
            alpha: state.alpha,
            weights: state.weights.clone(),
            atoms: state.atoms.clone(),
            occupied: state.occupied(),
        }
    }

    /// Mixture density `Σ_h π_h f_SN(x; θ_h)`.
    pub fn density(&self, x: f64) -> f64 {
        self.weights.iter().zip(&self.atoms).map(|(w, p)| w * p.pdf(x)).sum()
    }

    /// Mixture distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.atoms)
            .filter(|(&w, _)| w > 0.0)
            .map(|(w, p)| w * p.cdf(x))
            .sum::<f64>()
            .min(1.0)
    }
}

/// Counters reported alongside the draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub shape_proposals: u64,
    pub shape_accepts: u64,
    /// Latent imputations that fell back to a cell midpoint (discrete data).
    pub imputation_fallbacks: u64,
}

impl ChainDiagnostics {
    pub fn shape_acceptance_rate(&self) -> Option<f64> {
        (self.shape_proposals > 0).then(|| self.shape_accepts as f64 / self.shape_proposals as f64)
    }
}

/// Retained draws of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub kernel: KernelFamily,
    pub draws: Vec<Draw>,
    pub diagnostics: ChainDiagnostics,
}

/// Atoms contributing less than this to the density anywhere are skipped
/// when averaging over draws.
const NEGLIGIBLE_DENSITY: f64 = 1e-16;

/// Beyond this many scales from its location a skew-normal density is below
/// the smallest subnormal double.
const DENSITY_SUPPORT_SCALES: f64 = 39.0;

impl PosteriorSummary {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Posterior mean of the density at each grid point.
    pub fn posterior_mean_density(&self, grid: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        if grid.is_empty() || self.draws.is_empty() {
            return out;
        }
        let sorted = grid.windows(2).all(|w| w[0] <= w[1]);
        for draw in &self.draws {
            for (&w, p) in draw.weights.iter().zip(&draw.atoms) {
                if w * 0.8 / p.omega() < NEGLIGIBLE_DENSITY {
                    continue;
                }
                let (lo, hi) = if sorted {
                    // On the side the shape points away from, the density
                    // decays like exp(−(1 + λ²) z² / 2).
                    let reach = DENSITY_SUPPORT_SCALES * p.omega();
                    let short = reach / (1.0 + p.lambda() * p.lambda()).sqrt();
                    let (left, right) = if p.lambda() >= 0.0 { (short, reach) } else { (reach, short) };
                    (
                        grid.partition_point(|&x| x < p.xi() - left),
                        grid.partition_point(|&x| x <= p.xi() + right),
                    )
                } else {
                    (0, grid.len())
                };
                for (o, &x) in out[lo..hi].iter_mut().zip(&grid[lo..hi]) {
                    *o += w * p.pdf(x);
                }
            }
        }
        let m = self.draws.len() as f64;
        out.iter_mut().for_each(|v| *v /= m);
        out
    }

    /// Density of each draw at `x`.
    pub fn density_trace(&self, x: f64) -> Vec<f64> {
        self.draws.iter().map(|d| d.density(x)).collect()
    }

    pub fn occupied_counts(&self) -> Vec<usize> {
        self.draws.iter().map(|d| d.occupied).collect()
    }

    pub fn alpha_trace(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.alpha).collect()
    }

    pub fn mean_occupied(&self) -> f64 {
        mean(self.draws.iter().map(|d| d.occupied as f64))
    }

    pub fn mean_alpha(&self) -> f64 {
        mean(self.draws.iter().map(|d| d.alpha))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    values.sum::<f64>() / n as f64
}

/// Runs a chain from a prior draw of the state, calling `sweep` once per
/// iteration, and retains thinned post-burn-in draws. Shape proposals adapt
/// during burn-in only.
pub(crate) fn run_sweeps<F>(config: &ChainConfig, n: usize, mut sweep: F) -> (PosteriorSummary, ChainState, ChainRng)
where
    F: FnMut(&mut ChainState, &mut ChainRng),
{
    let mut rng = chain_rng(config.seed, config.stream);
    let mut state = ChainState::sample_prior(n, config.h_max, &config.base, config.kernel, &mut rng);
    let mut draws = Vec::with_capacity(config.retained());
    for iter in 0..config.n_iter {
        state.set_adapting(iter < config.burn_in);
        sweep(&mut state, &mut rng);
        if iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0 {
            draws.push(Draw::from_state(&state));
        }
    }
    let (shape_proposals, shape_accepts) = state.shape_moves();
    let summary = PosteriorSummary {
        kernel: config.kernel,
        draws,
        diagnostics: ChainDiagnostics {
            shape_proposals,
            shape_accepts,
            imputation_fallbacks: 0,
        },
    };
    (summary, state, rng)
}

/// Fits the mixture to continuous data.
pub fn run_chain(data: &[f64], config: &ChainConfig) -> Result<PosteriorSummary> {
    mean_and_variance(data)?;
    config.validate()?;
    let gibbs = config.gibbs();
    let (summary, _, _) = run_sweeps(config, data.len(), |state, rng| gibbs.sweep(state, data, rng));
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chain_rng;

    fn base() -> BaseMeasure {
        BaseMeasure::new(0.0, 4.0, 2.0, 2.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn base_measure_rejects_nonpositive() {
        assert!(BaseMeasure::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(BaseMeasure::new(0.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(BaseMeasure::new(f64::NAN, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn from_data_uses_sample_moments() {
        let b = BaseMeasure::from_data(&[1.0, 2.0, 3.0, 6.0]).unwrap();
        assert_eq!(b.xi0, 3.0);
        assert!((b.kappa - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!((b.a, b.b, b.psi0, b.a_alpha, b.b_alpha), (0.5, 0.5, 10.0, 1.0, 1.0));
        assert_eq!(BaseMeasure::from_data(&[2.0, 2.0]).unwrap().kappa, 1.0);
        assert!(BaseMeasure::from_data(&[]).is_err());
        assert!(BaseMeasure::from_data(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn kernel_names_round_trip() {
        for k in [KernelFamily::SkewNormal, KernelFamily::Gaussian] {
            assert_eq!(k.as_str().parse::<KernelFamily>().unwrap(), k);
        }
        assert!("cauchy".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn prior_state_is_consistent() {
        let mut rng = chain_rng(1, 0);
        let s = ChainState::sample_prior(20, 7, &base(), KernelFamily::SkewNormal, &mut rng);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s.sticks()[6], 1.0);
        assert_eq!(s.counts().iter().sum::<usize>(), 20);
        assert!(s.eta().iter().all(|&e| e > 0.0));
        assert!(s.occupied() >= 1 && s.occupied() <= 7);
    }

    #[test]
    fn single_stick_allocates_everything_to_it() {
        let mut rng = chain_rng(2, 0);
        let g = Gibbs::new(base(), KernelFamily::SkewNormal);
        let mut s = ChainState::sample_prior(5, 1, &base(), KernelFamily::SkewNormal, &mut rng);
        g.sweep(&mut s, &[0.1, 5.0, -3.0, 2.0, 7.0], &mut rng);
        assert!(s.alloc().iter().all(|&h| h == 0));
        assert_eq!(s.weights(), &[1.0]);
    }

    #[test]
    fn separated_atoms_allocate_deterministically() {
        let mut rng = chain_rng(3, 0);
        let g = Gibbs::new(base(), KernelFamily::SkewNormal);
        let mut s = ChainState::sample_prior(1, 2, &base(), KernelFamily::SkewNormal, &mut rng);
        s.set_atom(0, SkewNormalParams::new(-100.0, 1.0, 0.5).unwrap());
        s.set_atom(1, SkewNormalParams::new(100.0, 1.0, -0.5).unwrap());
        for _ in 0..100 {
            g.update_allocations(&mut s, &[-100.0], &mut rng);
            assert_eq!(s.alloc(), &[0]);
        }
    }

    #[test]
    fn gaussian_kernel_keeps_shapes_at_zero() {
        let mut rng = chain_rng(4, 0);
        let data = [0.3, 1.2, -0.5, 4.0, 4.4];
        let cfg = ChainConfig {
            n_iter: 50,
            burn_in: 10,
            h_max: 5,
            ..ChainConfig::new(base(), KernelFamily::Gaussian, 9)
        };
        let summary = run_chain(&data, &cfg).unwrap();
        assert_eq!(summary.len(), 40);
        assert!(summary.draws.iter().all(|d| d.atoms.iter().all(|p| p.lambda() == 0.0)));
        let mut s = ChainState::sample_prior(5, 5, &base(), KernelFamily::Gaussian, &mut rng);
        cfg.gibbs().sweep(&mut s, &data, &mut rng);
        assert!(s.atoms().iter().all(|p| p.lambda() == 0.0));
    }

    #[test]
    fn small_alpha_sticks_stay_finite() {
        let mut rng = chain_rng(5, 0);
        let mut s = ChainState::sample_prior(3, 10, &base(), KernelFamily::SkewNormal, &mut rng);
        s.set_alpha(1e-6);
        Gibbs::new(base(), KernelFamily::SkewNormal).update_sticks(&mut s, &mut rng);
        assert!(s.ln_one_minus_sticks.iter().take(9).all(|v| v.is_finite()));
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn escobar_west_stays_positive_at_extremes() {
        let mut rng = chain_rng(6, 0);
        let mut alpha = 1.0;
        for i in 0..100_000 {
            let k = if i % 2 == 0 { 1 } else { 200 };
            alpha = escobar_west(alpha, k, 200, 0.5, 50.0, &mut rng);
            assert!(alpha > 0.0 && alpha.is_finite());
        }
    }

    #[test]
    fn run_chain_validates_inputs() {
        let cfg = ChainConfig::new(base(), KernelFamily::SkewNormal, 1);
        assert!(run_chain(&[], &cfg).is_err());
        assert!(run_chain(&[f64::NAN], &cfg).is_err());
        let bad = ChainConfig {
            burn_in: 6000,
            ..cfg.clone()
        };
        assert!(run_chain(&[1.0], &bad).is_err());
        let bad = ChainConfig { thin: 0, ..cfg };
        assert!(run_chain(&[1.0], &bad).is_err());
    }

    #[test]
    fn retained_count_respects_thinning() {
        let cfg = ChainConfig {
            n_iter: 110,
            burn_in: 10,
            thin: 3,
            h_max: 3,
            ..ChainConfig::new(base(), KernelFamily::Gaussian, 1)
        };
        assert_eq!(cfg.retained(), 34);
        assert_eq!(run_chain(&[0.0, 1.0], &cfg).unwrap().len(), 34);
    }

    #[test]
    fn single_draw_density_is_atom_pdf() {
        let atom = SkewNormalParams::new(0.5, 1.5, 2.0).unwrap();
        let summary = PosteriorSummary {
            kernel: KernelFamily::SkewNormal,
            draws: vec![Draw {
                alpha: 1.0,
                weights: vec![1.0],
                atoms: vec![atom],
                occupied: 1,
            }],
            diagnostics: ChainDiagnostics::default(),
        };
        let grid = [-3.0, 0.0, 0.5, 2.0, 100.0];
        let dens = summary.posterior_mean_density(&grid);
        for (d, &x) in dens.iter().zip(&grid) {
            assert_eq!(*d, atom.pdf(x));
        }
        assert!(summary.posterior_mean_density(&[]).is_empty());
    }
}
