//! Skew-normal distribution functions, random variates, and the
//! full conditional of a cluster's shape parameter.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_norm_cdf, ln_norm_pdf, norm_cdf, norm_pdf, norm_quantile, owens_t};

/// Shapes beyond this magnitude are treated as saturated when computing δ;
/// the kernel is numerically half-normal there.
pub const MAX_ABS_SHAPE: f64 = 1e8;

/// Half-width, in scale units, of the bracket used for quantile searches.
pub const QUANTILE_BRACKET_SCALES: f64 = 40.0;

const LN_2: f64 = std::f64::consts::LN_2;

/// Standardized mass below `z < 0` when `λ z < −1`, where Φ(z) − 2T(z, λ)
/// would cancel to noise. Integrates 2φ(t)Φ(λt) over t = z − s, s ≥ 0,
/// relative to its value at s = 0. The log integrand is concave with slope
/// at most −2 at s = 0, so 40 e-folds past its initial slope bound the tail.
fn short_tail(z: f64, lambda: f64) -> f64 {
    let lz = lambda * z;
    let ln_peak = LN_2 + ln_norm_pdf(z) + ln_norm_cdf(lz);
    let decay = -z + lambda * (ln_norm_pdf(lz) - ln_norm_cdf(lz)).exp();
    let ln_cdf_at = ln_norm_cdf(lz);
    let integral = crate::quadrature::integrate(
        |s: f64| (z * s - 0.5 * s * s + ln_norm_cdf(lambda * (z - s)) - ln_cdf_at).exp(),
        0.0,
        40.0 / decay,
        1e-300,
        1e-13,
        200,
    );
    (ln_peak.exp() * integral.value).clamp(0.0, 1.0)
}

/// A skew-normal kernel SN(ξ, ω, λ) with density (2/ω) φ(z) Φ(λ z), z = (x − ξ)/ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalParams {
    xi: f64,
    omega: f64,
    lambda: f64,
}

impl SkewNormalParams {
    pub fn new(xi: f64, omega: f64, lambda: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::param("xi", format!("location must be finite, got {xi}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", format!("scale must be positive and finite, got {omega}")));
        }
        if !lambda.is_finite() {
            return Err(Error::param("lambda", format!("shape must be finite, got {lambda}")));
        }
        Ok(SkewNormalParams { xi, omega, lambda })
    }

    /// The standard normal kernel with the given location and scale.
    pub fn normal(xi: f64, omega: f64) -> Result<Self> {
        Self::new(xi, omega, 0.0)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn saturated_lambda(&self) -> f64 {
        self.lambda.clamp(-MAX_ABS_SHAPE, MAX_ABS_SHAPE)
    }

    /// δ = λ / sqrt(1 + λ²), always strictly inside (−1, 1).
    pub fn delta(&self) -> f64 {
        let l = self.saturated_lambda();
        l / (1.0 + l * l).sqrt()
    }

    /// 1 − δ² computed without cancellation.
    pub fn one_minus_delta_sq(&self) -> f64 {
        let l = self.saturated_lambda();
        1.0 / (1.0 + l * l)
    }

    #[inline]
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.xi) / self.omega
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        if self.lambda == 0.0 {
            return norm_pdf(z) / self.omega;
        }
        2.0 / self.omega * norm_pdf(z) * norm_cdf(self.lambda * z)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        if self.lambda == 0.0 {
            return ln_norm_pdf(z) - self.omega.ln();
        }
        LN_2 - self.omega.ln() + ln_norm_pdf(z) + ln_norm_cdf(self.lambda * z)
    }

    /// Derivative of `ln_pdf`. The log density is concave, so its tangent
    /// bounds it from above.
    pub fn ln_pdf_slope(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        let lz = self.lambda * z;
        let mills = if self.lambda == 0.0 {
            0.0
        } else {
            self.lambda * (ln_norm_pdf(lz) - ln_norm_cdf(lz)).exp()
        };
        (mills - z) / self.omega
    }

    /// Distribution function Φ(z) − 2 T(z, λ).
    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        if z == f64::NEG_INFINITY {
            return 0.0;
        }
        if z == f64::INFINITY {
            return 1.0;
        }
        if self.lambda * z < -1.0 && z < 0.0 {
            return short_tail(z, self.lambda);
        }
        (norm_cdf(z) - 2.0 * owens_t(z, self.lambda)).clamp(0.0, 1.0)
    }

    /// Survival function 1 − F, evaluated as Φ(−z) + 2 T(z, λ) so the upper
    /// tail keeps its relative precision.
    pub fn sf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        if z == f64::NEG_INFINITY {
            return 1.0;
        }
        if z == f64::INFINITY {
            return 0.0;
        }
        if self.lambda * z < -1.0 && z > 0.0 {
            return short_tail(-z, -self.lambda);
        }
        (norm_cdf(-z) + 2.0 * owens_t(z, self.lambda)).clamp(0.0, 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.xi + self.omega * self.delta() * (2.0 / std::f64::consts::PI).sqrt()
    }

    pub fn variance(&self) -> f64 {
        let d = self.delta();
        self.omega * self.omega * (1.0 - 2.0 * d * d / std::f64::consts::PI)
    }

    /// Quantile function, found by safeguarded Newton iteration inside the
    /// bracket ξ ± 40ω.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityDomain(u));
        }
        let lo = self.xi - QUANTILE_BRACKET_SCALES * self.omega;
        let hi = self.xi + QUANTILE_BRACKET_SCALES * self.omega;
        let sd = self.variance().sqrt();
        let guess = (self.mean() + sd * norm_quantile(u)).clamp(lo, hi);
        let x = if u <= 0.5 {
            solve_increasing(|x| self.cdf(x) - u, |x| self.pdf(x), lo, hi, guess)
        } else {
            let tail = 1.0 - u;
            solve_increasing(|x| tail - self.sf(x), |x| self.pdf(x), lo, hi, guess)
        };
        Ok(x)
    }

    /// Draws ξ + ω(δ|Z| + sqrt(1 − δ²) V) with Z, V iid N(0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let v: f64 = StandardNormal.sample(rng);
        let d = self.delta();
        self.xi + self.omega * (d * z.abs() + self.one_minus_delta_sq().sqrt() * v)
    }
}

/// Root of an increasing residual `r` with derivative `dr` inside `[lo, hi]`.
///
/// Newton steps are taken while they stay inside the current bracket and
/// halve the residual; otherwise the bracket is bisected. If the root lies
/// outside the bracket the nearest end is returned.
pub(crate) fn solve_increasing<R, D>(r: R, dr: D, mut lo: f64, mut hi: f64, guess: f64) -> f64
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    let mut last_abs = f64::INFINITY;
    for _ in 0..300 {
        let res = r(x);
        if res == 0.0 {
            return x;
        }
        if res < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - res / dr(x);
        let mut next = if newton.is_finite() && newton > lo && newton < hi && res.abs() < 0.5 * last_abs {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_abs = res.abs();
        if next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let scale = 1.0 + x.abs();
        if (next - x).abs() <= 4.0 * f64::EPSILON * scale || hi - lo <= 4.0 * f64::EPSILON * scale {
            return next;
        }
        x = next;
    }
    x
}

/// Draws from N(mean, var) restricted to (0, ∞).
///
/// Uses inversion of the normal distribution function unless the truncation
/// point sits more than 2.5 standard deviations above the mean, where the
/// exponential-proposal rejection sampler of Robert (1995) takes over.
pub fn truncated_positive_normal<R: Rng + ?Sized>(mean: f64, var: f64, rng: &mut R) -> f64 {
    debug_assert!(var > 0.0);
    let sd = var.sqrt();
    // Standardized truncation point: Z > alpha.
    let alpha = -mean / sd;
    if alpha <= 2.5 {
        let tail = norm_cdf(-alpha);
        loop {
            let u: f64 = rng.random();
            if u == 0.0 {
                continue;
            }
            let z = -norm_quantile(u * tail);
            if z > alpha {
                return sd * (z - alpha);
            }
        }
    }
    let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let excess = e / rate;
        let z = alpha + excess;
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - rate) * (z - rate)).exp() && excess > 0.0 {
            return sd * excess;
        }
    }
}

/// Full conditional of a cluster's shape parameter,
/// proportional to N(λ; 0, ψ0) ∏ Φ(λ zᵢ) where zᵢ are the cluster's
/// standardized residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SunConditional {
    psi0: f64,
    z: Vec<f64>,
}

/// Outcome of one shape update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeDraw {
    pub value: f64,
    /// `Some(accepted)` for a Metropolis move, `None` for an exact prior draw.
    pub accepted: Option<bool>,
}

impl SunConditional {
    pub fn new(psi0: f64, z: Vec<f64>) -> Result<Self> {
        if !(psi0 > 0.0 && psi0.is_finite()) {
            return Err(Error::param("psi0", format!("must be positive, got {psi0}")));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("z", "standardized residuals must be finite"));
        }
        Ok(SunConditional { psi0, z })
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    pub fn residuals(&self) -> &[f64] {
        &self.z
    }

    /// The product term is constant, so the conditional equals the prior.
    pub fn is_prior(&self) -> bool {
        self.z.iter().all(|&v| v == 0.0)
    }

    /// Unnormalized log density.
    pub fn ln_target(&self, lambda: f64) -> f64 {
        -0.5 * lambda * lambda / self.psi0 + self.z.iter().map(|&z| ln_norm_cdf(lambda * z)).sum::<f64>()
    }

    /// One Gaussian random-walk Metropolis move from `current`, or an exact
    /// N(0, ψ0) draw when the conditional reduces to the prior.
    pub fn sample<R: Rng + ?Sized>(&self, current: f64, proposal_sd: f64, rng: &mut R) -> ShapeDraw {
        if self.is_prior() {
            let prior = Normal::new(0.0, self.psi0.sqrt()).expect("psi0 validated");
            return ShapeDraw {
                value: prior.sample(rng),
                accepted: None,
            };
        }
        let step: f64 = StandardNormal.sample(rng);
        let proposal = current + proposal_sd * step;
        let log_ratio = self.ln_target(proposal) - self.ln_target(current);
        let u: f64 = rng.random();
        if log_ratio >= 0.0 || u.ln() < log_ratio {
            ShapeDraw {
                value: proposal,
                accepted: Some(true),
            }
        } else {
            ShapeDraw {
                value: current,
                accepted: Some(false),
            }
        }
    }
}
