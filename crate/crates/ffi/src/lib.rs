//! C interface to skewmix.
//!
//! Functions return an [`SkmStatus`]. After a failure, [`skm_last_error`]
//! describes it until the next call on the same thread. Fits live behind an
//! opaque [`SkmFit`] handle released with [`skm_fit_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use skewmix::datasets::GALAXY_VELOCITIES;
use skewmix::dp_mixture::{run_chain, BaseMeasure, ChainConfig, KernelFamily, PosteriorSummary};
use skewmix::rounded::{base_measure_for_counts, posterior_mean_pmf_upto, run_chain_discrete, RoundingGrid};
use skewmix::sim::GAUSSIAN_PRECISION_PRIOR;
use skewmix::special::owens_t;
use skewmix::SkewNormalParams;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    /// A Rust panic was caught at the boundary; the message is kept.
    Panic = 4,
}

pub const SKM_KERNEL_GAUSSIAN: u32 = 0;
pub const SKM_KERNEL_SKEW_NORMAL: u32 = 1;

pub const SKM_ROUNDING_COUNT: u32 = 0;
pub const SKM_ROUNDING_FLOOR: u32 = 1;

/// Chain settings. Fill with [`skm_chain_options_default`] and change what
/// is needed. The prior is centred on the data; the Gaussian kernel uses
/// `a = b = 1` for the precision prior.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkmChainOptions {
    /// `SKM_KERNEL_GAUSSIAN` or `SKM_KERNEL_SKEW_NORMAL`.
    pub kernel: u32,
    /// Total sweeps, burn-in included.
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub h_max: usize,
    /// Gamma prior on the concentration, shape and rate.
    pub a_alpha: f64,
    pub b_alpha: f64,
}

/// A fitted mixture.
pub struct SkmFit {
    summary: PosteriorSummary,
    rounding: Option<RoundingGrid>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SkmStatus, String);

impl From<skewmix::Error> for Failure {
    fn from(e: skewmix::Error) -> Self {
        let status = match e {
            skewmix::Error::InvalidData(_) | skewmix::Error::Parse { .. } => SkmStatus::InvalidData,
            _ => SkmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SkmStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SkmStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkmStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&message);
            SkmStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or point to a writable `T`.
unsafe fn write<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    unsafe { ptr.write(value) };
    Ok(())
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

/// Message of the last failure on this thread, or an empty string. Valid
/// until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn skm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be null or point to writable options.
#[no_mangle]
pub unsafe extern "C" fn skm_chain_options_default(out: *mut SkmChainOptions) -> SkmStatus {
    guard(|| unsafe {
        write(
            out,
            SkmChainOptions {
                kernel: SKM_KERNEL_SKEW_NORMAL,
                iters: skewmix::dp_mixture::DEFAULT_N_ITER,
                burn_in: skewmix::dp_mixture::DEFAULT_BURN_IN,
                thin: 1,
                seed: 1,
                h_max: skewmix::dp_mixture::DEFAULT_H_MAX,
                a_alpha: skewmix::dp_mixture::DEFAULT_A_ALPHA,
                b_alpha: skewmix::dp_mixture::DEFAULT_B_ALPHA,
            },
            "out",
        )
    })
}

/// Owen's T function T(h, a).
#[no_mangle]
pub extern "C" fn skm_owens_t(h: f64, a: f64) -> f64 {
    owens_t(h, a)
}

fn sn(xi: f64, omega: f64, lambda: f64) -> Result<SkewNormalParams, Failure> {
    Ok(SkewNormalParams::new(xi, omega, lambda)?)
}

/// Density of SN(ξ, ω, λ) at `x`.
///
/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn skm_sn_pdf(xi: f64, omega: f64, lambda: f64, x: f64, out: *mut f64) -> SkmStatus {
    guard(|| unsafe { write(out, sn(xi, omega, lambda)?.pdf(x), "out") })
}

/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn skm_sn_cdf(xi: f64, omega: f64, lambda: f64, x: f64, out: *mut f64) -> SkmStatus {
    guard(|| unsafe { write(out, sn(xi, omega, lambda)?.cdf(x), "out") })
}

/// Quantile at level `u` in (0, 1).
///
/// # Safety
/// `out` must be null or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn skm_sn_quantile(xi: f64, omega: f64, lambda: f64, u: f64, out: *mut f64) -> SkmStatus {
    guard(|| unsafe { write(out, sn(xi, omega, lambda)?.quantile(u)?, "out") })
}

/// The bundled galaxy velocities (1000 km/s); stores their count in `len`.
///
/// # Safety
/// `len` must be null or point to a writable size.
#[no_mangle]
pub unsafe extern "C" fn skm_galaxy_velocities(len: *mut usize) -> *const f64 {
    if !len.is_null() {
        unsafe { len.write(GALAXY_VELOCITIES.len()) };
    }
    GALAXY_VELOCITIES.as_ptr()
}

fn chain_config(options: &SkmChainOptions, base: BaseMeasure) -> Result<ChainConfig, Failure> {
    let kernel = match options.kernel {
        SKM_KERNEL_GAUSSIAN => KernelFamily::Gaussian,
        SKM_KERNEL_SKEW_NORMAL => KernelFamily::SkewNormal,
        k => return Err(Failure(SkmStatus::InvalidArgument, format!("unknown kernel {k}"))),
    };
    let mut base = base.with_alpha_prior(options.a_alpha, options.b_alpha)?;
    if kernel == KernelFamily::Gaussian {
        base.a = GAUSSIAN_PRECISION_PRIOR;
        base.b = GAUSSIAN_PRECISION_PRIOR;
    }
    let config = ChainConfig {
        n_iter: options.iters,
        burn_in: options.burn_in,
        thin: options.thin,
        h_max: options.h_max,
        ..ChainConfig::new(base, kernel, options.seed)
    };
    config.validate()?;
    Ok(config)
}

/// Fits a density to `n` reals. On success `*out` owns a new fit.
///
/// # Safety
/// `data` must point to `n` doubles, `options` to valid options, and `out`
/// to a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_density(
    data: *const f64,
    n: usize,
    options: *const SkmChainOptions,
    out: *mut *mut SkmFit,
) -> SkmStatus {
    guard(|| unsafe {
        let data = slice(data, n, "data")?;
        let options = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = chain_config(options, BaseMeasure::from_data(data)?)?;
        let summary = run_chain(data, &config)?;
        write(out, Box::into_raw(Box::new(SkmFit { summary, rounding: None })), "out")
    })
}

/// Fits a pmf to `n` counts with `SKM_ROUNDING_COUNT` or
/// `SKM_ROUNDING_FLOOR` thresholds.
///
/// # Safety
/// As for [`skm_fit_density`], with `data` pointing to `n` counts.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_pmf(
    data: *const u64,
    n: usize,
    rounding: u32,
    options: *const SkmChainOptions,
    out: *mut *mut SkmFit,
) -> SkmStatus {
    guard(|| unsafe {
        let data = slice(data, n, "data")?;
        let options = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = match rounding {
            SKM_ROUNDING_COUNT => RoundingGrid::count(),
            SKM_ROUNDING_FLOOR => RoundingGrid::floor(),
            r => return Err(Failure(SkmStatus::InvalidArgument, format!("unknown rounding {r}"))),
        };
        if data.is_empty() {
            return Err(Failure(SkmStatus::InvalidData, "no observations".into()));
        }
        let config = chain_config(options, base_measure_for_counts(data, &grid)?)?;
        let summary = run_chain_discrete(data, &grid, &config)?;
        write(
            out,
            Box::into_raw(Box::new(SkmFit {
                summary,
                rounding: Some(grid),
            })),
            "out",
        )
    })
}

/// Releases a fit. Null is ignored.
///
/// # Safety
/// `fit` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_free(fit: *mut SkmFit) {
    if !fit.is_null() {
        drop(unsafe { Box::from_raw(fit) });
    }
}

/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_draw_count(fit: *const SkmFit, out: *mut usize) -> SkmStatus {
    guard(|| unsafe {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        write(out, fit.summary.len(), "out")
    })
}

/// Posterior mean number of occupied components.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_mean_occupied(fit: *const SkmFit, out: *mut f64) -> SkmStatus {
    guard(|| unsafe {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        write(out, fit.summary.mean_occupied(), "out")
    })
}

/// Posterior mean of the concentration parameter.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_mean_alpha(fit: *const SkmFit, out: *mut f64) -> SkmStatus {
    guard(|| unsafe {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        write(out, fit.summary.mean_alpha(), "out")
    })
}

/// Posterior mean density at `m` points of a density fit.
///
/// # Safety
/// `fit` must be a live handle, `x` must point to `m` doubles and `out` to
/// room for `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_density_eval(fit: *const SkmFit, x: *const f64, m: usize, out: *mut f64) -> SkmStatus {
    guard(|| unsafe {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        if fit.rounding.is_some() {
            return Err(Failure(SkmStatus::InvalidArgument, "fit is a pmf fit".into()));
        }
        let x = slice(x, m, "x")?;
        if m > 0 && out.is_null() {
            return Err(null("out"));
        }
        let values = fit.summary.posterior_mean_density(x);
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, m);
        Ok(())
    })
}

/// Posterior mean pmf at `0..=j_max` of a pmf fit.
///
/// # Safety
/// `fit` must be a live handle and `out` must have room for `j_max + 1`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn skm_fit_pmf_eval(fit: *const SkmFit, j_max: u64, out: *mut f64) -> SkmStatus {
    guard(|| unsafe {
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        let Some(grid) = &fit.rounding else {
            return Err(Failure(SkmStatus::InvalidArgument, "fit is a density fit".into()));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        if j_max >= usize::MAX as u64 {
            return Err(Failure(SkmStatus::InvalidArgument, "j_max too large".into()));
        }
        let values = posterior_mean_pmf_upto(&fit.summary, grid, j_max);
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}
