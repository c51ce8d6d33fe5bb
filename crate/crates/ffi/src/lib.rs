//! C ABI over the reconstruction library.
//!
//! Objects are opaque heap handles (`McKernel`, `McSamples`, `McSpectrum`)
//! created by `mc_*_new`-style calls and released with the matching
//! `mc_*_free`. Every fallible call returns an [`McStatus`]; on failure the
//! message is available from [`mc_last_error`] on the same thread. Complex
//! arrays are interleaved `re, im` doubles. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mcrecon::mci::{reconstruct_spectrum, InterpolationKernel};
use mcrecon::noise::emse_factor;
use mcrecon::post_filter::{apply_post_filter, optimal_post_filter, select_band, PostFilterDesign};
use mcrecon::pre_filter::{optimal_pre_filter, prefiltered_spectrum};
use mcrecon::regularize::{build_system, l1_solve, l2_solve, Penalty, RegularizerConfig};
use mcrecon::schemes::{ChannelBank, SchemeTag};
use mcrecon::spectral::{assemble_d, estimate_psd_with_coefficients};
use mcrecon::spectrum::{channel_samples, BandIndexSet, FourierSpectrum, MultichannelSamples, NoiseModel, SampleGrid};
use mcrecon::{Complex64, Error};

pub const MC_SCHEME_F1: u32 = 0;
pub const MC_SCHEME_FH2: u32 = 1;
pub const MC_SCHEME_FD2: u32 = 2;

pub const MC_POST_NONE: u32 = 0;
pub const MC_POST_DIRICHLET: u32 = 1;
pub const MC_POST_OPTIMAL: u32 = 2;

pub const MC_PENALTY_L1: u32 = 0;
pub const MC_PENALTY_L2: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularScheme = 3,
    SingularSystem = 4,
    NonFinite = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

pub struct McKernel(InterpolationKernel);
pub struct McSamples(MultichannelSamples);
pub struct McSpectrum(FourierSpectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(McStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SingularScheme { .. } => McStatus::SingularScheme,
            Error::SingularSystem { .. } => McStatus::SingularSystem,
            Error::NonFinite(_) => McStatus::NonFinite,
            _ => McStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> McStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            McStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(McStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(McStatus::InvalidArgument, msg.into())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn read_complex<'a>(data: *const f64, count: usize) -> Result<Vec<Complex64>, Fail> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(null("data"));
    }
    let raw: &'a [f64] = std::slice::from_raw_parts(data, 2 * count);
    Ok(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn write_complex(values: &[Complex64], out: *mut f64, capacity: usize) -> Result<(), Fail> {
    if capacity < values.len() {
        return Err(Fail(McStatus::BufferTooSmall, format!("need room for {} values, got {capacity}", values.len())));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (d, v) in dst.chunks_exact_mut(2).zip(values) {
        d[0] = v.re;
        d[1] = v.im;
    }
    Ok(())
}

fn scheme(tag: u32) -> Result<ChannelBank, Fail> {
    let tag = match tag {
        MC_SCHEME_F1 => SchemeTag::F1,
        MC_SCHEME_FH2 => SchemeTag::FH2,
        MC_SCHEME_FD2 => SchemeTag::FD2,
        _ => return Err(invalid(format!("unknown scheme {tag}"))),
    };
    Ok(ChannelBank::named(tag)?)
}

fn check_samples(k: &InterpolationKernel, s: &MultichannelSamples) -> Result<(), Fail> {
    if s.channels() != k.m() || s.per_channel() != k.l() {
        return Err(invalid(format!(
            "samples are {}×{}, kernel expects {}×{}",
            s.channels(),
            s.per_channel(),
            k.m(),
            k.l()
        )));
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn mc_status_name(status: McStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        McStatus::Ok => b"ok\0",
        McStatus::NullPointer => b"null pointer\0",
        McStatus::InvalidArgument => b"invalid argument\0",
        McStatus::SingularScheme => b"singular scheme\0",
        McStatus::SingularSystem => b"singular system\0",
        McStatus::NonFinite => b"non-finite value\0",
        McStatus::BufferTooSmall => b"buffer too small\0",
        McStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Interpolation kernel for a named scheme on the band `n1 .. n1+ns-1`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mc_kernel_new(scheme_tag: u32, n1: i64, ns: usize, out: *mut *mut McKernel) -> McStatus {
    guard(|| {
        let bank = scheme(scheme_tag)?;
        let band = BandIndexSet::with_len(n1, ns)?;
        put(out, McKernel(InterpolationKernel::new(&bank, band)?))
    })
}

/// Same as [`mc_kernel_new`] with the centered band `N1 = -((ns-1)/2)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mc_kernel_new_centered(scheme_tag: u32, ns: usize, out: *mut *mut McKernel) -> McStatus {
    guard(|| {
        let bank = scheme(scheme_tag)?;
        put(out, McKernel(InterpolationKernel::centered(&bank, ns)?))
    })
}

/// # Safety
/// `k` must be null or a handle from `mc_kernel_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_kernel_free(k: *mut McKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Writes `Ns`, `N1`, `M` and `L`; any output pointer may be null.
///
/// # Safety
/// `k` must be a live kernel handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_kernel_shape(k: *const McKernel, ns: *mut usize, n1: *mut i64, channels: *mut usize, per_channel: *mut usize) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        if let Some(p) = ns.as_mut() {
            *p = k.ns();
        }
        if let Some(p) = n1.as_mut() {
            *p = k.n1();
        }
        if let Some(p) = channels.as_mut() {
            *p = k.m();
        }
        if let Some(p) = per_channel.as_mut() {
            *p = k.l();
        }
        Ok(())
    })
}

/// Noise factor `(1/L) Σ_m Σ_n |r_m(n)|²` (EMSE = σ² × factor) and the
/// largest condition number of the channel matrices; outputs may be null.
///
/// # Safety
/// `k` must be a live kernel handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_kernel_diagnostics(k: *const McKernel, emse_factor_out: *mut f64, max_condition: *mut f64) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        if let Some(p) = emse_factor_out.as_mut() {
            *p = emse_factor(k);
        }
        if let Some(p) = max_condition.as_mut() {
            *p = k.conditions().iter().copied().fold(0.0, f64::max);
        }
        Ok(())
    })
}

/// Samples from `channels × per_channel` interleaved complex values, row by row.
///
/// # Safety
/// `data` must hold `2·channels·per_channel` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_samples_new(channels: usize, per_channel: usize, data: *const f64, out: *mut *mut McSamples) -> McStatus {
    guard(|| {
        if channels == 0 {
            return Err(invalid("channels must be positive"));
        }
        let grid = SampleGrid::new(per_channel)?;
        let all = read_complex(data, channels * per_channel)?;
        let rows = all.chunks(per_channel).map(<[Complex64]>::to_vec).collect();
        put(out, McSamples(MultichannelSamples::new(grid, rows)?))
    })
}

/// Samples of `spectrum` through the kernel's channels at its `L` nodes,
/// with real Gaussian noise of deviation `sigma` drawn from `(seed, trial)`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_samples_simulate(
    k: *const McKernel,
    spectrum: *const McSpectrum,
    sigma: f64,
    seed: u64,
    trial: u64,
    out: *mut *mut McSamples,
) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        let spec = &borrow(spectrum, "spectrum")?.0;
        let noise = if sigma == 0.0 { NoiseModel::noiseless() } else { NoiseModel::new(sigma, seed)? };
        put(out, McSamples(channel_samples(spec, k.bank(), SampleGrid::new(k.l())?, &noise, trial)?))
    })
}

/// Copies the samples out (interleaved, row by row).
///
/// # Safety
/// `s` must be live; `out` must hold `2·capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn mc_samples_values(s: *const McSamples, out: *mut f64, capacity: usize) -> McStatus {
    guard(|| write_complex(&borrow(s, "samples")?.0.flatten(), out, capacity))
}

/// # Safety
/// `s` must be null or a handle from `mc_samples_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_samples_free(s: *mut McSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Spectrum on `n_lo .. n_lo+len-1` from interleaved coefficients.
///
/// # Safety
/// `data` must hold `2·len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_spectrum_new(n_lo: i64, len: usize, data: *const f64, out: *mut *mut McSpectrum) -> McStatus {
    guard(|| {
        let band = BandIndexSet::with_len(n_lo, len)?;
        put(out, McSpectrum(FourierSpectrum::new(band, read_complex(data, len)?)?))
    })
}

/// # Safety
/// `s` must be a live spectrum handle; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn mc_spectrum_band(s: *const McSpectrum, n_lo: *mut i64, len: *mut usize) -> McStatus {
    guard(|| {
        let s = &borrow(s, "spectrum")?.0;
        if let Some(p) = n_lo.as_mut() {
            *p = s.band().n_lo();
        }
        if let Some(p) = len.as_mut() {
            *p = s.band().len();
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be live; `out` must hold `2·capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn mc_spectrum_coeffs(s: *const McSpectrum, out: *mut f64, capacity: usize) -> McStatus {
    guard(|| write_complex(borrow(s, "spectrum")?.0.coeffs(), out, capacity))
}

/// Values at `t_k = 2πk/n_out`, `k = 0 … n_out-1`.
///
/// # Safety
/// `s` must be live; `out` must hold `2·n_out` doubles.
#[no_mangle]
pub unsafe extern "C" fn mc_spectrum_evaluate(s: *const McSpectrum, n_out: usize, out: *mut f64) -> McStatus {
    guard(|| {
        let values = borrow(s, "spectrum")?.0.evaluate_grid(n_out)?;
        write_complex(&values, out, n_out)
    })
}

/// # Safety
/// `s` must be null or a handle from `mc_spectrum_new` / `mc_reconstruct*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_spectrum_free(s: *mut McSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Plain multichannel interpolation.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_reconstruct(k: *const McKernel, s: *const McSamples, out: *mut *mut McSpectrum) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        let s = &borrow(s, "samples")?.0;
        check_samples(k, s)?;
        put(out, McSpectrum(reconstruct_spectrum(s, k)?))
    })
}

/// Interpolation with the optional optimal pre-filter and a post-filter
/// (`MC_POST_*`) on the automatically selected band.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_reconstruct_filtered(
    k: *const McKernel,
    s: *const McSamples,
    sigma: f64,
    pre_filter: bool,
    post_filter: u32,
    out: *mut *mut McSpectrum,
) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        let s = &borrow(s, "samples")?.0;
        check_samples(k, s)?;
        if post_filter > MC_POST_OPTIMAL {
            return Err(invalid(format!("unknown post-filter {post_filter}")));
        }
        let d = assemble_d(s, k.n1());
        let (mci, psd) = estimate_psd_with_coefficients(&d, k, sigma)?;
        let spec = if pre_filter { prefiltered_spectrum(s, &optimal_pre_filter(&d, k, sigma)?, k)? } else { mci };
        let spec = if post_filter == MC_POST_NONE {
            spec
        } else {
            let band = select_band(&psd, k.ns())?;
            let design = if post_filter == MC_POST_DIRICHLET {
                PostFilterDesign::dirichlet(band)
            } else {
                optimal_post_filter(&psd, k, sigma, band)
            };
            apply_post_filter(&spec, &design)?
        };
        put(out, McSpectrum(spec))
    })
}

/// Weighted l1 (`MC_PENALTY_L1`, ADMM) or l2 regularized reconstruction on
/// the kernel's band with weights `1 + |n|^eta` and `kappa = alpha·sigma²`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_reconstruct_regularized(
    k: *const McKernel,
    s: *const McSamples,
    sigma: f64,
    penalty: u32,
    eta: f64,
    alpha: f64,
    out: *mut *mut McSpectrum,
) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        let s = &borrow(s, "samples")?.0;
        check_samples(k, s)?;
        let penalty = match penalty {
            MC_PENALTY_L1 => Penalty::L1,
            MC_PENALTY_L2 => Penalty::L2,
            _ => return Err(invalid(format!("unknown penalty {penalty}"))),
        };
        let cfg = RegularizerConfig { penalty, eta, alpha, ..RegularizerConfig::default() };
        cfg.validate()?;
        let sys = build_system(k.bank(), k.band(), s.grid(), eta)?;
        let spec = match penalty {
            Penalty::L1 => l1_solve(&sys, s, &cfg, sigma)?.0,
            Penalty::L2 => l2_solve(&sys, s, &cfg, sigma)?,
        };
        put(out, McSpectrum(spec))
    })
}

/// Unbiased estimate of `|a(n)|²` over the kernel's band (`Ns` values).
///
/// # Safety
/// Handles must be live; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn mc_estimate_psd(k: *const McKernel, s: *const McSamples, sigma: f64, out: *mut f64, capacity: usize) -> McStatus {
    guard(|| {
        let k = &borrow(k, "kernel")?.0;
        let s = &borrow(s, "samples")?.0;
        check_samples(k, s)?;
        let (_, psd) = estimate_psd_with_coefficients(&assemble_d(s, k.n1()), k, sigma)?;
        let values = psd.values();
        if capacity < values.len() {
            return Err(Fail(McStatus::BufferTooSmall, format!("need room for {} values, got {capacity}", values.len())));
        }
        if out.is_null() {
            return Err(null("output buffer"));
        }
        std::slice::from_raw_parts_mut(out, values.len()).copy_from_slice(values);
        Ok(())
    })
}
