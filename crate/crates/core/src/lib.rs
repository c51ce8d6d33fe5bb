//! Reconstruction of periodic signals from finitely many noisy multichannel
//! samples.
//!
//! A signal `f(t) = Σ a(n) e^{int}` is observed through `M` linear
//! time-invariant channels (identity, Hilbert transform, derivative or an
//! arbitrary convolution kernel), each sampled at `L` uniform nodes on
//! `[0, 2π)`. The crate provides
//!
//! * multichannel interpolation (MCI) with an `O(N log N)` FFT pipeline and a
//!   direct-summation reference ([`mci`]),
//! * closed-form noise-error predictions ([`noise`]),
//! * an unbiased estimator of `|a(n)|²` from noisy samples ([`spectral`]),
//! * optimal post- and pre-filters ([`post_filter`], [`pre_filter`]),
//! * weighted l1/l2 regularized reconstruction ([`regularize`]),
//! * a deterministic Monte-Carlo harness ([`harness`]) and the `mcrecon` CLI.

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod mci;
pub mod noise;
pub mod post_filter;
pub mod pre_filter;
pub mod realify;
pub mod regularize;
pub mod schemes;
pub mod signals;
pub mod spectral;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
