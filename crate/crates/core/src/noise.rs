//! Closed-form noise-error predictions for MCI under i.i.d. sample noise.
//!
//! With `Var ε = σ²`, `E‖T_N f_ε − T_N f‖² = (σ²/L) Σ_m Σ_n |r_m(n)|²`, and the
//! variance of the mean-square error is at most twice the square of that.

use crate::error::{Error, Result};
use crate::mci::InterpolationKernel;
use crate::schemes::SchemeTag;
use crate::spectral::PsdEstimate;
use crate::spectrum::BandIndexSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseErrorReport {
    pub emse: f64,
    pub vmse_bound: f64,
    /// `(1/L) Σ_m Σ_n |r_m(n)|²`.
    pub factor: f64,
}

impl NoiseErrorReport {
    pub fn new(kernel: &InterpolationKernel, sigma: f64) -> Self {
        let factor = emse_factor(kernel);
        let emse = sigma * sigma * factor;
        Self { emse, vmse_bound: 2.0 * emse * emse, factor }
    }
}

/// `(1/L) Σ_m Σ_{n∈I^N} |r_m(n)|²`.
pub fn emse_factor(kernel: &InterpolationKernel) -> f64 {
    band_noise_factor(kernel, kernel.band())
}

/// `(1/L) Σ_m Σ_{n∈K} |r_m(n)|²`: the noise factor left after ideal
/// low-pass filtering to `K`.
pub fn band_noise_factor(kernel: &InterpolationKernel, band: BandIndexSet) -> f64 {
    band.iter().map(|n| kernel.noise_gain(n)).sum::<f64>() / kernel.l() as f64
}

/// The named schemes' factors: 1, `1 + 4/Ns`, `2/3 + 28/(3Ns²)`.
pub fn emse_closed_form(tag: SchemeTag, ns: usize) -> Result<f64> {
    let n = ns as f64;
    match tag {
        SchemeTag::F1 => Ok(1.0),
        SchemeTag::FH2 | SchemeTag::FD2 if ns == 0 || ns % 2 != 0 => {
            Err(Error::Config(format!("{tag} needs an even sample count, got {ns}")))
        }
        SchemeTag::FH2 => Ok(1.0 + 4.0 / n),
        SchemeTag::FD2 => Ok(2.0 / 3.0 + 28.0 / (3.0 * n * n)),
        SchemeTag::Custom => Err(Error::Unsupported("no closed form for custom schemes".into())),
    }
}

/// EMSE after Dirichlet post-filtering to `K = {1−K₂ … K₂}` for a
/// bandlimited signal in `B_K`: `(σ²/L) Σ_m Σ_{n∈K} |r_m(n)|²` in closed form.
///
/// The FH2 form assumes `K₂ < Ns/2` (at `n = L` the Hilbert channel's
/// coefficient has gain 1 rather than ½). The FD2 form is the exact sum
/// `4K₂/Ns − 8K₂²/Ns² + 16K₂³/(3Ns³) + 56K₂/(3Ns³)`; the commonly quoted
/// `4/Ns … − 8K₂/Ns²` variant agrees with it only at `K₂ = 1`.
pub fn postfilter_dirichlet_emse(tag: SchemeTag, ns: usize, k2: usize, sigma: f64) -> Result<f64> {
    if 2 * k2 > ns {
        return Err(Error::InvalidBand(format!("band of {} indices exceeds {ns} samples", 2 * k2)));
    }
    let (n, k, s2) = (ns as f64, k2 as f64, sigma * sigma);
    match tag {
        SchemeTag::F1 => Ok(2.0 * k * s2 / n),
        SchemeTag::FH2 => Ok((2.0 * k + 3.0) * s2 / n),
        SchemeTag::FD2 => Ok(s2
            * (4.0 * k / n - 8.0 * k * k / (n * n) + 16.0 * k.powi(3) / (3.0 * n.powi(3)) + 56.0 * k / (3.0 * n.powi(3)))),
        SchemeTag::Custom => Err(Error::Unsupported("no closed form for custom schemes".into())),
    }
}

/// Minimum of the post-filter objective Φ1 at the optimal β for the named
/// schemes, with `l` samples per channel. The FH2 form assumes the band
/// excludes `k = L`.
pub fn phi1_minimum_closed_form(tag: SchemeTag, psd: &PsdEstimate, l: usize, sigma: f64) -> Result<f64> {
    let (lf, s2) = (l as f64, sigma * sigma);
    let term = |k: i64, a2: f64| -> Result<f64> {
        Ok(match tag {
            SchemeTag::F1 => a2 * s2 / (a2 * lf + s2),
            SchemeTag::FH2 if k == 0 => 2.0 * a2 * s2 / (a2 * lf + 2.0 * s2),
            SchemeTag::FH2 => a2 * s2 / (2.0 * a2 * lf + s2),
            SchemeTag::FD2 => {
                let g = 1.0 + (lf - k.abs() as f64).powi(2);
                a2 * g * s2 / (a2 * lf.powi(3) + g * s2)
            }
            SchemeTag::Custom => return Err(Error::Unsupported("no closed form for custom schemes".into())),
        })
    };
    let mut total = 0.0;
    for (k, a2) in psd.iter() {
        let a2 = a2.max(0.0);
        if a2 > 0.0 {
            total += term(k, a2)?;
        }
    }
    Ok(total)
}

/// Bounds on `Σ_{n>k} n^{−α}` for `α > 1`, `k ≥ 1`:
/// `(α−1)⁻¹(k+1)^{1−α} < Σ < (α−1)⁻¹k^{1−α}`.
pub fn power_tail_bounds(alpha: f64, k: u64) -> Result<(f64, f64)> {
    if !(alpha > 1.0) || k == 0 {
        return Err(Error::Config(format!("need α > 1 and k ≥ 1, got α = {alpha}, k = {k}")));
    }
    let kf = k as f64;
    Ok(((kf + 1.0).powf(1.0 - alpha) / (alpha - 1.0), kf.powf(1.0 - alpha) / (alpha - 1.0)))
}

/// Upper bound on the tail energy `Σ_{|n|>k} |a(n)|²` of a `C^j` signal with
/// `|a(n)| ≤ γ/|n|^j`: `2γ²/(2j−1) · k^{1−2j}`.
pub fn tail_energy_bound(j: u32, gamma: f64, k: u64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Config("smoothness order must be at least 1".into()));
    }
    Ok(2.0 * gamma * gamma * power_tail_bounds(2.0 * j as f64, k)?.1)
}
