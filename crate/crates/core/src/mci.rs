//! Multichannel interpolation: kernel setup from the channel matrices `H_n`,
//! reconstruction by direct summation and by the FFT pipeline, and the
//! aliasing error.
//!
//! Layout conventions: the band `I^N = {N₁ … N₁+LM−1}` splits into sub-bands
//! `I_j` of length `L`. For `n ∈ I₁` (offset `k = n − N₁`),
//! `H_n[j][m] = b_m(n + jL)` with 0-based `j, m`, and `r_m(n + jL) = H_n⁻¹[m][j]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{invert_with_condition, CMatrix};
use crate::schemes::ChannelBank;
use crate::spectrum::{channel_samples, BandIndexSet, FourierSpectrum, MultichannelSamples, NoiseModel, SampleGrid};

/// Channel matrices above this 1-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `H_n = [b_m(n + jL)]_{j,m}`.
pub fn build_channel_matrix(bank: &ChannelBank, n: i64, l: usize) -> CMatrix {
    let li = l as i64;
    CMatrix::from_fn(bank.len(), bank.len(), |j, m| bank.response(m, n + j as i64 * li))
}

/// The interpolation coefficients `r_m(n)` of a scheme on a band, with the
/// per-bin inverses `H_n⁻¹` they came from.
#[derive(Debug, Clone)]
pub struct InterpolationKernel {
    bank: ChannelBank,
    band: BandIndexSet,
    l: usize,
    h_inv: Vec<CMatrix>,
    r: Vec<Vec<Complex64>>,
    conditions: Vec<f64>,
}

impl InterpolationKernel {
    pub fn new(bank: &ChannelBank, band: BandIndexSet) -> Result<Self> {
        let m = bank.len();
        if band.len() % m != 0 {
            return Err(Error::InvalidBand(format!(
                "band of {} indices is not a multiple of {m} channels",
                band.len()
            )));
        }
        let l = band.len() / m;
        let mut h_inv = Vec::with_capacity(l);
        let mut conditions = Vec::with_capacity(l);
        let mut r = vec![vec![Complex64::new(0.0, 0.0); band.len()]; m];
        for k in 0..l {
            let n = band.index(k);
            let h = build_channel_matrix(bank, n, l);
            let (inv, cond) = invert_with_condition(&h)
                .ok_or(Error::SingularScheme { n, cond: f64::INFINITY })?;
            if cond > MAX_CONDITION {
                return Err(Error::SingularScheme { n, cond });
            }
            for (ch, row) in r.iter_mut().enumerate() {
                for j in 0..m {
                    row[k + j * l] = inv[(ch, j)];
                }
            }
            h_inv.push(inv);
            conditions.push(cond);
        }
        Ok(Self { bank: bank.clone(), band, l, h_inv, r, conditions })
    }

    /// Kernel on the centered band for `ns` total samples.
    pub fn centered(bank: &ChannelBank, ns: usize) -> Result<Self> {
        let (_, band) = bank.layout(ns)?;
        Self::new(bank, band)
    }

    pub fn bank(&self) -> &ChannelBank {
        &self.bank
    }

    pub fn band(&self) -> BandIndexSet {
        self.band
    }

    /// Samples per channel, `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Channel count, `M`.
    pub fn m(&self) -> usize {
        self.bank.len()
    }

    pub fn ns(&self) -> usize {
        self.band.len()
    }

    pub fn n1(&self) -> i64 {
        self.band.n_lo()
    }

    /// `r_m(n)`, zero outside the band.
    pub fn r(&self, m: usize, n: i64) -> Complex64 {
        self.band.offset(n).map_or(Complex64::new(0.0, 0.0), |i| self.r[m][i])
    }

    /// `r_m` over the band, indexed by `n − N₁`.
    pub fn r_row(&self, m: usize) -> &[Complex64] {
        &self.r[m]
    }

    /// `H⁻¹_{N₁+k}` for `k = 0 … L−1`.
    pub fn h_inv(&self, k: usize) -> &CMatrix {
        &self.h_inv[k]
    }

    /// 1-norm condition number of `H_{N₁+k}`.
    pub fn conditions(&self) -> &[f64] {
        &self.conditions
    }

    /// `Σ_m |r_m(n)|²`, the per-frequency noise gain.
    pub fn noise_gain(&self, n: i64) -> f64 {
        (0..self.m()).map(|m| self.r(m, n).norm_sqr()).sum()
    }

    /// `y_m(t) = Σ_n r_m(n) e^{int}`.
    pub fn y(&self, m: usize, t: f64) -> Complex64 {
        self.band.iter().zip(&self.r[m]).map(|(n, r)| r * Complex64::from_polar(1.0, n as f64 * t)).sum()
    }

    fn check_samples(&self, samples: &MultichannelSamples) -> Result<()> {
        if samples.channels() != self.m() || samples.per_channel() != self.l {
            return Err(Error::DimensionMismatch(format!(
                "samples are {}×{}, kernel expects {}×{}",
                samples.channels(),
                samples.per_channel(),
                self.m(),
                self.l
            )));
        }
        Ok(())
    }
}

/// Convenience alias matching the operation's role.
pub fn interpolation_coefficients(bank: &ChannelBank, band: BandIndexSet) -> Result<InterpolationKernel> {
    InterpolationKernel::new(bank, band)
}

/// `d_m(k) = (1/L) Σ_p s_{m,p} e^{−2πi(N₁+k)p/L}`: the modulated DFT of each
/// channel, so that `d_m(k)` refers to frequency `N₁ + k`.
pub fn dft_domain(samples: &MultichannelSamples, n1: i64) -> Vec<Vec<Complex64>> {
    let l = samples.per_channel();
    let fft = FftPlanner::new().plan_fft_forward(l);
    let modulation: Vec<Complex64> =
        (0..l).map(|p| Complex64::from_polar(1.0 / l as f64, -2.0 * PI * ((n1 * p as i64).rem_euclid(l as i64)) as f64 / l as f64)).collect();
    samples
        .rows()
        .iter()
        .map(|row| {
            let mut buf: Vec<Complex64> = row.iter().zip(&modulation).map(|(s, u)| s * u).collect();
            fft.process(&mut buf);
            buf
        })
        .collect()
}

/// Steps 1–4 of the FFT pipeline: the reconstructed coefficients
/// `a(N₁+k+jL) = (d(:,k)ᵀ H⁻¹_{N₁+k})_j`.
pub fn coefficients_from_d(d: &[Vec<Complex64>], kernel: &InterpolationKernel) -> FourierSpectrum {
    let (l, m) = (kernel.l(), kernel.m());
    let mut out = FourierSpectrum::zeros(kernel.band());
    let coeffs = out.coeffs_mut();
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..l {
        for (ch, c) in col.iter_mut().enumerate() {
            *c = d[ch][k];
        }
        for (j, v) in kernel.h_inv(k).vec_mul(&col).into_iter().enumerate() {
            coeffs[k + j * l] = v;
        }
    }
    out
}

/// The spectrum of the MCI reconstruction `T_N f` from samples.
pub fn reconstruct_spectrum(samples: &MultichannelSamples, kernel: &InterpolationKernel) -> Result<FourierSpectrum> {
    kernel.check_samples(samples)?;
    Ok(coefficients_from_d(&dft_domain(samples, kernel.n1()), kernel))
}

/// `(1/L) Σ_m Σ_p s_{m,p} y_m(t − 2πp/L)`, by direct summation.
pub fn reconstruct_direct(samples: &MultichannelSamples, kernel: &InterpolationKernel, t: f64) -> Result<Complex64> {
    kernel.check_samples(samples)?;
    let grid = samples.grid();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..kernel.m() {
        for (p, s) in samples.row(m).iter().enumerate() {
            acc += s * kernel.y(m, t - grid.node(p));
        }
    }
    Ok(acc / kernel.l() as f64)
}

/// The FFT pipeline: recovered coefficients, zero-padded to `n_out`, inverse
/// DFT, then the `e^{iN₁t_k}` modulation. Output is on `t_k = 2πk/n_out`.
pub fn reconstruct_fft(samples: &MultichannelSamples, kernel: &InterpolationKernel, n_out: usize) -> Result<Vec<Complex64>> {
    if n_out < kernel.ns() {
        return Err(Error::InvalidOutputSize { n_out, ns: kernel.ns() });
    }
    let spectrum = reconstruct_spectrum(samples, kernel)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); n_out];
    buf[..kernel.ns()].copy_from_slice(spectrum.coeffs());
    FftPlanner::new().plan_fft_inverse(n_out).process(&mut buf);
    let n1 = kernel.n1();
    for (k, v) in buf.iter_mut().enumerate() {
        let phase = 2.0 * PI * ((n1 * k as i64).rem_euclid(n_out as i64)) as f64 / n_out as f64;
        *v *= Complex64::from_polar(1.0, phase);
    }
    Ok(buf)
}

/// `max_{m,p} |(T_N f ∗ h_m)(t_p) − s_{m,p}|`: how far the reconstruction is
/// from interpolating the data it was built from.
pub fn interpolation_consistency_check(samples: &MultichannelSamples, kernel: &InterpolationKernel) -> Result<f64> {
    let spectrum = reconstruct_spectrum(samples, kernel)?;
    let refit = channel_samples(&spectrum, kernel.bank(), samples.grid(), &NoiseModel::noiseless(), 0)?;
    Ok(refit
        .rows()
        .iter()
        .zip(samples.rows())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max))
}

/// The aliasing-error sum
/// `Σ_{n∉I^N}|a(n)|² + Σ_{k∉1..M} Σ_{n∈I_k} |a(n)|² Σ_l |Σ_m r_m(n+(l−k)L) b_m(n)|²`.
///
/// Each out-of-band coefficient is charged for its own aliases only; when
/// two out-of-band coefficients alias onto the same in-band frequency their
/// cross term is omitted, so this equals `‖T_N f − f‖²` exactly only when
/// every in-band frequency receives at most one alias. See
/// [`aliasing_error_exact`] for the general value.
pub fn aliasing_error(spec: &FourierSpectrum, kernel: &InterpolationKernel) -> f64 {
    let band = kernel.band();
    let li = kernel.l() as i64;
    let mut total = 0.0;
    for (n, a) in spec.band().iter().zip(spec.coeffs()) {
        if band.contains(n) || a.norm_sqr() == 0.0 {
            continue;
        }
        total += a.norm_sqr();
        let gain: f64 = alias_targets(n, band, li).map(|np| alias_transfer(kernel, np, n).norm_sqr()).sum();
        total += a.norm_sqr() * gain;
    }
    total
}

/// `‖T_N f − f‖²` for a finite spectrum, summing aliases coherently.
pub fn aliasing_error_exact(spec: &FourierSpectrum, kernel: &InterpolationKernel) -> f64 {
    let band = kernel.band();
    let li = kernel.l() as i64;
    let mut leaked = vec![Complex64::new(0.0, 0.0); band.len()];
    let mut total = 0.0;
    for (n, a) in spec.band().iter().zip(spec.coeffs()) {
        if band.contains(n) {
            continue;
        }
        total += a.norm_sqr();
        for np in alias_targets(n, band, li) {
            leaked[(np - band.n_lo()) as usize] += alias_transfer(kernel, np, n) * a;
        }
    }
    total + leaked.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// In-band frequencies congruent to `n` modulo `L`: one per sub-band.
fn alias_targets(n: i64, band: BandIndexSet, l: i64) -> impl Iterator<Item = i64> {
    let first = band.n_lo() + (n - band.n_lo()).rem_euclid(l);
    (first..=band.n_hi()).step_by(l as usize)
}

fn alias_transfer(kernel: &InterpolationKernel, target: i64, source: i64) -> Complex64 {
    (0..kernel.m()).map(|m| kernel.r(m, target) * kernel.bank().response(m, source)).sum()
}

/// Noiseless samples of a spectrum under a kernel's scheme.
pub fn exact_samples(spec: &FourierSpectrum, kernel: &InterpolationKernel) -> Result<MultichannelSamples> {
    channel_samples(spec, kernel.bank(), SampleGrid::new(kernel.l())?, &NoiseModel::noiseless(), 0)
}
