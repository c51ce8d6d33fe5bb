//! The DFT-domain sample vector `d_ε`, the coefficient-recovery matrix `B`,
//! and the unbiased estimator of `|a(n)|²` built from them.
//!
//! `d_m = (1/L) F_L U_L s_m`, so for a bandlimited signal
//! `d_m(k) = Σ_j a(N₁+k+jL) b_m(N₁+k+jL)` and `B d₀ = a`. With noise each
//! entry of `d_ε` picks up variance `σ²/L`, hence
//! `Ã = diag(B d_ε d_ε* B*) − (σ²/L) diag(B B*)` is unbiased for `|a(n)|²`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mci::{coefficients_from_d, dft_domain, InterpolationKernel};
use crate::spectrum::{BandIndexSet, FourierSpectrum, MultichannelSamples};

/// Stacked per-channel DFT blocks; block `m` holds `d_m(k)`, `k = 0 … L−1`,
/// referring to frequency `N₁ + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DftDomainSamples {
    n1: i64,
    blocks: Vec<Vec<Complex64>>,
}

impl DftDomainSamples {
    pub fn new(n1: i64, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        let l = blocks.first().map_or(0, Vec::len);
        if l == 0 || blocks.iter().any(|b| b.len() != l) {
            return Err(Error::DimensionMismatch("DFT blocks must be nonempty and of equal length".into()));
        }
        Ok(Self { n1, blocks })
    }

    pub fn n1(&self) -> i64 {
        self.n1
    }

    pub fn l(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn channels(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, m: usize) -> &[Complex64] {
        &self.blocks[m]
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    /// `(d₁; d₂; …; d_M)`.
    pub fn stacked(&self) -> Vec<Complex64> {
        self.blocks.iter().flatten().copied().collect()
    }
}

/// `d = (1/L) F_L U_L s_m` for every channel, `U_L = diag(ω^{pN₁})`, `ω = e^{−2πi/L}`.
pub fn assemble_d(samples: &MultichannelSamples, n1: i64) -> DftDomainSamples {
    DftDomainSamples { n1, blocks: dft_domain(samples, n1) }
}

/// The `L`-point DFT matrix `F_L[k][p] = ω^{kp}`.
pub fn dft_matrix(l: usize) -> CMatrix {
    CMatrix::from_fn(l, l, |k, p| Complex64::from_polar(1.0, -2.0 * PI * ((k * p) % l) as f64 / l as f64))
}

/// `U_L = diag(ω^{0}, ω^{N₁}, …, ω^{(L−1)N₁})`.
pub fn shift_matrix(l: usize, n1: i64) -> CMatrix {
    CMatrix::from_fn(l, l, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -2.0 * PI * (n1 * i as i64).rem_euclid(l as i64) as f64 / l as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// The dense `Ns × Ns` matrix with `B(iL+k, jL+k) = H⁻¹_{N₁+k}[j][i]` and
/// zeros elsewhere: `M` nonzeros per row. Row `r` refers to frequency `N₁ + r`.
pub fn build_b(kernel: &InterpolationKernel) -> CMatrix {
    let (l, m) = (kernel.l(), kernel.m());
    let mut b = CMatrix::zeros(kernel.ns(), kernel.ns());
    for k in 0..l {
        let q = kernel.h_inv(k);
        for i in 0..m {
            for j in 0..m {
                b[(i * l + k, j * l + k)] = q[(j, i)];
            }
        }
    }
    b
}

/// A real-valued table over a band: estimated or true `|a(n)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    band: BandIndexSet,
    values: Vec<f64>,
}

impl PsdEstimate {
    pub fn new(band: BandIndexSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != band.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a band of {} indices",
                values.len(),
                band.len()
            )));
        }
        Ok(Self { band, values })
    }

    /// `|a(n)|²` of a known spectrum.
    pub fn from_spectrum(spec: &FourierSpectrum) -> Self {
        Self { band: spec.band(), values: spec.coeffs().iter().map(|c| c.norm_sqr()).collect() }
    }

    pub fn band(&self) -> BandIndexSet {
        self.band
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `n`, zero outside the band.
    pub fn get(&self, n: i64) -> f64 {
        self.band.offset(n).map_or(0.0, |i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.band.iter().zip(self.values.iter().copied())
    }

    /// Negative estimates set to zero.
    pub fn clamped(&self) -> PsdEstimate {
        Self { band: self.band, values: self.values.iter().map(|v| v.max(0.0)).collect() }
    }

    pub fn restrict(&self, band: BandIndexSet) -> PsdEstimate {
        Self { band, values: band.iter().map(|n| self.get(n)).collect() }
    }
}

/// `Ã(n) = |(B d_ε)(n)|² − (σ²/L) Σ_m |r_m(n)|²`, using the block structure
/// of `B` rather than the dense matrix.
pub fn estimate_psd(d: &DftDomainSamples, kernel: &InterpolationKernel, sigma: f64) -> Result<PsdEstimate> {
    let (_, est) = estimate_psd_with_coefficients(d, kernel, sigma)?;
    Ok(est)
}

/// As [`estimate_psd`], also returning `B d_ε` (the MCI coefficients).
pub fn estimate_psd_with_coefficients(
    d: &DftDomainSamples,
    kernel: &InterpolationKernel,
    sigma: f64,
) -> Result<(FourierSpectrum, PsdEstimate)> {
    if d.channels() != kernel.m() || d.l() != kernel.l() || d.n1() != kernel.n1() {
        return Err(Error::DimensionMismatch("DFT-domain samples do not match the kernel".into()));
    }
    let coeffs = coefficients_from_d(d.blocks(), kernel);
    let scale = sigma * sigma / kernel.l() as f64;
    let values = kernel
        .band()
        .iter()
        .zip(coeffs.coeffs())
        .map(|(n, x)| x.norm_sqr() - scale * kernel.noise_gain(n))
        .collect();
    let est = PsdEstimate { band: kernel.band(), values };
    Ok((coeffs, est))
}

/// The same estimator evaluated literally from a dense `B`.
pub fn estimate_psd_dense(d: &DftDomainSamples, b: &CMatrix, sigma: f64, band: BandIndexSet) -> Result<PsdEstimate> {
    let stacked = d.stacked();
    if b.cols() != stacked.len() || b.rows() != band.len() {
        return Err(Error::DimensionMismatch("B does not match d or the band".into()));
    }
    let bd = b.mul_vec(&stacked);
    let scale = sigma * sigma / d.l() as f64;
    let values = (0..b.rows())
        .map(|r| bd[r].norm_sqr() - scale * b.row(r).iter().map(|v| v.norm_sqr()).sum::<f64>())
        .collect();
    PsdEstimate::new(band, values)
}

/// `δ_sde = Σ_n ||a(n)|² − Ã(n)|² / μ`.
pub fn psd_mse(estimate: &PsdEstimate, truth: &PsdEstimate) -> Result<f64> {
    if estimate.band != truth.band {
        return Err(Error::InvalidBand(format!(
            "estimate on {}..={} but truth on {}..={}",
            estimate.band.n_lo(),
            estimate.band.n_hi(),
            truth.band.n_lo(),
            truth.band.n_hi()
        )));
    }
    Ok(estimate.values.iter().zip(&truth.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / estimate.values.len() as f64)
}
