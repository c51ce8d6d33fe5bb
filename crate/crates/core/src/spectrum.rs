//! Signal and sample domain types shared by every other module.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::schemes::ChannelBank;
use crate::signals::SignalModel;

/// A contiguous set of integer frequencies `n_lo..=n_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BandIndexSet {
    n_lo: i64,
    n_hi: i64,
}

impl BandIndexSet {
    pub fn new(n_lo: i64, n_hi: i64) -> Result<Self> {
        if n_lo > n_hi {
            return Err(Error::InvalidBand(format!("n_lo = {n_lo} exceeds n_hi = {n_hi}")));
        }
        Ok(Self { n_lo, n_hi })
    }

    /// Band of `len` indices starting at `n_lo`.
    pub fn with_len(n_lo: i64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidBand("empty band".into()));
        }
        Self::new(n_lo, n_lo + len as i64 - 1)
    }

    /// The band `{-⌊(ns-1)/2⌋, …}` of cardinality `ns`. For even `ns` this is
    /// `{-ns/2+1, …, ns/2}`.
    pub fn centered(ns: usize) -> Result<Self> {
        if ns == 0 {
            return Err(Error::InvalidBand("empty band".into()));
        }
        Self::with_len(-((ns as i64 - 1) / 2), ns)
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_hi
    }

    /// Cardinality μ of the band.
    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_lo && n <= self.n_hi
    }

    pub fn contains_band(&self, other: &BandIndexSet) -> bool {
        self.contains(other.n_lo) && self.contains(other.n_hi)
    }

    /// Position of `n` inside the band, if present.
    pub fn offset(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_lo) as usize)
    }

    pub fn index(&self, offset: usize) -> i64 {
        self.n_lo + offset as i64
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }

    /// The sub-band `I_j = {n_lo + (j-1)L, …, n_lo + jL - 1}` (1-based `j`).
    pub fn sub_band(&self, j: usize, l: usize) -> Result<BandIndexSet> {
        if j == 0 || j * l > self.len() {
            return Err(Error::InvalidBand(format!(
                "sub-band {j} of length {l} does not fit in a band of {} indices",
                self.len()
            )));
        }
        Self::with_len(self.n_lo + ((j - 1) * l) as i64, l)
    }
}

/// Fourier coefficients `a(n)` of a trigonometric polynomial on a contiguous
/// band, stored densely by `n - n_lo`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    band: BandIndexSet,
    coeffs: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn new(band: BandIndexSet, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != band.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a band of {} indices",
                coeffs.len(),
                band.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("spectrum coefficients".into()));
        }
        Ok(Self { band, coeffs })
    }

    pub fn zeros(band: BandIndexSet) -> Self {
        Self { band, coeffs: vec![Complex64::new(0.0, 0.0); band.len()] }
    }

    /// Builds a spectrum from `(n, a(n))` pairs; unlisted indices are zero.
    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Result<Self> {
        let lo = pairs.iter().map(|p| p.0).min().ok_or_else(|| Error::InvalidBand("no coefficients".into()))?;
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(lo);
        let mut spec = Self::zeros(BandIndexSet::new(lo, hi)?);
        for &(n, a) in pairs {
            spec.coeffs[(n - lo) as usize] += a;
        }
        Ok(spec)
    }

    pub fn band(&self) -> BandIndexSet {
        self.band
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `a(n)`, zero outside the band.
    pub fn get(&self, n: i64) -> Complex64 {
        self.band.offset(n).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// `Σ_n a(n) e^{int}`.
    pub fn synthesize(&self, t: f64) -> Complex64 {
        self.band
            .iter()
            .zip(&self.coeffs)
            .map(|(n, a)| a * Complex64::from_polar(1.0, n as f64 * t))
            .sum()
    }

    /// `Σ |a(n)|²`, equal to `(1/2π)∫|f|²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Re-expresses the spectrum on another band, zero-filling or truncating.
    pub fn restrict(&self, band: BandIndexSet) -> FourierSpectrum {
        let coeffs = band.iter().map(|n| self.get(n)).collect();
        FourierSpectrum { band, coeffs }
    }

    /// Values on the uniform grid `t_k = 2πk/n_out` via one inverse FFT.
    /// Requires `n_out ≥ μ(band)` so that no two coefficients share a bin.
    pub fn evaluate_grid(&self, n_out: usize) -> Result<Vec<Complex64>> {
        if n_out < self.band.len() {
            return Err(Error::InvalidOutputSize { n_out, ns: self.band.len() });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n_out];
        for (n, a) in self.band.iter().zip(&self.coeffs) {
            buf[n.rem_euclid(n_out as i64) as usize] += a;
        }
        FftPlanner::new().plan_fft_inverse(n_out).process(&mut buf);
        Ok(buf)
    }

    /// Spectrum of `Re f`: `(a(n) + conj(a(-n)))/2` on the symmetric hull of the band.
    pub fn real_part(&self) -> FourierSpectrum {
        let reach = self.band.n_lo.abs().max(self.band.n_hi.abs());
        let band = BandIndexSet { n_lo: -reach, n_hi: reach };
        let coeffs = band.iter().map(|n| (self.get(n) + self.get(-n).conj()) * 0.5).collect();
        FourierSpectrum { band, coeffs }
    }
}

/// Uniform sampling nodes `t_p = 2πp/L`, `p = 0..L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleGrid {
    l: usize,
}

impl SampleGrid {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::Config("sample grid needs at least one node".into()));
        }
        Ok(Self { l })
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, p: usize) -> f64 {
        2.0 * PI * p as f64 / self.l as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.l).map(|p| self.node(p))
    }
}

/// An `M × L` matrix of channel samples `s_{m,p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSamples {
    grid: SampleGrid,
    rows: Vec<Vec<Complex64>>,
}

impl MultichannelSamples {
    pub fn new(grid: SampleGrid, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DimensionMismatch("at least one channel is required".into()));
        }
        for (m, row) in rows.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(Error::DimensionMismatch(format!(
                    "channel {m} has {} samples, expected {}",
                    row.len(),
                    grid.len()
                )));
            }
            if row.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite(format!("samples of channel {m}")));
            }
        }
        Ok(Self { grid, rows })
    }

    pub fn zeros(grid: SampleGrid, channels: usize) -> Self {
        Self { grid, rows: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; channels] }
    }

    pub fn grid(&self) -> SampleGrid {
        self.grid
    }

    pub fn channels(&self) -> usize {
        self.rows.len()
    }

    /// Samples per channel, `L`.
    pub fn per_channel(&self) -> usize {
        self.grid.len()
    }

    /// Total sample count `N_s = L·M`.
    pub fn total(&self) -> usize {
        self.grid.len() * self.rows.len()
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.rows[m]
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    /// Row-major flattening `(s_1; s_2; …; s_M)`.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// `alpha·self + other`, sample by sample.
    pub fn axpy(&self, alpha: Complex64, other: &MultichannelSamples) -> Result<MultichannelSamples> {
        if self.grid != other.grid || self.channels() != other.channels() {
            return Err(Error::DimensionMismatch("sample matrices differ in shape".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| alpha * x + y).collect())
            .collect();
        Ok(Self { grid: self.grid, rows })
    }

    pub(crate) fn from_rows_unchecked(grid: SampleGrid, rows: Vec<Vec<Complex64>>) -> Self {
        Self { grid, rows }
    }
}

/// Real i.i.d. Gaussian noise `N(0, σ²)` added to every sample.
///
/// Draws for trial `k` come from a ChaCha stream keyed on `(seed, k)` and are
/// consumed in channel-major order, so any trial can be regenerated alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Config(format!("noise level must be finite and nonnegative, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }

    /// `channels × l` noise realisation for trial `trial`.
    pub fn draw(&self, trial: u64, channels: usize, l: usize) -> Vec<Vec<f64>> {
        if self.sigma == 0.0 {
            return vec![vec![0.0; l]; channels];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        (0..channels)
            .map(|_| (0..l).map(|_| self.sigma * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect()
    }
}

/// `s_{m,p} = Σ_n a(n) b_m(n) e^{i n t_p} + ε_{m,p}`.
///
/// The clean part is computed by folding the signal's coefficients modulo
/// `L` and taking one inverse DFT per channel, which is exact up to the
/// signal's truncation of its own support.
pub fn channel_samples(
    signal: &dyn SignalModel,
    bank: &ChannelBank,
    grid: SampleGrid,
    noise: &NoiseModel,
    trial: u64,
) -> Result<MultichannelSamples> {
    let l = grid.len();
    let support = signal.support();
    let coeffs: Vec<Complex64> = support.iter().map(|n| signal.coefficient(n)).collect();
    let ifft = FftPlanner::new().plan_fft_inverse(l);
    let eps = noise.draw(trial, bank.len(), l);
    let mut rows = Vec::with_capacity(bank.len());
    for (m, channel) in bank.channels().iter().enumerate() {
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for (n, a) in support.iter().zip(&coeffs) {
            buf[n.rem_euclid(l as i64) as usize] += a * channel.response(n);
        }
        ifft.process(&mut buf);
        for (v, e) in buf.iter_mut().zip(&eps[m]) {
            v.re += e;
        }
        rows.push(buf);
    }
    Ok(MultichannelSamples::from_rows_unchecked(grid, rows))
}
