//! Post-reconstruction filtering: coefficient-wise multipliers `β_k` on a
//! band `K`, the EMSE objective Φ1 they minimize, and the automatic band
//! choice.

use crate::error::{Error, Result};
use crate::mci::InterpolationKernel;
use crate::spectral::PsdEstimate;
use crate::spectrum::{BandIndexSet, FourierSpectrum};

/// Energy fraction the automatic band must capture.
pub const BAND_ENERGY_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct PostFilterDesign {
    band: BandIndexSet,
    beta: Vec<f64>,
}

impl PostFilterDesign {
    pub fn new(band: BandIndexSet, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != band.len() {
            return Err(Error::DimensionMismatch(format!("{} multipliers for {} frequencies", beta.len(), band.len())));
        }
        if beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Config("post-filter multipliers must be finite and nonnegative".into()));
        }
        Ok(Self { band, beta })
    }

    /// The ideal low-pass filter on `band`: `β_k = 1`.
    pub fn dirichlet(band: BandIndexSet) -> Self {
        Self { band, beta: vec![1.0; band.len()] }
    }

    pub fn band(&self) -> BandIndexSet {
        self.band
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `β_k`, zero outside the band.
    pub fn get(&self, k: i64) -> f64 {
        self.band.offset(k).map_or(0.0, |i| self.beta[i])
    }
}

/// `Φ1(β) = Σ_{k∈K} |a(k)|²(β_k − 1)² + (σ²/L) Σ_m Σ_{k∈K} |r_m(k) β_k|²`.
pub fn phi1(design: &PostFilterDesign, psd: &PsdEstimate, kernel: &InterpolationKernel, sigma: f64) -> f64 {
    let scale = sigma * sigma / kernel.l() as f64;
    design
        .band
        .iter()
        .zip(&design.beta)
        .map(|(k, b)| psd.get(k) * (b - 1.0).powi(2) + scale * kernel.noise_gain(k) * b * b)
        .sum()
}

/// `β*_k = |a(k)|² / (|a(k)|² + (σ²/L) Σ_m |r_m(k)|²)`, with negative psd
/// values treated as zero. For a single identity channel this is the
/// Wiener filter.
pub fn optimal_post_filter(
    psd: &PsdEstimate,
    kernel: &InterpolationKernel,
    sigma: f64,
    band: BandIndexSet,
) -> PostFilterDesign {
    let scale = sigma * sigma / kernel.l() as f64;
    let beta = band
        .iter()
        .map(|k| {
            let a2 = psd.get(k).max(0.0);
            let den = a2 + scale * kernel.noise_gain(k);
            if den > 0.0 {
                a2 / den
            } else {
                0.0
            }
        })
        .collect();
    PostFilterDesign { band, beta }
}

/// `a(k)·β_k` on the design band, zero elsewhere; the result keeps the
/// input's band.
pub fn apply_post_filter(spec: &FourierSpectrum, design: &PostFilterDesign) -> Result<FourierSpectrum> {
    if !spec.band().contains_band(&design.band) {
        return Err(Error::InvalidBand(format!(
            "filter band {}..={} is not inside the spectrum band {}..={}",
            design.band.n_lo(),
            design.band.n_hi(),
            spec.band().n_lo(),
            spec.band().n_hi()
        )));
    }
    let mut out = spec.clone();
    for (k, a) in spec.band().iter().zip(out.coeffs_mut()) {
        *a *= design.get(k);
    }
    Ok(out)
}

/// The smallest window `[K̃₁, K̃₂] ∋ 0` holding at least 90% of the clamped
/// estimated energy, widened alternately right then left (one index at a
/// time, skipping a side that has reached the band edge) until it has at
/// least `⌈2√Ns⌉` indices.
///
/// Among minimal windows the one with the most energy wins, then the most
/// symmetric (smallest `|K̃₁ + K̃₂|`), then the leftmost.
pub fn select_band(psd: &PsdEstimate, ns: usize) -> Result<BandIndexSet> {
    let band = psd.band();
    let i0 = band
        .offset(0)
        .ok_or_else(|| Error::InvalidBand("the estimate's band must contain frequency 0".into()))?;
    let len = band.len();
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(0.0);
    for v in psd.values() {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + v.max(0.0));
    }
    let total = prefix[len];

    let (mut lo, mut hi) = (i0, i0);
    if total > 0.0 {
        let target = BAND_ENERGY_FRACTION * total;
        'width: for w in 1..=len {
            let mut best: Option<(f64, i64, usize)> = None;
            for start in i0.saturating_sub(w - 1)..=i0.min(len - w) {
                let energy = prefix[start + w] - prefix[start];
                if energy < target {
                    continue;
                }
                let asym = (band.index(start) + band.index(start + w - 1)).abs();
                let better = match best {
                    None => true,
                    Some((e, a, _)) => energy > e || (energy == e && asym < a),
                };
                if better {
                    best = Some((energy, asym, start));
                }
            }
            if let Some((_, _, start)) = best {
                lo = start;
                hi = start + w - 1;
                break 'width;
            }
        }
    }

    let want = ((2.0 * (ns as f64).sqrt()).ceil() as usize).min(len);
    let mut right = true;
    while hi - lo + 1 < want {
        if (right && hi + 1 < len) || lo == 0 {
            hi += 1;
        } else {
            lo -= 1;
        }
        right = !right;
    }
    BandIndexSet::new(band.index(lo), band.index(hi))
}
