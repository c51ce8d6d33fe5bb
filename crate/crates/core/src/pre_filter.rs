//! Sample-domain pre-filtering: per-channel DFT-domain multipliers
//! `s̃_m = U_L⁻¹ F_L⁻¹ Λ_m F_L U_L s_m`, and the design minimizing the
//! expected reconstruction error Φ2.
//!
//! Φ2 separates over bins `n ∈ I₁`. With `c_{k,m} = r_m(n+kL) d_m(n)` (0-based
//! sub-band `k`) and `D = diag_m((σ²/L) Σ_k |r_m(n+kL)|²)`, the bin's share is
//! `‖C(λ − 1)‖² + λ*Dλ`, since `Σ_m c_{k,m} = a(n+kL)` by biorthogonality.
//! The minimizer solves `(C*C + D)λ = C*C·1`; this is assembled and solved
//! in realified form.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

pub use crate::realify::{complexify_matrix, complexify_vector, realify_matrix, realify_vector};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::mci::{dft_domain, reconstruct_fft, reconstruct_spectrum, InterpolationKernel};
use crate::spectral::DftDomainSamples;
use crate::spectrum::{FourierSpectrum, MultichannelSamples};

/// `M` vectors of `L` complex multipliers; `lambdas[m][k]` acts on frequency
/// `N₁ + k` of channel `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreFilterDesign {
    lambdas: Vec<Vec<Complex64>>,
}

impl PreFilterDesign {
    pub fn new(lambdas: Vec<Vec<Complex64>>) -> Result<Self> {
        let l = lambdas.first().map_or(0, Vec::len);
        if l == 0 || lambdas.iter().any(|v| v.len() != l) {
            return Err(Error::DimensionMismatch("pre-filter needs M nonempty vectors of equal length".into()));
        }
        Ok(Self { lambdas })
    }

    /// `Λ = I`: leaves samples unchanged.
    pub fn identity(m: usize, l: usize) -> Self {
        Self { lambdas: vec![vec![Complex64::new(1.0, 0.0); l]; m] }
    }

    /// The same multipliers on every channel.
    pub fn shared(m: usize, lambda: Vec<Complex64>) -> Self {
        Self { lambdas: vec![lambda; m] }
    }

    pub fn channels(&self) -> usize {
        self.lambdas.len()
    }

    pub fn l(&self) -> usize {
        self.lambdas[0].len()
    }

    pub fn lambda(&self, m: usize) -> &[Complex64] {
        &self.lambdas[m]
    }

    fn check(&self, m: usize, l: usize) -> Result<()> {
        if self.channels() != m || self.l() != l {
            return Err(Error::DimensionMismatch(format!(
                "pre-filter is {}×{}, samples are {m}×{l}",
                self.channels(),
                self.l()
            )));
        }
        Ok(())
    }
}

/// `s̃_m = U_L⁻¹ F_L⁻¹ Λ_m F_L U_L s_m`.
pub fn apply_pre_filter(samples: &MultichannelSamples, design: &PreFilterDesign, n1: i64) -> Result<MultichannelSamples> {
    let l = samples.per_channel();
    design.check(samples.channels(), l)?;
    let ifft = FftPlanner::new().plan_fft_inverse(l);
    let unshift: Vec<Complex64> = (0..l)
        .map(|p| Complex64::from_polar(1.0, 2.0 * PI * (n1 * p as i64).rem_euclid(l as i64) as f64 / l as f64))
        .collect();
    let rows = dft_domain(samples, n1)
        .into_iter()
        .zip(&design.lambdas)
        .map(|(d, lam)| {
            let mut buf: Vec<Complex64> = d.iter().zip(lam).map(|(x, y)| x * y).collect();
            ifft.process(&mut buf);
            buf.iter().zip(&unshift).map(|(v, u)| v * u).collect()
        })
        .collect();
    MultichannelSamples::new(samples.grid(), rows)
}

/// The per-bin pieces of Φ2: `C` (`M × M`, rows = sub-bands) and the
/// noise diagonal `D`.
fn bin_system(d: &DftDomainSamples, kernel: &InterpolationKernel, sigma: f64, k0: usize) -> (CMatrix, Vec<f64>) {
    let (l, m) = (kernel.l(), kernel.m());
    let n = kernel.n1() + k0 as i64;
    let li = l as i64;
    let c = CMatrix::from_fn(m, m, |k, ch| kernel.r(ch, n + k as i64 * li) * d.block(ch)[k0]);
    let scale = sigma * sigma / l as f64;
    let noise = (0..m)
        .map(|ch| scale * (0..m).map(|k| kernel.r(ch, n + k as i64 * li).norm_sqr()).sum::<f64>())
        .collect();
    (c, noise)
}

fn check_inputs(d: &DftDomainSamples, kernel: &InterpolationKernel) -> Result<()> {
    if d.channels() != kernel.m() || d.l() != kernel.l() || d.n1() != kernel.n1() {
        return Err(Error::DimensionMismatch("DFT-domain samples do not match the kernel".into()));
    }
    Ok(())
}

/// `Φ2(λ) = Σ_n Σ_k |Σ_m c_{k,m}(λ_m(n) − 1)|² + (σ²/L) Σ_m Σ_n Σ_k |r_m(n+kL) λ_m(n)|²`.
pub fn phi2(design: &PreFilterDesign, d: &DftDomainSamples, kernel: &InterpolationKernel, sigma: f64) -> Result<f64> {
    check_inputs(d, kernel)?;
    design.check(kernel.m(), kernel.l())?;
    let mut total = 0.0;
    for k0 in 0..kernel.l() {
        let (c, noise) = bin_system(d, kernel, sigma, k0);
        let lam: Vec<Complex64> = (0..kernel.m()).map(|ch| design.lambdas[ch][k0]).collect();
        let shifted: Vec<Complex64> = lam.iter().map(|v| v - 1.0).collect();
        total += c.mul_vec(&shifted).iter().map(|v| v.norm_sqr()).sum::<f64>();
        total += lam.iter().zip(&noise).map(|(v, w)| w * v.norm_sqr()).sum::<f64>();
    }
    Ok(total)
}

/// `λ* = argmin Φ2`, one realified `2M × 2M` solve per bin:
/// `Γ(C*C + D) γ(λ) = γ(C*C·1)`.
pub fn optimal_pre_filter(d: &DftDomainSamples, kernel: &InterpolationKernel, sigma: f64) -> Result<PreFilterDesign> {
    check_inputs(d, kernel)?;
    let (l, m) = (kernel.l(), kernel.m());
    let mut lambdas = vec![vec![Complex64::new(0.0, 0.0); l]; m];
    let systems: Vec<(CMatrix, CMatrix)> = (0..l)
        .map(|k0| {
            let (c, noise) = bin_system(d, kernel, sigma, k0);
            let mut psi = c.adjoint().matmul(&c);
            let zeta = psi.clone();
            for (ch, w) in noise.iter().enumerate() {
                psi[(ch, ch)] += w;
            }
            (psi, zeta)
        })
        .collect();
    // Bins are judged against the largest diagonal over all bins so that a
    // vanishing bin (zero data, no noise) counts as singular.
    let diag_max = |p: &CMatrix| (0..m).map(|i| p[(i, i)].re).fold(0.0, f64::max);
    let global = systems.iter().map(|(p, _)| diag_max(p)).fold(0.0, f64::max);
    for (k0, (psi, gram)) in systems.iter().enumerate() {
        let zeta = gram.mul_vec(&vec![Complex64::new(1.0, 0.0); m]);
        let singular = |cond: f64| Error::SingularSystem {
            cond,
            context: format!("pre-filter system at n = {}", kernel.n1() + k0 as i64),
        };
        let local = diag_max(psi);
        if !(local > global * 1e-14) {
            return Err(singular(f64::INFINITY));
        }
        let psi_r = realify_matrix(psi);
        let chol = Cholesky::new(&psi_r.data, psi_r.rows).ok_or_else(|| singular(f64::INFINITY))?;
        let cond = chol.condition_estimate() * global / local;
        if cond > 1e14 {
            return Err(singular(cond));
        }
        let mut rhs = realify_vector(&zeta);
        chol.solve_in_place(&mut rhs);
        for (ch, v) in complexify_vector(&rhs).into_iter().enumerate() {
            lambdas[ch][k0] = v;
        }
    }
    Ok(PreFilterDesign { lambdas })
}

/// Pre-filter then reconstruct on the `n_out` grid.
pub fn mci_with_prefilter(
    samples: &MultichannelSamples,
    design: &PreFilterDesign,
    kernel: &InterpolationKernel,
    n_out: usize,
) -> Result<Vec<Complex64>> {
    reconstruct_fft(&apply_pre_filter(samples, design, kernel.n1())?, kernel, n_out)
}

/// Pre-filter then recover the reconstruction's spectrum.
pub fn prefiltered_spectrum(
    samples: &MultichannelSamples,
    design: &PreFilterDesign,
    kernel: &InterpolationKernel,
) -> Result<FourierSpectrum> {
    reconstruct_spectrum(&apply_pre_filter(samples, design, kernel.n1())?, kernel)
}
