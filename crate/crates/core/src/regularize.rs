//! Regularized least squares on the Fourier coefficients:
//! `min_x Σ_m ‖C_m x − s_m‖² + α σ² φ(W_η x)` with `φ = ‖·‖₂²` (Tikhonov) or
//! the sum of complex moduli (group-sparse, solved by ADMM).
//!
//! Columns of `C` whose frequencies agree mod `L` are the only ones that
//! interact: `(C*C)_{n,n'} = L Σ_m conj(b_m(n)) b_m(n')` for `n ≡ n' (mod L)`
//! and zero otherwise. Both solvers therefore factor one small block per
//! residue class, once, and reuse the factors across right-hand sides.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::mci::dft_domain;
use crate::realify::{complexify_vector, realify_matrix, realify_vector};
use crate::schemes::ChannelBank;
use crate::spectrum::{channel_samples, BandIndexSet, FourierSpectrum, MultichannelSamples, NoiseModel, SampleGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

impl std::str::FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Penalty::L1),
            "l2" => Ok(Penalty::L2),
            _ => Err(Error::Config(format!("unknown penalty '{s}' (expected l1 or l2)"))),
        }
    }
}

/// Scaled-form ADMM settings. Stopping uses the usual absolute/relative
/// test: `‖r‖ ≤ √(2μ)·tol_abs + tol_rel·max(‖y‖, ‖z‖)` and likewise for the
/// dual residual against `ρ‖u‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmConfig {
    pub rho: f64,
    pub max_iter: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self { rho: 1.0, max_iter: 2000, tol_abs: 1e-8, tol_rel: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularizerConfig {
    pub penalty: Penalty,
    pub eta: f64,
    pub alpha: f64,
    pub admm: AdmmConfig,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        Self { penalty: Penalty::L1, eta: 1.2, alpha: 1.0, admm: AdmmConfig::default() }
    }
}

impl RegularizerConfig {
    pub fn l2() -> Self {
        Self { penalty: Penalty::L2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be finite and ≥ 0, got {}", self.eta)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be finite and ≥ 0, got {}", self.alpha)));
        }
        let a = &self.admm;
        if !(a.rho > 0.0 && a.rho.is_finite()) || a.max_iter == 0 || !(a.tol_abs >= 0.0) || !(a.tol_rel >= 0.0) {
            return Err(Error::Config("ADMM needs rho > 0, max_iter ≥ 1 and nonnegative tolerances".into()));
        }
        Ok(())
    }

    /// The penalty weight `α σ²`; nonpositive σ switches the penalty off.
    pub fn kappa(&self, sigma: f64) -> f64 {
        if sigma > 0.0 {
            self.alpha * sigma * sigma
        } else {
            0.0
        }
    }
}

/// `W_η(n) = 1 + |n|^η`.
pub fn weight(n: i64, eta: f64) -> f64 {
    1.0 + (n.unsigned_abs() as f64).powf(eta)
}

/// `v · max(0, 1 − κ/‖v‖₂)`.
pub fn group_shrinkage(v: [f64; 2], kappa: f64) -> [f64; 2] {
    let norm = v[0].hypot(v[1]);
    if norm <= kappa {
        return [0.0, 0.0];
    }
    let scale = 1.0 - kappa / norm;
    [v[0] * scale, v[1] * scale]
}

fn shrink(v: Complex64, kappa: f64) -> Complex64 {
    let [re, im] = group_shrinkage([v.re, v.im], kappa);
    Complex64::new(re, im)
}

/// The permutation taking `γ(y) = [Re y; Im y]` (length `k`) to interleaved
/// `(Re y₁, Im y₁, Re y₂, …)`, 0-based: position `i` of the output holds
/// entry `perm[i]` of the input.
pub fn pk_permutation(k: usize) -> Result<Vec<usize>> {
    if k % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("realified length {k} is odd")));
    }
    let h = k / 2;
    Ok((0..k).map(|i| if i % 2 == 0 { i / 2 } else { h + i / 2 }).collect())
}

/// `Σ_k ‖y_k^{(p)}‖₂` over consecutive pairs of an already permuted vector.
pub fn group_norm_sum(permuted: &[f64]) -> f64 {
    permuted.chunks(2).map(|p| p[0].hypot(*p.get(1).unwrap_or(&0.0))).sum()
}

/// The synthesis operator `C` (stacked `C_m`, rows `m·L + p`) for a band,
/// plus the weights `W_η`.
#[derive(Debug, Clone)]
pub struct SynthesisSystem {
    bank: ChannelBank,
    band: BandIndexSet,
    grid: SampleGrid,
    weights: Vec<f64>,
    /// Band offsets grouped by residue mod `L`.
    blocks: Vec<Vec<usize>>,
}

pub fn build_system(bank: &ChannelBank, band: BandIndexSet, grid: SampleGrid, eta: f64) -> Result<SynthesisSystem> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("eta must be finite and ≥ 0, got {eta}")));
    }
    let l = grid.len();
    let blocks = (0..l.min(band.len())).map(|r| (r..band.len()).step_by(l).collect()).collect();
    Ok(SynthesisSystem {
        bank: bank.clone(),
        band,
        grid,
        weights: band.iter().map(|n| weight(n, eta)).collect(),
        blocks,
    })
}

impl SynthesisSystem {
    pub fn band(&self) -> BandIndexSet {
        self.band
    }

    pub fn grid(&self) -> SampleGrid {
        self.grid
    }

    pub fn bank(&self) -> &ChannelBank {
        &self.bank
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Dense `C`, `M·L × μ`: `C(m·L + p, col(n)) = b_m(n) e^{i n t_p}`.
    pub fn matrix(&self) -> CMatrix {
        let l = self.grid.len();
        CMatrix::from_fn(self.bank.len() * l, self.band.len(), |row, col| {
            let (m, p) = (row / l, row % l);
            let n = self.band.index(col);
            self.bank.response(m, n) * Complex64::from_polar(1.0, n as f64 * self.grid.node(p))
        })
    }

    /// `C x`.
    pub fn synthesize(&self, x: &FourierSpectrum) -> Result<MultichannelSamples> {
        if x.band() != self.band {
            return Err(Error::DimensionMismatch("spectrum band differs from the system band".into()));
        }
        channel_samples(x, &self.bank, self.grid, &NoiseModel::noiseless(), 0)
    }

    /// `C* s`, via one FFT per channel.
    pub fn adjoint(&self, samples: &MultichannelSamples) -> Result<Vec<Complex64>> {
        self.check_samples(samples)?;
        let l = self.grid.len();
        let d = dft_domain(samples, self.band.n_lo());
        Ok(self
            .band
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let r = i % l;
                (0..self.bank.len()).map(|m| self.bank.response(m, n).conj() * d[m][r]).sum::<Complex64>() * l as f64
            })
            .collect())
    }

    /// `(C*C)` restricted to one residue block.
    fn gram_block(&self, block: &[usize]) -> CMatrix {
        let l = self.grid.len() as f64;
        let resp: Vec<Vec<Complex64>> = block
            .iter()
            .map(|&i| (0..self.bank.len()).map(|m| self.bank.response(m, self.band.index(i))).collect())
            .collect();
        CMatrix::from_fn(block.len(), block.len(), |a, b| {
            resp[a].iter().zip(&resp[b]).map(|(x, y)| x.conj() * y).sum::<Complex64>() * l
        })
    }

    /// `‖C x − s‖²`.
    pub fn residual_norm_sq(&self, x: &FourierSpectrum, samples: &MultichannelSamples) -> Result<f64> {
        let fit = self.synthesize(x)?;
        self.check_samples(samples)?;
        Ok(fit.flatten().iter().zip(samples.flatten()).map(|(a, b)| (a - b).norm_sqr()).sum())
    }

    fn check_samples(&self, samples: &MultichannelSamples) -> Result<()> {
        if samples.channels() != self.bank.len() || samples.per_channel() != self.grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "samples are {}×{}, system expects {}×{}",
                samples.channels(),
                samples.per_channel(),
                self.bank.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Factor `block(C*C)·scale_c + diag(shift)` per residue class, where
    /// `shift` and the column scaling are supplied per band offset.
    fn factor_blocks(&self, col_scale: &[f64], shift: &[f64], context: &str) -> Result<Vec<Cholesky>> {
        self.blocks
            .iter()
            .map(|block| {
                let mut g = self.gram_block(block);
                for (a, &i) in block.iter().enumerate() {
                    for (b, &j) in block.iter().enumerate() {
                        g[(a, b)] *= col_scale[i] * col_scale[j];
                    }
                    g[(a, a)] += shift[i];
                }
                let gr = realify_matrix(&g);
                Cholesky::new(&gr.data, gr.rows)
                    .filter(|c| c.condition_estimate() < 1e14)
                    .ok_or_else(|| Error::SingularSystem {
                        cond: Cholesky::new(&gr.data, gr.rows).map_or(f64::INFINITY, |c| c.condition_estimate()),
                        context: format!("{context} at n = {}", self.band.index(block[0])),
                    })
            })
            .collect()
    }

    fn block_solve(&self, factors: &[Cholesky], rhs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); rhs.len()];
        for (block, chol) in self.blocks.iter().zip(factors) {
            let local: Vec<Complex64> = block.iter().map(|&i| rhs[i]).collect();
            let mut r = realify_vector(&local);
            chol.solve_in_place(&mut r);
            for (&i, v) in block.iter().zip(complexify_vector(&r)) {
                out[i] = v;
            }
        }
        out
    }
}

/// Tikhonov solve with the normal equations factored once:
/// `(C*C + α σ² W²) x = C* s`.
#[derive(Debug, Clone)]
pub struct L2Solver {
    system: SynthesisSystem,
    factors: Vec<Cholesky>,
}

impl L2Solver {
    pub fn new(system: &SynthesisSystem, cfg: &RegularizerConfig, sigma: f64) -> Result<Self> {
        cfg.validate()?;
        let kappa = cfg.kappa(sigma);
        let ones = vec![1.0; system.band.len()];
        let shift: Vec<f64> = system.weights.iter().map(|w| kappa * w * w).collect();
        let factors = system.factor_blocks(&ones, &shift, "Tikhonov normal equations")?;
        Ok(Self { system: system.clone(), factors })
    }

    pub fn solve(&self, samples: &MultichannelSamples) -> Result<FourierSpectrum> {
        let rhs = self.system.adjoint(samples)?;
        FourierSpectrum::new(self.system.band, self.system.block_solve(&self.factors, &rhs))
    }
}

pub fn l2_solve(
    system: &SynthesisSystem,
    samples: &MultichannelSamples,
    cfg: &RegularizerConfig,
    sigma: f64,
) -> Result<FourierSpectrum> {
    L2Solver::new(system, cfg, sigma)?.solve(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmmReport {
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Group-sparse solve of `min_y ‖C W⁻¹ y − s‖² + κ Σ_n |y_n|`, `x = W⁻¹ y`,
/// by scaled ADMM on the split `y = z`.
#[derive(Debug, Clone)]
pub struct L1Solver {
    system: SynthesisSystem,
    factors: Vec<Cholesky>,
    inv_w: Vec<f64>,
    kappa: f64,
    admm: AdmmConfig,
}

impl L1Solver {
    pub fn new(system: &SynthesisSystem, cfg: &RegularizerConfig, sigma: f64) -> Result<Self> {
        cfg.validate()?;
        let inv_w: Vec<f64> = system.weights.iter().map(|w| 1.0 / w).collect();
        // (2 A*A + ρI) with A = C W⁻¹.
        let scale: Vec<f64> = inv_w.iter().map(|v| v * std::f64::consts::SQRT_2).collect();
        let shift = vec![cfg.admm.rho; system.band.len()];
        let factors = system.factor_blocks(&scale, &shift, "ADMM update")?;
        Ok(Self { system: system.clone(), factors, inv_w, kappa: cfg.kappa(sigma), admm: cfg.admm })
    }

    pub fn solve(&self, samples: &MultichannelSamples) -> Result<(FourierSpectrum, AdmmReport)> {
        self.run(samples, |_| {})
    }

    /// Like [`solve`](Self::solve), also returning the objective at each
    /// iterate `x = W⁻¹ z`.
    pub fn solve_traced(&self, samples: &MultichannelSamples) -> Result<(FourierSpectrum, AdmmReport, Vec<f64>)> {
        let mut zs = Vec::new();
        let (x, report) = self.run(samples, |z| zs.push(z.to_vec()))?;
        let trace = zs
            .iter()
            .map(|z| {
                let xi = FourierSpectrum::new(self.system.band, self.unweight(z))?;
                Ok(self.system.residual_norm_sq(&xi, samples)? + self.kappa * z.iter().map(|v| v.norm()).sum::<f64>())
            })
            .collect::<Result<_>>()?;
        Ok((x, report, trace))
    }

    fn unweight(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter().zip(&self.inv_w).map(|(v, w)| v * w).collect()
    }

    fn run(&self, samples: &MultichannelSamples, mut observe: impl FnMut(&[Complex64])) -> Result<(FourierSpectrum, AdmmReport)> {
        let rho = self.admm.rho;
        let n = self.inv_w.len();
        let atb: Vec<Complex64> = self.system.adjoint(samples)?.iter().zip(&self.inv_w).map(|(v, w)| v * (2.0 * w)).collect();
        let zero = Complex64::new(0.0, 0.0);
        let (mut z, mut u) = (vec![zero; n], vec![zero; n]);
        let mut rhs = vec![zero; n];
        let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let floor = ((2 * n) as f64).sqrt() * self.admm.tol_abs;
        let mut report = AdmmReport { iterations: 0, converged: false, primal_residual: f64::NAN, dual_residual: f64::NAN };
        for it in 1..=self.admm.max_iter {
            for i in 0..n {
                rhs[i] = atb[i] + (z[i] - u[i]) * rho;
            }
            let y = self.system.block_solve(&self.factors, &rhs);
            let mut primal = 0.0;
            let mut dual = 0.0;
            for i in 0..n {
                let zi = shrink(y[i] + u[i], self.kappa / rho);
                dual += (zi - z[i]).norm_sqr();
                z[i] = zi;
                u[i] += y[i] - zi;
                primal += (y[i] - zi).norm_sqr();
            }
            observe(&z);
            report.iterations = it;
            report.primal_residual = primal.sqrt();
            report.dual_residual = rho * dual.sqrt();
            let eps_pri = floor + self.admm.tol_rel * norm(&y).max(norm(&z));
            let eps_dual = floor + self.admm.tol_rel * rho * norm(&u);
            if report.primal_residual <= eps_pri && report.dual_residual <= eps_dual {
                report.converged = true;
                break;
            }
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ADMM iterate".into()));
        }
        Ok((FourierSpectrum::new(self.system.band, self.unweight(&z))?, report))
    }
}

pub fn l1_solve(
    system: &SynthesisSystem,
    samples: &MultichannelSamples,
    cfg: &RegularizerConfig,
    sigma: f64,
) -> Result<(FourierSpectrum, AdmmReport)> {
    L1Solver::new(system, cfg, sigma)?.solve(samples)
}

/// `‖C x − s‖² + κ φ(W x)` for the configured penalty.
pub fn objective(
    system: &SynthesisSystem,
    x: &FourierSpectrum,
    samples: &MultichannelSamples,
    cfg: &RegularizerConfig,
    sigma: f64,
) -> Result<f64> {
    let wx = x.coeffs().iter().zip(&system.weights).map(|(v, w)| v * w);
    let pen: f64 = match cfg.penalty {
        Penalty::L1 => wx.map(|v| v.norm()).sum(),
        Penalty::L2 => wx.map(|v| v.norm_sqr()).sum(),
    };
    Ok(system.residual_norm_sq(x, samples)? + cfg.kappa(sigma) * pen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexLu;
    use crate::mci::{exact_samples, InterpolationKernel};
    use crate::schemes::SchemeTag;
    use crate::signals::TestSignal;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(tag: SchemeTag, ns: usize, eta: f64) -> (InterpolationKernel, SynthesisSystem) {
        let bank = ChannelBank::named(tag).unwrap();
        let k = InterpolationKernel::centered(&bank, ns).unwrap();
        let sys = build_system(&bank, k.band(), SampleGrid::new(k.l()).unwrap(), eta).unwrap();
        (k, sys)
    }

    fn noisy(k: &InterpolationKernel, sigma: f64, seed: u64) -> MultichannelSamples {
        let phi = TestSignal::PhiReal.model();
        channel_samples(phi.as_ref(), k.bank(), SampleGrid::new(k.l()).unwrap(), &NoiseModel::new(sigma, seed).unwrap(), 0).unwrap()
    }

    /// Dense least squares through the complex normal equations.
    fn dense_solve(sys: &SynthesisSystem, s: &MultichannelSamples, kappa: f64) -> Vec<Complex64> {
        let cm = sys.matrix();
        let mut g = cm.adjoint().matmul(&cm);
        for (i, w) in sys.weights().iter().enumerate() {
            g[(i, i)] += kappa * w * w;
        }
        ComplexLu::new(&g).solve(&cm.adjoint().mul_vec(&s.flatten()))
    }

    #[test]
    fn shrinkage_examples() {
        assert_eq!(group_shrinkage([3.0, 4.0], 5.0), [0.0, 0.0]);
        assert_eq!(group_shrinkage([3.0, 4.0], 0.0), [3.0, 4.0]);
        let v = group_shrinkage([3.0, 4.0], 2.5);
        assert!((v[0] - 1.5).abs() < 1e-15 && (v[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn system_structure() {
        let bank = ChannelBank::named(SchemeTag::F1).unwrap();
        let sys = build_system(&bank, BandIndexSet::centered(5).unwrap(), SampleGrid::new(5).unwrap(), 1.2).unwrap();
        let cm = sys.matrix();
        let col0 = sys.band().offset(0).unwrap();
        assert!((0..5).all(|p| (cm[(p, col0)] - c(1.0, 0.0)).norm() < 1e-15));
        assert!((sys.weights()[0] - (1.0 + 2f64.powf(1.2))).abs() < 1e-15);
        assert!((sys.weights()[4] - 3.2974).abs() < 1e-4);
        assert!(build_system(&bank, sys.band(), sys.grid(), -1.0).is_err());
    }

    #[test]
    fn synthesis_reproduces_samples() {
        let (k, sys) = setup(SchemeTag::FD2, 6, 1.2);
        let tf1 = TestSignal::TestFunc1.spectrum().unwrap();
        let want = exact_samples(&tf1, &k).unwrap().flatten();
        let got = sys.matrix().mul_vec(tf1.coeffs());
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
        let fast = sys.synthesize(&tf1).unwrap().flatten();
        assert!(fast.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn adjoint_matches_dense() {
        for tag in [SchemeTag::F1, SchemeTag::FH2, SchemeTag::FD2] {
            let (k, sys) = setup(tag, 20, 1.2);
            let s = noisy(&k, 0.3, 4);
            let dense = sys.matrix().adjoint().mul_vec(&s.flatten());
            let fast = sys.adjoint(&s).unwrap();
            assert!(dense.iter().zip(&fast).all(|(a, b)| (a - b).norm() < 1e-10), "{tag}");
        }
    }

    #[test]
    fn l2_recovers_consistent_data_without_penalty() {
        let (k, sys) = setup(SchemeTag::FH2, 8, 1.2);
        let tf1 = TestSignal::TestFunc1.spectrum().unwrap();
        let s = exact_samples(&tf1.restrict(k.band()), &k).unwrap();
        let cfg = RegularizerConfig { alpha: 0.0, ..RegularizerConfig::l2() };
        let x = l2_solve(&sys, &s, &cfg, 0.0).unwrap();
        for n in k.band().iter() {
            assert!((x.get(n) - tf1.get(n)).norm() < 1e-9);
        }
    }

    #[test]
    fn l2_matches_dense_normal_equations() {
        for tag in [SchemeTag::F1, SchemeTag::FH2, SchemeTag::FD2] {
            let (k, sys) = setup(tag, 24, 1.2);
            let s = noisy(&k, 0.2, 9);
            let x = l2_solve(&sys, &s, &RegularizerConfig::l2(), 0.2).unwrap();
            let want = dense_solve(&sys, &s, 0.04);
            assert!(x.coeffs().iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-10), "{tag}");
        }
    }

    #[test]
    fn heavy_penalty_crushes_solution() {
        let (k, sys) = setup(SchemeTag::FD2, 24, 1.2);
        let s = noisy(&k, 0.1, 2);
        let ls = l2_solve(&sys, &s, &RegularizerConfig { alpha: 0.0, ..RegularizerConfig::l2() }, 0.1).unwrap();
        let big = RegularizerConfig { alpha: 1e12, ..RegularizerConfig::l2() };
        let x2 = l2_solve(&sys, &s, &big, 0.1).unwrap();
        assert!(x2.energy().sqrt() < 1e-6 * ls.energy().sqrt());
        let (x1, rep) = l1_solve(&sys, &s, &RegularizerConfig { alpha: 1e12, ..Default::default() }, 0.1).unwrap();
        assert!(rep.converged);
        assert!(x1.coeffs().iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn penalties_vanish_at_zero_alpha_or_sigma() {
        let (k, sys) = setup(SchemeTag::FH2, 24, 1.2);
        let s = noisy(&k, 0.1, 3);
        let ls = dense_solve(&sys, &s, 0.0);
        let tight = AdmmConfig { tol_abs: 1e-13, tol_rel: 1e-13, max_iter: 20_000, ..Default::default() };
        for (alpha, sigma) in [(0.0, 0.1), (1.0, 0.0), (1.0, -0.5)] {
            let cfg = RegularizerConfig { alpha, admm: tight, ..Default::default() };
            let (x1, _) = l1_solve(&sys, &s, &cfg, sigma).unwrap();
            let x2 = l2_solve(&sys, &s, &RegularizerConfig { penalty: Penalty::L2, ..cfg }, sigma).unwrap();
            for i in 0..ls.len() {
                assert!((x1.coeffs()[i] - ls[i]).norm() < 1e-8);
                assert!((x2.coeffs()[i] - ls[i]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn l1_reaches_a_stationary_point() {
        // Optimality: 2(C*C x − C*s)_n ∈ −κ W_n ∂|x_n|.
        let (k, sys) = setup(SchemeTag::FH2, 40, 1.2);
        let s = noisy(&k, 0.3, 5);
        let cfg = RegularizerConfig { admm: AdmmConfig { tol_abs: 1e-12, tol_rel: 1e-12, max_iter: 50_000, ..Default::default() }, ..Default::default() };
        let (x, rep) = l1_solve(&sys, &s, &cfg, 0.3).unwrap();
        assert!(rep.converged);
        let cm = sys.matrix();
        let g: Vec<Complex64> = cm.adjoint().mul_vec(&cm.mul_vec(x.coeffs())).iter().zip(sys.adjoint(&s).unwrap()).map(|(a, b)| (a - b) * 2.0).collect();
        let kappa = 0.09;
        let mut zeros = 0;
        for (i, xi) in x.coeffs().iter().enumerate() {
            let kw = kappa * sys.weights()[i];
            if xi.norm() == 0.0 {
                zeros += 1;
                assert!(g[i].norm() <= kw * (1.0 + 1e-6));
            } else {
                assert!((g[i] + xi / xi.norm() * kw).norm() < 1e-6 * (1.0 + kw));
            }
        }
        assert!(zeros > 0, "the high band of φ should be zeroed");
    }

    #[test]
    fn l1_objective_settles_monotonically() {
        let (k, sys) = setup(SchemeTag::FD2, 40, 1.2);
        let s = noisy(&k, 0.1, 6);
        let solver = L1Solver::new(&sys, &RegularizerConfig::default(), 0.1).unwrap();
        let (_, _, trace) = solver.solve_traced(&s).unwrap();
        for w in trace[10..].windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "{} → {}", w[0], w[1]);
        }
    }

    #[test]
    fn sparsity_grows_with_alpha() {
        let (k, sys) = setup(SchemeTag::FH2, 64, 1.2);
        let s = noisy(&k, 0.2, 7);
        let mut prev = usize::MAX;
        for alpha in [0.1, 1.0, 10.0, 100.0] {
            let (x, _) = l1_solve(&sys, &s, &RegularizerConfig { alpha, ..Default::default() }, 0.2).unwrap();
            let active = x.coeffs().iter().filter(|v| v.norm() > 1e-6).count();
            assert!(active <= prev, "α={alpha}: {active} > {prev}");
            prev = active;
        }
        assert!(prev < 64);
    }

    #[test]
    fn l2_is_lipschitz_in_the_samples() {
        let (k, sys) = setup(SchemeTag::FD2, 16, 1.2);
        let s = noisy(&k, 0.1, 8);
        let cfg = RegularizerConfig::l2();
        let solver = L2Solver::new(&sys, &cfg, 0.1).unwrap();
        // Spectral norm of (C*C + κW²)⁻¹C* by power iteration on the dense map.
        let cm = sys.matrix();
        let mut g = cm.adjoint().matmul(&cm);
        for (i, w) in sys.weights().iter().enumerate() {
            g[(i, i)] += 0.01 * w * w;
        }
        let op = ComplexLu::new(&g).inverse().matmul(&cm.adjoint());
        let gram = op.adjoint().matmul(&op);
        let mut v = vec![c(1.0, 0.5); gram.cols()];
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w = gram.mul_vec(&v);
            lambda = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v = w.iter().map(|x| x / lambda).collect();
        }
        let bound = lambda.sqrt();
        let base = solver.solve(&s).unwrap();
        for seed in 0..5 {
            let delta = noisy(&k, 0.01, 100 + seed).axpy(c(-1.0, 0.0), &noisy(&k, 0.0, 0)).unwrap();
            let moved = solver.solve(&s.axpy(c(1.0, 0.0), &delta).unwrap()).unwrap();
            let dx: f64 = base.coeffs().iter().zip(moved.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let ds: f64 = delta.flatten().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(dx <= bound * ds * (1.0 + 1e-9));
        }
    }

    #[test]
    fn config_parsing_and_validation() {
        let cfg: RegularizerConfig = serde_json::from_str(r#"{"penalty":"l2","alpha":0.5}"#).unwrap();
        assert_eq!(cfg.penalty, Penalty::L2);
        assert_eq!(cfg.eta, 1.2);
        assert_eq!(cfg.admm.max_iter, 2000);
        assert!(RegularizerConfig { alpha: -1.0, ..cfg }.validate().is_err());
        assert!("L1".parse::<Penalty>().is_ok() && "l3".parse::<Penalty>().is_err());
    }

    proptest! {
        #[test]
        fn pk_groups_are_complex_pairs(vals in proptest::collection::vec(-5.0f64..5.0, 2..40)) {
            let y: Vec<Complex64> = vals.chunks(2).filter(|p| p.len() == 2).map(|p| c(p[0], p[1])).collect();
            let g = realify_vector(&y);
            let perm = pk_permutation(g.len()).unwrap();
            let permuted: Vec<f64> = perm.iter().map(|&i| g[i]).collect();
            let modulus: f64 = y.iter().map(|v| v.norm()).sum();
            prop_assert!((group_norm_sum(&permuted) - modulus).abs() < 1e-12 * (1.0 + modulus));
        }

        #[test]
        fn shrinkage_is_the_prox(a in -5.0f64..5.0, b in -5.0f64..5.0, kappa in 0.0f64..6.0, pa in -5.0f64..5.0, pb in -5.0f64..5.0) {
            // prox of κ‖·‖ minimizes ½‖z − v‖² + κ‖z‖.
            let f = |z: [f64; 2]| 0.5 * ((z[0] - a).powi(2) + (z[1] - b).powi(2)) + kappa * z[0].hypot(z[1]);
            let z = group_shrinkage([a, b], kappa);
            prop_assert!(f(z) <= f([pa, pb]) + 1e-12);
        }
    }
}
