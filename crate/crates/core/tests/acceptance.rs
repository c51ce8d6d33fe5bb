//! Acceptance suite: one line per criterion, PASS or FAIL, with the measured
//! numbers. Runs without the libtest harness so the lines come out in order;
//! pass criterion numbers as arguments to run a subset
//! (`cargo test --test acceptance -- 4 7`).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mcrecon::harness::{run_experiment, strictly_decreasing, with_threads, ExperimentConfig, ExperimentResult, Pipeline, SweepPoint};
use mcrecon::io::SchemeSpec;
use mcrecon::mci::{aliasing_error, aliasing_error_exact, reconstruct_direct, reconstruct_fft, reconstruct_spectrum, InterpolationKernel};
use mcrecon::noise::{emse_factor, NoiseErrorReport};
use mcrecon::post_filter::{optimal_post_filter, phi1, PostFilterDesign};
use mcrecon::pre_filter::{optimal_pre_filter, phi2, PreFilterDesign};
use mcrecon::realify::{complexify_matrix, complexify_vector, realify_matrix, realify_vector};
use mcrecon::linalg::CMatrix;
use mcrecon::schemes::{Channel, ChannelBank, SchemeTag};
use mcrecon::signals::TestSignal;
use mcrecon::spectral::{assemble_d, estimate_psd, psd_mse, PsdEstimate};
use mcrecon::spectrum::{channel_samples, BandIndexSet, FourierSpectrum, MultichannelSamples, NoiseModel, SampleGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_501;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bank(tag: SchemeTag) -> ChannelBank {
    ChannelBank::named(tag).unwrap()
}

fn noiseless(spec: &FourierSpectrum, k: &InterpolationKernel) -> MultichannelSamples {
    channel_samples(spec, k.bank(), SampleGrid::new(k.l()).unwrap(), &NoiseModel::noiseless(), 0).unwrap()
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn experiment(tag: SchemeTag, ns: Vec<usize>, sigma: f64, trials: usize, pipelines: Vec<Pipeline>) -> ExperimentResult {
    let cfg = ExperimentConfig::new(SchemeSpec::Named(tag), ns, sigma, trials, pipelines, TestSignal::PhiReal, SEED);
    run_experiment(&cfg).unwrap()
}

// 1 ──────────────────────────────────────────────────────────────────────────

fn exact_oracle() -> Outcome {
    let tf1 = TestSignal::TestFunc1.spectrum().unwrap();
    let i = |re, im| c(re, im);
    let rows: Vec<(SchemeTag, usize, Vec<Vec<Complex64>>)> = vec![
        (SchemeTag::F1, 6, vec![vec![i(1., 1.), i(2., -1.), i(1., 0.), i(2., 1.), i(1., -1.), i(0., 0.)]]),
        (SchemeTag::FD2, 3, vec![vec![i(3., 2.), i(3., -2.), i(1., 0.)], vec![i(1., 0.), i(1., 0.), i(0., 0.)]]),
        (SchemeTag::FH2, 3, vec![vec![i(3., 2.), i(3., -2.), i(1., 0.)], vec![i(0., -1.), i(0., 1.), i(0., 0.)]]),
        (SchemeTag::F1, 8, vec![vec![i(0., 0.), i(1., 1.), i(2., -1.), i(1., 0.), i(2., 1.), i(1., -1.), i(0., 0.), i(0., 0.)]]),
        (SchemeTag::FD2, 4, vec![vec![i(2., 1.), i(2., 0.), i(2., -1.), i(1., 0.)], vec![i(-1., 2.), i(4., 0.), i(-1., -2.), i(0., 0.)]]),
        (SchemeTag::FH2, 4, vec![vec![i(2., 1.), i(2., 0.), i(2., -1.), i(1., 0.)], vec![i(1., -2.), i(-2., 0.), i(1., 2.), i(0., 0.)]]),
    ];
    let mut worst: f64 = 0.0;
    for (tag, l, want) in &rows {
        let b = bank(*tag);
        let k = InterpolationKernel::centered(&b, l * b.len()).unwrap();
        let d = assemble_d(&noiseless(&tf1, &k), k.n1());
        for (m, row) in want.iter().enumerate() {
            for (got, w) in d.block(m).iter().zip(row) {
                worst = worst.max((got - w).norm());
            }
        }
    }
    Outcome::new(worst < 1e-9, format!("6 rows, max |d − table| = {worst:.1e} (tol 1e-9)"))
}

// 2 ──────────────────────────────────────────────────────────────────────────

fn closed_form_factors() -> Outcome {
    let mut worst: f64 = 0.0;
    for ns in [8usize, 56, 400] {
        let n = ns as f64;
        for (tag, want) in [(SchemeTag::F1, 1.0), (SchemeTag::FH2, 1.0 + 4.0 / n), (SchemeTag::FD2, 2.0 / 3.0 + 28.0 / (3.0 * n * n))] {
            let k = InterpolationKernel::centered(&bank(tag), ns).unwrap();
            worst = worst.max((emse_factor(&k) - want).abs());
        }
    }
    Outcome::new(worst < 1e-12, format!("Ns ∈ {{8, 56, 400}} × F1/FH2/FD2, max deviation {worst:.1e} (tol 1e-12)"))
}

// 3 ──────────────────────────────────────────────────────────────────────────

fn perfect_reconstruction() -> Outcome {
    let delay = FourierSpectrum::new(
        BandIndexSet::new(-64, 64).unwrap(),
        (-64..=64).map(|n| Complex64::from_polar(1.0 + 0.2 * (0.5 * n as f64).cos(), 0.1 * n as f64)).collect(),
    )
    .unwrap();
    let banks = [
        bank(SchemeTag::F1),
        bank(SchemeTag::FH2),
        bank(SchemeTag::FD2),
        ChannelBank::new(vec![Channel::Identity, Channel::Kernel(delay)]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut rec_err, mut fft_err): (f64, f64) = (0.0, 0.0);
    for case in 0..100 {
        let b = &banks[case % 4];
        let ns = 2 * rng.random_range(2..=32usize);
        let k = InterpolationKernel::centered(b, ns).unwrap();
        // A random sub-band of the reconstruction band.
        let lo = rng.random_range(k.band().n_lo()..=k.band().n_hi());
        let hi = rng.random_range(lo..=k.band().n_hi());
        let band = BandIndexSet::new(lo, hi).unwrap();
        let coeffs = band.iter().map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let spec = FourierSpectrum::new(band, coeffs).unwrap();
        let s = noiseless(&spec, &k);
        let n_out = 2 * ns + 1;
        let fft = reconstruct_fft(&s, &k, n_out).unwrap();
        let truth = spec.evaluate_grid(n_out).unwrap();
        for (q, (v, t)) in fft.iter().zip(&truth).enumerate() {
            rec_err = rec_err.max((v - t).norm());
            let direct = reconstruct_direct(&s, &k, 2.0 * std::f64::consts::PI * q as f64 / n_out as f64).unwrap();
            fft_err = fft_err.max((v - direct).norm());
        }
        let rs = reconstruct_spectrum(&s, &k).unwrap();
        for n in k.band().iter() {
            rec_err = rec_err.max((rs.get(n) - spec.get(n)).norm());
        }
    }
    Outcome::new(
        rec_err < 1e-9 && fft_err < 1e-9,
        format!("100 spectra over F1/FH2/FD2/custom: max reconstruction error {rec_err:.1e}, FFT vs direct {fft_err:.1e} (tol 1e-9)"),
    )
}

// 4 ──────────────────────────────────────────────────────────────────────────

fn delta_sde(tag: SchemeTag, ns: usize, sigma: f64, trials: u64) -> f64 {
    let tf1 = TestSignal::TestFunc1.spectrum().unwrap();
    let truth = PsdEstimate::from_spectrum(&tf1);
    let b = bank(tag);
    let k = InterpolationKernel::centered(&b, ns).unwrap();
    let noise = NoiseModel::new(sigma, SEED).unwrap();
    let grid = SampleGrid::new(k.l()).unwrap();
    let total: f64 = (0..trials)
        .map(|t| {
            let s = channel_samples(&tf1, &b, grid, &noise, t).unwrap();
            let est = estimate_psd(&assemble_d(&s, k.n1()), &k, sigma).unwrap();
            psd_mse(&est.restrict(tf1.band()), &truth).unwrap()
        })
        .sum();
    total / trials as f64
}

fn table1() -> Outcome {
    let sigma = 0.375f64.sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for (tag, ns, label, want) in [(SchemeTag::F1, 6, "f", 0.3390), (SchemeTag::FD2, 60, "f+f′", 0.0356), (SchemeTag::F1, 600, "f", 0.0034)] {
        let got = delta_sde(tag, ns, sigma, 1000);
        let ok = rel(got, want) <= 0.20;
        pass &= ok;
        parts.push(format!("(Ns={ns}, {label}) {got:.4} vs {want} [{}]", if ok { "ok" } else { "off" }));
    }
    Outcome::new(pass, format!("{} (±20%, 1000 trials)", parts.join("; ")))
}

// 5 ──────────────────────────────────────────────────────────────────────────

fn table5() -> Outcome {
    let small = experiment(SchemeTag::F1, vec![12], 0.05, 1000, vec![Pipeline::MCI]);
    let large = experiment(SchemeTag::F1, vec![1248], 0.05, 200, vec![Pipeline::MCI, Pipeline::POST]);
    let checks = [
        ("MCI Ns=12", small.get(12, Pipeline::MCI).unwrap().emse, 1.5859e-1, 0.15),
        ("MCI Ns=1248", large.get(1248, Pipeline::MCI).unwrap().emse, 2.4988e-3, 0.15),
        ("MCI+Post Ns=1248", large.get(1248, Pipeline::POST).unwrap().emse, 1.8447e-4, 0.25),
    ];
    let pass = checks.iter().all(|(_, got, want, tol)| rel(*got, *want) <= *tol);
    let detail = checks
        .iter()
        .map(|(name, got, want, tol)| format!("{name} {got:.4e} vs {want:.4e} (±{:.0}%)", tol * 100.0))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome::new(pass, detail)
}

// 6 ──────────────────────────────────────────────────────────────────────────

fn tables34() -> Outcome {
    let fh2 = experiment(SchemeTag::FH2, vec![1248], 0.05, 200, vec![Pipeline::L1_POST]);
    let fd2 = experiment(SchemeTag::FD2, vec![1248], 0.1, 200, vec![Pipeline::L2_POST]);
    let l1 = fh2.get(1248, Pipeline::L1_POST).unwrap();
    let l2 = fd2.get(1248, Pipeline::L2_POST).unwrap();
    let pass = rel(l1.emse, 1.7610e-4) <= 0.30 && rel(l2.emse, 9.5448e-4) <= 0.30 && l1.failed == 0 && l2.failed == 0;
    Outcome::new(
        pass,
        format!(
            "FH2 l1+Post {:.4e} vs 1.7610e-4 ({} of 200 ADMM runs hit the iteration cap); FD2 l2+Post {:.4e} vs 9.5448e-4 (±30%)",
            l1.emse, l1.admm_unconverged, l2.emse
        ),
    )
}

// 7 ──────────────────────────────────────────────────────────────────────────

fn points(result: &ExperimentResult, p: Pipeline, ns: &[usize]) -> Vec<SweepPoint> {
    ns.iter()
        .map(|&n| {
            let c = result.get(n, p).unwrap();
            SweepPoint { ns: n, log2_ns: (n as f64).log2(), emse: c.emse, std_err: c.std_err }
        })
        .collect()
}

/// Weighted least-squares slope of EMSE against log₂ Ns and its standard error.
fn trend(points: &[SweepPoint]) -> (f64, f64) {
    let w: Vec<f64> = points.iter().map(|p| 1.0 / (p.std_err * p.std_err)).collect();
    let sw: f64 = w.iter().sum();
    let xm = points.iter().zip(&w).map(|(p, w)| w * p.log2_ns).sum::<f64>() / sw;
    let ym = points.iter().zip(&w).map(|(p, w)| w * p.emse).sum::<f64>() / sw;
    let sxx: f64 = points.iter().zip(&w).map(|(p, w)| w * (p.log2_ns - xm).powi(2)).sum();
    let sxy: f64 = points.iter().zip(&w).map(|(p, w)| w * (p.log2_ns - xm) * (p.emse - ym)).sum();
    (sxy / sxx, 1.0 / sxx.sqrt())
}

fn monotonicity() -> Outcome {
    // (a) Plain MCI is flat once aliasing is negligible.
    let flat_ns = [120, 216, 624, 1248];
    // Experiments reuse noise stream t for trial t at every Ns, which makes
    // the cells correlated; the trend test needs independent cells, so each
    // Ns gets its own seed here.
    let flat: Vec<SweepPoint> = flat_ns
        .iter()
        .map(|&ns| {
            let cfg = ExperimentConfig::new(SchemeSpec::Named(SchemeTag::F1), vec![ns], 0.05, 400, vec![Pipeline::MCI], TestSignal::PhiReal, SEED + ns as u64);
            points(&run_experiment(&cfg).unwrap(), Pipeline::MCI, &[ns])[0].clone()
        })
        .collect();
    let (slope, se) = trend(&flat);
    let a = slope.abs() <= 2.0 * se;

    // (b) Noise factors, exactly for every even Ns ≥ 6 and empirically at Ns = 120.
    let mut b = (6..=1248).step_by(2).all(|ns| {
        let f = |t| emse_factor(&InterpolationKernel::centered(&bank(t), ns).unwrap());
        f(SchemeTag::FD2) < f(SchemeTag::F1) && f(SchemeTag::F1) < f(SchemeTag::FH2)
    });
    let emp: Vec<_> = [SchemeTag::FD2, SchemeTag::F1, SchemeTag::FH2]
        .iter()
        .map(|&t| experiment(t, vec![120], 0.05, 400, vec![Pipeline::MCI]).get(120, Pipeline::MCI).unwrap().clone())
        .collect();
    b &= emp.windows(2).all(|w| w[0].emse < w[1].emse + 2.0 * w[0].std_err.hypot(w[1].std_err));

    // (c) MCI+Post decreases along the Ns grid.
    let grid = [84, 120, 216, 624, 1248];
    let r = experiment(SchemeTag::F1, grid.to_vec(), 0.05, 400, vec![Pipeline::POST]);
    let post = points(&r, Pipeline::POST, &grid);
    let cpass = strictly_decreasing(&post, 2.0);
    let series = post.iter().map(|p| format!("{:.3e}", p.emse)).collect::<Vec<_>>().join(" > ");

    Outcome::new(
        a && b && cpass,
        format!(
            "(a) MCI EMSE {} at Ns {flat_ns:?}, slope {slope:.2e} ± {se:.1e} per octave [{}]; (b) FD2 {:.3e} < F1 {:.3e} < FH2 {:.3e} [{}]; (c) Post {series} [{}]",
            flat.iter().map(|p| format!("{:.4e}", p.emse)).collect::<Vec<_>>().join("/"),
            if a { "ok" } else { "off" },
            emp[0].emse,
            emp[1].emse,
            emp[2].emse,
            if b { "ok" } else { "off" },
            if cpass { "ok" } else { "off" }
        ),
    )
}

// 8 ──────────────────────────────────────────────────────────────────────────

fn optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tags = [SchemeTag::F1, SchemeTag::FH2, SchemeTag::FD2];
    let (mut beat1, mut beat2) = (true, true);
    let (mut wiener_err, mut shared_err): (f64, f64) = (0.0, 0.0);
    for inst in 0..10 {
        let tag = tags[inst % 3];
        let ns = 2 * rng.random_range(3..=10usize);
        let k = InterpolationKernel::centered(&bank(tag), ns).unwrap();
        let sigma = rng.random_range(0.02..0.5);

        // Φ1 on a random nonnegative |a|² table.
        let psd = PsdEstimate::new(k.band(), k.band().iter().map(|_| rng.random_range(0.0..2.0)).collect()).unwrap();
        let opt = optimal_post_filter(&psd, &k, sigma, k.band());
        let best = phi1(&opt, &psd, &k, sigma);
        for p in 0..1000 {
            let beta: Vec<f64> = opt
                .beta()
                .iter()
                .map(|b| if p % 2 == 0 { rng.random_range(0.0..1.5) } else { (b + rng.random_range(-0.05..0.05)).max(0.0) })
                .collect();
            beat1 &= best <= phi1(&PostFilterDesign::new(k.band(), beta).unwrap(), &psd, &k, sigma) + 1e-14;
        }
        if tag == SchemeTag::F1 {
            for (b, a2) in opt.beta().iter().zip(psd.values()) {
                wiener_err = wiener_err.max((b - a2 / (a2 + sigma * sigma / k.l() as f64)).abs());
            }
        }

        // Φ2 on d from a noisy sample set of a random spectrum.
        let spec = FourierSpectrum::new(k.band(), k.band().iter().map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .unwrap();
        let noisy = channel_samples(&spec, k.bank(), SampleGrid::new(k.l()).unwrap(), &NoiseModel::new(sigma, SEED).unwrap(), inst as u64)
            .unwrap();
        let d = assemble_d(&noisy, k.n1());
        let lam = optimal_pre_filter(&d, &k, sigma).unwrap();
        let best = phi2(&lam, &d, &k, sigma).unwrap();
        for p in 0..1000 {
            let probe: Vec<Vec<Complex64>> = (0..k.m())
                .map(|m| {
                    lam.lambda(m)
                        .iter()
                        .map(|v| {
                            if p % 2 == 0 {
                                c(rng.random_range(-0.5..1.5), rng.random_range(-1.0..1.0))
                            } else {
                                v + c(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05))
                            }
                        })
                        .collect()
                })
                .collect();
            beat2 &= best <= phi2(&PreFilterDesign::new(probe).unwrap(), &d, &k, sigma).unwrap() + 1e-12 * (1.0 + best);
        }

        // Shared real λ on exact d is Φ1 with β(n) = λ at n's residue.
        let exact = assemble_d(&noiseless(&spec, &k), k.n1());
        let shared: Vec<f64> = (0..k.l()).map(|_| rng.random_range(0.0..1.5)).collect();
        let p2 = phi2(&PreFilterDesign::shared(k.m(), shared.iter().map(|&x| c(x, 0.0)).collect()), &exact, &k, sigma).unwrap();
        let beta: Vec<f64> = (0..ns).map(|i| shared[i % k.l()]).collect();
        let p1 = phi1(&PostFilterDesign::new(k.band(), beta).unwrap(), &PsdEstimate::from_spectrum(&spec), &k, sigma);
        shared_err = shared_err.max((p2 - p1).abs());
    }
    Outcome::new(
        beat1 && beat2 && wiener_err < 1e-12 && shared_err < 1e-10,
        format!(
            "10 instances × 1000 probes: Φ1 optimum unbeaten [{}], Φ2 optimum unbeaten [{}]; Wiener deviation {wiener_err:.1e} (tol 1e-12); shared-λ |Φ2 − Φ1| {shared_err:.1e} (tol 1e-10)",
            if beat1 { "ok" } else { "off" },
            if beat2 { "ok" } else { "off" }
        ),
    )
}

// 9 ──────────────────────────────────────────────────────────────────────────

fn scheme_strategy() -> impl Strategy<Value = (SchemeTag, usize)> {
    (prop_oneof![Just(SchemeTag::F1), Just(SchemeTag::FH2), Just(SchemeTag::FD2)], 2usize..=16).prop_map(|(t, h)| (t, 2 * h))
}

fn run_suite(name: &str, cases: u32, f: impl Fn(&mut TestRunner) -> Result<(), String>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    f(&mut runner).map_err(|e| format!("{name}: {e}"))
}

fn invariants() -> Outcome {
    let suites: Vec<Result<(), String>> = vec![
        run_suite("biorthogonality", 64, |r| {
            r.run(&scheme_strategy(), |(tag, ns)| {
                let b = bank(tag);
                let k = InterpolationKernel::centered(&b, ns).unwrap();
                let li = k.l() as i64;
                for n in k.n1()..k.n1() + li {
                    for j in 0..k.m() as i64 {
                        for kk in 0..k.m() as i64 {
                            let s: Complex64 = (0..k.m()).map(|m| b.response(m, n + j * li) * k.r(m, n + kk * li)).sum();
                            let want = if j == kk { 1.0 } else { 0.0 };
                            prop_assert!((s - c(want, 0.0)).norm() < 1e-9);
                        }
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run_suite("Γ/γ properties", 256, |r| {
            let cm = proptest::collection::vec(-2.0f64..2.0, 24);
            r.run(&(cm.clone(), cm, proptest::collection::vec(-2.0f64..2.0, 8), -3.0f64..3.0), |(a, b, x, s)| {
                let m = |v: &[f64]| CMatrix::from_fn(3, 4, |i, j| c(v[2 * (i * 4 + j)], v[2 * (i * 4 + j) + 1]));
                let (am, bm) = (m(&a), m(&b));
                let xv: Vec<Complex64> = x.chunks(2).map(|p| c(p[0], p[1])).collect();
                // (1) Γ and γ are invertible.
                prop_assert_eq!(complexify_matrix(&realify_matrix(&am)), am.clone());
                prop_assert_eq!(complexify_vector(&realify_vector(&xv)), xv.clone());
                // (2) Real linearity.
                let lin = CMatrix::from_fn(3, 4, |i, j| am[(i, j)] * s + bm[(i, j)]);
                let (gl, ga, gb) = (realify_matrix(&lin), realify_matrix(&am), realify_matrix(&bm));
                for idx in 0..gl.data.len() {
                    prop_assert!((gl.data[idx] - (s * ga.data[idx] + gb.data[idx])).abs() < 1e-12);
                }
                // (3) Norms are preserved.
                let nc: f64 = xv.iter().map(|v| v.norm_sqr()).sum();
                let nr: f64 = realify_vector(&xv).iter().map(|v| v * v).sum();
                prop_assert!((nc - nr).abs() < 1e-12);
                // (4) γ(Ax) = Γ(A)γ(x).
                let lhs = realify_vector(&am.mul_vec(&xv));
                let rhs = ga.mul_vec(&realify_vector(&xv));
                for (u, v) in lhs.iter().zip(&rhs) {
                    prop_assert!((u - v).abs() < 1e-12);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run_suite("VMSE bound", 48, |r| {
            // MSE = εᵀQε for the linear map ε ↦ reconstructed noise, so
            // EMSE = σ² tr Q and VMSE = 2σ⁴ ‖Q‖_F² ≤ 2 EMSE².
            r.run(&(scheme_strategy(), 0.01f64..1.0), |((tag, ns), sigma)| {
                let k = InterpolationKernel::centered(&bank(tag), ns).unwrap();
                let grid = SampleGrid::new(k.l()).unwrap();
                let cols: Vec<Vec<f64>> = (0..ns)
                    .map(|j| {
                        let mut rows = vec![vec![c(0.0, 0.0); k.l()]; k.m()];
                        rows[j / k.l()][j % k.l()] = c(1.0, 0.0);
                        realify_vector(reconstruct_spectrum(&MultichannelSamples::new(grid, rows).unwrap(), &k).unwrap().coeffs())
                    })
                    .collect();
                let q = |i: usize, j: usize| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>();
                let s2 = sigma * sigma;
                let emse = s2 * (0..ns).map(|i| q(i, i)).sum::<f64>();
                let vmse = 2.0 * s2 * s2 * (0..ns).flat_map(|i| (0..ns).map(move |j| (i, j))).map(|(i, j)| q(i, j).powi(2)).sum::<f64>();
                let report = NoiseErrorReport::new(&k, sigma);
                prop_assert!((emse - report.emse).abs() < 1e-12 * report.emse);
                prop_assert!(vmse <= report.vmse_bound * (1.0 + 1e-12));
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run_suite("aliasing formula vs brute force", 64, |r| {
            let strat = (scheme_strategy(), proptest::collection::vec(-1.0f64..1.0, 200), 0usize..100, 0usize..100);
            r.run(&strat, |((tag, ns), vals, e1, e2)| {
                let k = InterpolationKernel::centered(&bank(tag), ns).unwrap();
                let l = k.l();
                // Extensions beyond the band on each side.
                let (e1, e2) = (e1 % (2 * l + 1), e2 % (2 * l + 1));
                let band = BandIndexSet::new(k.band().n_lo() - e1 as i64, k.band().n_hi() + e2 as i64).unwrap();
                let spec = FourierSpectrum::new(band, (0..band.len()).map(|i| c(vals[2 * i % 200], vals[(2 * i + 1) % 200])).collect()).unwrap();
                let n_out = 4 * band.len().max(64);
                let recon = reconstruct_fft(&noiseless(&spec, &k), &k, n_out).unwrap();
                let truth = spec.evaluate_grid(n_out).unwrap();
                let brute = recon.iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n_out as f64;
                prop_assert!((aliasing_error_exact(&spec, &k) - brute).abs() <= 1e-9 * (1.0 + brute));
                // Distinct residues mod L: each in-band frequency gets at most one alias.
                if e1 + e2 <= l {
                    prop_assert!((aliasing_error(&spec, &k) - brute).abs() <= 1e-9 * (1.0 + brute));
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        run_suite("unbiased Ã (3σ)", 24, |r| {
            // Ns ≥ 6 so the band covers testfunc1's support −2…3.
            let schemes = scheme_strategy().prop_filter("band must contain −2..3", |(_, ns)| *ns >= 6);
            r.run(&(schemes, 0.05f64..0.8, any::<u64>()), |((tag, ns), sigma, seed)| {
                let k = InterpolationKernel::centered(&bank(tag), ns).unwrap();
                let tf1 = TestSignal::TestFunc1.spectrum().unwrap();
                let noise = NoiseModel::new(sigma, seed).unwrap();
                let grid = SampleGrid::new(k.l()).unwrap();
                // Σ_n Ã(n) over the band, whose expectation is the in-band energy.
                let trials = 400;
                let sums: Vec<f64> = (0..trials)
                    .map(|t| {
                        let s = channel_samples(&tf1, k.bank(), grid, &noise, t).unwrap();
                        estimate_psd(&assemble_d(&s, k.n1()), &k, sigma).unwrap().values().iter().sum()
                    })
                    .collect();
                let mean = sums.iter().sum::<f64>() / trials as f64;
                let var = sums.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
                let want: f64 = k.band().iter().map(|n| tf1.get(n).norm_sqr()).sum();
                prop_assert!((mean - want).abs() <= 3.0 * (var / trials as f64).sqrt(), "mean {} vs {}", mean, want);
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
    ];
    let failures: Vec<String> = suites.into_iter().filter_map(Result::err).collect();
    if failures.is_empty() {
        Outcome::new(true, "biorthogonality, Γ/γ (1)–(4), VMSE bound, aliasing vs brute force, unbiased Ã: all property suites pass")
    } else {
        Outcome::new(false, failures.join(" | "))
    }
}

// 10 ─────────────────────────────────────────────────────────────────────────

fn performance() -> Outcome {
    let k = InterpolationKernel::centered(&bank(SchemeTag::FD2), 1248).unwrap();
    let phi = TestSignal::PhiReal.model();
    let s = channel_samples(phi.as_ref(), k.bank(), SampleGrid::new(k.l()).unwrap(), &NoiseModel::new(0.1, SEED).unwrap(), 0).unwrap();
    let t0 = Instant::now();
    let out = reconstruct_fft(&s, &k, 1 << 16).unwrap();
    let fft_time = t0.elapsed();
    assert_eq!(out.len(), 1 << 16);

    let r = with_threads(1, || experiment(SchemeTag::FH2, vec![1248], 0.05, 10, vec![Pipeline::POST, Pipeline::L1])).unwrap();
    let post = r.get(1248, Pipeline::POST).unwrap().mean_seconds;
    let l1 = r.get(1248, Pipeline::L1).unwrap().mean_seconds;
    let ratio = l1 / post;
    Outcome::new(
        fft_time < Duration::from_secs(1) && ratio >= 100.0,
        format!(
            "reconstruct_fft(n_out=2^16) {:.1} ms (< 1 s); l1 {:.2} ms vs MCI+Post {:.3} ms per trial at Ns=1248: {ratio:.0}× (≥ 100×)",
            fft_time.as_secs_f64() * 1e3,
            l1 * 1e3,
            post * 1e3
        ),
    )
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    type Criterion = (usize, &'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; 10] = [
        (1, "exact d oracle", exact_oracle, 1),
        (2, "closed-form noise factors", closed_form_factors, 1),
        (3, "perfect reconstruction, FFT = direct", perfect_reconstruction, 30),
        (4, "spectral density estimation error", table1, 120),
        (5, "F1 MCI / MCI+Post EMSE", table5, 600),
        (6, "regularized + Post EMSE", tables34, 1800),
        (7, "monotonicity and ordering", monotonicity, 1800),
        (8, "filter optimality probes", optimality, 300),
        (9, "invariant property suites", invariants, 600),
        (10, "performance", performance, 600),
    ];
    let mut failed = Vec::new();
    for (n, name, f, budget) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget as f64;
        let pass = outcome.pass && in_time;
        let budget_note = if in_time { String::new() } else { format!(" — over the {budget} s budget") };
        println!(
            "criterion {n:>2} {}: {name} ({secs:.1} s) — {}{budget_note}",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
