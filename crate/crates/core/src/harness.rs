//! Monte-Carlo experiments: sample a test signal with seeded noise, run
//! reconstruction pipelines, and aggregate the mean-square errors.
//!
//! Every trial draws its noise from `(seed, trial)` alone, so results are
//! identical for any thread count; per-trial values are collected in trial
//! order and summed sequentially.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{write_xy, SchemeSpec};
use crate::mci::InterpolationKernel;
use crate::post_filter::{apply_post_filter, optimal_post_filter, select_band};
use crate::pre_filter::{optimal_pre_filter, prefiltered_spectrum};
use crate::regularize::{build_system, AdmmReport, L1Solver, L2Solver, RegularizerConfig};
use crate::schemes::ChannelBank;
use crate::signals::{SignalModel, TestSignal};
use crate::spectral::{assemble_d, estimate_psd_with_coefficients};
use crate::spectrum::{channel_samples, FourierSpectrum, MultichannelSamples, NoiseModel, SampleGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Core {
    Mci,
    L1,
    L2,
}

/// `[pre +] core [+ post]`, written e.g. `pre+mci+post` or `l1+post`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pipeline {
    pub pre: bool,
    pub core: Core,
    pub post: bool,
}

impl Pipeline {
    pub const MCI: Pipeline = Pipeline { pre: false, core: Core::Mci, post: false };
    pub const POST: Pipeline = Pipeline { pre: false, core: Core::Mci, post: true };
    pub const PRE: Pipeline = Pipeline { pre: true, core: Core::Mci, post: false };
    pub const PRE_POST: Pipeline = Pipeline { pre: true, core: Core::Mci, post: true };
    pub const L1: Pipeline = Pipeline { pre: false, core: Core::L1, post: false };
    pub const L1_POST: Pipeline = Pipeline { pre: false, core: Core::L1, post: true };
    pub const L2: Pipeline = Pipeline { pre: false, core: Core::L2, post: false };
    pub const L2_POST: Pipeline = Pipeline { pre: false, core: Core::L2, post: true };
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut pre, mut post) = (false, false);
        let mut core: Option<Core> = None;
        let set_core = |c: Core, core: &mut Option<Core>| match *core {
            Some(prev) if matches!((prev, c), (Core::L1, Core::L2) | (Core::L2, Core::L1)) => {
                Err(Error::Config("a pipeline cannot use both l1 and l2".into()))
            }
            Some(_) => Err(Error::Config(format!("pipeline '{s}' names more than one reconstruction step"))),
            None => {
                *core = Some(c);
                Ok(())
            }
        };
        let tokens: Vec<&str> = s.split('+').map(str::trim).collect();
        if tokens.iter().any(|t| t.is_empty()) {
            return Err(Error::Config(format!("malformed pipeline '{s}'")));
        }
        for tok in tokens {
            match tok.to_ascii_lowercase().as_str() {
                "pre" if !pre => pre = true,
                "post" if !post => post = true,
                "mci" => set_core(Core::Mci, &mut core)?,
                "l1" => set_core(Core::L1, &mut core)?,
                "l2" => set_core(Core::L2, &mut core)?,
                "pre" | "post" => return Err(Error::Config(format!("'{tok}' repeated in pipeline '{s}'"))),
                _ => return Err(Error::Config(format!("unknown pipeline step '{tok}' (expected mci, pre, post, l1, l2)"))),
            }
        }
        let core = core.unwrap_or(Core::Mci);
        if pre && core != Core::Mci {
            return Err(Error::Config("the pre-filter only composes with mci".into()));
        }
        Ok(Pipeline { pre, core, post })
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pre {
            f.write_str("pre+")?;
        }
        f.write_str(match self.core {
            Core::Mci => "mci",
            Core::L1 => "l1",
            Core::L2 => "l2",
        })?;
        if self.post {
            f.write_str("+post")?;
        }
        Ok(())
    }
}

impl Serialize for Pipeline {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Pipeline {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: SchemeSpec,
    pub ns: Vec<usize>,
    pub sigma: f64,
    pub trials: usize,
    pub pipelines: Vec<Pipeline>,
    pub signal: TestSignal,
    pub seed: u64,
    /// Quadrature nodes for the MSE; the effective count is at least
    /// `max(1024, 8·Ns)`.
    #[serde(default)]
    pub mse_grid_points: usize,
    /// η, α and the ADMM settings; the penalty kind comes from the pipeline.
    #[serde(default)]
    pub regularizer: RegularizerConfig,
    /// Where relative kernel paths in `scheme` are resolved.
    #[serde(skip, default = "default_base")]
    pub base_dir: PathBuf,
}

fn default_base() -> PathBuf {
    PathBuf::from(".")
}

impl ExperimentConfig {
    pub fn new(scheme: SchemeSpec, ns: Vec<usize>, sigma: f64, trials: usize, pipelines: Vec<Pipeline>, signal: TestSignal, seed: u64) -> Self {
        Self {
            scheme,
            ns,
            sigma,
            trials,
            pipelines,
            signal,
            seed,
            mse_grid_points: 0,
            regularizer: RegularizerConfig::default(),
            base_dir: default_base(),
        }
    }

    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(default_base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.pipelines.is_empty() {
            return Err(Error::Config("at least one pipeline is required".into()));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::Config("ns must list positive sample counts".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be finite and ≥ 0, got {}", self.sigma)));
        }
        self.regularizer.validate()
    }

    pub fn bank(&self) -> Result<ChannelBank> {
        self.scheme.resolve(&self.base_dir)
    }

    fn grid_points(&self, ns: usize) -> usize {
        self.mse_grid_points.max(1024).max(8 * ns)
    }
}

/// Everything about one sample count that is shared by all trials.
pub struct PreparedRun {
    kernel: InterpolationKernel,
    model: Box<dyn SignalModel>,
    truth: Vec<Complex64>,
    real: bool,
    noise: NoiseModel,
    l1: Option<L1Solver>,
    l2: Option<L2Solver>,
}

impl PreparedRun {
    pub fn new(cfg: &ExperimentConfig, ns: usize) -> Result<Self> {
        cfg.validate()?;
        let bank = cfg.bank()?;
        let kernel = InterpolationKernel::centered(&bank, ns)?;
        let model = cfg.signal.model();
        let g = cfg.grid_points(ns);
        let truth = (0..g).map(|k| model.eval(2.0 * std::f64::consts::PI * k as f64 / g as f64)).collect();
        let needs = |c: Core| cfg.pipelines.iter().any(|p| p.core == c);
        let system = if needs(Core::L1) || needs(Core::L2) {
            Some(build_system(&bank, kernel.band(), SampleGrid::new(kernel.l())?, cfg.regularizer.eta)?)
        } else {
            None
        };
        let l1 = match &system {
            Some(sys) if needs(Core::L1) => Some(L1Solver::new(sys, &cfg.regularizer, cfg.sigma)?),
            _ => None,
        };
        let l2 = match &system {
            Some(sys) if needs(Core::L2) => Some(L2Solver::new(sys, &cfg.regularizer, cfg.sigma)?),
            _ => None,
        };
        Ok(Self {
            real: model.is_real(),
            model,
            truth,
            noise: NoiseModel::new(cfg.sigma, cfg.seed)?,
            kernel,
            l1,
            l2,
        })
    }

    pub fn kernel(&self) -> &InterpolationKernel {
        &self.kernel
    }

    pub fn samples(&self, trial: u64) -> Result<MultichannelSamples> {
        channel_samples(self.model.as_ref(), self.kernel.bank(), SampleGrid::new(self.kernel.l())?, &self.noise, trial)
    }

    /// Runs one pipeline on a sample set, returning the reconstructed
    /// spectrum on the MCI band.
    pub fn reconstruct(&self, pipeline: Pipeline, samples: &MultichannelSamples) -> Result<(FourierSpectrum, Option<AdmmReport>)> {
        let sigma = self.noise.sigma;
        let k = &self.kernel;
        let d = assemble_d(samples, k.n1());
        let (mci, psd) = estimate_psd_with_coefficients(&d, k, sigma)?;
        let mut report = None;
        let spec = match pipeline.core {
            Core::Mci if pipeline.pre => prefiltered_spectrum(samples, &optimal_pre_filter(&d, k, sigma)?, k)?,
            Core::Mci => mci,
            Core::L1 => {
                let solver = self.l1.as_ref().ok_or_else(|| Error::Config("l1 solver not prepared".into()))?;
                let (x, rep) = solver.solve(samples)?;
                report = Some(rep);
                x
            }
            Core::L2 => self.l2.as_ref().ok_or_else(|| Error::Config("l2 solver not prepared".into()))?.solve(samples)?,
        };
        let spec = if pipeline.post {
            let band = select_band(&psd, k.ns())?;
            apply_post_filter(&spec, &optimal_post_filter(&psd, k, sigma, band))?
        } else {
            spec
        };
        Ok((spec, report))
    }

    /// `(1/2π)∫|g − f|²` by the trapezoidal rule on the uniform grid; real
    /// signals are compared against the real part of `g`.
    pub fn mse(&self, spec: &FourierSpectrum) -> Result<f64> {
        let g = spec.evaluate_grid(self.truth.len())?;
        let sum: f64 = g
            .iter()
            .zip(&self.truth)
            .map(|(x, f)| if self.real { (x.re - f.re).powi(2) } else { (x - f).norm_sqr() })
            .sum();
        Ok(sum / g.len() as f64)
    }

    pub fn run_trial(&self, pipeline: Pipeline, trial: u64) -> Result<TrialOutcome> {
        let samples = self.samples(trial)?;
        let start = Instant::now();
        let (spec, report) = self.reconstruct(pipeline, &samples)?;
        let seconds = start.elapsed().as_secs_f64();
        Ok(TrialOutcome { mse: self.mse(&spec)?, seconds, admm: report })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub mse: f64,
    pub seconds: f64,
    pub admm: Option<AdmmReport>,
}

/// One trial's MSE for one pipeline.
pub fn run_trial(cfg: &ExperimentConfig, ns: usize, pipeline: Pipeline, trial: u64) -> Result<f64> {
    Ok(PreparedRun::new(cfg, ns)?.run_trial(pipeline, trial)?.mse)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub ns: usize,
    pub pipeline: String,
    pub emse: f64,
    pub vmse: f64,
    pub std_err: f64,
    pub mean_seconds: f64,
    pub trials: usize,
    pub failed: usize,
    pub admm_unconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn get(&self, ns: usize, pipeline: Pipeline) -> Option<&CellResult> {
        let name = pipeline.to_string();
        self.cells.iter().find(|c| c.ns == ns && c.pipeline == name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

fn aggregate(ns: usize, pipeline: Pipeline, outcomes: &[Result<TrialOutcome>]) -> CellResult {
    let ok: Vec<&TrialOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let n = ok.len();
    let nf = n.max(1) as f64;
    let emse = ok.iter().map(|o| o.mse).sum::<f64>() / nf;
    let vmse = if n > 1 { ok.iter().map(|o| (o.mse - emse).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    CellResult {
        ns,
        pipeline: pipeline.to_string(),
        emse: if n == 0 { f64::NAN } else { emse },
        vmse,
        std_err: (vmse / nf).sqrt(),
        mean_seconds: ok.iter().map(|o| o.seconds).sum::<f64>() / nf,
        trials: n,
        failed: outcomes.len() - n,
        admm_unconverged: ok.iter().filter(|o| o.admm.as_ref().is_some_and(|r| !r.converged)).count(),
    }
}

/// All `(Ns, pipeline)` cells, on the ambient rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &ns in &cfg.ns {
        let prep = PreparedRun::new(cfg, ns)?;
        for &pipeline in &cfg.pipelines {
            let outcomes: Vec<Result<TrialOutcome>> =
                (0..cfg.trials as u64).into_par_iter().map(|t| prep.run_trial(pipeline, t)).collect();
            cells.push(aggregate(ns, pipeline, &outcomes));
        }
    }
    Ok(ExperimentResult { cells })
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub ns: usize,
    pub log2_ns: f64,
    pub emse: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSeries {
    pub pipeline: String,
    pub points: Vec<SweepPoint>,
    /// For pipelines ending in the post-filter: whether each step in Ns
    /// lowers the EMSE beyond two combined standard errors of noise.
    pub decreasing: Option<bool>,
}

impl ConvergenceSeries {
    pub fn write_plot(&self, path: &Path) -> Result<()> {
        let xs: Vec<f64> = self.points.iter().map(|p| p.log2_ns).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.emse).collect();
        write_xy(path, &xs, &ys)
    }
}

/// EMSE against `log₂ Ns` per pipeline; needs at least five sample counts.
pub fn convergence_sweep(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceSeries>> {
    if cfg.ns.len() < 5 {
        return Err(Error::Config(format!("a convergence sweep needs at least 5 sample counts, got {}", cfg.ns.len())));
    }
    let result = run_experiment(cfg)?;
    Ok(series_from(&result, cfg))
}

pub fn series_from(result: &ExperimentResult, cfg: &ExperimentConfig) -> Vec<ConvergenceSeries> {
    cfg.pipelines
        .iter()
        .map(|&p| {
            let points: Vec<SweepPoint> = cfg
                .ns
                .iter()
                .filter_map(|&ns| result.get(ns, p))
                .map(|c| SweepPoint { ns: c.ns, log2_ns: (c.ns as f64).log2(), emse: c.emse, std_err: c.std_err })
                .collect();
            let decreasing = p.post.then(|| strictly_decreasing(&points, 2.0));
            ConvergenceSeries { pipeline: p.to_string(), points, decreasing }
        })
        .collect()
}

/// `emse[i+1] < emse[i] + slack·√(se_i² + se_{i+1}²)` at every step, with
/// the points taken in increasing Ns.
pub fn strictly_decreasing(points: &[SweepPoint], slack: f64) -> bool {
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|p| p.ns);
    sorted.windows(2).all(|w| w[1].emse < w[0].emse + slack * w[0].std_err.hypot(w[1].std_err))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub ns: usize,
    pub pipeline: String,
    pub mean_seconds: f64,
    /// Relative to the fastest pipeline at the same Ns.
    pub ratio: f64,
}

pub fn timing_report(cfg: &ExperimentConfig) -> Result<Vec<TimingRow>> {
    Ok(timing_from(&run_experiment(cfg)?))
}

pub fn timing_from(result: &ExperimentResult) -> Vec<TimingRow> {
    result
        .cells
        .iter()
        .map(|c| {
            let fastest = result
                .cells
                .iter()
                .filter(|o| o.ns == c.ns)
                .map(|o| o.mean_seconds)
                .fold(f64::INFINITY, f64::min);
            TimingRow { ns: c.ns, pipeline: c.pipeline.clone(), mean_seconds: c.mean_seconds, ratio: c.mean_seconds / fastest }
        })
        .collect()
}

/// Signal and one trial's reconstruction on `points` nodes, written as
/// `truth.txt` and `<pipeline>.txt` under `dir`.
pub fn write_overlay(cfg: &ExperimentConfig, ns: usize, pipeline: Pipeline, trial: u64, dir: &Path) -> Result<()> {
    let prep = PreparedRun::new(cfg, ns)?;
    let (spec, _) = prep.reconstruct(pipeline, &prep.samples(trial)?)?;
    let g = prep.truth.len();
    let ts: Vec<f64> = (0..g).map(|k| 2.0 * std::f64::consts::PI * k as f64 / g as f64).collect();
    let rec = spec.evaluate_grid(g)?;
    fs::create_dir_all(dir)?;
    write_xy(&dir.join("truth.txt"), &ts, &prep.truth.iter().map(|v| v.re).collect::<Vec<_>>())?;
    write_xy(&dir.join(format!("{pipeline}.txt")), &ts, &rec.iter().map(|v| v.re).collect::<Vec<_>>())
}
