//! The `mcrecon` command line.
//!
//! Exit codes: 0 on success, 2 for invalid input or configuration, 3 when
//! a numeric step fails (singular scheme or system).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::harness::{run_experiment, series_from, timing_from, with_threads, ExperimentConfig};
use crate::io::{psd_rows, read_samples, read_spectrum, SchemeSpec};
use crate::mci::{aliasing_error_exact, InterpolationKernel};
use crate::noise::NoiseErrorReport;
use crate::post_filter::{apply_post_filter, optimal_post_filter, select_band, PostFilterDesign};
use crate::pre_filter::{optimal_pre_filter, prefiltered_spectrum};
use crate::regularize::{build_system, l1_solve, l2_solve, AdmmReport, Penalty, RegularizerConfig};
use crate::schemes::{ChannelBank, SchemeTag};
use crate::spectral::{assemble_d, estimate_psd_with_coefficients};
use crate::spectrum::{BandIndexSet, FourierSpectrum, MultichannelSamples};

#[derive(Debug, Parser)]
#[command(name = "mcrecon", version, about = "Multichannel reconstruction of periodic signals from noisy samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct a signal on an output grid from a sample file.
    Reconstruct(ReconstructArgs),
    /// Estimate |a(n)|² from a sample file.
    EstimatePsd(PsdArgs),
    /// Run a Monte-Carlo experiment described by a JSON/TOML config.
    Experiment(ExperimentArgs),
    /// Print the interpolation coefficients, noise factor and conditioning of a scheme.
    SchemeInfo(SchemeInfoArgs),
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// F1, FH2, FD2, or a JSON file containing {"scheme": …}.
    #[arg(long)]
    pub scheme: String,
    /// Lowest frequency of the reconstruction band (default: centered).
    #[arg(long, allow_hyphen_values = true)]
    pub n1: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PreFilterChoice {
    None,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PostFilterChoice {
    None,
    Dirichlet,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegChoice {
    None,
    L1,
    L2,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Sample file ({"L", "M", "sigma", "rows"}).
    pub samples: PathBuf,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Number of output points on the grid t_k = 2πk/n_out.
    #[arg(long)]
    pub n_out: usize,
    /// Output JSON path (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Noise standard deviation (default: the sample file's).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum, default_value_t = PreFilterChoice::None)]
    pub pre_filter: PreFilterChoice,
    #[arg(long, value_enum, default_value_t = PostFilterChoice::None)]
    pub post_filter: PostFilterChoice,
    /// Post-filter band: `auto` or `K1,K2`.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub band: String,
    #[arg(long, value_enum, default_value_t = RegChoice::None)]
    pub reg: RegChoice,
    #[arg(long, default_value_t = 1.2)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub admm_rho: f64,
    #[arg(long, default_value_t = 2000)]
    pub admm_iters: usize,
    /// True spectrum, for the aliasing estimate and the error against it.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    pub samples: PathBuf,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config (JSON, or TOML by extension).
    pub config: PathBuf,
    /// Noise seed; overrides the config's.
    #[arg(long)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "MCRECON_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Directory for results.csv, results.json, timing.json and plot data.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SchemeInfoArgs {
    #[arg(long)]
    pub scheme: String,
    /// Samples per channel.
    #[arg(long, short = 'l')]
    pub l: usize,
    #[arg(long)]
    pub json: bool,
}

fn resolve_scheme(arg: &str) -> Result<ChannelBank> {
    if let Ok(tag) = arg.parse::<SchemeTag>() {
        return ChannelBank::named(tag);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Config(format!("'{arg}' is neither a scheme name (F1, FH2, FD2) nor a file")));
    }
    #[derive(serde::Deserialize)]
    struct Wrapper {
        scheme: SchemeSpec,
    }
    let text = fs::read_to_string(path)?;
    let w: Wrapper = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    w.scheme.resolve(path.parent().unwrap_or(Path::new(".")))
}

fn kernel_for(args: &SchemeArgs, samples: &MultichannelSamples) -> Result<InterpolationKernel> {
    let bank = resolve_scheme(&args.scheme)?;
    if bank.len() != samples.channels() {
        return Err(Error::DimensionMismatch(format!(
            "scheme has {} channels, sample file has {}",
            bank.len(),
            samples.channels()
        )));
    }
    let ns = samples.total();
    let band = match args.n1 {
        Some(n1) => BandIndexSet::with_len(n1, ns)?,
        None => BandIndexSet::centered(ns)?,
    };
    InterpolationKernel::new(&bank, band)
}

fn parse_band(s: &str) -> Result<Option<BandIndexSet>> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("--band expects 'auto' or 'K1,K2', got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let k1: i64 = parts[0].parse().map_err(|_| bad())?;
    let k2: i64 = parts[1].parse().map_err(|_| bad())?;
    Ok(Some(BandIndexSet::new(k1, k2)?))
}

fn write_output(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|x| [x.re, x.im]).collect()
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    scheme: String,
    ns: usize,
    n1: i64,
    sigma: f64,
    max_condition: f64,
    conditions: Vec<f64>,
    predicted_mci_emse: f64,
    post_band: Option<[i64; 2]>,
    admm: Option<AdmmReport>,
    aliasing_error: Option<f64>,
    error_vs_truth: Option<f64>,
}

fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let (samples, file_sigma) = read_samples(&args.samples)?;
    let sigma = args.sigma.unwrap_or(file_sigma);
    let kernel = kernel_for(&args.scheme, &samples)?;
    if args.n_out < kernel.ns() {
        return Err(Error::InvalidOutputSize { n_out: args.n_out, ns: kernel.ns() });
    }
    if args.reg != RegChoice::None && args.pre_filter != PreFilterChoice::None {
        return Err(Error::Config("--pre-filter cannot be combined with --reg".into()));
    }
    let explicit_band = parse_band(&args.band)?;
    let d = assemble_d(&samples, kernel.n1());
    let (mci, psd) = estimate_psd_with_coefficients(&d, &kernel, sigma)?;

    let mut admm = None;
    let spec = match (args.reg, args.pre_filter) {
        (RegChoice::None, PreFilterChoice::None) => mci,
        (RegChoice::None, PreFilterChoice::Optimal) => {
            prefiltered_spectrum(&samples, &optimal_pre_filter(&d, &kernel, sigma)?, &kernel)?
        }
        (reg, _) => {
            let mut cfg = RegularizerConfig {
                penalty: if reg == RegChoice::L1 { Penalty::L1 } else { Penalty::L2 },
                eta: args.eta,
                alpha: args.alpha,
                ..RegularizerConfig::default()
            };
            cfg.admm.rho = args.admm_rho;
            cfg.admm.max_iter = args.admm_iters;
            cfg.validate()?;
            let sys = build_system(kernel.bank(), kernel.band(), samples.grid(), cfg.eta)?;
            match cfg.penalty {
                Penalty::L1 => {
                    let (x, rep) = l1_solve(&sys, &samples, &cfg, sigma)?;
                    admm = Some(rep);
                    x
                }
                Penalty::L2 => l2_solve(&sys, &samples, &cfg, sigma)?,
            }
        }
    };

    let mut post_band = None;
    let spec = match args.post_filter {
        PostFilterChoice::None => spec,
        choice => {
            let band = match explicit_band {
                Some(b) => b,
                None => select_band(&psd, kernel.ns())?,
            };
            post_band = Some([band.n_lo(), band.n_hi()]);
            let design = match choice {
                PostFilterChoice::Dirichlet => PostFilterDesign::dirichlet(band),
                _ => optimal_post_filter(&psd, &kernel, sigma, band),
            };
            apply_post_filter(&spec, &design)?
        }
    };

    let values = spec.evaluate_grid(args.n_out)?;
    let (aliasing, err) = match &args.truth {
        Some(p) => {
            let truth = read_spectrum(p)?;
            (Some(aliasing_error_exact(&truth, &kernel)), Some(spectrum_distance(&spec, &truth)))
        }
        None => (None, None),
    };
    let diagnostics = Diagnostics {
        scheme: kernel.bank().tag().to_string(),
        ns: kernel.ns(),
        n1: kernel.n1(),
        sigma,
        max_condition: kernel.conditions().iter().copied().fold(0.0, f64::max),
        conditions: kernel.conditions().to_vec(),
        predicted_mci_emse: NoiseErrorReport::new(&kernel, sigma).emse,
        post_band,
        admm,
        aliasing_error: aliasing,
        error_vs_truth: err,
    };
    write_output(
        args.output.as_deref(),
        &json!({ "n_out": args.n_out, "values": pairs(&values), "diagnostics": diagnostics }),
    )
}

/// `‖g − f‖²` between two finite spectra (Parseval).
fn spectrum_distance(a: &FourierSpectrum, b: &FourierSpectrum) -> f64 {
    let lo = a.band().n_lo().min(b.band().n_lo());
    let hi = a.band().n_hi().max(b.band().n_hi());
    (lo..=hi).map(|n| (a.get(n) - b.get(n)).norm_sqr()).sum()
}

fn estimate_psd_cmd(args: &PsdArgs) -> Result<()> {
    let (samples, file_sigma) = read_samples(&args.samples)?;
    let kernel = kernel_for(&args.scheme, &samples)?;
    let d = assemble_d(&samples, kernel.n1());
    let (_, psd) = estimate_psd_with_coefficients(&d, &kernel, args.sigma.unwrap_or(file_sigma))?;
    write_output(args.output.as_deref(), &psd_rows(&psd))
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.seed = args.seed;
    let result = with_threads(args.threads, || run_experiment(&cfg))??;
    fs::create_dir_all(&args.out_dir)?;
    result.write_csv(&args.out_dir.join("results.csv"))?;
    result.write_json(&args.out_dir.join("results.json"))?;
    write_output(Some(&args.out_dir.join("timing.json")), &timing_from(&result))?;
    let series = series_from(&result, &cfg);
    for s in &series {
        s.write_plot(&args.out_dir.join(format!("emse_{}.txt", s.pipeline)))?;
    }
    write_output(Some(&args.out_dir.join("series.json")), &series)?;
    for c in &result.cells {
        println!(
            "Ns={:<6} {:<14} EMSE={:.4e} ± {:.1e}  VMSE={:.3e}  t={:.2e}s  trials={} failed={}",
            c.ns, c.pipeline, c.emse, c.std_err, c.vmse, c.mean_seconds, c.trials, c.failed
        );
    }
    Ok(())
}

fn scheme_info(args: &SchemeInfoArgs) -> Result<()> {
    let bank = resolve_scheme(&args.scheme)?;
    if args.l == 0 {
        return Err(Error::Config("-l must be positive".into()));
    }
    let ns = bank.len() * args.l;
    let kernel = InterpolationKernel::centered(&bank, ns)?;
    let report = NoiseErrorReport::new(&kernel, 1.0);
    let rows: Vec<_> = kernel
        .band()
        .iter()
        .map(|n| {
            let r: Vec<[f64; 2]> = (0..kernel.m()).map(|m| [kernel.r(m, n).re, kernel.r(m, n).im]).collect();
            json!({ "n": n, "r": r })
        })
        .collect();
    if args.json {
        return write_output(
            None,
            &json!({
                "scheme": bank.tag().to_string(),
                "channels": bank.channels().iter().map(|c| c.name()).collect::<Vec<_>>(),
                "L": kernel.l(),
                "ns": ns,
                "n1": kernel.n1(),
                "emse_factor": report.factor,
                "conditions": kernel.conditions(),
                "r": rows,
            }),
        );
    }
    println!("scheme {} ({} channels: {})", bank.tag(), bank.len(), bank.channels().iter().map(|c| c.name()).collect::<Vec<_>>().join(", "));
    println!("L = {}, Ns = {}, band {}..={}", kernel.l(), ns, kernel.band().n_lo(), kernel.band().n_hi());
    println!("noise factor (1/L)Σ|r_m(n)|² = {:.12}", report.factor);
    println!("max condition number of H_n = {:.4e}", kernel.conditions().iter().copied().fold(0.0, f64::max));
    println!("{:>6}  {}", "n", (0..kernel.m()).map(|m| format!("{:>28}", format!("r_{}(n)", m + 1))).collect::<String>());
    for n in kernel.band().iter() {
        let cells: String = (0..kernel.m())
            .map(|m| {
                let v = kernel.r(m, n);
                format!("{:>28}", format!("{:+.6e}{:+.6e}i", v.re, v.im))
            })
            .collect();
        println!("{n:>6}  {cells}");
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Reconstruct(a) => reconstruct(a),
        Command::EstimatePsd(a) => estimate_psd_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::SchemeInfo(a) => scheme_info(a),
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                3
            } else {
                2
            }
        }
    }
}
