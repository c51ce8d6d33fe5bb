//! JSON file formats: spectra, sample sets, scheme descriptions, and the
//! small text outputs (psd rows, two-column plot data).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::{Channel, ChannelBank, SchemeTag};
use crate::spectral::PsdEstimate;
use crate::spectrum::{BandIndexSet, FourierSpectrum, MultichannelSamples, SampleGrid};

fn pair(v: Complex64) -> [f64; 2] {
    [v.re, v.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// `{"n_lo": int, "coeffs": [[re, im], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub n_lo: i64,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&FourierSpectrum> for SpectrumFile {
    fn from(s: &FourierSpectrum) -> Self {
        Self { n_lo: s.band().n_lo(), coeffs: s.coeffs().iter().copied().map(pair).collect() }
    }
}

impl SpectrumFile {
    pub fn into_spectrum(self) -> Result<FourierSpectrum> {
        let band = BandIndexSet::with_len(self.n_lo, self.coeffs.len())?;
        FourierSpectrum::new(band, self.coeffs.into_iter().map(unpair).collect())
    }
}

/// `{"L": int, "M": int, "sigma": real, "rows": [[[re, im], …], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesFile {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma: f64,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl SamplesFile {
    pub fn new(samples: &MultichannelSamples, sigma: f64) -> Self {
        Self {
            l: samples.per_channel(),
            m: samples.channels(),
            sigma,
            rows: samples.rows().iter().map(|r| r.iter().copied().map(pair).collect()).collect(),
        }
    }

    pub fn into_samples(self) -> Result<(MultichannelSamples, f64)> {
        if self.rows.len() != self.m {
            return Err(Error::Config(format!("field \"rows\": {} rows but M = {}", self.rows.len(), self.m)));
        }
        if let Some((i, r)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != self.l) {
            return Err(Error::Config(format!("field \"rows\"[{i}]: {} values but L = {}", r.len(), self.l)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("field \"sigma\": must be finite and ≥ 0, got {}", self.sigma)));
        }
        let rows = self.rows.into_iter().map(|r| r.into_iter().map(unpair).collect()).collect();
        Ok((MultichannelSamples::new(SampleGrid::new(self.l)?, rows)?, self.sigma))
    }
}

/// A channel in a scheme description: a name, or `{"kernel": "<spectrum-file>"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Named(String),
    Kernel { kernel: PathBuf },
}

/// `"FD2"` or `{"channels": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeSpec {
    Named(SchemeTag),
    Custom { channels: Vec<ChannelSpec> },
}

impl SchemeSpec {
    /// Builds the bank; kernel paths are taken relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<ChannelBank> {
        match self {
            SchemeSpec::Named(tag) => ChannelBank::named(*tag),
            SchemeSpec::Custom { channels } => {
                let chans = channels
                    .iter()
                    .map(|c| match c {
                        ChannelSpec::Named(name) => match name.to_ascii_lowercase().as_str() {
                            "identity" => Ok(Channel::Identity),
                            "hilbert" => Ok(Channel::Hilbert),
                            "derivative" => Ok(Channel::Derivative),
                            _ => Err(Error::Config(format!("unknown channel '{name}'"))),
                        },
                        ChannelSpec::Kernel { kernel } => Ok(Channel::Kernel(read_spectrum(&base.join(kernel))?)),
                    })
                    .collect::<Result<Vec<_>>>()?;
                ChannelBank::new(chans)
            }
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub fn read_spectrum(path: &Path) -> Result<FourierSpectrum> {
    parse_json::<SpectrumFile>(path)?
        .into_spectrum()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn write_spectrum(path: &Path, spec: &FourierSpectrum) -> Result<()> {
    write_json(path, &SpectrumFile::from(spec))
}

/// Samples and the noise level recorded with them.
pub fn read_samples(path: &Path) -> Result<(MultichannelSamples, f64)> {
    parse_json::<SamplesFile>(path)?
        .into_samples()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn write_samples(path: &Path, samples: &MultichannelSamples, sigma: f64) -> Result<()> {
    write_json(path, &SamplesFile::new(samples, sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdRow {
    pub n: i64,
    #[serde(rename = "A_tilde")]
    pub a_tilde: f64,
}

pub fn psd_rows(psd: &PsdEstimate) -> Vec<PsdRow> {
    psd.iter().map(|(n, a_tilde)| PsdRow { n, a_tilde }).collect()
}

/// Whitespace-separated `x y` lines.
pub fn write_xy(path: &Path, xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!("{} x values, {} y values", xs.len(), ys.len())));
    }
    let mut out = String::with_capacity(xs.len() * 32);
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{x:.17e} {y:.17e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}
