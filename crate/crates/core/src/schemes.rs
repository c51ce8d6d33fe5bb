//! Channel frequency responses and the named sampling schemes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{BandIndexSet, FourierSpectrum};

/// A linear time-invariant channel, described by its frequency response `b(n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    /// `b(n) = 1`.
    Identity,
    /// `b(n) = -i·sgn(n)`, with `sgn(0) = 0`.
    Hilbert,
    /// `b(n) = i·n`.
    Derivative,
    /// Convolution with `h`; `b(n)` is the Fourier coefficient of `h`, zero
    /// outside the supplied support.
    Kernel(FourierSpectrum),
}

impl Channel {
    pub fn response(&self, n: i64) -> Complex64 {
        match self {
            Channel::Identity => Complex64::new(1.0, 0.0),
            Channel::Hilbert => Complex64::new(0.0, -(n.signum() as f64)),
            Channel::Derivative => Complex64::new(0.0, n as f64),
            Channel::Kernel(h) => h.get(n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Channel::Identity => "identity",
            Channel::Hilbert => "hilbert",
            Channel::Derivative => "derivative",
            Channel::Kernel(_) => "kernel",
        }
    }
}

/// The named schemes: samples of `f` (F1), of `f` and `Hf` (FH2), of `f`
/// and `f'` (FD2); anything else is `Custom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeTag {
    F1,
    FH2,
    FD2,
    Custom,
}

impl SchemeTag {
    pub fn channel_count(&self) -> Option<usize> {
        match self {
            SchemeTag::F1 => Some(1),
            SchemeTag::FH2 | SchemeTag::FD2 => Some(2),
            SchemeTag::Custom => None,
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeTag::F1 => "F1",
            SchemeTag::FH2 => "FH2",
            SchemeTag::FD2 => "FD2",
            SchemeTag::Custom => "Custom",
        })
    }
}

impl FromStr for SchemeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "F1" => Ok(SchemeTag::F1),
            "FH2" => Ok(SchemeTag::FH2),
            "FD2" => Ok(SchemeTag::FD2),
            "CUSTOM" => Ok(SchemeTag::Custom),
            _ => Err(Error::Config(format!("unknown scheme '{s}' (expected F1, FH2, FD2)"))),
        }
    }
}

/// An ordered list of `M ≥ 1` channels sharing one sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBank {
    channels: Vec<Channel>,
    tag: SchemeTag,
}

impl ChannelBank {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Config("a channel bank needs at least one channel".into()));
        }
        let tag = match channels.as_slice() {
            [Channel::Identity] => SchemeTag::F1,
            [Channel::Identity, Channel::Hilbert] => SchemeTag::FH2,
            [Channel::Identity, Channel::Derivative] => SchemeTag::FD2,
            _ => SchemeTag::Custom,
        };
        Ok(Self { channels, tag })
    }

    pub fn named(tag: SchemeTag) -> Result<Self> {
        let channels = match tag {
            SchemeTag::F1 => vec![Channel::Identity],
            SchemeTag::FH2 => vec![Channel::Identity, Channel::Hilbert],
            SchemeTag::FD2 => vec![Channel::Identity, Channel::Derivative],
            SchemeTag::Custom => {
                return Err(Error::Unsupported("a custom scheme needs explicit channels".into()))
            }
        };
        Self::new(channels)
    }

    pub fn tag(&self) -> SchemeTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn response(&self, m: usize, n: i64) -> Complex64 {
        self.channels[m].response(n)
    }

    /// Samples per channel and reconstruction band for `ns` total samples.
    pub fn layout(&self, ns: usize) -> Result<(usize, BandIndexSet)> {
        let m = self.len();
        if ns == 0 || ns % m != 0 {
            return Err(Error::Config(format!(
                "{ns} total samples cannot be split evenly across {m} channels"
            )));
        }
        Ok((ns / m, BandIndexSet::centered(ns)?))
    }
}

/// The closed-form interpolation coefficient `r_m(n)` of a named scheme with
/// `l` samples per channel; `m` is the 0-based channel index.
///
/// The band is `{-Ns/2+1 … Ns/2}`. For FH2 at `n = L` on the Hilbert channel
/// the value is `i`: it is what inverting `H_0 = [[1,0],[1,-i]]` gives, and
/// what biorthogonality requires.
pub fn closed_form_r(tag: SchemeTag, m: usize, n: i64, l: usize) -> Result<Complex64> {
    let li = l as i64;
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match tag {
        SchemeTag::F1 => {
            let band = BandIndexSet::centered(l)?;
            if m != 0 || !band.contains(n) {
                return Err(out_of_band(n, band));
            }
            Ok(re(1.0))
        }
        SchemeTag::FH2 | SchemeTag::FD2 => {
            let band = BandIndexSet::new(-li + 1, li)?;
            if m > 1 || !band.contains(n) {
                return Err(out_of_band(n, band));
            }
            let lf = l as f64;
            Ok(match (tag, m) {
                (SchemeTag::FH2, 0) => match n {
                    0 => re(1.0),
                    _ if n == li => re(0.0),
                    _ => re(0.5),
                },
                (SchemeTag::FH2, _) => match n {
                    0 => im(-1.0),
                    _ if n == li => im(1.0),
                    _ if n < 0 => im(-0.5),
                    _ => im(0.5),
                },
                (_, 0) if n <= 0 => re(1.0 + n as f64 / lf),
                (_, 0) => re(1.0 - n as f64 / lf),
                (_, _) if n <= 0 => im(1.0 / lf),
                _ => im(-1.0 / lf),
            })
        }
        SchemeTag::Custom => Err(Error::Unsupported("no closed form for custom schemes".into())),
    }
}

fn out_of_band(n: i64, band: BandIndexSet) -> Error {
    Error::OutOfBand { n, lo: band.n_lo(), hi: band.n_hi() }
}

impl serde::Serialize for SchemeTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for SchemeTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn responses_match_the_kind_table() {
        assert_eq!(Channel::Identity.response(5), Complex64::new(1.0, 0.0));
        assert_eq!(Channel::Hilbert.response(-3), Complex64::new(0.0, 1.0));
        assert_eq!(Channel::Hilbert.response(0), Complex64::new(0.0, 0.0));
        assert_eq!(Channel::Derivative.response(0), Complex64::new(0.0, 0.0));
        assert_eq!(Channel::Derivative.response(4), Complex64::new(0.0, 4.0));
        let h = FourierSpectrum::from_pairs(&[(-1, Complex64::new(0.5, 0.0)), (1, Complex64::new(0.5, 0.0))])
            .unwrap();
        let k = Channel::Kernel(h);
        assert_eq!(k.response(1), Complex64::new(0.5, 0.0));
        assert_eq!(k.response(7), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_r(SchemeTag::FH2, 0, 0, 5).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(closed_form_r(SchemeTag::FH2, 0, 5, 5).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(closed_form_r(SchemeTag::FH2, 1, 0, 5).unwrap(), Complex64::new(0.0, -1.0));
        let r = closed_form_r(SchemeTag::FD2, 0, -3, 4).unwrap();
        assert!((r - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(closed_form_r(SchemeTag::FD2, 0, 5, 4).is_err());
        assert!(closed_form_r(SchemeTag::F1, 0, 4, 6).is_err());
        assert!(closed_form_r(SchemeTag::Custom, 0, 0, 4).is_err());
    }

    #[test]
    fn hilbert_coefficient_at_l_is_i_not_one() {
        // H_0 = [[1, 0], [1, -i]]; its inverse has (2,2) entry i.
        let r = closed_form_r(SchemeTag::FH2, 1, 4, 4).unwrap();
        assert_eq!(r, Complex64::new(0.0, 1.0));
        let biorth = Channel::Identity.response(4) * closed_form_r(SchemeTag::FH2, 0, 4, 4).unwrap()
            + Channel::Hilbert.response(4) * r;
        assert!((biorth - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn banks_infer_their_tag() {
        assert_eq!(ChannelBank::named(SchemeTag::FD2).unwrap().tag(), SchemeTag::FD2);
        let custom = ChannelBank::new(vec![Channel::Derivative, Channel::Identity]).unwrap();
        assert_eq!(custom.tag(), SchemeTag::Custom);
        assert!(ChannelBank::new(vec![]).is_err());
        assert!(ChannelBank::named(SchemeTag::Custom).is_err());
        assert_eq!("fh2".parse::<SchemeTag>().unwrap(), SchemeTag::FH2);
        assert!("F3".parse::<SchemeTag>().is_err());
    }

    #[test]
    fn layout_splits_samples_evenly() {
        let bank = ChannelBank::named(SchemeTag::FH2).unwrap();
        let (l, band) = bank.layout(56).unwrap();
        assert_eq!((l, band.n_lo(), band.n_hi()), (28, -27, 28));
        assert!(bank.layout(57).is_err());
    }

    proptest! {
        #[test]
        fn real_responses_are_hermitian(n in -1000i64..1000) {
            for ch in [Channel::Identity, Channel::Hilbert, Channel::Derivative] {
                prop_assert_eq!(ch.response(-n), ch.response(n).conj());
            }
        }
    }
}
