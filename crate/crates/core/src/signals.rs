//! Signal models and the standard test signals.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{BandIndexSet, FourierSpectrum};

/// Anything with Fourier coefficients that can also be evaluated pointwise.
///
/// `support` must contain every index whose coefficient matters at double
/// precision; sampling folds exactly those coefficients.
pub trait SignalModel: Send + Sync {
    fn coefficient(&self, n: i64) -> Complex64;
    fn support(&self) -> BandIndexSet;
    fn eval(&self, t: f64) -> Complex64;
    /// Whether `f` is real-valued, so reconstructions may be projected onto
    /// their real part.
    fn is_real(&self) -> bool;
}

impl SignalModel for FourierSpectrum {
    fn coefficient(&self, n: i64) -> Complex64 {
        self.get(n)
    }

    fn support(&self) -> BandIndexSet {
        self.band()
    }

    fn eval(&self, t: f64) -> Complex64 {
        self.synthesize(t)
    }

    fn is_real(&self) -> bool {
        let band = self.band();
        band.iter()
            .all(|n| (self.get(n) - self.get(-n).conj()).norm() <= 1e-14 * (1.0 + self.get(n).norm()))
    }
}

// Coefficients below 1.2^{-N} are at most ~1e-24 for N = 300.
const PHI_TERMS: i64 = 300;

/// The rational test function
/// `φ(z) = (0.08z²+0.06z¹⁰)/((1.3−z)(1.5−z)) + (0.05z³+0.09z¹⁰)/((1.2+z)(1.3+z))`
/// on the unit circle `z = e^{it}`, or its real part.
///
/// φ is analytic in the closed unit disk, so its coefficients vanish for
/// `n < 0` and decay geometrically (ratio 1/1.2) for `n > 0`.
#[derive(Debug, Clone)]
pub struct Phi {
    real: bool,
    taylor: Vec<f64>,
}

impl Phi {
    pub fn new(real: bool) -> Self {
        Self { real, taylor: phi_taylor(PHI_TERMS as usize + 1) }
    }

    /// Taylor coefficient `c_k` of φ at the origin.
    pub fn taylor(&self, k: usize) -> f64 {
        self.taylor.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval_complex(t: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, t);
        (0.08 * z.powi(2) + 0.06 * z.powi(10)) / ((1.3 - z) * (1.5 - z))
            + (0.05 * z.powi(3) + 0.09 * z.powi(10)) / ((1.2 + z) * (1.3 + z))
    }
}

/// Taylor coefficients of `1/((α−z)(β−z))`: `(α^{−k−1} − β^{−k−1})/(β−α)`.
fn pole_pair_series(alpha: f64, beta: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let p = -(k as i32) - 1;
            (alpha.powi(p) - beta.powi(p)) / (beta - alpha)
        })
        .collect()
}

fn phi_taylor(len: usize) -> Vec<f64> {
    let e1 = pole_pair_series(1.3, 1.5, len);
    let e2 = pole_pair_series(-1.2, -1.3, len);
    let shifted = |e: &[f64], shift: usize, k: usize| if k >= shift { e[k - shift] } else { 0.0 };
    (0..len)
        .map(|k| {
            0.08 * shifted(&e1, 2, k)
                + 0.06 * shifted(&e1, 10, k)
                + 0.05 * shifted(&e2, 3, k)
                + 0.09 * shifted(&e2, 10, k)
        })
        .collect()
}

impl SignalModel for Phi {
    fn coefficient(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        let c = if self.real {
            if n == 0 {
                self.taylor(0)
            } else {
                0.5 * self.taylor(k)
            }
        } else if n >= 0 {
            self.taylor(k)
        } else {
            0.0
        };
        Complex64::new(c, 0.0)
    }

    fn support(&self) -> BandIndexSet {
        let lo = if self.real { -PHI_TERMS } else { 0 };
        BandIndexSet::new(lo, PHI_TERMS).expect("static band")
    }

    fn eval(&self, t: f64) -> Complex64 {
        let v = Phi::eval_complex(t);
        if self.real {
            Complex64::new(v.re, 0.0)
        } else {
            v
        }
    }

    fn is_real(&self) -> bool {
        self.real
    }
}

/// The named test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestSignal {
    /// `φ(e^{it})`, complex-valued and not bandlimited.
    Phi,
    /// `Re φ(e^{it})`, real-valued and not bandlimited.
    PhiReal,
    /// φ convolved with the Dirichlet kernel on `{−16 … 16}` (bandwidth 33).
    PhiB,
    /// Six coefficients on `{−2 … 3}`.
    TestFunc1,
}

impl TestSignal {
    pub const ALL: [TestSignal; 4] =
        [TestSignal::Phi, TestSignal::PhiReal, TestSignal::PhiB, TestSignal::TestFunc1];

    pub fn model(&self) -> Box<dyn SignalModel> {
        match self {
            TestSignal::Phi => Box::new(Phi::new(false)),
            TestSignal::PhiReal => Box::new(Phi::new(true)),
            TestSignal::PhiB | TestSignal::TestFunc1 => Box::new(self.spectrum().expect("bandlimited")),
        }
    }

    /// The finite spectrum of a bandlimited test signal.
    pub fn spectrum(&self) -> Result<FourierSpectrum> {
        let c = Complex64::new;
        match self {
            TestSignal::TestFunc1 => FourierSpectrum::new(
                BandIndexSet::new(-2, 3)?,
                vec![c(1.0, 1.0), c(2.0, -1.0), c(1.0, 0.0), c(2.0, 1.0), c(1.0, -1.0), c(0.0, 0.0)],
            ),
            TestSignal::PhiB => {
                let phi = Phi::new(false);
                let band = BandIndexSet::new(-16, 16)?;
                FourierSpectrum::new(band, band.iter().map(|n| phi.coefficient(n)).collect())
            }
            _ => Err(Error::Unsupported(format!("{self} is not bandlimited"))),
        }
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestSignal::Phi => "phi",
            TestSignal::PhiReal => "phi-re",
            TestSignal::PhiB => "phiB",
            TestSignal::TestFunc1 => "testfunc1",
        })
    }
}

impl FromStr for TestSignal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi" => Ok(TestSignal::Phi),
            "phi-re" | "phi_re" | "rephi" => Ok(TestSignal::PhiReal),
            "phib" | "phi-b" | "phi_b" => Ok(TestSignal::PhiB),
            "testfunc1" => Ok(TestSignal::TestFunc1),
            _ => Err(Error::Config(format!("unknown test signal '{s}'"))),
        }
    }
}

impl serde::Serialize for TestSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for TestSignal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
