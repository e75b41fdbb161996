//! Working-precision helpers shared by every module.
//!
//! All coefficient arithmetic runs on MPFR/MPC values through `rug`. A
//! [`Precision`] is just a bit count; 53 bits reproduces binary64 rounding.

use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary precision of a computation, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(u32);

impl Precision {
    pub const DOUBLE: Precision = Precision(53);
    pub const QUAD: Precision = Precision(128);
    pub const OCT: Precision = Precision(256);

    /// Largest precision auto-escalation will reach.
    pub const CEILING: Precision = Precision(8192);

    /// Precisions accepted on the command line and in run configuration.
    pub const USER_CHOICES: [u32; 4] = [53, 128, 256, 512];

    pub fn new(bits: u32) -> Result<Self> {
        if !(24..=Self::CEILING.0).contains(&bits) {
            return Err(Error::InvalidArgument(format!(
                "precision must lie in 24..={} bits, got {bits}",
                Self::CEILING.0
            )));
        }
        Ok(Precision(bits))
    }

    /// Only the precisions a run configuration may name.
    pub fn from_user(bits: u32) -> Result<Self> {
        if !Self::USER_CHOICES.contains(&bits) {
            return Err(Error::InvalidArgument(format!(
                "precision must be one of {:?}, got {bits}",
                Self::USER_CHOICES
            )));
        }
        Ok(Precision(bits))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Precision {
        Precision(self.0.saturating_mul(2))
    }

    /// Unit roundoff 2^-p.
    pub fn unit_roundoff(self) -> f64 {
        (-(self.0 as f64)).exp2()
    }

    /// Modulus below which a divisor is declared resonant: 1e-14 at 53 bits,
    /// shrinking by one bit per extra bit of precision.
    pub fn resonance_threshold(self) -> f64 {
        1e-14 * ((53.0 - self.0 as f64).exp2())
    }

    /// Divisors below this floor force the recursion to a higher precision.
    pub fn escalation_floor(self) -> f64 {
        1e6 * self.unit_roundoff()
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DOUBLE
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

pub fn zero(prec: Precision) -> Complex {
    Complex::new(prec.bits())
}

pub fn one(prec: Precision) -> Complex {
    Complex::with_val(prec.bits(), (1, 0))
}

pub fn from_f64(prec: Precision, re: f64, im: f64) -> Complex {
    Complex::with_val(prec.bits(), (re, im))
}

/// `exp(2 pi i w)` at the requested precision.
pub fn unit_from_rotation(prec: Precision, w: &Float) -> Complex {
    let bits = prec.bits() + 16;
    let mut angle = Float::with_val(bits, Constant::Pi);
    angle *= 2;
    angle *= w;
    let (s, c) = angle.sin_cos(Float::new(bits));
    Complex::with_val(prec.bits(), (c, s))
}

/// |z| as a `Float` at the value's own precision.
pub fn modulus(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn modulus_f64(z: &Complex) -> f64 {
    modulus(z).to_f64()
}

/// Re-round a complex value to a new precision.
pub fn with_prec(z: &Complex, prec: Precision) -> Complex {
    Complex::with_val(prec.bits(), z)
}

/// Exact decimal rendering that parses back to the same value at `prec`.
pub fn float_to_string(x: &Float) -> String {
    if x.is_zero() {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    x.to_string_radix(10, None)
}

pub fn parse_float(prec: Precision, s: &str) -> Result<Float> {
    Float::parse(s).map(|p| Float::with_val(prec.bits(), p)).map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

/// Natural log of n! for moderate n, exact summation in f64.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 256 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = Float::with_val(64, n + 1);
    x.ln_gamma().to_f64()
}
