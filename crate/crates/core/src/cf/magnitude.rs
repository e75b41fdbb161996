use rug::float::Special;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Precision;

/// Exact integers switch to log storage beyond this many bits.
pub const EXACT_BITS_CAP: u32 = 1 << 21;

/// A positive integer that may be far too large to store: either exact, or
/// represented by its natural logarithm.
#[derive(Clone, Debug, PartialEq)]
pub enum Magnitude {
    Exact(Integer),
    /// Natural log of the value.
    Log(Float),
}

impl Magnitude {
    pub fn from_u64(v: u64) -> Self {
        Magnitude::Exact(Integer::from(v))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Magnitude::Exact(_))
    }

    pub fn exact(&self) -> Option<&Integer> {
        match self {
            Magnitude::Exact(i) => Some(i),
            Magnitude::Log(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Magnitude::Exact(i) if *i == 0)
    }

    /// Natural log. Zero maps to -inf.
    pub fn ln(&self, prec: Precision) -> Float {
        match self {
            Magnitude::Exact(i) => {
                if *i == 0 {
                    Float::with_val(prec.bits(), Special::NegInfinity)
                } else {
                    Float::with_val(prec.bits(), i).ln()
                }
            }
            Magnitude::Log(l) => Float::with_val(prec.bits(), l),
        }
    }

    /// Value as a float; +inf when it exceeds the exponent range.
    pub fn to_float(&self, prec: Precision) -> Float {
        match self {
            Magnitude::Exact(i) => Float::with_val(prec.bits(), i),
            Magnitude::Log(l) => Float::with_val(prec.bits(), l).exp(),
        }
    }

    /// `a * b + c` with exact arithmetic whenever all three are exact.
    pub fn mul_add(a: &Magnitude, b: &Magnitude, c: &Magnitude, prec: Precision) -> Magnitude {
        if let (Some(a), Some(b), Some(c)) = (a.exact(), b.exact(), c.exact()) {
            return Magnitude::Exact(Integer::from(a * b) + c);
        }
        let lab = a.ln(prec) + b.ln(prec);
        if c.is_zero() {
            return Magnitude::Log(lab);
        }
        // log(ab + c) = log(ab) + log1p(exp(log c - log ab))
        let rel = Float::with_val(prec.bits(), c.ln(prec) - &lab).exp();
        Magnitude::Log(lab + rel.ln_1p())
    }

    /// Compare against a small integer.
    pub fn ge_u64(&self, v: u64) -> bool {
        match self {
            Magnitude::Exact(i) => *i >= v,
            Magnitude::Log(l) => {
                let lv = Float::with_val(l.prec(), v).ln();
                *l >= lv
            }
        }
    }

    /// Lossy f64 rendering (may be +inf).
    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Exact(i) => i.to_f64(),
            Magnitude::Log(l) => l.to_f64().exp(),
        }
    }

    pub fn to_doc(&self) -> MagnitudeDoc {
        match self {
            Magnitude::Exact(i) => match i.to_u64() {
                Some(v) => MagnitudeDoc::Small(v),
                None => MagnitudeDoc::Exact(i.to_string()),
            },
            Magnitude::Log(l) => MagnitudeDoc::Log { ln: crate::numeric::float_to_string(l) },
        }
    }

    pub fn from_doc(doc: &MagnitudeDoc, prec: Precision) -> Result<Self> {
        match doc {
            MagnitudeDoc::Small(v) => Ok(Magnitude::from_u64(*v)),
            MagnitudeDoc::Exact(s) => Integer::from_str_radix(s, 10)
                .map(Magnitude::Exact)
                .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}"))),
            MagnitudeDoc::Log { ln } => Ok(Magnitude::Log(crate::numeric::parse_float(prec, ln)?)),
        }
    }
}

impl From<u64> for Magnitude {
    fn from(v: u64) -> Self {
        Magnitude::from_u64(v)
    }
}

/// Serialized form: small integers as numbers, large ones as decimal strings,
/// log-stored values as `{"ln": "..."}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MagnitudeDoc {
    Small(u64),
    Exact(String),
    Log { ln: String },
}
