//! Multipliers, resonances and the small-divisor function `Omega(p)`.
//!
//! `Omega(p)` is the smallest `|lambda^alpha - lambda_j|` over `2 <= |alpha| <= p - 1`
//! and all components `j`. Multi-indices of degree one are excluded since
//! `alpha = e_j` gives an identically zero divisor.

use rayon::prelude::*;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::cf::{build_quotients_saturating, golden, sqrt2_minus_one, ContinuedFraction, Magnitude, MagnitudeDoc};
use crate::error::{Error, Result};
use crate::numeric::{self, Precision};
use crate::series::{enum_indices, MultiIndex};

/// Tolerance on `||lambda| - 1|` for the unimodular flag.
pub const UNIMODULAR_TOL: f64 = 1e-14;

/// A rotation number `w` with `lambda = exp(2 pi i w)`.
#[derive(Clone, Debug)]
pub enum Rotation {
    Real(Float),
    /// Exact rational; resonances are then detected exactly.
    Rational(Rational),
    Quotients(ContinuedFraction),
}

impl Rotation {
    pub fn value(&self, prec: Precision) -> Result<Float> {
        Ok(match self {
            Rotation::Real(x) => Float::with_val(prec.bits(), x),
            Rotation::Rational(q) => Float::with_val(prec.bits(), q),
            Rotation::Quotients(cf) => {
                if cf.precision() >= prec {
                    Float::with_val(prec.bits(), cf.value())
                } else {
                    cf.at_precision(prec)?.value()
                }
            }
        })
    }

    fn at_precision(&self, prec: Precision) -> Result<Rotation> {
        Ok(match self {
            Rotation::Quotients(cf) if cf.precision() < prec => Rotation::Quotients(cf.at_precision(prec)?),
            other => other.clone(),
        })
    }
}

/// Diagonal linear part `A = diag(lambda_1, ..., lambda_n)`.
#[derive(Clone, Debug)]
pub struct MultiplierSpec {
    prec: Precision,
    lambdas: Vec<Complex>,
    rotations: Option<Vec<Rotation>>,
    unimodular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceWitness {
    pub alpha: Vec<u32>,
    pub j: usize,
    pub modulus: f64,
    /// True when decided by exact rational arithmetic.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaValue {
    pub p: u32,
    pub omega: f64,
    pub argmin_alpha: Vec<u32>,
    pub argmin_j: usize,
}

/// Smallest divisor among the indices of one degree.
#[derive(Clone, Debug)]
struct DegreeMin {
    modulus: Float,
    alpha: MultiIndex,
    j: usize,
    exact_resonance: bool,
}

impl MultiplierSpec {
    pub fn from_lambdas(lambdas: Vec<Complex>, prec: Precision) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("at least one multiplier is required".into()));
        }
        let lambdas: Vec<Complex> = lambdas.iter().map(|l| numeric::with_prec(l, prec)).collect();
        let unimodular = lambdas.iter().all(|l| (numeric::modulus_f64(l) - 1.0).abs() <= UNIMODULAR_TOL);
        Ok(MultiplierSpec { prec, lambdas, rotations: None, unimodular })
    }

    pub fn from_rotations(rotations: Vec<Rotation>, prec: Precision) -> Result<Self> {
        if rotations.is_empty() {
            return Err(Error::InvalidArgument("at least one rotation is required".into()));
        }
        let rotations = rotations.iter().map(|r| r.at_precision(prec)).collect::<Result<Vec<_>>>()?;
        let lambdas = rotations
            .iter()
            .map(|r| Ok(numeric::unit_from_rotation(prec, &r.value(prec)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiplierSpec { prec, lambdas, rotations: Some(rotations), unimodular: true })
    }

    /// One-dimensional golden-mean multiplier.
    pub fn golden(prec: Precision) -> Result<Self> {
        Self::from_rotations(vec![Rotation::Quotients(golden(64, prec)?)], prec)
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn lambdas(&self) -> &[Complex] {
        &self.lambdas
    }

    pub fn rotations(&self) -> Option<&[Rotation]> {
        self.rotations.as_deref()
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular
    }

    /// Same multipliers at another precision. Rotation-defined specs are
    /// recomputed from their exact data; explicit values are re-rounded.
    pub fn with_precision(&self, prec: Precision) -> Result<Self> {
        match &self.rotations {
            Some(r) => Self::from_rotations(r.clone(), prec),
            None => Ok(MultiplierSpec {
                prec,
                lambdas: self.lambdas.iter().map(|l| numeric::with_prec(l, prec)).collect(),
                rotations: None,
                unimodular: self.unimodular,
            }),
        }
    }

    fn exact_rotations(&self) -> Option<Vec<&Rational>> {
        self.rotations.as_ref()?.iter().map(|r| if let Rotation::Rational(q) = r { Some(q) } else { None }).collect()
    }

    fn powers(&self, max_degree: u32) -> Vec<Vec<Complex>> {
        crate::series::power_table(&self.lambdas, max_degree, self.prec)
    }

    fn check_index(&self, alpha: &MultiIndex, j: usize) -> Result<()> {
        if alpha.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: alpha.dim() });
        }
        if j >= self.dim() {
            return Err(Error::InvalidArgument(format!("component {j} out of range 0..{}", self.dim())));
        }
        Ok(())
    }

    /// `lambda^alpha`.
    pub fn lambda_power(&self, alpha: &MultiIndex) -> Result<Complex> {
        if alpha.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: alpha.dim() });
        }
        Ok(power_from_table(&self.powers(alpha.degree()), alpha, self.prec))
    }

    /// `lambda^alpha - lambda_j` for `|alpha| >= 2`.
    pub fn divisor(&self, alpha: &MultiIndex, j: usize) -> Result<Complex> {
        self.check_index(alpha, j)?;
        if alpha.degree() < 2 {
            return Err(Error::Domain(format!("divisors need |alpha| >= 2, got {}", alpha.degree())));
        }
        Ok(self.lambda_power(alpha)? - &self.lambdas[j])
    }

    /// Exact test of `alpha . w - w_j` in Z, if every rotation is rational.
    fn exactly_resonant(exact: &[&Rational], alpha: &MultiIndex, j: usize) -> bool {
        let mut acc = Rational::new();
        for (q, &a) in exact.iter().zip(alpha.entries()) {
            acc += Rational::from(*q * a);
        }
        acc -= exact[j];
        *acc.denom() == 1
    }

    fn degree_min(&self, d: u32, powers: &[Vec<Complex>], exact: Option<&[&Rational]>) -> DegreeMin {
        let mut best: Option<DegreeMin> = None;
        for alpha in enum_indices(self.dim(), d) {
            let p = power_from_table(powers, &alpha, self.prec);
            for j in 0..self.dim() {
                let exact_res = exact.is_some_and(|e| Self::exactly_resonant(e, &alpha, j));
                let m = numeric::modulus(&Complex::with_val(self.prec.bits(), &p - &self.lambdas[j]));
                let better = match &best {
                    None => true,
                    Some(b) => (exact_res && !b.exact_resonance) || (exact_res == b.exact_resonance && m < b.modulus),
                };
                if better {
                    best = Some(DegreeMin { modulus: m, alpha: alpha.clone(), j, exact_resonance: exact_res });
                }
            }
        }
        best.expect("every degree has at least one index")
    }

    fn degree_minima(&self, lo: u32, hi: u32) -> Vec<DegreeMin> {
        let powers = self.powers(hi);
        let exact = self.exact_rotations();
        (lo..=hi).into_par_iter().map(|d| self.degree_min(d, &powers, exact.as_deref())).collect()
    }

    fn witness(&self, m: &DegreeMin) -> Option<ResonanceWitness> {
        let numeric_hit = self.exact_rotations().is_none() && m.modulus < self.prec.resonance_threshold();
        (m.exact_resonance || numeric_hit).then(|| ResonanceWitness {
            alpha: m.alpha.entries().to_vec(),
            j: m.j,
            modulus: m.modulus.to_f64(),
            exact: m.exact_resonance,
        })
    }

    /// First resonance with `2 <= |alpha| <= max_degree`, scanning by degree.
    pub fn is_resonant(&self, max_degree: u32) -> Result<Option<ResonanceWitness>> {
        if max_degree < 2 {
            return Err(Error::Domain("resonance scan needs max_degree >= 2".into()));
        }
        let powers = self.powers(max_degree);
        let exact = self.exact_rotations();
        for d in 2..=max_degree {
            for alpha in enum_indices(self.dim(), d) {
                let p = power_from_table(&powers, &alpha, self.prec);
                for j in 0..self.dim() {
                    let hit = match &exact {
                        Some(e) => Self::exactly_resonant(e, &alpha, j),
                        None => {
                            let m = numeric::modulus(&Complex::with_val(self.prec.bits(), &p - &self.lambdas[j]));
                            m < self.prec.resonance_threshold()
                        }
                    };
                    if hit {
                        let m = numeric::modulus(&Complex::with_val(self.prec.bits(), &p - &self.lambdas[j]));
                        return Ok(Some(ResonanceWitness {
                            alpha: alpha.entries().to_vec(),
                            j,
                            modulus: m.to_f64(),
                            exact: exact.is_some(),
                        }));
                    }
                }
            }
        }
        Ok(None)
    }

    /// `Omega(p)` by exhaustive enumeration.
    pub fn omega(&self, p: u32) -> Result<OmegaValue> {
        Ok(self.omega_sweep(p, p)?.pop().expect("nonempty sweep"))
    }

    /// `Omega(p)` for every `p` in `p_lo..=p_hi`, sharing the per-degree work.
    pub fn omega_sweep(&self, p_lo: u32, p_hi: u32) -> Result<Vec<OmegaValue>> {
        if p_lo < 3 {
            return Err(Error::Domain(format!("Omega(p) needs p >= 3, got {p_lo}")));
        }
        if p_hi < p_lo {
            return Err(Error::InvalidArgument(format!("empty range {p_lo}..={p_hi}")));
        }
        let minima = self.degree_minima(2, p_hi - 1);
        let mut rows = Vec::new();
        let mut best: Option<&DegreeMin> = None;
        for (i, m) in minima.iter().enumerate() {
            if let Some(w) = self.witness(m) {
                return Err(Error::Resonant { alpha: w.alpha, component: w.j });
            }
            if best.is_none_or(|b| m.modulus < b.modulus) {
                best = Some(m);
            }
            // degrees 2..=d give Omega(d + 1)
            let p = i as u32 + 3;
            if p >= p_lo {
                let b = best.expect("set above");
                rows.push(OmegaValue {
                    p,
                    omega: b.modulus.to_f64(),
                    argmin_alpha: b.alpha.entries().to_vec(),
                    argmin_j: b.j,
                });
            }
        }
        Ok(rows)
    }

    /// `Omega(p_k)` for each entry of a sequence; entries with `p_k < 3` are NaN.
    pub fn omega_for_sequence(&self, p_seq: &[u64]) -> Result<Vec<f64>> {
        let Some(&p_max) = p_seq.iter().max() else { return Ok(Vec::new()) };
        if p_max < 3 {
            return Ok(vec![f64::NAN; p_seq.len()]);
        }
        let p_max = u32::try_from(p_max).map_err(|_| Error::Domain("p_k too large".into()))?;
        let rows = self.omega_sweep(3, p_max)?;
        Ok(p_seq.iter().map(|&p| if p < 3 { f64::NAN } else { rows[(p - 3) as usize].omega }).collect())
    }
}

fn power_from_table(powers: &[Vec<Complex>], alpha: &MultiIndex, prec: Precision) -> Complex {
    let mut acc = numeric::one(prec);
    for (i, &e) in alpha.entries().iter().enumerate() {
        if e > 0 {
            acc *= &powers[i][e as usize];
        }
    }
    acc
}

/// JSON forms of a rotation number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RotationDoc {
    Number(f64),
    /// Decimal string, parsed at the working precision.
    Text(String),
    Rational {
        num: i64,
        den: u64,
    },
    Quotients {
        quotients: Vec<MagnitudeDoc>,
    },
    Preset {
        preset: String,
        #[serde(default)]
        depth: Option<usize>,
    },
    FactorialGrowth {
        factorial_growth: FactorialGrowthDoc,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorialGrowthDoc {
    pub s: f64,
    #[serde(default = "default_q1")]
    pub q1: u64,
    #[serde(default = "default_growth_depth")]
    pub depth: usize,
}

fn default_q1() -> u64 {
    2
}

fn default_growth_depth() -> usize {
    8
}

pub const DEFAULT_PRESET_DEPTH: usize = 64;

impl RotationDoc {
    pub fn to_rotation(&self, prec: Precision) -> Result<Rotation> {
        Ok(match self {
            RotationDoc::Number(x) => Rotation::Real(Float::with_val(prec.bits(), *x)),
            RotationDoc::Text(s) => Rotation::Real(numeric::parse_float(prec, s)?),
            RotationDoc::Rational { num, den } => {
                if *den == 0 {
                    return Err(Error::Domain("rotation denominator is zero".into()));
                }
                Rotation::Rational(Rational::from((Integer::from(*num), Integer::from(*den))))
            }
            RotationDoc::Quotients { quotients } => {
                let q = quotients.iter().map(|d| Magnitude::from_doc(d, prec)).collect::<Result<Vec<_>>>()?;
                Rotation::Quotients(ContinuedFraction::new(q, prec)?)
            }
            RotationDoc::Preset { preset, depth } => {
                let depth = depth.unwrap_or(DEFAULT_PRESET_DEPTH);
                Rotation::Quotients(match preset.as_str() {
                    "golden" => golden(depth, prec)?,
                    "sqrt2" => sqrt2_minus_one(depth, prec)?,
                    other => return Err(Error::InvalidArgument(format!("unknown preset {other:?}"))),
                })
            }
            RotationDoc::FactorialGrowth { factorial_growth: g } => {
                let out = build_quotients_saturating(g.s, g.depth, g.q1, prec)?;
                Rotation::Quotients(ContinuedFraction::new(out.quotients, prec)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::float::Constant;

    fn rot(x: f64) -> Rotation {
        Rotation::Real(Float::with_val(64, x))
    }

    fn rational(num: i64, den: u64) -> Rotation {
        RotationDoc::Rational { num, den }.to_rotation(Precision::DOUBLE).unwrap()
    }

    #[test]
    fn lambda_i_divisor() {
        let spec =
            MultiplierSpec::from_lambdas(vec![numeric::from_f64(Precision::DOUBLE, 0.0, 1.0)], Precision::DOUBLE)
                .unwrap();
        let d = spec.divisor(&MultiIndex::new(vec![2]), 0).unwrap();
        assert!((d.real().to_f64() + 1.0).abs() < 1e-15 && (d.imag().to_f64() + 1.0).abs() < 1e-15);
        assert!(spec.divisor(&MultiIndex::new(vec![1]), 0).is_err());
    }

    #[test]
    fn golden_degree_two_divisor() {
        let spec = MultiplierSpec::golden(Precision::QUAD).unwrap();
        let m = numeric::modulus_f64(&spec.divisor(&MultiIndex::new(vec![2]), 0).unwrap());
        // 2 sin(pi w) with w = (sqrt5 - 1)/2
        let w = (5f64.sqrt() - 1.0) / 2.0;
        assert!((m - 2.0 * (std::f64::consts::PI * w).sin()).abs() < 1e-14);
        assert!((m - 1.8641).abs() < 1e-4);
        let om = spec.omega(3).unwrap();
        assert_eq!(om.argmin_alpha, vec![2]);
        assert!((om.omega - m).abs() < 1e-15);
    }

    #[test]
    fn exact_resonances() {
        let one = MultiplierSpec::from_rotations(vec![rational(0, 1)], Precision::DOUBLE).unwrap();
        let w = one.is_resonant(4).unwrap().unwrap();
        assert_eq!(w.alpha, vec![2]);
        assert!(w.exact);
        let quarter = MultiplierSpec::from_rotations(vec![rational(1, 4)], Precision::DOUBLE).unwrap();
        assert_eq!(quarter.is_resonant(5).unwrap().unwrap().alpha, vec![5]);
        assert!(quarter.is_resonant(4).unwrap().is_none());
        assert!(matches!(quarter.omega(6), Err(Error::Resonant { .. })));
        assert!(quarter.omega(5).is_ok());
    }

    #[test]
    fn numeric_resonance_for_explicit_i() {
        let spec =
            MultiplierSpec::from_lambdas(vec![numeric::from_f64(Precision::DOUBLE, 0.0, 1.0)], Precision::DOUBLE)
                .unwrap();
        assert_eq!(spec.is_resonant(5).unwrap().unwrap().alpha, vec![5]);
    }

    #[test]
    fn golden_is_not_resonant_to_fifty() {
        let spec = MultiplierSpec::golden(Precision::DOUBLE).unwrap();
        assert!(spec.is_resonant(50).unwrap().is_none());
    }

    #[test]
    fn omega_rejects_small_p() {
        let spec = MultiplierSpec::golden(Precision::DOUBLE).unwrap();
        assert!(spec.omega(2).is_err());
    }

    #[test]
    fn sweep_is_monotone_and_matches_single_calls() {
        let spec = MultiplierSpec::from_rotations(vec![rot(0.1234567), rot(0.7654321)], Precision::DOUBLE).unwrap();
        let rows = spec.omega_sweep(3, 15).unwrap();
        assert!(rows.windows(2).all(|w| w[1].omega <= w[0].omega));
        for r in &rows {
            assert_eq!(spec.omega(r.p).unwrap(), *r);
        }
    }

    #[test]
    fn two_dim_divisor_is_definition() {
        let spec = MultiplierSpec::from_rotations(vec![rot(0.3), rot(0.45)], Precision::QUAD).unwrap();
        let d = spec.divisor(&MultiIndex::new(vec![0, 2]), 0).unwrap();
        let l = spec.lambdas();
        let expect = Complex::with_val(128, l[1].square_ref()) - &l[0];
        assert_eq!(d, expect);
    }

    #[test]
    fn rotation_docs_parse() {
        let r: RotationDoc = serde_json::from_str(r#"{"preset":"golden","depth":10}"#).unwrap();
        let spec =
            MultiplierSpec::from_rotations(vec![r.to_rotation(Precision::QUAD).unwrap()], Precision::QUAD).unwrap();
        let phi = (Float::with_val(128, 5u32).sqrt() - 1u32) / 2u32;
        let pi2 = Float::with_val(128, Constant::Pi) * 2u32 * &phi;
        assert!((spec.lambdas()[0].real().to_f64() - pi2.cos().to_f64()).abs() < 1e-15);
        let r: RotationDoc = serde_json::from_str(r#"{"num":3,"den":8}"#).unwrap();
        assert!(matches!(r, RotationDoc::Rational { num: 3, den: 8 }));
        let r: RotationDoc = serde_json::from_str(r#"{"factorial_growth":{"s":1}}"#).unwrap();
        assert!(r.to_rotation(Precision::QUAD).is_ok());
        let r: RotationDoc = serde_json::from_str("0.25").unwrap();
        assert!(matches!(r, RotationDoc::Number(_)));
    }
}
