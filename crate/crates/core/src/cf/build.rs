//! Constructed continued fractions: factorial-growth denominators and the
//! period-one presets.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use super::{ContinuedFraction, Magnitude, EXACT_BITS_CAP};
use crate::error::{Error, Result};
use crate::numeric::Precision;

/// Largest q for which an integer `s` uses exact factorials.
const EXACT_FACTORIAL_LIMIT: u64 = 1 << 20;

/// Golden mean `[0; 1, 1, ...]` with quotients stored through index `depth`.
pub fn golden(depth: usize, prec: Precision) -> Result<ContinuedFraction> {
    let mut q = vec![0u64];
    q.extend(std::iter::repeat_n(1, depth));
    ContinuedFraction::from_u64(&q, prec)
}

/// `sqrt(2) - 1 = [0; 2, 2, ...]`.
pub fn sqrt2_minus_one(depth: usize, prec: Precision) -> Result<ContinuedFraction> {
    let mut q = vec![0u64];
    q.extend(std::iter::repeat_n(2, depth));
    ContinuedFraction::from_u64(&q, prec)
}

#[derive(Clone, Debug)]
pub struct BuildOutcome {
    pub quotients: Vec<Magnitude>,
    pub requested: usize,
    /// Index of the last quotient actually produced.
    pub reached: usize,
}

impl BuildOutcome {
    pub fn saturated(&self) -> bool {
        self.reached < self.requested
    }
}

/// Quotients `[0; q1, a_2, ..., a_depth]` with `a_{k+1} = max(1, round(q_k!^s / q_k))`,
/// so that `log q_{k+1} / (q_k log q_k)` tends to `s`.
///
/// Fails with [`Error::DepthOverflow`] when `log q_k` leaves the floating
/// exponent range before `depth` is reached.
pub fn build_quotients(s: f64, depth: usize, q1: u64, prec: Precision) -> Result<Vec<Magnitude>> {
    let out = build_quotients_saturating(s, depth, q1, prec)?;
    if out.saturated() {
        return Err(Error::DepthOverflow { requested: depth, representable: out.reached });
    }
    Ok(out.quotients)
}

/// Like [`build_quotients`], but stops at the deepest representable index.
pub fn build_quotients_saturating(s: f64, depth: usize, q1: u64, prec: Precision) -> Result<BuildOutcome> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("growth exponent must be positive, got {s}")));
    }
    if depth < 3 {
        return Err(Error::Domain(format!("depth must be at least 3, got {depth}")));
    }
    if q1 < 2 {
        return Err(Error::Domain(format!("q1 must be at least 2, got {q1}")));
    }
    let prec = Precision::new(prec.bits().max(128))?;
    let mut quotients = vec![Magnitude::from_u64(0), Magnitude::from_u64(q1)];
    let mut q_prev = Magnitude::from_u64(1);
    let mut q_cur = Magnitude::from_u64(q1);
    while quotients.len() <= depth {
        let Some(a) = next_quotient(s, &q_cur, prec) else { break };
        let q_next = Magnitude::mul_add(&a, &q_cur, &q_prev, prec);
        if let Magnitude::Log(l) = &q_next {
            if !l.is_finite() {
                break;
            }
        }
        quotients.push(a);
        q_prev = std::mem::replace(&mut q_cur, q_next);
    }
    let reached = quotients.len() - 1;
    Ok(BuildOutcome { quotients, requested: depth, reached })
}

/// `max(1, round(q!^s / q))`, or `None` if its logarithm overflows.
fn next_quotient(s: f64, q: &Magnitude, prec: Precision) -> Option<Magnitude> {
    let bits = prec.bits();
    if s.fract() == 0.0 && s <= 64.0 {
        if let Some(qv) = q.exact().and_then(Integer::to_u64) {
            if qv <= EXACT_FACTORIAL_LIMIT {
                let est_bits = s * crate::numeric::ln_factorial(qv) / std::f64::consts::LN_2;
                if est_bits < EXACT_BITS_CAP as f64 {
                    let f = Integer::from(Integer::factorial(qv as u32));
                    let a = f.pow(s as u32) / qv;
                    return Some(Magnitude::Exact(a.max(Integer::from(1))));
                }
            }
        }
    }
    let ln_a = Float::with_val(bits, ln_factorial_big(q, prec)? * s) - q.ln(prec);
    if !ln_a.is_finite() {
        return None;
    }
    // round(x) < 1 whenever ln x < ln(1/2)
    if ln_a < -std::f64::consts::LN_2 {
        return Some(Magnitude::from_u64(1));
    }
    let bit_len = Float::with_val(bits, &ln_a / std::f64::consts::LN_2);
    if bit_len < EXACT_BITS_CAP {
        let v = Float::with_val(bits, ln_a.exp_ref());
        let (a, _) = v.to_integer_round(rug::float::Round::Nearest)?;
        Some(Magnitude::Exact(a.max(Integer::from(1))))
    } else {
        Some(Magnitude::Log(ln_a))
    }
}

/// `ln(q!)` for a magnitude that may be astronomically large.
fn ln_factorial_big(q: &Magnitude, prec: Precision) -> Option<Float> {
    let bits = prec.bits();
    if let Some(v) = q.exact().and_then(Integer::to_u64) {
        if v < 1 << 40 {
            return Some(Float::with_val(bits, v + 1).ln_gamma());
        }
    }
    // Stirling: x ln x - x + ln(2 pi x)/2 + 1/(12x), error below 1/(360 x^3).
    let lx = q.ln(prec);
    let x = Float::with_val(bits, lx.exp_ref());
    if !x.is_finite() {
        return None;
    }
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let mut r = Float::with_val(bits, &lx - 1u32) * &x;
    r += Float::with_val(bits, two_pi.ln() + &lx) / 2u32;
    r += Float::with_val(bits, &x * 12u32).recip();
    r.is_finite().then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(qs: &[Magnitude]) -> Vec<u64> {
        qs.iter().map(|a| a.exact().unwrap().to_u64().unwrap()).collect()
    }

    #[test]
    fn factorial_growth_s1_first_quotients() {
        let out = build_quotients_saturating(1.0, 4, 2, Precision::OCT).unwrap();
        // q = 1, 2, 3, 8, 40323
        assert_eq!(exact(&out.quotients), vec![0, 2, 1, 2, 5040]);
        let cf = ContinuedFraction::new(out.quotients, Precision::OCT).unwrap();
        assert_eq!(cf.denominator(4).exact().unwrap().to_u64(), Some(40323));
    }

    #[test]
    fn saturates_at_exponent_range() {
        let out = build_quotients_saturating(1.0, 12, 2, Precision::OCT).unwrap();
        assert!(out.saturated());
        assert!(out.reached >= 6);
        assert!(out.quotients.iter().skip(1).all(|a| !a.is_zero()));
        assert!(matches!(build_quotients(1.0, 12, 2, Precision::OCT), Err(Error::DepthOverflow { .. })));
    }

    #[test]
    fn quotients_never_below_one() {
        let out = build_quotients_saturating(0.1, 6, 2, Precision::QUAD).unwrap();
        assert!(out.quotients.iter().skip(1).all(|a| a.ge_u64(1)));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_quotients(0.0, 5, 2, Precision::QUAD).is_err());
        assert!(build_quotients(1.0, 2, 2, Precision::QUAD).is_err());
        assert!(build_quotients(1.0, 5, 1, Precision::QUAD).is_err());
    }
}
