//! Finite-window diagnostics for the Bruno-type conditions.
//!
//! None of these conditions can be decided from finitely many quotients, so
//! each evaluator returns the sequence it would take a limit of, together with
//! a least-squares trend. Only the per-index inequality family is checked
//! as booleans.

use rug::Float;
use serde::{Deserialize, Serialize};

use super::ContinuedFraction;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// `sum_{l<=k} log q_{l+1}/q_l - s log q_k`.
    BtildeS,
    /// `log q_{k+1} / (q_k log q_k)`.
    BprimeS,
    /// `log q_{m+1}/q_m <= s_m log q_m + gamma_m` for every m >= 1.
    Bgammasigma,
    /// Partial sums of `log log q_{k+1} / q_k`.
    PerezMarco,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 4] =
        [ConditionKind::BtildeS, ConditionKind::BprimeS, ConditionKind::Bgammasigma, ConditionKind::PerezMarco];

    pub fn name(self) -> &'static str {
        match self {
            ConditionKind::BtildeS => "btilde_s",
            ConditionKind::BprimeS => "bprime_s",
            ConditionKind::Bgammasigma => "bgammasigma",
            ConditionKind::PerezMarco => "perez_marco",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let k = s.to_ascii_lowercase().replace('-', "_");
        ConditionKind::ALL
            .into_iter()
            .find(|c| c.name() == k || c.name().replace('_', "") == k.replace('_', ""))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown condition {s:?}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionParams {
    pub s: f64,
    /// `s_m` for m = 1, 2, ... (index 0 holds s_1).
    pub s_seq: Option<Vec<f64>>,
    /// `gamma_m` for m = 1, 2, ... (index 0 holds gamma_1).
    pub gamma_seq: Option<Vec<f64>>,
    /// Increasing integers `p_k` for the n-dimensional functional.
    pub p_seq: Option<Vec<u64>>,
    /// Inclusive index window; defaults to everything the depth allows.
    pub window: Option<(usize, usize)>,
}

impl ConditionParams {
    pub fn with_s(s: f64) -> Self {
        ConditionParams { s, ..Default::default() }
    }

    /// `s_m = s 2^-m` and `gamma_m = 0.9^m` for m = 1..=count.
    pub fn geometric_sequences(s: f64, count: usize) -> Self {
        let s_seq = (1..=count).map(|m| s * (-(m as f64)).exp2()).collect();
        let gamma_seq = (1..=count).map(|m| 0.9f64.powi(m as i32)).collect();
        ConditionParams { s, s_seq: Some(s_seq), gamma_seq: Some(gamma_seq), ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0) || !self.s.is_finite() {
            return Err(Error::Domain(format!("s must be a nonnegative number, got {}", self.s)));
        }
        for (name, seq) in [("s_m", &self.s_seq), ("gamma_m", &self.gamma_seq)] {
            if let Some(v) = seq {
                if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(Error::Domain(format!("{name} must be positive")));
                }
            }
        }
        if let Some(p) = &self.p_seq {
            if p.windows(2).any(|w| w[1] <= w[0]) || p.first() == Some(&0) {
                return Err(Error::Domain("p_k must be positive and strictly increasing".into()));
            }
        }
        Ok(())
    }
}

/// Least-squares line through `(index, value)` plus the last value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub slope: f64,
    pub intercept: f64,
    pub last: f64,
    pub points: usize,
}

impl Trend {
    pub fn fit(indices: &[usize], values: &[f64]) -> Option<Trend> {
        let pts: Vec<(f64, f64)> =
            indices.iter().zip(values).filter(|(_, v)| v.is_finite()).map(|(&k, &v)| (k as f64, v)).collect();
        let last = *pts.last().map(|(_, v)| v)?;
        let n = pts.len() as f64;
        if pts.len() < 2 {
            return Some(Trend { slope: 0.0, intercept: last, last, points: pts.len() });
        }
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        Some(Trend { slope, intercept: my - slope * mx, last, points: pts.len() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionDiagnostic {
    pub kind: ConditionKind,
    pub s: f64,
    /// First index that contributes; earlier ones are undefined for this kind.
    pub start_index: usize,
    pub indices: Vec<usize>,
    pub sequence: Vec<f64>,
    pub trend: Option<Trend>,
    /// Per-index verdicts (inequality family only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_pass: Option<bool>,
    /// Heuristic reading of the limit of the `log q_{k+1}/(q_k log q_k)` sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_class: Option<LimitClass>,
}

/// Whether the finite window suggests a limit equal to `s` or to zero.
/// A heuristic only: the boundary cannot be decided from finite data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitClass {
    pub estimate: f64,
    pub class: String,
    pub heuristic: bool,
}

pub fn evaluate_condition(
    kind: ConditionKind,
    cf: &ContinuedFraction,
    params: &ConditionParams,
) -> Result<ConditionDiagnostic> {
    params.validate()?;
    let depth = cf.depth();
    if depth < 3 {
        return Err(Error::InsufficientDepth { needed: 3, depth });
    }
    let prec = cf.precision();
    let bits = prec.bits();
    // Every kind reads q_{k+1}, so the last usable index is depth - 1.
    let max_k = depth - 1;
    let (lo, hi) = match params.window {
        Some((lo, hi)) => {
            if hi > max_k || lo > hi {
                return Err(Error::InsufficientDepth { needed: hi + 1, depth });
            }
            (lo, hi)
        }
        None => (0, max_k),
    };
    let ln_q = |k: usize| cf.denominator(k).ln(prec);

    let mut indices = Vec::new();
    let mut sequence = Vec::new();
    let mut checks = None;
    let mut start_index = lo;
    match kind {
        ConditionKind::BtildeS => {
            let mut acc = Float::new(bits);
            for k in 0..=hi {
                acc += cf.bruno_term(k)?;
                if k >= lo {
                    let v = Float::with_val(bits, &acc - ln_q(k) * params.s);
                    indices.push(k);
                    sequence.push(v.to_f64());
                }
            }
        }
        ConditionKind::BprimeS => {
            // undefined while q_k = 1
            start_index = (lo..=hi).find(|&k| cf.denominator(k).ge_u64(2)).unwrap_or(hi + 1);
            for k in start_index..=hi {
                let lq = ln_q(k);
                let llq_next = ln_q(k + 1).ln();
                let llq = Float::with_val(bits, lq.ln_ref());
                let v = Float::with_val(bits, llq_next - &lq - llq).exp();
                indices.push(k);
                sequence.push(v.to_f64());
            }
        }
        ConditionKind::Bgammasigma => {
            let (Some(sm), Some(gm)) = (&params.s_seq, &params.gamma_seq) else {
                return Err(Error::Missing("s_m and gamma_m sequences".into()));
            };
            start_index = lo.max(1);
            let mut verdicts = Vec::new();
            for m in start_index..=hi {
                let (Some(&s_m), Some(&g_m)) = (sm.get(m - 1), gm.get(m - 1)) else {
                    return Err(Error::Missing(format!("s_m and gamma_m up to m = {m}")));
                };
                let lhs = cf.bruno_term(m)?;
                let rhs = Float::with_val(bits, ln_q(m) * s_m) + g_m;
                indices.push(m);
                sequence.push(Float::with_val(bits, &lhs - &rhs).to_f64());
                verdicts.push(lhs <= rhs);
            }
            checks = Some(verdicts);
        }
        ConditionKind::PerezMarco => {
            // log log q_{k+1} is undefined or negative until q_{k+1} >= 3
            start_index = (lo..=hi).find(|&k| cf.denominator(k + 1).ge_u64(3)).unwrap_or(hi + 1);
            let mut acc = Float::new(bits);
            for k in start_index..=hi {
                let llq = ln_q(k + 1).ln();
                let term = Float::with_val(bits, llq.ln() - ln_q(k)).exp();
                acc += term;
                indices.push(k);
                sequence.push(acc.to_f64());
            }
        }
    }

    let trend = Trend::fit(&indices, &sequence);
    let all_pass = checks.as_ref().map(|c: &Vec<bool>| c.iter().all(|&b| b));
    let limit_class = (kind == ConditionKind::BprimeS).then(|| classify_limit(&sequence, params.s)).flatten();
    Ok(ConditionDiagnostic { kind, s: params.s, start_index, indices, sequence, trend, checks, all_pass, limit_class })
}

fn classify_limit(sequence: &[f64], s: f64) -> Option<LimitClass> {
    let estimate = *sequence.iter().rev().find(|v| v.is_finite())?;
    let class = if s > 0.0 && (estimate - s).abs() <= (estimate - 0.0).abs() { "s" } else { "zero" };
    Some(LimitClass { estimate, class: class.into(), heuristic: true })
}

/// Value of the n-dimensional Bruno-s functional at one degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdimValue {
    pub degree: u64,
    pub kappa: usize,
    pub sum: f64,
    pub value: f64,
}

/// `2 sum_{m=0}^{kappa} log(1/Omega(p_{m+1})) / p_m - s log degree`, where
/// `p_kappa <= degree < p_{kappa+1}` and `omega_values[k] = Omega(p_k)`.
///
/// Terms with `p_{m+1} < 3` have an empty divisor set and contribute zero;
/// their `omega_values` entries are ignored.
pub fn bruno_s_ndim_functional(omega_values: &[f64], p_seq: &[u64], s: f64, degree: u64) -> Result<NdimValue> {
    if p_seq.is_empty() {
        return Err(Error::Missing("p_k sequence".into()));
    }
    if p_seq.windows(2).any(|w| w[1] <= w[0]) || p_seq[0] == 0 {
        return Err(Error::Domain("p_k must be positive and strictly increasing".into()));
    }
    if degree < p_seq[0] {
        return Err(Error::Domain(format!("degree {degree} below p_0 = {}", p_seq[0])));
    }
    let kappa = p_seq
        .windows(2)
        .position(|w| w[0] <= degree && degree < w[1])
        .ok_or_else(|| Error::Missing(format!("p_k beyond degree {degree}")))?;
    let mut sum = 0.0;
    for m in 0..=kappa {
        let p_next = p_seq[m + 1];
        if p_next < 3 {
            continue;
        }
        let om =
            *omega_values.get(m + 1).ok_or_else(|| Error::Missing(format!("Omega(p_{}) = Omega({p_next})", m + 1)))?;
        if !(om > 0.0) || !om.is_finite() {
            return Err(Error::Domain(format!("Omega({p_next}) must be positive, got {om}")));
        }
        sum += -om.ln() / p_seq[m] as f64;
    }
    let sum = 2.0 * sum;
    Ok(NdimValue { degree, kappa, sum, value: sum - s * (degree as f64).ln() })
}

/// `p_k = 2^k` for k = 0..count.
pub fn dyadic_p_sequence(count: usize) -> Vec<u64> {
    (0..count.min(63)).map(|k| 1u64 << k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{golden, sqrt2_minus_one};
    use crate::numeric::Precision;

    #[test]
    fn btilde_matches_direct_sum_on_sqrt2() {
        let cf = sqrt2_minus_one(8, Precision::QUAD).unwrap();
        let d = evaluate_condition(ConditionKind::BtildeS, &cf, &ConditionParams::with_s(0.5)).unwrap();
        let q = [1.0f64, 2.0, 5.0, 12.0, 29.0];
        let mut acc = 0.0;
        for k in 0..4 {
            acc += (q[k + 1]).ln() / q[k];
            assert!((d.sequence[k] - (acc - 0.5 * q[k].ln())).abs() < 1e-14);
        }
    }

    #[test]
    fn perez_marco_skips_small_denominators() {
        let cf = golden(12, Precision::QUAD).unwrap();
        let d = evaluate_condition(ConditionKind::PerezMarco, &cf, &ConditionParams::default()).unwrap();
        // q_3 = 3 is the first denominator >= 3
        assert_eq!(d.start_index, 2);
        assert!(d.sequence.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn bgammasigma_needs_sequences() {
        let cf = golden(6, Precision::QUAD).unwrap();
        let r = evaluate_condition(ConditionKind::Bgammasigma, &cf, &ConditionParams::with_s(1.0));
        assert!(matches!(r, Err(Error::Missing(_))));
    }

    #[test]
    fn window_beyond_depth_is_rejected() {
        let cf = golden(6, Precision::QUAD).unwrap();
        let p = ConditionParams { window: Some((0, 6)), ..ConditionParams::with_s(1.0) };
        assert!(evaluate_condition(ConditionKind::BtildeS, &cf, &p).is_err());
    }

    #[test]
    fn ndim_single_term_at_p0() {
        let p = vec![3u64, 5, 9, 17];
        let om = vec![0.5, 0.25, 0.1, 0.05];
        let v = bruno_s_ndim_functional(&om, &p, 1.0, 3).unwrap();
        assert_eq!(v.kappa, 0);
        assert!((v.sum - 2.0 * (4.0f64).ln() / 3.0).abs() < 1e-15);
        assert!(bruno_s_ndim_functional(&om, &p, 1.0, 2).is_err());
        assert!(matches!(bruno_s_ndim_functional(&om[..2], &p, 1.0, 9), Err(Error::Missing(_))));
    }

    #[test]
    fn condition_names_parse() {
        for k in ConditionKind::ALL {
            assert_eq!(ConditionKind::parse(k.name()).unwrap(), k);
        }
        assert_eq!(ConditionKind::parse("Bprime-s").unwrap(), ConditionKind::BprimeS);
        assert!(ConditionKind::parse("bogus").is_err());
    }
}
