//! Continued fractions and the arithmetic conditions built on them.
//!
//! A number is carried by its partial quotients `[a_0; a_1, ..., a_K]`, never
//! by a float run through the Gauss map. The stored list is completed to an
//! irrational by repeating the last quotient forever, so the Gauss iterates
//! `w_k` and the products `beta_k` are defined for every `k`: the tail
//! `[0; a_K, a_K, ...]` has the closed form `2 / (a_K + sqrt(a_K^2 + 4))`.
//! Presets with period-one expansions (golden mean, sqrt(2) - 1) are
//! therefore represented exactly.
//!
//! Denominators may be astronomically large (factorial-growth quotients), so
//! quotients, numerators and denominators are [`Magnitude`]s and every
//! functional is evaluated in log space.

mod build;
mod conditions;
mod magnitude;
mod modular;

pub use build::{build_quotients, build_quotients_saturating, golden, sqrt2_minus_one, BuildOutcome};
pub use conditions::{
    bruno_s_ndim_functional, dyadic_p_sequence, evaluate_condition, ConditionDiagnostic, ConditionKind,
    ConditionParams, LimitClass, NdimValue, Trend,
};
pub use magnitude::{Magnitude, MagnitudeDoc, EXACT_BITS_CAP};
pub use modular::{modular_act, ModularGenerator};

use rug::{Float, Integer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Precision;

#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    prec: Precision,
    quotients: Vec<Magnitude>,
    numerators: Vec<Magnitude>,
    denominators: Vec<Magnitude>,
    /// -ln w_k for k = 0..=K.
    neg_log_gauss: Vec<Float>,
    /// w_k for k = 0..=K (may underflow to zero for huge quotients).
    gauss: Vec<Float>,
    /// beta_k = w_0 ... w_k, running product, k = 0..=K.
    betas: Vec<Float>,
    /// ln beta_k, k = 0..=K.
    log_betas: Vec<Float>,
}

impl ContinuedFraction {
    pub fn from_u64(quotients: &[u64], prec: Precision) -> Result<Self> {
        Self::new(quotients.iter().map(|&a| Magnitude::from_u64(a)).collect(), prec)
    }

    /// Convergents, Gauss iterates and beta products of `[a_0; a_1, ..., a_K]`.
    pub fn new(quotients: Vec<Magnitude>, prec: Precision) -> Result<Self> {
        if quotients.len() < 3 {
            return Err(Error::InsufficientDepth { needed: 2, depth: quotients.len().saturating_sub(1) });
        }
        for (k, a) in quotients.iter().enumerate().skip(1) {
            if a.is_zero() {
                return Err(Error::InvalidArgument(format!("quotient a_{k} must be positive")));
            }
        }
        if let Some(a0) = quotients[0].exact() {
            if *a0 < 0 {
                return Err(Error::InvalidArgument("a_0 must be nonnegative".into()));
            }
        }
        for a in &quotients {
            if let Some(i) = a.exact() {
                if *i < 0 {
                    return Err(Error::InvalidArgument("quotients must be nonnegative".into()));
                }
            }
        }
        let bits = prec.bits();
        let kmax = quotients.len() - 1;

        // p_{-1} = 1, p_0 = a_0; q_{-1} = 0, q_0 = 1.
        let mut numerators = Vec::with_capacity(kmax + 1);
        let mut denominators = Vec::with_capacity(kmax + 1);
        let (mut p_prev, mut q_prev) = (Magnitude::from_u64(1), Magnitude::from_u64(0));
        let (mut p_cur, mut q_cur) = (quotients[0].clone(), Magnitude::from_u64(1));
        numerators.push(p_cur.clone());
        denominators.push(q_cur.clone());
        for a in &quotients[1..] {
            let p_next = Magnitude::mul_add(a, &p_cur, &p_prev, prec);
            let q_next = Magnitude::mul_add(a, &q_cur, &q_prev, prec);
            p_prev = std::mem::replace(&mut p_cur, p_next);
            q_prev = std::mem::replace(&mut q_cur, q_next);
            numerators.push(p_cur.clone());
            denominators.push(q_cur.clone());
        }

        // Backward sweep for the Gauss iterates. inv = 1/w_k, nl = ln(1/w_k).
        let mut neg_log_gauss = vec![Float::new(bits); kmax + 1];
        let mut gauss = vec![Float::new(bits); kmax + 1];
        let last = &quotients[kmax];
        let (mut inv, mut nl) = match last {
            Magnitude::Exact(a) => {
                let a = Float::with_val(bits, a);
                // 1/t = (a + sqrt(a^2 + 4)) / 2, ln(1/t) = asinh(a/2)
                let disc = Float::with_val(bits, a.square_ref()) + 4u32;
                let inv = Float::with_val(bits, &a + disc.sqrt()) / 2u32;
                let nl = Float::with_val(bits, &a / 2u32).asinh();
                (inv, nl)
            }
            Magnitude::Log(l) => {
                let l = Float::with_val(bits, l);
                (Float::with_val(bits, l.exp_ref()), l)
            }
        };
        gauss[kmax] = Float::with_val(bits, inv.recip_ref());
        neg_log_gauss[kmax] = nl.clone();
        for k in (0..kmax).rev() {
            let w_next = &gauss[k + 1];
            match &quotients[k + 1] {
                Magnitude::Exact(a) => {
                    inv = Float::with_val(bits, a) + w_next;
                    nl = Float::with_val(bits, inv.ln_ref());
                }
                Magnitude::Log(l) => {
                    let l = Float::with_val(bits, l);
                    // ln(a + w) = ln a + ln1p(w / a)
                    let corr = Float::with_val(bits, w_next * Float::with_val(bits, -&l).exp()).ln_1p();
                    nl = l + corr;
                    inv = Float::with_val(bits, nl.exp_ref());
                }
            }
            gauss[k] = Float::with_val(bits, inv.recip_ref());
            neg_log_gauss[k] = nl.clone();
        }

        let mut betas = Vec::with_capacity(kmax + 1);
        let mut log_betas = Vec::with_capacity(kmax + 1);
        let mut b = Float::with_val(bits, 1u32);
        let mut lb = Float::new(bits);
        for k in 0..=kmax {
            b *= &gauss[k];
            lb -= &neg_log_gauss[k];
            betas.push(b.clone());
            log_betas.push(lb.clone());
        }

        Ok(ContinuedFraction { prec, quotients, numerators, denominators, neg_log_gauss, gauss, betas, log_betas })
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Rebuild at a different precision.
    pub fn at_precision(&self, prec: Precision) -> Result<Self> {
        Self::new(self.quotients.clone(), prec)
    }

    /// Index K of the last stored quotient.
    pub fn depth(&self) -> usize {
        self.quotients.len() - 1
    }

    pub fn quotients(&self) -> &[Magnitude] {
        &self.quotients
    }

    pub fn quotient(&self, k: usize) -> &Magnitude {
        &self.quotients[k]
    }

    pub fn numerator(&self, k: usize) -> &Magnitude {
        &self.numerators[k]
    }

    pub fn denominator(&self, k: usize) -> &Magnitude {
        &self.denominators[k]
    }

    pub fn denominators(&self) -> &[Magnitude] {
        &self.denominators
    }

    /// Exact denominators q_0..q_K when none is log-stored.
    pub fn exact_denominators(&self) -> Option<Vec<Integer>> {
        self.denominators.iter().map(|q| q.exact().cloned()).collect()
    }

    /// w_k, the k-th Gauss iterate of the fractional part.
    pub fn gauss_iterate(&self, k: usize) -> Float {
        if k <= self.depth() {
            self.gauss[k].clone()
        } else {
            self.gauss[self.depth()].clone()
        }
    }

    /// -ln w_k.
    pub fn neg_log_gauss(&self, k: usize) -> Float {
        self.neg_log_gauss[k.min(self.depth())].clone()
    }

    /// beta_k for k >= -1 (pass `None` for k = -1).
    pub fn beta(&self, k: Option<usize>) -> Result<Float> {
        match k {
            None => Ok(Float::with_val(self.prec.bits(), 1u32)),
            Some(k) => self.betas.get(k).cloned().ok_or(Error::InsufficientDepth { needed: k, depth: self.depth() }),
        }
    }

    /// ln beta_k for k >= -1.
    pub fn log_beta(&self, k: Option<usize>) -> Result<Float> {
        match k {
            None => Ok(Float::new(self.prec.bits())),
            Some(k) => {
                self.log_betas.get(k).cloned().ok_or(Error::InsufficientDepth { needed: k, depth: self.depth() })
            }
        }
    }

    /// The represented irrational number `a_0 + w_0`.
    pub fn value(&self) -> Float {
        let a0 = self.quotients[0].to_float(self.prec);
        a0 + &self.gauss[0]
    }

    /// Fractional part w_0 (the rotation number when a_0 = 0).
    pub fn fractional(&self) -> Float {
        self.gauss[0].clone()
    }

    /// ln q_{j+1} / q_j.
    pub fn bruno_term(&self, j: usize) -> Result<Float> {
        if j + 1 > self.depth() {
            return Err(Error::InsufficientDepth { needed: j + 1, depth: self.depth() });
        }
        let bits = self.prec.bits();
        let ln_next = self.denominators[j + 1].ln(self.prec);
        Ok(match &self.denominators[j] {
            Magnitude::Exact(q) => ln_next / Float::with_val(bits, q),
            Magnitude::Log(l) => {
                if ln_next.is_zero() {
                    Float::new(bits)
                } else {
                    Float::with_val(bits, ln_next.ln() - l).exp()
                }
            }
        })
    }

    /// Sum_{j=0}^{k} ln q_{j+1} / q_j.
    pub fn bruno_partial_sum(&self, k: usize) -> Result<Float> {
        let mut acc = Float::new(self.prec.bits());
        for j in 0..=k {
            acc += self.bruno_term(j)?;
        }
        Ok(acc)
    }

    /// The index k(n) with q_k <= n < q_{k+1}.
    pub fn index_of(&self, n: u64) -> Result<usize> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let mut found = None;
        for k in 0..self.depth() {
            let lo = !self.denominators[k].ge_u64(n + 1);
            let hi = self.denominators[k + 1].ge_u64(n + 1);
            if lo && hi {
                found = Some(k);
            }
        }
        found.ok_or(Error::InsufficientDepth { needed: self.depth() + 1, depth: self.depth() })
    }

    /// Sum_{j=0}^{k(n)} ln q_{j+1}/q_j - s ln n.
    pub fn bruno_functional(&self, s: f64, n: u64) -> Result<BrunoValue> {
        let k = self.index_of(n)?;
        let sum = self.bruno_partial_sum(k)?.to_f64();
        Ok(BrunoValue { n, k, partial_sum: sum, value: sum - s * (n as f64).ln() })
    }

    /// Sum_{j=0}^{k} beta_{j-1} ln(1/w_j) + s ln beta_{k-1}.
    pub fn beta_functional(&self, s: f64, k: usize) -> Result<f64> {
        if k > self.depth().saturating_sub(1) {
            return Err(Error::InsufficientDepth { needed: k + 1, depth: self.depth() });
        }
        let bits = self.prec.bits();
        let mut acc = Float::new(bits);
        for j in 0..=k {
            let lb = self.log_beta(j.checked_sub(1))?;
            // beta_{j-1} ln(1/w_j) evaluated as exp(ln beta + ln ln(1/w_j))
            let term = Float::with_val(bits, lb + Float::with_val(bits, self.neg_log_gauss[j].ln_ref())).exp();
            acc += term;
        }
        let tail = Float::with_val(bits, self.log_beta(k.checked_sub(1))? * s);
        Ok((acc + tail).to_f64())
    }

    pub fn summary(&self) -> CfSummary {
        CfSummary {
            depth: self.depth(),
            quotients: self.quotients.iter().map(Magnitude::to_doc).collect(),
            denominators: self.denominators.iter().map(Magnitude::to_doc).collect(),
            value: self.value().to_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrunoValue {
    pub n: u64,
    pub k: usize,
    pub partial_sum: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfSummary {
    pub depth: usize,
    pub quotients: Vec<MagnitudeDoc>,
    pub denominators: Vec<MagnitudeDoc>,
    pub value: f64,
}
