//! Truncated linearizations, their remainder `R_N = H_N o F - R_A o H_N`, and
//! summation at the smallest term.
//!
//! The remainder envelope is
//!
//! ```text
//! |R_N(z)| <= A3 B3^{-sN} N!^s (|z|/r)^{N+1},      |z| < r/2,
//! ```
//!
//! fitted to measured sup norms. Stirling's bound `N! <= e sqrt(N) (N/e)^N`
//! turns it into `A4 (N B4^{-1} (|z|/r)^{1/s})^{Ns} e^{-sN}` with `B4 = B3`,
//! minimised near `N = B4 (r/|z|)^{1/s}`.

use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearizer::GermSpec;
use crate::numeric::{self, Precision};
use crate::series::{compose, FormalSeries};

/// `H_N o F - R_A o H_N` through degree `out_order`.
pub fn remainder_series(h_n: &FormalSeries, germ: &GermSpec, out_order: u32) -> Result<FormalSeries> {
    if !h_n.is_tangent_to_identity() {
        return Err(Error::NotTangentToIdentity);
    }
    if h_n.dim() != germ.dim() {
        return Err(Error::DimensionMismatch { expected: germ.dim(), found: h_n.dim() });
    }
    let n = h_n.max_degree().max(1);
    if out_order <= n {
        return Err(Error::InvalidArgument(format!("output order {out_order} must exceed the truncation order {n}")));
    }
    let prec = h_n.precision().max(germ.precision());
    let h = h_n.with_precision(prec).with_order(out_order);
    let germ = germ.with_precision(prec)?;
    let map = germ.map_series(out_order)?;
    let lin = germ.linear_part(out_order)?;
    compose(&h, &map, out_order)?.sub(&compose(&lin, &h, out_order)?)
}

/// Degree of the polynomial `H_N o F`, which bounds every nonzero remainder term.
pub fn exact_remainder_order(n: u32, germ: &GermSpec) -> u32 {
    n.max(1) * germ.nonlinear().max_degree().max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub radius: f64,
    pub points: usize,
    /// Largest `max_j |R_j(z)|` over the torus grid.
    pub sup_grid: f64,
    /// `max_j sum_alpha |r_{j,alpha}| radius^|alpha|`, rounded upward.
    pub sup_coeffsum: f64,
}

/// Phases of the torus grid: `k / M` in one variable; for `n > 1` the
/// Kronecker sequence `frac(k sqrt(p_i))` over the first primes `p_i`.
pub fn torus_phases(n: usize, per_dim: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let total = per_dim.saturating_pow(n as u32).min(1 << 16).max(per_dim);
    (0..total)
        .map(|k| {
            if n == 1 {
                vec![k as f64 / total as f64]
            } else {
                (0..n)
                    .map(|i| {
                        let g = (PRIMES[i % PRIMES.len()] as f64).sqrt().fract();
                        ((k as f64 + 0.5) * g).fract()
                    })
                    .collect()
            }
        })
        .collect()
}

/// Point `radius e^{2 pi i theta_i}` at the given precision.
pub fn torus_point(radius: f64, phases: &[f64], prec: Precision) -> Vec<Complex> {
    phases
        .iter()
        .map(|&t| {
            let u = numeric::unit_from_rotation(prec, &Float::with_val(prec.bits(), t));
            u * Float::with_val(prec.bits(), radius)
        })
        .collect()
}

/// Max-norm of `v`.
pub fn max_norm(v: &[Complex]) -> Float {
    v.iter().map(numeric::modulus).fold(Float::new(53), |a, b| if b > a { b } else { a })
}

/// Sup of `|R|` on the torus `|z_i| = radius` plus the coefficient-sum bound.
pub fn remainder_sup(r: &FormalSeries, radius: f64, samples: usize) -> Result<SupEstimate> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::Domain(format!("radius must lie in (0, 1/2), got {radius}")));
    }
    if samples < 64 {
        return Err(Error::Domain(format!("need at least 64 samples per torus dimension, got {samples}")));
    }
    let prec = r.precision();
    let phases = torus_phases(r.dim(), samples);
    let values: Vec<f64> = phases
        .par_iter()
        .map(|ph| {
            let z = torus_point(radius, ph, prec);
            r.evaluate(&z).map(|v| max_norm(&v).to_f64())
        })
        .collect::<Result<Vec<_>>>()?;
    let sup_grid = values.into_iter().fold(0.0, f64::max);
    let rad = Float::with_val(prec.bits(), radius);
    let mut bound = Float::new(prec.bits());
    let mut terms = 0usize;
    for j in 0..r.dim() {
        let mut acc = Float::new(prec.bits());
        for (a, v) in r.component(j) {
            acc += numeric::modulus(v) * Float::with_val(prec.bits(), rug::ops::Pow::pow(&rad, a.degree()));
            terms += 1;
        }
        if acc > bound {
            bound = acc;
        }
    }
    // cover the rounding of both sums
    let slack = 1.0 + 8.0 * (terms as f64 + 8.0) * prec.unit_roundoff();
    Ok(SupEstimate { radius, points: phases.len(), sup_grid, sup_coeffsum: bound.to_f64() * slack })
}

/// Measured sup norm of `R_N` at one probe radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSample {
    pub order: u32,
    pub probe: f64,
    pub sup_grid: f64,
    pub sup_coeffsum: f64,
    /// Largest coefficient of degree at most N relative to the largest overall.
    pub low_order_ratio: f64,
}

/// Remainder sup norms for each truncation order of `h`.
pub fn truncation_sweep(
    h: &FormalSeries,
    germ: &GermSpec,
    orders: &[u32],
    probe: f64,
    samples: usize,
) -> Result<Vec<TruncationSample>> {
    orders
        .par_iter()
        .map(|&n| {
            let h_n = h.truncate(n);
            let out = exact_remainder_order(n, germ).max(n + 1);
            let r = remainder_series(&h_n, germ, out)?;
            let sup = remainder_sup(&r, probe, samples)?;
            let overall = r.max_abs();
            let low = r.max_abs_in(1, n);
            Ok(TruncationSample {
                order: n,
                probe,
                sup_grid: sup.sup_grid,
                sup_coeffsum: sup.sup_coeffsum,
                low_order_ratio: if overall > 0.0 { low / overall } else { 0.0 },
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationFit {
    /// Cauchy radius `r`; probes lie inside `r/2`.
    pub r: f64,
    pub s: f64,
    pub samples: Vec<TruncationSample>,
    pub a3: f64,
    pub b3: f64,
    pub ln_a3: f64,
    pub ln_b3: f64,
    /// Least-squares residuals before `A3` was inflated.
    pub residuals: Vec<f64>,
    pub a4: f64,
    pub b4: f64,
    /// Radius used in the optimal-order formula; taken equal to `r`.
    pub r_star: f64,
}

fn gevrey_scale(s: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Fit `(A3, B3)` to remainder samples, inflate `A3` into a valid envelope,
/// and derive `B4 = B3` and `A4`.
pub fn fit_envelope(samples: &[TruncationSample], r: f64, s: f64) -> Result<TruncationFit> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be nonnegative, got {s}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("Cauchy radius must lie in (0, 1), got {r}")));
    }
    let mut orders: Vec<u32> = samples.iter().map(|x| x.order).collect();
    orders.sort_unstable();
    orders.dedup();
    if orders.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 distinct orders, got {}", orders.len())));
    }
    if let Some(bad) = samples.iter().find(|x| x.probe <= 0.0 || x.probe >= r / 2.0) {
        return Err(Error::Domain(format!("probe {} outside (0, r/2)", bad.probe)));
    }
    let used: Vec<&TruncationSample> = samples.iter().filter(|x| x.sup_grid > 0.0).collect();
    if used.len() < 2 {
        return Err(Error::DegenerateFit("remainder samples vanish".into()));
    }
    let e = gevrey_scale(s);
    // y = ln S - s ln N! - (N+1) ln(rho/r) = ln A3 - e N ln B3
    let xs: Vec<f64> = used.iter().map(|x| x.order as f64).collect();
    let ys: Vec<f64> = used
        .iter()
        .map(|x| {
            x.sup_grid.ln() - s * numeric::ln_factorial(x.order as u64) - (x.order as f64 + 1.0) * (x.probe / r).ln()
        })
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all nonzero samples share one order".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let ln_a3 = intercept + worst + 1e-12 * (1.0 + intercept.abs());
    let ln_b3 = -slope / e;
    let b4 = ln_b3.exp();
    let rho_max = used.iter().map(|x| x.probe).fold(0.0, f64::max);
    let n_max = orders.last().copied().unwrap_or(40).max(40);
    let stirling = (1..=n_max)
        .map(|k| s * (numeric::ln_factorial(k as u64) - k as f64 * (k as f64 / std::f64::consts::E).ln()))
        .fold(f64::NEG_INFINITY, f64::max);
    let ln_a4 = s + ln_a3 + (rho_max / r).ln() + stirling;
    Ok(TruncationFit {
        r,
        s,
        samples: samples.to_vec(),
        a3: ln_a3.exp(),
        b3: b4,
        ln_a3,
        ln_b3,
        residuals,
        a4: ln_a4.exp(),
        b4,
        r_star: r,
    })
}

impl TruncationFit {
    /// `ln(A3 B3^{-sN} N!^s (|z|/r)^{N+1})`.
    pub fn envelope_ln(&self, order: u32, z_abs: f64) -> f64 {
        self.ln_a3 - gevrey_scale(self.s) * order as f64 * self.ln_b3
            + self.s * numeric::ln_factorial(order as u64)
            + (order as f64 + 1.0) * (z_abs / self.r).ln()
    }

    /// Every sample lies under the envelope.
    pub fn holds(&self) -> bool {
        self.samples.iter().filter(|x| x.sup_grid > 0.0).all(|x| x.sup_grid.ln() <= self.envelope_ln(x.order, x.probe))
    }

    /// Order in `lo..=hi` minimising the envelope at `|z|`; ties go to the smaller order.
    pub fn argmin_order(&self, z_abs: f64, lo: u32, hi: u32) -> u32 {
        let mut best = (lo, f64::INFINITY);
        for n in lo..=hi {
            let v = self.envelope_ln(n, z_abs);
            if v < best.1 {
                best = (n, v);
            }
        }
        best.0
    }

    /// `A4 exp(-s B4 (r*/|z|)^{1/s})`, the bound at the optimal order.
    pub fn smallest_term_bound(&self, z_abs: f64) -> f64 {
        let y = (self.r_star / z_abs).powf(1.0 / self.s);
        self.a4 * (-self.s * self.b4 * y).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalOrder {
    pub n_bar: u32,
    /// `B4 (r*/|z|)^{1/s}` before flooring.
    pub raw: f64,
    /// Set when the formula gave less than 2.
    pub clamped: bool,
}

/// `N = floor(B4 (r*/|z|)^{1/s})`, clamped below at 2.
pub fn optimal_truncation(r_star: f64, z_abs: f64, s: f64, b4: f64) -> Result<OptimalOrder> {
    if !(z_abs > 0.0 && z_abs < r_star && r_star < 0.5) {
        return Err(Error::Domain(format!("need 0 < |z| < r* < 1/2, got |z| = {z_abs}, r* = {r_star}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if !(b4 > 0.0) || !b4.is_finite() {
        return Err(Error::Domain(format!("B4 must be positive, got {b4}")));
    }
    let raw = b4 * (r_star / z_abs).powf(1.0 / s);
    // a few ulps of tolerance so that exact integers are not floored down
    let fl = (raw * (1.0 + 4.0 * f64::EPSILON)).floor();
    let n = if fl > u32::MAX as f64 { u32::MAX } else { fl as u32 };
    Ok(OptimalOrder { n_bar: n.max(2), raw, clamped: n < 2 })
}
