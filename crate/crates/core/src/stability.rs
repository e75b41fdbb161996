//! Orbit experiments and stability-horizon predictors.
//!
//! Norms on `C^n` are max-norms over components, so "radius" always means a
//! polydisk radius. Jacobian norms are the induced row-sum norms.

use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::cf::{ContinuedFraction, MagnitudeDoc};
use crate::error::{Error, Result};
use crate::linearizer::GermSpec;
use crate::numeric::{self, Precision};
use crate::series::{FormalSeries, PolyEvaluator};
use crate::truncator::{torus_phases, torus_point};

/// Parameters of `mu_{j+1} = mu_j + a exp(-b / mu_j^alpha)`, `mu_0 = R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl IterationParams {
    pub fn new(r: f64, a: f64, b: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("R", r), ("a", a), ("b", b), ("alpha", alpha)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(IterationParams { r, a, b, alpha })
    }

    /// `ln(R/a) + b / (2R)^alpha`.
    pub fn ln_horizon(&self) -> f64 {
        (self.r / self.a).ln() + self.b / (2.0 * self.r).powf(self.alpha)
    }

    /// `K = floor(R a^{-1} exp(b / (2R)^alpha))`, saturating at `u64::MAX`.
    pub fn horizon(&self) -> u64 {
        let k = self.ln_horizon().exp().floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSequence {
    pub params: IterationParams,
    pub k: u64,
    /// `mu_0 .. mu_steps`.
    pub mu: Vec<f64>,
    /// `R + j a exp(-b/(2R)^alpha)`.
    pub bound: Vec<f64>,
    /// Set if the sequence left the finite range and was cut short.
    pub overflow: bool,
}

/// The recurrence of the iteration lemma together with its linear bound.
pub fn iterate_mu(params: IterationParams, steps: usize) -> Result<MuSequence> {
    if steps < 1 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let inc = params.a * (-params.b / (2.0 * params.r).powf(params.alpha)).exp();
    let mut mu = Vec::with_capacity(steps + 1);
    let mut bound = Vec::with_capacity(steps + 1);
    let mut m = params.r;
    let mut overflow = false;
    for j in 0..=steps {
        if !m.is_finite() {
            overflow = true;
            break;
        }
        mu.push(m);
        bound.push(params.r + j as f64 * inc);
        m += params.a * (-params.b / m.powf(params.alpha)).exp();
    }
    Ok(MuSequence { params, k: params.horizon(), mu, bound, overflow })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub max_iter: u64,
    pub escape_radius: f64,
    pub precision: Precision,
    /// Keep every `stride`-th point of the trajectory; 0 keeps none.
    pub stride: u64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { max_iter: 10_000_000, escape_radius: 0.5, precision: Precision::QUAD, stride: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub z0: Vec<[f64; 2]>,
    pub iterations: u64,
    /// First `m` with `|z_m| > escape_radius`.
    pub escape_time: Option<u64>,
    /// No escape within `max_iter`.
    pub censored: bool,
    pub overflow: bool,
    pub max_abs: f64,
    pub final_abs: f64,
    /// `(m, z_m)` every `stride` steps, plus the last point.
    pub trajectory: Vec<(u64, Vec<[f64; 2]>)>,
}

/// Iterates `F` at fixed precision with preallocated buffers.
pub struct MapStepper {
    eval: PolyEvaluator,
    lambdas: Vec<Complex>,
    buf: Vec<Complex>,
}

impl MapStepper {
    pub fn new(germ: &GermSpec, prec: Precision) -> Result<Self> {
        let g = germ.with_precision(prec)?;
        let eval = PolyEvaluator::new(g.nonlinear());
        let lambdas = g.multipliers().lambdas().to_vec();
        let buf = vec![numeric::zero(prec); g.dim()];
        Ok(MapStepper { eval, lambdas, buf })
    }

    /// `z <- F(z)`.
    pub fn step(&mut self, z: &mut [Complex]) {
        self.eval.eval_into(z, &mut self.buf);
        for ((zi, b), l) in z.iter_mut().zip(&self.buf).zip(&self.lambdas) {
            *zi *= l;
            *zi += b;
        }
    }
}

fn abs_f64(z: &Complex) -> f64 {
    z.real().to_f64().hypot(z.imag().to_f64())
}

fn max_abs_f64(z: &[Complex]) -> f64 {
    z.iter().map(abs_f64).fold(0.0, f64::max)
}

fn to_pairs(z: &[Complex]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.real().to_f64(), c.imag().to_f64()]).collect()
}

/// `F^m(z0)` until escape, the iteration cap, or overflow.
pub fn orbit(germ: &GermSpec, z0: &[Complex], opts: &OrbitOptions) -> Result<OrbitRecord> {
    if z0.len() != germ.dim() {
        return Err(Error::DimensionMismatch { expected: germ.dim(), found: z0.len() });
    }
    if opts.max_iter < 1 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let r0 = max_abs_f64(z0);
    if !(r0 < germ.radius()) {
        return Err(Error::Domain(format!("|z0| = {r0} is outside the domain radius {}", germ.radius())));
    }
    let prec = opts.precision;
    let mut stepper = MapStepper::new(germ, prec)?;
    let mut z: Vec<Complex> = z0.iter().map(|c| numeric::with_prec(c, prec)).collect();
    let mut trajectory = Vec::new();
    if opts.stride > 0 {
        trajectory.push((0, to_pairs(&z)));
    }
    let mut max_abs = r0;
    let mut escape_time = None;
    let mut overflow = false;
    let mut m = 0u64;
    while m < opts.max_iter {
        stepper.step(&mut z);
        m += 1;
        let a = max_abs_f64(&z);
        if !a.is_finite() {
            overflow = true;
            break;
        }
        max_abs = max_abs.max(a);
        if opts.stride > 0 && m.is_multiple_of(opts.stride) {
            trajectory.push((m, to_pairs(&z)));
        }
        if a > opts.escape_radius {
            escape_time = Some(m);
            break;
        }
    }
    if opts.stride > 0 && trajectory.last().map(|t| t.0) != Some(m) {
        trajectory.push((m, to_pairs(&z)));
    }
    Ok(OrbitRecord {
        z0: to_pairs(z0),
        iterations: m,
        escape_time,
        censored: escape_time.is_none() && !overflow,
        overflow,
        max_abs,
        final_abs: max_abs_f64(&z),
        trajectory,
    })
}

/// Constants of the drift bound `|rho(F z) - rho(z)| <= A* exp(-s B* (r*/rho)^{1/s})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftConstants {
    pub a_star: f64,
    pub b_star: f64,
    pub r_star: f64,
    pub s: f64,
}

impl DriftConstants {
    /// `A* = A4`, `B* = B4 J2^{-1/s}`.
    pub fn from_fit(a4: f64, b4: f64, j2: f64, r_star: f64, s: f64) -> Self {
        DriftConstants { a_star: a4, b_star: b4 * j2.powf(-1.0 / s), r_star, s }
    }

    pub fn bound(&self, rho: f64) -> f64 {
        self.a_star * (-self.s * self.b_star * (self.r_star / rho).powf(1.0 / self.s)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    /// `rho_m = |H_N(F^m z0)|`, m = 0..=steps.
    pub rho: Vec<f64>,
    /// `|rho_{m+1} - rho_m|`.
    pub drift: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<f64>>,
    /// Largest drift / bound ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    /// `max_m |rho_m - rho_0|`.
    pub total_drift: f64,
    pub steps: u64,
}

/// Drift of `rho = |H_N|` along the orbit of `z0` for `m` steps.
pub fn rho_drift(
    h_n: &FormalSeries,
    germ: &GermSpec,
    z0: &[Complex],
    m: u64,
    constants: Option<DriftConstants>,
    prec: Precision,
) -> Result<DriftRecord> {
    if h_n.dim() != germ.dim() || z0.len() != germ.dim() {
        return Err(Error::DimensionMismatch { expected: germ.dim(), found: h_n.dim().min(z0.len()) });
    }
    let mut stepper = MapStepper::new(germ, prec)?;
    let mut h_eval = PolyEvaluator::new(&h_n.with_precision(prec));
    let mut hz = vec![numeric::zero(prec); germ.dim()];
    let mut z: Vec<Complex> = z0.iter().map(|c| numeric::with_prec(c, prec)).collect();
    let mut rho = Vec::with_capacity(m as usize + 1);
    h_eval.eval_into(&z, &mut hz);
    rho.push(max_abs_f64(&hz));
    for step in 0..m {
        stepper.step(&mut z);
        let a = max_abs_f64(&z);
        if !a.is_finite() || a >= germ.radius() {
            return Err(Error::Numeric(format!("orbit left the domain after {} steps", step + 1)));
        }
        h_eval.eval_into(&z, &mut hz);
        rho.push(max_abs_f64(&hz));
    }
    let drift: Vec<f64> = rho.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let total_drift = rho.iter().map(|r| (r - rho[0]).abs()).fold(0.0, f64::max);
    let (bound, max_ratio) = match constants {
        Some(c) => {
            let b: Vec<f64> = rho[..rho.len() - 1].iter().map(|&r| c.bound(r)).collect();
            let ratio = drift.iter().zip(&b).map(|(d, b)| d / b).fold(0.0, f64::max);
            (Some(b), Some(ratio))
        }
        None => (None, None),
    };
    Ok(DriftRecord { rho, drift, bound, max_ratio, total_drift, steps: m })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionOptions {
    /// Grid points per torus dimension.
    pub grid: usize,
    /// Invertibility test: `|DH - I| <= 1 - margin`, which makes `H` injective.
    pub margin: f64,
    pub bisection_steps: u32,
}

impl Default for DistortionOptions {
    fn default() -> Self {
        DistortionOptions { grid: 64, margin: 1e-3, bisection_steps: 40 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub r1: f64,
    pub j1: f64,
    pub r2: f64,
    pub j2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_double_star: Option<f64>,
    pub margin: f64,
    /// Smallest `|det DH|` on the torus of radius `r1`.
    pub min_det: f64,
    pub grid_points: usize,
    /// Preimages for which Newton's method did not converge.
    pub newton_failures: usize,
}

type Matrix = Vec<Vec<Complex>>;

fn row_sum_norm(m: &Matrix) -> f64 {
    m.iter().map(|row| row.iter().map(abs_f64).sum::<f64>()).fold(0.0, f64::max)
}

/// Determinant and inverse by Gauss-Jordan with partial pivoting.
fn det_and_inverse(m: &Matrix, prec: Precision) -> (Complex, Option<Matrix>) {
    let n = m.len();
    let mut a = m.clone();
    let mut inv: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { numeric::one(prec) } else { numeric::zero(prec) }).collect())
        .collect();
    let mut det = numeric::one(prec);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| abs_f64(&a[x][col]).total_cmp(&abs_f64(&a[y][col]))).expect("nonempty");
        if a[piv][col].is_zero() {
            return (numeric::zero(prec), None);
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        let pinv = Complex::with_val(prec.bits(), p.recip_ref());
        for k in 0..n {
            a[col][k] *= &pinv;
            inv[col][k] *= &pinv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for k in 0..n {
                let t = Complex::with_val(prec.bits(), &f * &a[col][k]);
                a[r][k] -= t;
                let t = Complex::with_val(prec.bits(), &f * &inv[col][k]);
                inv[r][k] -= t;
            }
        }
    }
    (det, Some(inv))
}

/// `sup |DH - I|` over the torus of the given radius. Entries are analytic,
/// so the row-sum norm peaks on the distinguished boundary and grows with it.
fn defect_norm_on_torus(h: &FormalSeries, radius: f64, phases: &[Vec<f64>]) -> Result<f64> {
    let prec = h.precision();
    let vals = phases
        .par_iter()
        .map(|ph| {
            let z = torus_point(radius, ph, prec);
            let mut jac = h.jacobian(&z)?;
            for (i, row) in jac.iter_mut().enumerate() {
                row[i] -= 1;
            }
            Ok(row_sum_norm(&jac))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Solve `H(z) = target` by Newton continuation along `t target`, t in (0, 1].
fn newton_preimage(h: &FormalSeries, target: &[Complex]) -> Result<Option<Vec<Complex>>> {
    let prec = h.precision();
    let n = target.len();
    let mut z: Vec<Complex> = target.iter().map(|c| numeric::with_prec(c, prec)).collect();
    let steps = 16;
    let tol = 1e-13_f64.max(64.0 * prec.unit_roundoff());
    for s in 1..=steps {
        let t = Float::with_val(prec.bits(), s) / steps;
        let goal: Vec<Complex> = target.iter().map(|c| Complex::with_val(prec.bits(), c * &t)).collect();
        let mut converged = false;
        for _ in 0..60 {
            let hz = h.evaluate(&z)?;
            let res: Vec<Complex> = hz.iter().zip(&goal).map(|(a, b)| Complex::with_val(prec.bits(), a - b)).collect();
            let res_norm = max_abs_f64(&res);
            if !res_norm.is_finite() {
                return Ok(None);
            }
            if res_norm <= tol * (1.0 + max_abs_f64(&goal)) {
                converged = true;
                break;
            }
            let (_, inv) = det_and_inverse(&h.jacobian(&z)?, prec);
            let Some(inv) = inv else { return Ok(None) };
            for i in 0..n {
                let mut delta = numeric::zero(prec);
                for k in 0..n {
                    delta += Complex::with_val(prec.bits(), &inv[i][k] * &res[k]);
                }
                z[i] -= delta;
            }
        }
        if !converged {
            return Ok(None);
        }
    }
    Ok(Some(z))
}

/// Invertibility radius, Jacobian bounds and the radii derived from them.
pub fn distortion_constants(
    h_n: &FormalSeries,
    r1_guess: f64,
    r_star: Option<f64>,
    opts: DistortionOptions,
) -> Result<DistortionReport> {
    if !h_n.is_tangent_to_identity() {
        return Err(Error::NotTangentToIdentity);
    }
    if !(r1_guess > 0.0) || !r1_guess.is_finite() {
        return Err(Error::Domain(format!("r1 guess must be positive, got {r1_guess}")));
    }
    let n = h_n.dim();
    let phases = torus_phases(n, opts.grid);
    let ok = |r: f64| -> Result<bool> { Ok(defect_norm_on_torus(h_n, r, &phases)? <= 1.0 - opts.margin) };
    let r1 = if ok(r1_guess)? {
        r1_guess
    } else {
        let (mut lo, mut hi) = (0.0, r1_guess);
        for _ in 0..opts.bisection_steps {
            let mid = 0.5 * (lo + hi);
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let prec = h_n.precision();
    // row-sum norms of analytic matrices peak on the distinguished boundary
    let j1 = phases
        .par_iter()
        .map(|ph| Ok(row_sum_norm(&h_n.jacobian(&torus_point(r1, ph, prec))?)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let min_det = phases
        .par_iter()
        .map(|ph| Ok(abs_f64(&det_and_inverse(&h_n.jacobian(&torus_point(r1, ph, prec))?, prec).0)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let r2 = j1 * r1;
    let inv_norms: Vec<Option<f64>> = phases
        .par_iter()
        .map(|ph| {
            let target = torus_point(r2, ph, prec);
            Ok(match newton_preimage(h_n, &target)? {
                Some(z) => det_and_inverse(&h_n.jacobian(&z)?, prec).1.map(|inv| row_sum_norm(&inv)),
                None => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let newton_failures = inv_norms.iter().filter(|x| x.is_none()).count();
    let j2 = inv_norms.iter().flatten().cloned().fold(0.0, f64::max);
    Ok(DistortionReport {
        r1,
        j1,
        r2,
        j2,
        r_star,
        r_double_star: r_star.map(|r| r.min(r1)),
        margin: opts.margin,
        min_det,
        grid_points: phases.len(),
        newton_failures,
    })
}

/// Horizon `K* = floor(A**^{-1} exp(B** (r**/|z0|)^{1/s}))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityHorizon {
    pub a_double_star: f64,
    pub b_double_star: f64,
    pub c_double_star: f64,
    pub r_double_star: f64,
    pub s: f64,
    pub z0_abs: f64,
    pub ln_k_star: f64,
    /// `None` when `K*` exceeds `u64`.
    pub k_star: Option<u64>,
    /// Orbit confinement radius `C** r**`.
    pub confinement: f64,
}

fn floor_exp(ln: f64) -> Option<u64> {
    let v = ln.exp().floor();
    (v < u64::MAX as f64).then_some(v.max(0.0) as u64)
}

pub fn stability_horizon(
    a_double_star: f64,
    b_double_star: f64,
    c_double_star: f64,
    r_double_star: f64,
    s: f64,
    z0_abs: f64,
) -> Result<StabilityHorizon> {
    for (name, v) in
        [("A**", a_double_star), ("B**", b_double_star), ("r**", r_double_star), ("s", s), ("|z0|", z0_abs)]
    {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let ln_k = -a_double_star.ln() + b_double_star * (r_double_star / z0_abs).powf(1.0 / s);
    Ok(StabilityHorizon {
        a_double_star,
        b_double_star,
        c_double_star,
        r_double_star,
        s,
        z0_abs,
        ln_k_star: ln_k,
        k_star: floor_exp(ln_k),
        confinement: c_double_star * r_double_star,
    })
}

/// `A** = 2 A*/r**`, `B** = B* (r*/(2 r**))^{1/s}`, `C** = J2`.
pub fn stability_horizon_from_measured(
    a_star: f64,
    b_star: f64,
    j2: f64,
    r_star: f64,
    r_double_star: f64,
    s: f64,
    z0_abs: f64,
) -> Result<StabilityHorizon> {
    if !(r_star > 0.0) || !(r_double_star > 0.0) || !(s > 0.0) {
        return Err(Error::Domain("r*, r** and s must be positive".into()));
    }
    let a2 = 2.0 * a_star / r_double_star;
    let b2 = b_star * (r_star / (2.0 * r_double_star)).powf(1.0 / s);
    stability_horizon(a2, b2, j2, r_double_star, s, z0_abs)
}

/// The same horizon read off the iteration lemma with `R = |z0|`, `a = A*`,
/// `b = B* r*^{1/s}`, `alpha = 1/s`:
/// `K = floor(|z0|/A* exp(B* (r*/(2|z0|))^{1/s}))`.
pub fn stability_iteration_params(
    a_star: f64,
    b_star: f64,
    r_star: f64,
    s: f64,
    z0_abs: f64,
) -> Result<IterationParams> {
    if !(s > 0.0) || !(r_star > 0.0) {
        return Err(Error::Domain("r* and s must be positive".into()));
    }
    IterationParams::new(z0_abs, a_star, b_star * r_star.powf(1.0 / s), 1.0 / s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerezMarcoEntry {
    pub k: usize,
    /// `C1 exp(-sum_{j<k} ln q_{j+1}/q_j)`.
    pub r_k: f64,
    pub ln_r_k: f64,
    /// Horizon `q_k`.
    pub q_k: MagnitudeDoc,
    pub ln_q_k: f64,
    /// `C2 exp(-sum ...)`, the radius the orbit stays in.
    pub confinement: f64,
}

/// Radius/horizon pairs for `k` in `k_lo..=k_hi`.
pub fn perez_marco_horizon(
    cf: &ContinuedFraction,
    k_lo: usize,
    k_hi: usize,
    c1: f64,
    c2: f64,
) -> Result<Vec<PerezMarcoEntry>> {
    if !(c1 > 0.0) || !(c2 > 0.0) {
        return Err(Error::Domain("C1 and C2 must be positive".into()));
    }
    if k_hi > cf.depth() || k_lo > k_hi {
        return Err(Error::InsufficientDepth { needed: k_hi, depth: cf.depth() });
    }
    let prec = cf.precision();
    let mut out = Vec::new();
    let mut sum = Float::new(prec.bits());
    for k in 0..=k_hi {
        if k >= k_lo {
            let s = sum.to_f64();
            out.push(PerezMarcoEntry {
                k,
                r_k: c1 * (-s).exp(),
                ln_r_k: c1.ln() - s,
                q_k: cf.denominator(k).to_doc(),
                ln_q_k: cf.denominator(k).ln(prec).to_f64(),
                confinement: c2 * (-s).exp(),
            });
        }
        if k < k_hi {
            sum += cf.bruno_term(k)?;
        }
    }
    Ok(out)
}

/// `ln` of `exp((C3'/r^{1/s}) ln(C4/r^{1/s}))`, the horizon rewritten in `r`.
pub fn perez_marco_rewritten_ln(c3p: f64, c4: f64, r: f64, s: f64) -> f64 {
    let y = r.powf(-1.0 / s);
    c3p * y * (c4 * y).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub phases: usize,
    pub max_iter: u64,
    pub escape_radius: f64,
    pub precision: Precision,
    /// Worker threads; 0 uses the global pool.
    pub cells: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { phases: 8, max_iter: 1_000_000, escape_radius: 0.5, precision: Precision::QUAD, cells: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    /// `(1/r)^{1/s}`.
    pub x: f64,
    /// Median over phases; censored times count as `max_iter`.
    pub t_median: f64,
    pub censored: bool,
    /// Per-phase escape times; `None` when censored.
    pub times: Vec<Option<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub s: f64,
    pub max_iter: u64,
    pub escape_radius: f64,
    pub phases: usize,
    pub precision: u32,
    pub rows: Vec<ScanRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScanFit>,
    /// No fit: fewer than two uncensored rows.
    pub fit_skipped: bool,
}

/// Initial points of modulus `r` in the max-norm, at deterministic phases.
pub fn scan_points(n: usize, r: f64, phases: usize, prec: Precision) -> Vec<Vec<Complex>> {
    let grid: Vec<Vec<f64>> = if n == 1 {
        (0..phases).map(|k| vec![k as f64 / phases as f64]).collect()
    } else {
        torus_phases(n, phases).into_iter().take(phases).collect()
    };
    grid.iter().map(|ph| torus_point(r, ph, prec)).collect()
}

/// Least-squares line `y = intercept + slope x` with its R^2.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<ScanFit> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(ScanFit { slope, intercept: my - slope * mx, r_squared, rows_used: xs.len() })
}

/// Median escape time over phases for each radius, and the regression of
/// `ln T` on `(1/r)^{1/s}` over the uncensored rows.
pub fn escape_scan(germ: &GermSpec, radii: &[f64], s: f64, opts: &ScanOptions) -> Result<ScanReport> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("radius grid is empty".into()));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if opts.phases < 1 {
        return Err(Error::InvalidArgument("need at least one phase".into()));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < germ.radius() && r < opts.escape_radius)) {
        return Err(Error::Domain(format!("radius {r} must lie in (0, min(domain, escape radius))")));
    }
    let cells: Vec<(usize, Vec<Complex>)> = radii
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| scan_points(germ.dim(), r, opts.phases, opts.precision).into_iter().map(move |z| (i, z)))
        .collect();
    let orbit_opts = OrbitOptions {
        max_iter: opts.max_iter,
        escape_radius: opts.escape_radius,
        precision: opts.precision,
        stride: 0,
    };
    let run = || -> Result<Vec<Option<u64>>> {
        cells.par_iter().map(|(_, z)| orbit(germ, z, &orbit_opts).map(|o| o.escape_time)).collect()
    };
    let times = if opts.cells > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.cells)
            .build()
            .map_err(|e| Error::Numeric(e.to_string()))?
            .install(run)?
    } else {
        run()?
    };
    let per = opts.phases;
    let rows: Vec<ScanRow> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let t = times[i * per..(i + 1) * per].to_vec();
            let mut vals: Vec<f64> = t.iter().map(|x| x.map_or(opts.max_iter as f64, |v| v as f64)).collect();
            vals.sort_by(f64::total_cmp);
            let median = if per % 2 == 1 { vals[per / 2] } else { 0.5 * (vals[per / 2 - 1] + vals[per / 2]) };
            let censored_count = t.iter().filter(|x| x.is_none()).count();
            // the median is censored once half or more of the phases are
            let censored = 2 * censored_count >= per;
            ScanRow { r, x: (1.0 / r).powf(1.0 / s), t_median: median, censored, times: t }
        })
        .collect();
    let used: Vec<&ScanRow> = rows.iter().filter(|r| !r.censored && r.t_median > 0.0).collect();
    let xs: Vec<f64> = used.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.t_median.ln()).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(ScanReport {
        s,
        max_iter: opts.max_iter,
        escape_radius: opts.escape_radius,
        phases: opts.phases,
        precision: opts.precision.bits(),
        fit_skipped: fit.is_none(),
        fit,
        rows,
    })
}

/// Radii `r1, r1 + h, ..., r2` for a `r1:r2:steps` grid.
pub fn radius_grid(r1: f64, r2: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 1 {
        return Err(Error::InvalidArgument("grid needs at least one step".into()));
    }
    if steps == 1 {
        return Ok(vec![r1]);
    }
    let m = (steps - 1) as f64;
    Ok((0..steps).map(|i| (r1 * (m - i as f64) + r2 * i as f64) / m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisors::MultiplierSpec;
    use crate::series::MultiIndex;

    #[test]
    fn iteration_lemma_example() {
        let p = IterationParams::new(0.1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.horizon(), 14);
        let seq = iterate_mu(p, 14).unwrap();
        assert!(seq.mu.iter().all(|&m| m <= 0.2));
        assert!(seq.mu.iter().zip(&seq.bound).all(|(m, b)| m <= b));
    }

    #[test]
    fn tiny_increment_keeps_mu_fixed() {
        let p = IterationParams::new(0.3, 1e-300, 1.0, 1.0).unwrap();
        let seq = iterate_mu(p, 50).unwrap();
        assert!(seq.mu.iter().all(|&m| m == 0.3));
    }

    #[test]
    fn linear_orbit_is_isometric() {
        let germ = GermSpec::linear(MultiplierSpec::golden(Precision::QUAD).unwrap()).unwrap();
        let z0 = vec![numeric::from_f64(Precision::QUAD, 0.03, 0.04)];
        let opts = OrbitOptions { max_iter: 10_000, stride: 1000, ..Default::default() };
        let o = orbit(&germ, &z0, &opts).unwrap();
        assert!(o.censored && o.escape_time.is_none());
        assert!((o.final_abs - 0.05).abs() < 1e-10);
        assert_eq!(o.trajectory.len(), 11);
    }

    #[test]
    fn escape_is_first_crossing() {
        let spec =
            MultiplierSpec::from_lambdas(vec![numeric::from_f64(Precision::QUAD, 2.0, 0.0)], Precision::QUAD).unwrap();
        let germ = GermSpec::linear(spec).unwrap();
        let o = orbit(&germ, &[numeric::from_f64(Precision::QUAD, 0.1, 0.0)], &OrbitOptions::default()).unwrap();
        // 0.1 * 2^3 = 0.8 is the first value above 0.5
        assert_eq!(o.escape_time, Some(3));
        assert!(!o.censored);
        assert!(orbit(&germ, &[numeric::from_f64(Precision::QUAD, 1.5, 0.0)], &OrbitOptions::default()).is_err());
    }

    #[test]
    fn distortion_of_identity() {
        let h = FormalSeries::identity(2, 4, Precision::DOUBLE).unwrap();
        let d = distortion_constants(&h, 0.2, Some(0.3), DistortionOptions::default()).unwrap();
        assert_eq!(d.r1, 0.2);
        assert!((d.j1 - 1.0).abs() < 1e-14 && (d.j2 - 1.0).abs() < 1e-14);
        assert_eq!(d.r_double_star, Some(0.2));
    }

    #[test]
    fn distortion_of_quadratic() {
        let mut h = FormalSeries::identity(1, 2, Precision::DOUBLE).unwrap();
        h.set(0, MultiIndex::new(vec![2]), numeric::one(Precision::DOUBLE)).unwrap();
        let d = distortion_constants(&h, 0.1, None, DistortionOptions::default()).unwrap();
        assert_eq!(d.r1, 0.1);
        assert!((d.j1 - 1.2).abs() < 1e-12);
        assert_eq!(d.newton_failures, 0);
        // H^{-1}(t) = (sqrt(1 + 4t) - 1)/2, so |DH^{-1}| peaks at t = -0.12
        let oracle = 1.0 / (1.0f64 - 4.0 * 0.12).sqrt();
        assert!((d.j2 / oracle - 1.0).abs() < 0.01, "{} vs {oracle}", d.j2);
    }

    #[test]
    fn invertibility_radius_shrinks_near_critical_point() {
        let mut h = FormalSeries::identity(1, 2, Precision::DOUBLE).unwrap();
        h.set(0, MultiIndex::new(vec![2]), numeric::one(Precision::DOUBLE)).unwrap();
        let d = distortion_constants(&h, 0.9, None, DistortionOptions::default()).unwrap();
        // |2z| <= 1 - 1e-3 holds up to r = 0.4995
        assert!((d.r1 - 0.4995).abs() < 1e-6, "{}", d.r1);
        assert!(d.min_det >= 1e-3 * (1.0 - 1e-6));
    }

    #[test]
    fn stability_horizon_example() {
        let h = stability_horizon(1.0, 1.0, 1.0, 0.4, 1.0, 0.04).unwrap();
        assert_eq!(h.k_star, Some(22026));
    }

    #[test]
    fn horizon_forms_agree_at_half_radius() {
        let (a, b, rs, s) = (0.5, 2.0, 0.4, 1.0);
        let z = rs / 2.0;
        let spec = stability_horizon_from_measured(a, b, 1.0, rs, rs, s, z).unwrap();
        let lemma = stability_iteration_params(a, b, rs, s, z).unwrap();
        assert!((spec.ln_k_star - lemma.ln_horizon()).abs() < 1e-12);
    }

    #[test]
    fn perez_marco_golden() {
        let cf = crate::cf::golden(10, Precision::QUAD).unwrap();
        let rows = perez_marco_horizon(&cf, 4, 4, 1.0, 1.0).unwrap();
        let e = &rows[0];
        assert_eq!(e.q_k, MagnitudeDoc::Small(5));
        let sum: f64 = [1.0f64, 2.0, 3.0, 5.0].windows(2).map(|w| w[1].ln() / w[0]).sum::<f64>() + 0.0;
        // q_0 = q_1 = 1 contributes ln 1 / 1 = 0
        assert!((e.r_k - (-sum).exp()).abs() < 1e-15);
    }

    #[test]
    fn linear_scan_is_censored() {
        let germ = GermSpec::linear(MultiplierSpec::golden(Precision::DOUBLE).unwrap()).unwrap();
        let opts = ScanOptions { phases: 3, max_iter: 200, precision: Precision::DOUBLE, ..Default::default() };
        let rep = escape_scan(&germ, &[0.1, 0.2], 1.0, &opts).unwrap();
        assert!(rep.rows.iter().all(|r| r.censored));
        assert!(rep.fit_skipped && rep.fit.is_none());
    }

    #[test]
    fn scan_is_deterministic() {
        let germ = GermSpec::quadratic(MultiplierSpec::golden(Precision::DOUBLE).unwrap()).unwrap();
        let opts =
            ScanOptions { phases: 4, max_iter: 2000, precision: Precision::DOUBLE, cells: 3, ..Default::default() };
        let a = escape_scan(&germ, &[0.3, 0.4, 0.45], 1.0, &opts).unwrap();
        let b = escape_scan(&germ, &[0.3, 0.4, 0.45], 1.0, &ScanOptions { cells: 1, ..opts }).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
