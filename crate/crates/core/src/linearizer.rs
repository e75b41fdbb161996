//! Formal linearization of `F(z) = A z + f(z)` and Gevrey diagnostics of the
//! resulting coefficients.
//!
//! Direct mode solves `F o H = H o R_A` for `H = id + h`; matching degree `d`
//! gives
//!
//! ```text
//! h_{j,alpha} (lambda^alpha - lambda_j) = [f_j(H_{<d})]_alpha .
//! ```
//!
//! Inverse mode solves `G o F = R_A o G` for `G = id + g`:
//!
//! ```text
//! g_{j,alpha} (lambda^alpha - lambda_j) = -[G_{<d} o F]_alpha .
//! ```
//!
//! Both right-hand sides involve only coefficients of degree below `d`, so the
//! recursion runs degree by degree and touches each `(j, alpha)` exactly once.

use nalgebra::{DMatrix, DVector};
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::divisors::{MultiplierSpec, RotationDoc};
use crate::error::{Error, Result};
use crate::numeric::{self, Precision};
use crate::series::{compose, enum_indices, FormalSeries, MultiIndex, Num, TermDoc, SCHEMA};

/// An analytic germ `F(z) = A z + f(z)` with `f(0) = 0`, `Df(0) = 0`.
#[derive(Clone, Debug)]
pub struct GermSpec {
    spec: MultiplierSpec,
    f: FormalSeries,
    radius: f64,
    rotation_docs: Option<Vec<RotationDoc>>,
}

impl GermSpec {
    pub fn new(spec: MultiplierSpec, f: FormalSeries, radius: f64) -> Result<Self> {
        if spec.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), found: f.dim() });
        }
        if f.min_degree().is_some_and(|d| d < 2) {
            return Err(Error::InvalidArgument("nonlinear part has terms of degree below 2".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        let f = f.with_precision(spec.precision());
        Ok(GermSpec { spec, f, radius, rotation_docs: None })
    }

    /// `F(z) = lambda z + z^2` in one variable.
    pub fn quadratic(spec: MultiplierSpec) -> Result<Self> {
        if spec.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: spec.dim() });
        }
        let prec = spec.precision();
        let mut f = FormalSeries::zero(1, 2, prec)?;
        f.set(0, MultiIndex::new(vec![2]), numeric::one(prec))?;
        Self::new(spec, f, 1.0)
    }

    /// The linear germ `F = R_A`.
    pub fn linear(spec: MultiplierSpec) -> Result<Self> {
        let f = FormalSeries::zero(spec.dim(), 2, spec.precision())?;
        Self::new(spec, f, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn multipliers(&self) -> &MultiplierSpec {
        &self.spec
    }

    pub fn nonlinear(&self) -> &FormalSeries {
        &self.f
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn precision(&self) -> Precision {
        self.spec.precision()
    }

    pub fn with_precision(&self, prec: Precision) -> Result<Self> {
        Ok(GermSpec {
            spec: self.spec.with_precision(prec)?,
            f: self.f.with_precision(prec),
            radius: self.radius,
            rotation_docs: self.rotation_docs.clone(),
        })
    }

    /// `R_A` as a series of the given order.
    pub fn linear_part(&self, order: u32) -> Result<FormalSeries> {
        FormalSeries::diagonal(self.spec.lambdas(), order, self.precision())
    }

    /// `F = A z + f` as a series of order at least `order`.
    pub fn map_series(&self, order: u32) -> Result<FormalSeries> {
        let order = order.max(self.f.order());
        self.linear_part(order)?.add(&self.f.with_order(order))
    }

    /// `F(z)`.
    pub fn evaluate(&self, z: &[Complex]) -> Result<Vec<Complex>> {
        let mut out = self.f.evaluate(z)?;
        for ((o, l), zi) in out.iter_mut().zip(self.spec.lambdas()).zip(z) {
            *o += Complex::with_val(o.prec().0, l * zi);
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> GermDoc {
        let f = self.f.to_doc();
        let (lambdas, rotations) = match &self.rotation_docs {
            Some(r) => (None, Some(r.clone())),
            None => (
                Some(
                    self.spec
                        .lambdas()
                        .iter()
                        .map(|l| LambdaDoc {
                            re: Num::S(numeric::float_to_string(l.real())),
                            im: Num::S(numeric::float_to_string(l.imag())),
                        })
                        .collect(),
                ),
                None,
            ),
        };
        GermDoc {
            schema: Some(SCHEMA.into()),
            n: self.dim(),
            lambdas,
            rotations,
            f: f.terms,
            radius: Some(self.radius),
            precision: Some(self.precision().bits()),
        }
    }

    pub fn from_doc(doc: &GermDoc, default_prec: Precision) -> Result<Self> {
        let prec = match doc.precision {
            Some(b) => Precision::new(b)?,
            None => default_prec,
        };
        let spec = match (&doc.lambdas, &doc.rotations) {
            (Some(l), None) => {
                let lambdas = l
                    .iter()
                    .map(|x| Ok(Complex::with_val(prec.bits(), (x.re.to_float(prec)?, x.im.to_float(prec)?))))
                    .collect::<Result<Vec<_>>>()?;
                MultiplierSpec::from_lambdas(lambdas, prec)?
            }
            (None, Some(r)) => {
                let rot = r.iter().map(|x| x.to_rotation(prec)).collect::<Result<Vec<_>>>()?;
                MultiplierSpec::from_rotations(rot, prec)?
            }
            _ => return Err(Error::InvalidArgument("germ needs exactly one of lambdas or rotations".into())),
        };
        if spec.dim() != doc.n {
            return Err(Error::DimensionMismatch { expected: doc.n, found: spec.dim() });
        }
        let order = doc.f.iter().map(|t| t.alpha.iter().sum::<u32>()).max().unwrap_or(2).max(2);
        let mut f = FormalSeries::zero(doc.n, order, prec)?;
        for t in &doc.f {
            if t.alpha.len() != doc.n {
                return Err(Error::DimensionMismatch { expected: doc.n, found: t.alpha.len() });
            }
            if t.alpha.iter().sum::<u32>() < 2 {
                return Err(Error::InvalidArgument("nonlinear part has terms of degree below 2".into()));
            }
            let v = Complex::with_val(prec.bits(), (t.re.to_float(prec)?, t.im.to_float(prec)?));
            f.set(t.j, MultiIndex::new(t.alpha.clone()), v)?;
        }
        let mut germ = GermSpec::new(spec, f, doc.radius.unwrap_or(1.0))?;
        germ.rotation_docs = doc.rotations.clone();
        Ok(germ)
    }

    pub fn from_json(text: &str, default_prec: Precision) -> Result<Self> {
        let doc: GermDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc, default_prec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("germ serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaDoc {
    pub re: Num,
    pub im: Num,
}

/// Germ file: `{n, lambdas: [{re, im}] | rotations: [...], f: [terms], radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<LambdaDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotations: Option<Vec<RotationDoc>>,
    pub f: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `F o H = H o R_A`
    Direct,
    /// `G o F = R_A o G`, with `G` the inverse conjugacy
    Inverse,
}

impl Direction {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Direction::Direct),
            "inverse" => Ok(Direction::Inverse),
            other => Err(Error::InvalidArgument(format!("direction must be direct or inverse, got {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Double the precision while some divisor is below the escalation floor.
    pub escalate: bool,
    /// Keep the list of `(j, alpha)` in the order the recursion visits them.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { escalate: true, trace: false }
    }
}

#[derive(Clone, Debug)]
pub struct Linearization {
    pub series: FormalSeries,
    pub direction: Direction,
    pub requested_precision: Precision,
    pub precision: Precision,
    pub escalations: u32,
    pub min_divisor: f64,
    pub min_divisor_alpha: Vec<u32>,
    pub min_divisor_j: usize,
    pub visited: Option<Vec<(usize, MultiIndex)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationSummary {
    pub direction: Direction,
    pub order: u32,
    pub requested_precision: u32,
    pub precision: u32,
    pub escalations: u32,
    pub min_divisor: f64,
    pub min_divisor_alpha: Vec<u32>,
    pub min_divisor_j: usize,
}

impl Linearization {
    pub fn summary(&self) -> LinearizationSummary {
        LinearizationSummary {
            direction: self.direction,
            order: self.series.order(),
            requested_precision: self.requested_precision.bits(),
            precision: self.precision.bits(),
            escalations: self.escalations,
            min_divisor: self.min_divisor,
            min_divisor_alpha: self.min_divisor_alpha.clone(),
            min_divisor_j: self.min_divisor_j,
        }
    }
}

/// All divisors `lambda^alpha - lambda_j` for `2 <= |alpha| <= order`,
/// keyed by degree then graded-lex index then component.
struct DivisorTable {
    by_degree: Vec<Vec<(MultiIndex, Vec<Complex>)>>,
    min: Float,
    argmin: (Vec<u32>, usize),
}

impl DivisorTable {
    fn build(spec: &MultiplierSpec, order: u32) -> Result<Self> {
        let prec = spec.precision();
        let n = spec.dim();
        let powers = crate::series::power_table(spec.lambdas(), order, prec);
        let mut by_degree = vec![Vec::new(); order as usize + 1];
        let mut min = Float::with_val(prec.bits(), rug::float::Special::Infinity);
        let mut argmin = (vec![0; n], 0);
        for d in 2..=order {
            for alpha in enum_indices(n, d) {
                let mut p = numeric::one(prec);
                for (i, &e) in alpha.entries().iter().enumerate() {
                    if e > 0 {
                        p *= &powers[i][e as usize];
                    }
                }
                let divs: Vec<Complex> =
                    (0..n).map(|j| Complex::with_val(prec.bits(), &p - &spec.lambdas()[j])).collect();
                for (j, dv) in divs.iter().enumerate() {
                    let m = numeric::modulus(dv);
                    if m < min {
                        min = m;
                        argmin = (alpha.entries().to_vec(), j);
                    }
                }
                by_degree[d as usize].push((alpha, divs));
            }
        }
        Ok(DivisorTable { by_degree, min, argmin })
    }
}

/// Term-by-term solution of the direct or inverse conjugacy equation through
/// degree `order`.
pub fn solve_schroder(germ: &GermSpec, order: u32, direction: Direction, opts: SolveOptions) -> Result<Linearization> {
    if order < 1 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let requested = germ.precision();
    if order >= 2 {
        if let Some(w) = germ.multipliers().is_resonant(order)? {
            return Err(Error::Resonant { alpha: w.alpha, component: w.j });
        }
    }
    let mut prec = requested;
    let mut escalations = 0;
    loop {
        let g = if prec == requested { germ.clone() } else { germ.with_precision(prec)? };
        let table = DivisorTable::build(g.multipliers(), order)?;
        let min = table.min.to_f64();
        if order >= 2 && min < prec.escalation_floor() {
            let next = prec.doubled();
            if opts.escalate && next <= Precision::CEILING {
                prec = next;
                escalations += 1;
                continue;
            }
            let required_bits = ((1e6 / min).log2().ceil() as u32).max(prec.bits() + 1);
            return Err(Error::PrecisionFloor { modulus: min, required_bits });
        }
        let (series, visited) = recurse(&g, order, direction, &table, opts.trace)?;
        return Ok(Linearization {
            series,
            direction,
            requested_precision: requested,
            precision: prec,
            escalations,
            min_divisor: if order >= 2 { min } else { f64::INFINITY },
            min_divisor_alpha: table.argmin.0,
            min_divisor_j: table.argmin.1,
            visited,
        });
    }
}

type Visited = Option<Vec<(usize, MultiIndex)>>;

fn recurse(
    germ: &GermSpec,
    order: u32,
    direction: Direction,
    table: &DivisorTable,
    trace: bool,
) -> Result<(FormalSeries, Visited)> {
    let prec = germ.precision();
    let n = germ.dim();
    let f = germ.nonlinear().with_order(order.max(2));
    let full = match direction {
        Direction::Direct => None,
        Direction::Inverse => Some(germ.map_series(order)?),
    };
    let mut h = FormalSeries::identity(n, order, prec)?;
    let mut visited = trace.then(Vec::new);
    for d in 2..=order {
        let rhs = match &full {
            // [f(H_{<d})]_alpha
            None => compose(&f, &h, d)?,
            // -[G_{<d} o F]_alpha
            Some(map) => compose(&h, map, d)?,
        };
        for (alpha, divs) in &table.by_degree[d as usize] {
            for (j, div) in divs.iter().enumerate() {
                if let Some(v) = visited.as_mut() {
                    v.push((j, alpha.clone()));
                }
                let Some(num) = rhs.get(j, alpha) else { continue };
                let mut c = Complex::with_val(prec.bits(), num / div);
                if direction == Direction::Inverse {
                    c = -c;
                }
                h.set(j, alpha.clone(), c)?;
            }
        }
    }
    Ok((h, visited))
}

/// Coefficients of `F o H - H o R_A` (direct) or `H o F - R_A o H` (inverse)
/// through degree `order`.
pub fn conjugacy_defect(germ: &GermSpec, h: &FormalSeries, direction: Direction, order: u32) -> Result<FormalSeries> {
    let map = germ.map_series(order)?;
    let lin = germ.linear_part(order)?;
    match direction {
        Direction::Direct => compose(&map, h, order)?.sub(&compose(h, &lin, order)?),
        Direction::Inverse => compose(h, &map, order)?.sub(&compose(&lin, h, order)?),
    }
}

/// Envelope `|h_alpha| <= C1 C2^{-e|alpha|} |alpha|!^s` with `e = s`, or
/// `e = 1` in the analytic case `s = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyFit {
    pub s: f64,
    pub c1: f64,
    pub c2: f64,
    pub ln_c1: f64,
    pub ln_c2: f64,
    pub window: (u32, u32),
    pub degrees: Vec<u32>,
    pub ln_sup: Vec<f64>,
    /// Residuals of the least-squares line, before inflating `C1`.
    pub residuals: Vec<f64>,
}

impl GevreyFit {
    fn exponent_scale(s: f64) -> f64 {
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// `ln(C1 C2^{-e d} d!^s)`.
    pub fn envelope_ln(&self, d: u32) -> f64 {
        self.ln_c1 - Self::exponent_scale(self.s) * d as f64 * self.ln_c2 + self.s * numeric::ln_factorial(d as u64)
    }

    /// Every coefficient of `h` in the fitted window lies under the envelope.
    pub fn holds_for(&self, h: &FormalSeries) -> bool {
        h.terms().into_iter().all(|(_, a, v)| {
            let d = a.degree();
            if d < self.window.0 || d > self.window.1 || v.is_zero() {
                return true;
            }
            let ln_abs = numeric::modulus(v).ln().to_f64();
            ln_abs <= self.envelope_ln(d)
        })
    }
}

/// `(d, ln sup_{|alpha| = d} |h_alpha|)` for the nonzero degrees in `lo..=hi`.
pub fn log_degree_sups(h: &FormalSeries, lo: u32, hi: u32) -> Vec<(u32, f64)> {
    (lo..=hi.min(h.order()))
        .filter_map(|d| {
            let m = h.degree_sup(d);
            (!m.is_zero()).then(|| (d, m.ln().to_f64()))
        })
        .collect()
}

/// Least-squares Gevrey envelope over degrees `2..=order`, inflated so that it
/// bounds every coefficient.
pub fn gevrey_fit(h: &FormalSeries, s: f64) -> Result<GevreyFit> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be nonnegative, got {s}")));
    }
    let lo = if h.is_tangent_to_identity() { 2 } else { 1 };
    let pts = log_degree_sups(h, lo, h.order());
    if pts.is_empty() {
        return Err(Error::DegenerateFit("all coefficients vanish".into()));
    }
    let e = GevreyFit::exponent_scale(s);
    let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|&(d, y)| y - s * numeric::ln_factorial(d as u64)).collect();
    let (a, b) = if pts.len() == 1 {
        (ys[0], 0.0)
    } else {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let b = sxy / sxx;
        (my - b * mx, b)
    };
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (a + b * x)).collect();
    let worst = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    // a small absolute pad absorbs the rounding of the f64 log-sups
    let ln_c1 = a + worst + 1e-12 * (1.0 + a.abs());
    let ln_c2 = -b / e;
    let window = (pts[0].0, pts[pts.len() - 1].0);
    Ok(GevreyFit {
        s,
        c1: ln_c1.exp(),
        c2: ln_c2.exp(),
        ln_c1,
        ln_c2,
        window,
        degrees: pts.iter().map(|p| p.0).collect(),
        ln_sup: pts.iter().map(|p| p.1).collect(),
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyExponent {
    /// Estimate clipped below at zero.
    pub s_hat: f64,
    /// Unclipped regression coefficient on `ln d!`.
    pub raw: f64,
    pub std_err: f64,
    /// `raw +- 2 std_err`, clipped at zero.
    pub band: (f64, f64),
    pub window: (u32, u32),
    pub points: usize,
}

/// Regress `ln sup_d` on `[1, d, ln d!]` and read off the `ln d!` coefficient.
pub fn estimate_gevrey_exponent(h: &FormalSeries) -> Result<GevreyExponent> {
    if h.order() < 6 {
        return Err(Error::InvalidArgument(format!("need order >= 6, got {}", h.order())));
    }
    let pts = log_degree_sups(h, 2, h.order());
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!("only {} nonzero degree sups", pts.len())));
    }
    let m = pts.len();
    let x = DMatrix::from_fn(m, 3, |i, c| {
        let d = pts[i].0;
        match c {
            0 => 1.0,
            1 => d as f64,
            _ => numeric::ln_factorial(d as u64),
        }
    });
    let y = DVector::from_iterator(m, pts.iter().map(|p| p.1));
    let svd = x.clone().svd(true, true);
    let coef = svd.solve(&y, 1e-12).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let resid = &y - &x * &coef;
    let std_err = if m > 3 {
        let sigma2 = resid.norm_squared() / (m - 3) as f64;
        let xtx = x.transpose() * &x;
        match xtx.try_inverse() {
            Some(inv) => (sigma2 * inv[(2, 2)]).max(0.0).sqrt(),
            None => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };
    let raw = coef[2];
    Ok(GevreyExponent {
        s_hat: raw.max(0.0),
        raw,
        std_err,
        band: ((raw - 2.0 * std_err).max(0.0), (raw + 2.0 * std_err).max(0.0)),
        window: (pts[0].0, pts[m - 1].0),
        points: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisors::Rotation;

    fn golden_quadratic(prec: Precision) -> GermSpec {
        GermSpec::quadratic(MultiplierSpec::golden(prec).unwrap()).unwrap()
    }

    fn synthetic(order: u32, ln_coeff: impl Fn(u32) -> f64) -> FormalSeries {
        let mut h = FormalSeries::identity(1, order, Precision::DOUBLE).unwrap();
        for d in 2..=order {
            let v = numeric::from_f64(Precision::DOUBLE, ln_coeff(d).exp(), 0.0);
            h.set(0, MultiIndex::new(vec![d]), v).unwrap();
        }
        h
    }

    #[test]
    fn linear_germ_gives_identity() {
        let germ = GermSpec::linear(MultiplierSpec::golden(Precision::DOUBLE).unwrap()).unwrap();
        let lin = solve_schroder(&germ, 8, Direction::Direct, SolveOptions::default()).unwrap();
        assert_eq!(lin.series, FormalSeries::identity(1, 8, Precision::DOUBLE).unwrap());
    }

    #[test]
    fn second_coefficient_is_reciprocal_divisor() {
        let germ = golden_quadratic(Precision::QUAD);
        let lin = solve_schroder(&germ, 3, Direction::Direct, SolveOptions::default()).unwrap();
        let l = &germ.multipliers().lambdas()[0];
        let expect = Complex::with_val(128, l.square_ref()) - l;
        let expect = Complex::with_val(128, expect.recip_ref());
        let got = lin.series.coeff(0, &MultiIndex::new(vec![2]));
        assert!(numeric::modulus_f64(&Complex::with_val(128, &got - &expect)) < 1e-35);
    }

    #[test]
    fn visits_each_index_once() {
        let spec = MultiplierSpec::from_rotations(
            vec![
                Rotation::Real(Float::with_val(64, 0.3819660112501051)),
                Rotation::Real(Float::with_val(64, 0.1415926535)),
            ],
            Precision::DOUBLE,
        )
        .unwrap();
        let mut f = FormalSeries::zero(2, 2, Precision::DOUBLE).unwrap();
        f.set(0, MultiIndex::new(vec![1, 1]), numeric::one(Precision::DOUBLE)).unwrap();
        let germ = GermSpec::new(spec, f, 1.0).unwrap();
        let opts = SolveOptions { trace: true, ..Default::default() };
        let lin = solve_schroder(&germ, 6, Direction::Direct, opts).unwrap();
        let visited = lin.visited.unwrap();
        let mut expect = Vec::new();
        for d in 2..=6 {
            for a in enum_indices(2, d) {
                for j in 0..2 {
                    expect.push((j, a.clone()));
                }
            }
        }
        assert_eq!(visited, expect);
    }

    #[test]
    fn direct_and_inverse_agree() {
        let germ = golden_quadratic(Precision::QUAD);
        let h = solve_schroder(&germ, 12, Direction::Direct, SolveOptions::default()).unwrap().series;
        let g = solve_schroder(&germ, 12, Direction::Inverse, SolveOptions::default()).unwrap().series;
        let back = h.invert_tangent_identity(12).unwrap();
        let diff = back.sub(&g).unwrap();
        assert!(diff.max_abs() < 1e-10 * g.max_abs());
    }

    #[test]
    fn defect_vanishes() {
        let germ = golden_quadratic(Precision::DOUBLE);
        for dir in [Direction::Direct, Direction::Inverse] {
            let h = solve_schroder(&germ, 10, dir, SolveOptions::default()).unwrap().series;
            let defect = conjugacy_defect(&germ, &h, dir, 10).unwrap();
            assert!(defect.max_abs() < 1e-10 * h.max_abs(), "{dir:?}");
        }
    }

    #[test]
    fn resonant_multiplier_is_reported() {
        let spec = MultiplierSpec::from_rotations(
            vec![RotationDoc::Rational { num: 1, den: 3 }.to_rotation(Precision::DOUBLE).unwrap()],
            Precision::DOUBLE,
        )
        .unwrap();
        let germ = GermSpec::quadratic(spec).unwrap();
        let err = solve_schroder(&germ, 6, Direction::Direct, SolveOptions::default()).unwrap_err();
        assert_eq!(err, Error::Resonant { alpha: vec![4], component: 0 });
    }

    #[test]
    fn near_resonance_escalates_or_fails() {
        let w = Float::with_val(256, 1u32) / 3u32 + Float::with_val(256, 1e-12);
        let spec = MultiplierSpec::from_rotations(vec![Rotation::Real(w)], Precision::DOUBLE).unwrap();
        let germ = GermSpec::quadratic(spec).unwrap();
        let lin = solve_schroder(&germ, 6, Direction::Direct, SolveOptions::default()).unwrap();
        assert!(lin.escalations >= 1 && lin.precision > Precision::DOUBLE);
        let opts = SolveOptions { escalate: false, trace: false };
        assert!(matches!(solve_schroder(&germ, 6, Direction::Direct, opts), Err(Error::PrecisionFloor { .. })));
    }

    #[test]
    fn geometric_envelope_recovers_ratio() {
        let h = synthetic(20, |d| d as f64 * 2f64.ln());
        let fit = gevrey_fit(&h, 0.0).unwrap();
        assert!((fit.c2 - 0.5).abs() < 1e-6);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-9));
        assert!(fit.holds_for(&h));
    }

    #[test]
    fn factorial_envelope_recovers_scale() {
        let h = synthetic(25, |d| numeric::ln_factorial(d as u64) - d as f64 * 3f64.ln());
        let fit = gevrey_fit(&h, 1.0).unwrap();
        assert!((fit.c2 - 3.0).abs() < 1e-6);
        assert!(fit.holds_for(&h));
    }

    #[test]
    fn exponent_of_half_factorial() {
        let h = synthetic(40, |d| 0.5 * numeric::ln_factorial(d as u64) + 0.3 * d as f64);
        let e = estimate_gevrey_exponent(&h).unwrap();
        assert!((e.s_hat - 0.5).abs() < 0.05, "{e:?}");
    }

    #[test]
    fn fit_rejects_zero_series() {
        let h = FormalSeries::identity(1, 8, Precision::DOUBLE).unwrap();
        assert!(matches!(gevrey_fit(&h, 0.0), Err(Error::DegenerateFit(_))));
        assert!(matches!(estimate_gevrey_exponent(&h), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn germ_json_round_trip() {
        let text = r#"{"n":1,"rotations":[{"preset":"golden"}],"f":[{"j":0,"alpha":[2],"re":1,"im":0}]}"#;
        let germ = GermSpec::from_json(text, Precision::QUAD).unwrap();
        let again = GermSpec::from_json(&germ.to_json(), Precision::DOUBLE).unwrap();
        assert_eq!(again.precision(), Precision::QUAD);
        assert_eq!(again.nonlinear(), germ.nonlinear());
        assert_eq!(again.multipliers().lambdas(), germ.multipliers().lambdas());
        assert_eq!(again.to_doc(), germ.to_doc());
    }
}
