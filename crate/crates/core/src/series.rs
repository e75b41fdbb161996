//! Truncated vector-valued power series in `n` complex variables.
//!
//! A [`FormalSeries`] stores the coefficients of `n` component series, each a
//! sparse map from [`MultiIndex`] (degree 1..=order) to a complex number at a
//! fixed binary precision. Heavy algebra (products, composition) runs on a
//! dense monomial table and is converted back to sparse storage.
//!
//! Series are treated as polynomials: terms above the stored order are zero.
//! Composition therefore returns the exact coefficients of the polynomial
//! composition through the requested degree.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, Precision};

pub const SCHEMA: &str = "germlab/1";

/// A multi-index `alpha` in N^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit vector e_i.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// The linear index e_i if this is one, else `None`.
    pub fn as_unit(&self) -> Option<usize> {
        if self.degree() != 1 {
            return None;
        }
        self.0.iter().position(|&a| a == 1)
    }
}

impl Ord for MultiIndex {
    /// Graded lexicographic: lower degree first; within a degree the larger
    /// leading exponent comes first, so (2,0) < (1,1) < (0,2).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices of dimension `n` and degree `d`, in graded-lex order.
pub fn enum_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be positive");
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fill_indices(&mut cur, 0, d, &mut out);
    out
}

fn fill_indices(cur: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill_indices(cur, pos + 1, remaining - a, out);
    }
}

/// Dense enumeration of every monomial of degree 0..=max_degree with a
/// truncated multiplication table.
#[derive(Debug)]
pub(crate) struct MonomialTable {
    pub n: usize,
    pub max_degree: u32,
    pub indices: Vec<MultiIndex>,
    pub rank: HashMap<MultiIndex, usize>,
    /// `degree_end[d]` is one past the last rank of degree `d`.
    pub degree_end: Vec<usize>,
    pub degrees: Vec<u32>,
    mul: Vec<u32>,
}

impl MonomialTable {
    fn build(n: usize, max_degree: u32) -> Self {
        let mut indices = Vec::new();
        let mut degree_end = Vec::with_capacity(max_degree as usize + 1);
        for d in 0..=max_degree {
            indices.extend(enum_indices(n, d));
            degree_end.push(indices.len());
        }
        let rank: HashMap<MultiIndex, usize> = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let degrees: Vec<u32> = indices.iter().map(MultiIndex::degree).collect();
        let len = indices.len();
        let mut mul = vec![u32::MAX; len * len];
        for a in 0..len {
            let room = max_degree - degrees[a];
            for b in 0..degree_end[room as usize] {
                let sum = indices[a].add(&indices[b]);
                mul[a * len + b] = rank[&sum] as u32;
            }
        }
        MonomialTable { n, max_degree, indices, rank, degree_end, degrees, mul }
    }

    /// Shared table for `(n, max_degree)`.
    pub fn get(n: usize, max_degree: u32) -> Arc<MonomialTable> {
        type Cache = Mutex<HashMap<(usize, u32), Arc<MonomialTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("monomial cache poisoned");
        guard.entry((n, max_degree)).or_insert_with(|| Arc::new(MonomialTable::build(n, max_degree))).clone()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn product(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.len() + b] as usize
    }

    pub fn zeros(&self, prec: Precision) -> Vec<Complex> {
        (0..self.len()).map(|_| numeric::zero(prec)).collect()
    }

    /// Truncated product of two dense polynomials.
    pub fn mul(&self, a: &[Complex], b: &[Complex], prec: Precision) -> Vec<Complex> {
        let mut out = self.zeros(prec);
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let room = self.max_degree - self.degrees[i];
            for j in 0..self.degree_end[room as usize] {
                let bj = &b[j];
                if bj.is_zero() {
                    continue;
                }
                out[self.product(i, j)] += ai * bj;
            }
        }
        out
    }
}

/// Truncated vector-valued power series with sparse complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    dim: usize,
    order: u32,
    prec: Precision,
    components: Vec<BTreeMap<MultiIndex, Complex>>,
}

impl FormalSeries {
    pub fn zero(dim: usize, order: u32, prec: Precision) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if order == 0 {
            return Err(Error::InvalidArgument("truncation order must be positive".into()));
        }
        Ok(FormalSeries { dim, order, prec, components: vec![BTreeMap::new(); dim] })
    }

    pub fn identity(dim: usize, order: u32, prec: Precision) -> Result<Self> {
        let mut s = Self::zero(dim, order, prec)?;
        for j in 0..dim {
            s.components[j].insert(MultiIndex::unit(dim, j), numeric::one(prec));
        }
        Ok(s)
    }

    /// The linear map z -> diag(lambdas) z.
    pub fn diagonal(lambdas: &[Complex], order: u32, prec: Precision) -> Result<Self> {
        let dim = lambdas.len();
        let mut s = Self::zero(dim, order, prec)?;
        for (j, l) in lambdas.iter().enumerate() {
            s.set(j, MultiIndex::unit(dim, j), numeric::with_prec(l, prec))?;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn component(&self, j: usize) -> &BTreeMap<MultiIndex, Complex> {
        &self.components[j]
    }

    /// Set a coefficient; zero values are dropped from storage.
    pub fn set(&mut self, j: usize, alpha: MultiIndex, value: Complex) -> Result<()> {
        if j >= self.dim {
            return Err(Error::InvalidArgument(format!("component {j} out of range")));
        }
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: alpha.dim() });
        }
        let d = alpha.degree();
        if d == 0 {
            return Err(Error::ConstantTerm);
        }
        if d > self.order {
            return Err(Error::InvalidArgument(format!("degree {d} exceeds truncation order {}", self.order)));
        }
        if value.is_zero() {
            self.components[j].remove(&alpha);
        } else {
            self.components[j].insert(alpha, numeric::with_prec(&value, self.prec));
        }
        Ok(())
    }

    pub fn get(&self, j: usize, alpha: &MultiIndex) -> Option<&Complex> {
        self.components.get(j).and_then(|c| c.get(alpha))
    }

    pub fn coeff(&self, j: usize, alpha: &MultiIndex) -> Complex {
        self.get(j, alpha).cloned().unwrap_or_else(|| numeric::zero(self.prec))
    }

    /// All stored terms, index-major in graded-lex order, then by component.
    pub fn terms(&self) -> Vec<(usize, &MultiIndex, &Complex)> {
        let mut out: Vec<(usize, &MultiIndex, &Complex)> =
            self.components.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(a, v)| (j, a, v))).collect();
        out.sort_by(|x, y| x.1.cmp(y.1).then(x.0.cmp(&y.0)));
        out
    }

    pub fn nnz(&self) -> usize {
        self.components.iter().map(BTreeMap::len).sum()
    }

    /// Highest degree carrying a nonzero coefficient.
    pub fn max_degree(&self) -> u32 {
        self.components.iter().filter_map(|c| c.keys().next_back().map(MultiIndex::degree)).max().unwrap_or(0)
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn min_degree(&self) -> Option<u32> {
        self.components.iter().filter_map(|c| c.keys().next().map(MultiIndex::degree)).min()
    }

    pub fn truncate(&self, order: u32) -> FormalSeries {
        let mut out = self.clone();
        out.order = order;
        for c in &mut out.components {
            c.retain(|a, _| a.degree() <= order);
        }
        out
    }

    /// Keep only terms with degree in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> FormalSeries {
        let mut out = self.clone();
        for c in &mut out.components {
            c.retain(|a, _| (lo..=hi).contains(&a.degree()));
        }
        out
    }

    pub fn with_precision(&self, prec: Precision) -> FormalSeries {
        FormalSeries {
            dim: self.dim,
            order: self.order,
            prec,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|(a, v)| (a.clone(), numeric::with_prec(v, prec))).collect())
                .collect(),
        }
    }

    pub fn with_order(&self, order: u32) -> FormalSeries {
        if order < self.order {
            return self.truncate(order);
        }
        let mut out = self.clone();
        out.order = order;
        out
    }

    pub fn sub(&self, other: &FormalSeries) -> Result<FormalSeries> {
        self.combine(other, false)
    }

    pub fn add(&self, other: &FormalSeries) -> Result<FormalSeries> {
        self.combine(other, true)
    }

    fn combine(&self, other: &FormalSeries, plus: bool) -> Result<FormalSeries> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let prec = self.prec.max(other.prec);
        let mut out = self.with_precision(prec).with_order(self.order.max(other.order));
        for (j, c) in other.components.iter().enumerate() {
            for (a, v) in c {
                let entry = out.components[j].entry(a.clone()).or_insert_with(|| numeric::zero(prec));
                if plus {
                    *entry += v;
                } else {
                    *entry -= v;
                }
            }
            out.components[j].retain(|_, v| !v.is_zero());
        }
        Ok(out)
    }

    /// Multiply component j by `scales[j]`.
    pub fn scale_components(&self, scales: &[Complex]) -> Result<FormalSeries> {
        if scales.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: scales.len() });
        }
        let mut out = self.clone();
        for (c, s) in out.components.iter_mut().zip(scales) {
            for v in c.values_mut() {
                *v *= s;
            }
            c.retain(|_, v| !v.is_zero());
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flat_map(|c| c.values()).map(numeric::modulus_f64).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus among terms of degree `lo..=hi`.
    pub fn max_abs_in(&self, lo: u32, hi: u32) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .filter(|(a, _)| (lo..=hi).contains(&a.degree()))
            .map(|(_, v)| numeric::modulus_f64(v))
            .fold(0.0, f64::max)
    }

    /// sup over j and |alpha| = d of |h_{j,alpha}|, as a `Float` so that
    /// astronomically small or large values survive.
    pub fn degree_sup(&self, d: u32) -> Float {
        let mut best = Float::new(self.prec.bits());
        for c in &self.components {
            for (_, v) in c.iter().filter(|(a, _)| a.degree() == d) {
                let m = numeric::modulus(v);
                if m > best {
                    best = m;
                }
            }
        }
        best
    }

    pub fn is_tangent_to_identity(&self) -> bool {
        let one = numeric::one(self.prec);
        (0..self.dim).all(|j| {
            self.components[j].iter().filter(|(a, _)| a.degree() == 1).all(|(a, v)| {
                if a.as_unit() == Some(j) {
                    *v == one
                } else {
                    v.is_zero()
                }
            }) && self.components[j].get(&MultiIndex::unit(self.dim, j)) == Some(&one)
        })
    }

    pub(crate) fn to_dense(&self, table: &MonomialTable) -> Vec<Vec<Complex>> {
        self.components
            .iter()
            .map(|c| {
                let mut v = table.zeros(self.prec);
                for (a, x) in c {
                    if let Some(&r) = table.rank.get(a) {
                        v[r] = x.clone();
                    }
                }
                v
            })
            .collect()
    }

    pub(crate) fn from_dense(
        dense: &[Vec<Complex>],
        table: &MonomialTable,
        order: u32,
        prec: Precision,
    ) -> FormalSeries {
        let components = dense
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .skip(1)
                    .filter(|(r, x)| !x.is_zero() && table.degrees[*r] <= order)
                    .map(|(r, x)| (table.indices[r].clone(), x.clone()))
                    .collect()
            })
            .collect();
        FormalSeries { dim: table.n, order, prec, components }
    }

    /// Evaluate the truncated polynomial at `z`. Summation runs over terms in
    /// graded-lex order for each component.
    pub fn evaluate(&self, z: &[Complex]) -> Result<Vec<Complex>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let prec = self.prec.max(Precision::new(z.iter().map(|x| x.prec().0).max().unwrap_or(53))?);
        let powers = power_table(z, self.max_degree(), prec);
        Ok(self
            .components
            .iter()
            .map(|c| {
                let mut acc = numeric::zero(prec);
                for (a, v) in c {
                    let mut term = numeric::with_prec(v, prec);
                    for (i, &e) in a.entries().iter().enumerate() {
                        if e > 0 {
                            term *= &powers[i][e as usize];
                        }
                    }
                    acc += term;
                }
                acc
            })
            .collect())
    }

    /// Jacobian matrix `d H_j / d z_i` at `z`, row-major (`[j][i]`).
    pub fn jacobian(&self, z: &[Complex]) -> Result<Vec<Vec<Complex>>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let prec = self.prec;
        let powers = power_table(z, self.max_degree(), prec);
        let mut jac = vec![vec![numeric::zero(prec); self.dim]; self.dim];
        for (j, c) in self.components.iter().enumerate() {
            for (a, v) in c {
                for (i, &ai) in a.entries().iter().enumerate() {
                    if ai == 0 {
                        continue;
                    }
                    let mut term = numeric::with_prec(v, prec);
                    term *= ai;
                    for (k, &e) in a.entries().iter().enumerate() {
                        let e = if k == i { e - 1 } else { e };
                        if e > 0 {
                            term *= &powers[k][e as usize];
                        }
                    }
                    jac[j][i] += term;
                }
            }
        }
        Ok(jac)
    }

    /// Compositional inverse of a tangent-to-identity series through `order`.
    pub fn invert_tangent_identity(&self, order: u32) -> Result<FormalSeries> {
        if !self.is_tangent_to_identity() {
            return Err(Error::NotTangentToIdentity);
        }
        let prec = self.prec;
        let nonlinear = self.degree_range(2, self.order);
        // G = id - (H - id) o G, solved one degree at a time.
        let mut g = FormalSeries::identity(self.dim, order, prec)?;
        for d in 2..=order {
            let p = compose(&nonlinear, &g, d)?;
            for (j, comp) in p.components.iter().enumerate() {
                for (a, v) in comp.iter().filter(|(a, _)| a.degree() == d) {
                    g.set(j, a.clone(), -v.clone())?;
                }
            }
        }
        Ok(g)
    }

    pub fn to_doc(&self) -> SeriesDoc {
        let exact_f64 = self.prec.bits() <= 53;
        let num = |x: &Float| {
            if exact_f64 {
                Num::F(x.to_f64())
            } else {
                Num::S(numeric::float_to_string(x))
            }
        };
        SeriesDoc {
            schema: Some(SCHEMA.to_string()),
            n: self.dim,
            order: self.order,
            precision: Some(self.prec.bits()),
            terms: self
                .terms()
                .into_iter()
                .map(|(j, a, v)| TermDoc { j, alpha: a.entries().to_vec(), re: num(v.real()), im: num(v.imag()) })
                .collect(),
        }
    }

    pub fn from_doc(doc: &SeriesDoc, default_prec: Precision) -> Result<FormalSeries> {
        let prec = match doc.precision {
            Some(b) => Precision::new(b)?,
            None => default_prec,
        };
        let mut s = FormalSeries::zero(doc.n, doc.order, prec)?;
        for t in &doc.terms {
            if t.alpha.len() != doc.n {
                return Err(Error::DimensionMismatch { expected: doc.n, found: t.alpha.len() });
            }
            let re = t.re.to_float(prec)?;
            let im = t.im.to_float(prec)?;
            s.set(t.j, MultiIndex::new(t.alpha.clone()), Complex::with_val(prec.bits(), (re, im)))?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("series serializes")
    }

    pub fn from_json(text: &str, default_prec: Precision) -> Result<FormalSeries> {
        let doc: SeriesDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc, default_prec)
    }
}

/// `powers[i][k] = z_i^k` for k in 0..=max_degree.
pub(crate) fn power_table(z: &[Complex], max_degree: u32, prec: Precision) -> Vec<Vec<Complex>> {
    z.iter()
        .map(|zi| {
            let zi = numeric::with_prec(zi, prec);
            let mut row = Vec::with_capacity(max_degree as usize + 1);
            row.push(numeric::one(prec));
            for k in 1..=max_degree as usize {
                let next = Complex::with_val(prec.bits(), &row[k - 1] * &zi);
                row.push(next);
            }
            row
        })
        .collect()
}

/// `outer o inner` through degree `order`.
pub fn compose(outer: &FormalSeries, inner: &FormalSeries, order: u32) -> Result<FormalSeries> {
    if outer.dim != inner.dim {
        return Err(Error::DimensionMismatch { expected: outer.dim, found: inner.dim });
    }
    // Stored series never carry constant terms; kept as an explicit guard.
    if inner.min_degree() == Some(0) {
        return Err(Error::ConstantTerm);
    }
    let prec = outer.prec.max(inner.prec);
    let table = MonomialTable::get(outer.dim, order);
    let inner_dense = inner.with_precision(prec).to_dense(&table);
    let mut memo: HashMap<usize, Vec<Complex>> = HashMap::new();
    let mut out: Vec<Vec<Complex>> = (0..outer.dim).map(|_| table.zeros(prec)).collect();
    for (j, comp) in outer.components.iter().enumerate() {
        for (beta, c) in comp.iter().filter(|(b, _)| b.degree() <= order) {
            let r = table.rank[beta];
            let mono = monomial_power(r, &table, &inner_dense, &mut memo, prec);
            for (acc, m) in out[j].iter_mut().zip(mono) {
                if !m.is_zero() {
                    *acc += c * m;
                }
            }
        }
    }
    Ok(FormalSeries::from_dense(&out, &table, order, prec))
}

/// inner^beta for the monomial of rank `r`, memoized over prefixes.
fn monomial_power<'a>(
    r: usize,
    table: &MonomialTable,
    inner: &[Vec<Complex>],
    memo: &'a mut HashMap<usize, Vec<Complex>>,
    prec: Precision,
) -> &'a Vec<Complex> {
    if !memo.contains_key(&r) {
        let beta = &table.indices[r];
        let value = if beta.degree() == 0 {
            let mut v = table.zeros(prec);
            v[0] = numeric::one(prec);
            v
        } else {
            let i = beta.entries().iter().rposition(|&e| e > 0).expect("nonzero degree");
            let mut prev = beta.entries().to_vec();
            prev[i] -= 1;
            let pr = table.rank[&MultiIndex::new(prev)];
            let base = monomial_power(pr, table, inner, memo, prec).clone();
            table.mul(&base, &inner[i], prec)
        };
        memo.insert(r, value);
    }
    &memo[&r]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    F(f64),
    S(String),
}

impl Num {
    pub fn to_float(&self, prec: Precision) -> Result<Float> {
        match self {
            Num::F(x) => Ok(Float::with_val(prec.bits(), *x)),
            Num::S(s) => numeric::parse_float(prec, s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub j: usize,
    pub alpha: Vec<u32>,
    pub re: Num,
    pub im: Num,
}

/// JSON interchange form `{schema, n, N, precision, terms: [{j, alpha, re, im}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    #[serde(rename = "N")]
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub terms: Vec<TermDoc>,
}

/// Reusable evaluator for repeated evaluation of one polynomial map, with
/// preallocated power and term buffers.
#[derive(Clone, Debug)]
pub struct PolyEvaluator {
    prec: Precision,
    terms: Vec<Vec<(Complex, Vec<u32>)>>,
    powers: Vec<Vec<Complex>>,
    tmp: Complex,
}

impl PolyEvaluator {
    pub fn new(series: &FormalSeries) -> Self {
        let prec = series.prec;
        let max_degree = series.max_degree().max(1) as usize;
        let terms = series
            .components
            .iter()
            .map(|c| c.iter().map(|(a, v)| (v.clone(), a.entries().to_vec())).collect())
            .collect();
        let powers = (0..series.dim).map(|_| vec![numeric::zero(prec); max_degree + 1]).collect();
        PolyEvaluator { prec, terms, powers, tmp: numeric::zero(prec) }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    /// Write the value at `z` into `out`; summation in graded-lex order.
    pub fn eval_into(&mut self, z: &[Complex], out: &mut [Complex]) {
        use rug::Assign;
        let top = self.powers.first().map_or(0, Vec::len);
        for (row, zi) in self.powers.iter_mut().zip(z) {
            row[0].assign(1);
            for k in 1..top {
                let (lo, hi) = row.split_at_mut(k);
                hi[0].assign(&lo[k - 1] * zi);
            }
        }
        for (o, comp) in out.iter_mut().zip(&self.terms) {
            o.assign(0);
            for (c, e) in comp {
                self.tmp.assign(c);
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        self.tmp *= &self.powers[i][k as usize];
                    }
                }
                *o += &self.tmp;
            }
        }
    }

    pub fn eval(&mut self, z: &[Complex]) -> Vec<Complex> {
        let mut out = vec![numeric::zero(self.prec); self.dim()];
        self.eval_into(z, &mut out);
        out
    }
}
