//! Reference implementations used only as test oracles. They share no code
//! with the library: plain f64 complex arithmetic on dense one-variable
//! polynomials, and divisor moduli via `2 |sin(pi theta)|`.

#![allow(dead_code)]

use std::ops::{Add, Mul, Sub};

use germlab::numeric::Precision;
use rug::float::Constant;
use rug::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
    pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    pub fn cis(theta: f64) -> Self {
        C64 { re: theta.cos(), im: theta.sin() }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn inv(self) -> Self {
        let d = self.re * self.re + self.im * self.im;
        C64 { re: self.re / d, im: -self.im / d }
    }

    pub fn powi(self, k: u32) -> Self {
        (0..k).fold(C64::ONE, |acc, _| acc * self)
    }
}

impl Add for C64 {
    type Output = C64;
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for C64 {
    type Output = C64;
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for C64 {
    type Output = C64;
    fn mul(self, o: C64) -> C64 {
        C64::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// Dense coefficients `c[0] + c[1] z + ...`, truncated at `c.len() - 1`.
pub type Poly = Vec<C64>;

pub fn poly_mul(a: &Poly, b: &Poly, order: usize) -> Poly {
    let mut out = vec![C64::ZERO; order + 1];
    for (i, &x) in a.iter().enumerate().take(order + 1) {
        for (j, &y) in b.iter().enumerate() {
            if i + j > order {
                break;
            }
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

/// `outer(inner(z))` by Horner's rule, `inner(0) = 0`.
pub fn poly_compose(outer: &Poly, inner: &Poly, order: usize) -> Poly {
    let mut acc = vec![C64::ZERO; order + 1];
    for &c in outer.iter().rev() {
        acc = poly_mul(&acc, inner, order);
        acc[0] = acc[0] + c;
    }
    acc
}

/// Compositional inverse of `z + ...` by fixed-point iteration
/// `G <- z - (H(G) - G)`.
pub fn poly_revert(h: &Poly, order: usize) -> Poly {
    let mut g = vec![C64::ZERO; order + 1];
    g[1] = C64::ONE;
    for _ in 0..order {
        let hg = poly_compose(h, &g, order);
        let mut next = vec![C64::ZERO; order + 1];
        next[1] = C64::ONE;
        for d in 2..=order {
            next[d] = C64::ZERO - (hg[d] - g[d]);
        }
        g = next;
    }
    g
}

/// Solve `F o H = H o (lambda z)` for `F = lambda z + f(z)` in one variable,
/// degree by degree: `h_d (lambda^d - lambda) = [f(H_{<d})]_d`.
pub fn schroder_1d(lambda: C64, f: &Poly, order: usize) -> Poly {
    let mut h = vec![C64::ZERO; order + 1];
    h[1] = C64::ONE;
    for d in 2..=order {
        let fh = poly_compose(f, &h[..d].to_vec(), d);
        h[d] = fh[d] * (lambda.powi(d as u32) - lambda).inv();
    }
    h
}

/// `exp(2 pi i w)` in f64.
pub fn rotation(w: f64) -> C64 {
    C64::cis(2.0 * std::f64::consts::PI * w)
}

/// `|lambda^alpha - lambda_j| = 2 |sin(pi (alpha . w - w_j))|` at high precision.
pub fn divisor_modulus(w: &[Float], alpha: &[u32], j: usize, prec: Precision) -> Float {
    let bits = prec.bits();
    let mut theta = Float::with_val(bits, 0);
    for (wi, &a) in w.iter().zip(alpha) {
        theta += Float::with_val(bits, wi * a);
    }
    theta -= &w[j];
    let frac = Float::with_val(bits, &theta - theta.clone().floor());
    let pi = Float::with_val(bits, Constant::Pi);
    let s = Float::with_val(bits, frac * &pi).sin().abs();
    s * 2u32
}

/// All multi-indices of `n` entries with `lo <= |alpha| <= hi`, by nested recursion.
pub fn all_indices(n: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(n, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in lo..=hi {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Brute-force `min |lambda^alpha - lambda_j|` over `2 <= |alpha| < p`.
pub fn omega_brute(w: &[Float], p: u32, prec: Precision) -> Float {
    let n = w.len();
    let mut best: Option<Float> = None;
    for alpha in all_indices(n, 2, p - 1) {
        for j in 0..n {
            let m = divisor_modulus(w, &alpha, j, prec);
            if best.as_ref().is_none_or(|b| m < *b) {
                best = Some(m);
            }
        }
    }
    best.expect("nonempty index set")
}

/// `(sqrt 5 - 1) / 2`.
pub fn golden_f64() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
