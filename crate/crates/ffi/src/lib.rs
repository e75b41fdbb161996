//! C ABI for `germlab`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`GermlabStatus`]; on failure the message is kept per thread and
//! can be fetched with [`germlab_last_error`]. Strings handed out by this
//! library must be released with [`germlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use germlab::cf::{
    self, build_quotients_saturating, evaluate_condition, ConditionKind, ConditionParams, ContinuedFraction,
};
use germlab::linearizer::{solve_schroder, Direction, GermSpec, SolveOptions};
use germlab::numeric::{self, Precision};
use germlab::series::{compose, FormalSeries};
use germlab::stability::{self, IterationParams, OrbitOptions};
use germlab::truncator::{exact_remainder_order, optimal_truncation, remainder_series, remainder_sup};
use germlab::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GermlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Domain = 4,
    Parse = 5,
    Missing = 6,
    DimensionMismatch = 7,
    ConstantTerm = 8,
    NotTangentToIdentity = 9,
    Resonant = 10,
    PrecisionFloor = 11,
    InsufficientDepth = 12,
    DepthOverflow = 13,
    DegenerateFit = 14,
    Numeric = 15,
    Panic = 16,
}

impl From<&Error> for GermlabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => GermlabStatus::DimensionMismatch,
            Error::ConstantTerm => GermlabStatus::ConstantTerm,
            Error::NotTangentToIdentity => GermlabStatus::NotTangentToIdentity,
            Error::Resonant { .. } => GermlabStatus::Resonant,
            Error::PrecisionFloor { .. } => GermlabStatus::PrecisionFloor,
            Error::InsufficientDepth { .. } => GermlabStatus::InsufficientDepth,
            Error::DepthOverflow { .. } => GermlabStatus::DepthOverflow,
            Error::Domain(_) => GermlabStatus::Domain,
            Error::InvalidArgument(_) => GermlabStatus::InvalidArgument,
            Error::Missing(_) => GermlabStatus::Missing,
            Error::DegenerateFit(_) => GermlabStatus::DegenerateFit,
            Error::Parse(_) => GermlabStatus::Parse,
            Error::Numeric(_) => GermlabStatus::Numeric,
        }
    }
}

/// Truncated power series map `C^n -> C^n`.
pub struct GermlabSeries(FormalSeries);

/// Germ `F(z) = A z + f(z)` with its domain radius.
pub struct GermlabGerm(GermSpec);

/// Continued fraction with exact convergent denominators.
pub struct GermlabCf(ContinuedFraction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: GermlabStatus, msg: impl Into<String>) -> GermlabStatus {
    set_error(msg.into());
    status
}

/// Run `body`, mapping library errors and panics to status codes.
fn guard<F>(body: F) -> GermlabStatus
where
    F: FnOnce() -> Result<(), GermlabStatus>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GermlabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(GermlabStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, GermlabStatus>;
}

impl<T> OrStatus<T> for germlab::Result<T> {
    fn or_status(self) -> Result<T, GermlabStatus> {
        self.map_err(|e| fail(GermlabStatus::from(&e), e.to_string()))
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, GermlabStatus> {
    if p.is_null() {
        return Err(fail(GermlabStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(GermlabStatus::InvalidUtf8, "string is not UTF-8"))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, GermlabStatus> {
    p.as_mut().ok_or_else(|| fail(GermlabStatus::NullPointer, "null output pointer"))
}

unsafe fn in_ref<'a, T>(p: *const T) -> Result<&'a T, GermlabStatus> {
    p.as_ref().ok_or_else(|| fail(GermlabStatus::NullPointer, "null handle"))
}

fn precision(bits: u32) -> Result<Precision, GermlabStatus> {
    Precision::from_user(bits).or_status()
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn germlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Stable name of a status code, e.g. `"resonant"`.
#[no_mangle]
pub extern "C" fn germlab_status_name(status: GermlabStatus) -> *const c_char {
    let s: &'static str = match status {
        GermlabStatus::Ok => "ok\0",
        GermlabStatus::NullPointer => "null_pointer\0",
        GermlabStatus::InvalidUtf8 => "invalid_utf8\0",
        GermlabStatus::InvalidArgument => "invalid_argument\0",
        GermlabStatus::Domain => "domain\0",
        GermlabStatus::Parse => "parse\0",
        GermlabStatus::Missing => "missing_input\0",
        GermlabStatus::DimensionMismatch => "dimension_mismatch\0",
        GermlabStatus::ConstantTerm => "constant_term\0",
        GermlabStatus::NotTangentToIdentity => "not_tangent_to_identity\0",
        GermlabStatus::Resonant => "resonant\0",
        GermlabStatus::PrecisionFloor => "precision_floor\0",
        GermlabStatus::InsufficientDepth => "insufficient_depth\0",
        GermlabStatus::DepthOverflow => "depth_overflow\0",
        GermlabStatus::DegenerateFit => "degenerate_fit\0",
        GermlabStatus::Numeric => "numeric\0",
        GermlabStatus::Panic => "panic\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The caller owns
/// the returned string.
#[no_mangle]
pub extern "C" fn germlab_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn germlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- series ----

/// Parse a series document `{n, N, terms}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_from_json(
    json: *const c_char,
    precision_bits: u32,
    out: *mut *mut GermlabSeries,
) -> GermlabStatus {
    guard(|| {
        let text = read_str(json)?;
        let out = out_ref(out)?;
        let s = FormalSeries::from_json(text, precision(precision_bits)?).or_status()?;
        *out = Box::into_raw(Box::new(GermlabSeries(s)));
        Ok(())
    })
}

/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_to_json(series: *const GermlabSeries, out: *mut *mut c_char) -> GermlabStatus {
    guard(|| {
        let s = in_ref(series)?;
        *out_ref(out)? = give_string(s.0.to_json());
        Ok(())
    })
}

/// # Safety
/// `series` must be NULL or a handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_free(series: *mut GermlabSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of variables, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_dim(series: *const GermlabSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.dim())
}

/// Truncation order, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_order(series: *const GermlabSeries) -> u32 {
    series.as_ref().map_or(0, |s| s.0.order())
}

/// `outer o inner` truncated at `order`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_compose(
    outer: *const GermlabSeries,
    inner: *const GermlabSeries,
    order: u32,
    out: *mut *mut GermlabSeries,
) -> GermlabStatus {
    guard(|| {
        let (a, b) = (in_ref(outer)?, in_ref(inner)?);
        let out = out_ref(out)?;
        let c = compose(&a.0, &b.0, order).or_status()?;
        *out = Box::into_raw(Box::new(GermlabSeries(c)));
        Ok(())
    })
}

/// Evaluate at `z`, given as `dim` interleaved (re, im) pairs; writes the
/// same layout to `out`.
///
/// # Safety
/// `z` and `out` must each hold `2 * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn germlab_series_evaluate(
    series: *const GermlabSeries,
    z: *const f64,
    out: *mut f64,
) -> GermlabStatus {
    guard(|| {
        let s = in_ref(series)?;
        if z.is_null() || out.is_null() {
            return Err(fail(GermlabStatus::NullPointer, "null buffer"));
        }
        let n = s.0.dim();
        let prec = s.0.precision();
        let input = std::slice::from_raw_parts(z, 2 * n);
        let point: Vec<_> = input.chunks(2).map(|c| numeric::from_f64(prec, c[0], c[1])).collect();
        let val = s.0.evaluate(&point).or_status()?;
        let output = std::slice::from_raw_parts_mut(out, 2 * n);
        for (j, v) in val.iter().enumerate() {
            output[2 * j] = v.real().to_f64();
            output[2 * j + 1] = v.imag().to_f64();
        }
        Ok(())
    })
}

// ---- germs and linearization ----

/// Parse a germ document. `precision_bits` of 0 keeps the file's precision
/// (53 bits when absent).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_germ_from_json(
    json: *const c_char,
    precision_bits: u32,
    out: *mut *mut GermlabGerm,
) -> GermlabStatus {
    guard(|| {
        let text = read_str(json)?;
        let out = out_ref(out)?;
        let mut germ = GermSpec::from_json(text, Precision::DOUBLE).or_status()?;
        if precision_bits != 0 {
            germ = germ.with_precision(precision(precision_bits)?).or_status()?;
        }
        *out = Box::into_raw(Box::new(GermlabGerm(germ)));
        Ok(())
    })
}

/// # Safety
/// `germ` must be NULL or a handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn germlab_germ_free(germ: *mut GermlabGerm) {
    if !germ.is_null() {
        drop(Box::from_raw(germ));
    }
}

/// # Safety
/// `germ` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn germlab_germ_dim(germ: *const GermlabGerm) -> usize {
    germ.as_ref().map_or(0, |g| g.0.dim())
}

/// Solve the conjugacy equation. `inverse = false` gives `F o H = H o R_A`,
/// `inverse = true` gives `H o F = R_A o H`. `min_divisor` may be NULL.
///
/// # Safety
/// `germ` must be live; `out` writable; `min_divisor` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_linearize(
    germ: *const GermlabGerm,
    order: u32,
    inverse: bool,
    out: *mut *mut GermlabSeries,
    min_divisor: *mut f64,
) -> GermlabStatus {
    guard(|| {
        let g = in_ref(germ)?;
        let out = out_ref(out)?;
        let dir = if inverse { Direction::Inverse } else { Direction::Direct };
        let lin = solve_schroder(&g.0, order, dir, SolveOptions::default()).or_status()?;
        if let Some(m) = min_divisor.as_mut() {
            *m = lin.min_divisor;
        }
        *out = Box::into_raw(Box::new(GermlabSeries(lin.series)));
        Ok(())
    })
}

/// `Omega(p)` for the germ's multipliers.
///
/// # Safety
/// `germ` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_omega(germ: *const GermlabGerm, p: u32, out: *mut f64) -> GermlabStatus {
    guard(|| {
        let g = in_ref(germ)?;
        *out_ref(out)? = g.0.multipliers().omega(p).or_status()?.omega;
        Ok(())
    })
}

/// Sup norms of `H_N o F - R_A o H_N` at `radius`, where `h` solves the
/// inverse equation and is truncated at `order`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_remainder_sup(
    germ: *const GermlabGerm,
    h: *const GermlabSeries,
    order: u32,
    radius: f64,
    samples: usize,
    sup_grid: *mut f64,
    sup_coeffsum: *mut f64,
) -> GermlabStatus {
    guard(|| {
        let (g, h) = (in_ref(germ)?, in_ref(h)?);
        let (sg, sc) = (out_ref(sup_grid)?, out_ref(sup_coeffsum)?);
        let h_n = h.0.truncate(order);
        let out_order = exact_remainder_order(order, &g.0).max(order + 1);
        let r = remainder_series(&h_n, &g.0, out_order).or_status()?;
        let sup = remainder_sup(&r, radius, samples).or_status()?;
        *sg = sup.sup_grid;
        *sc = sup.sup_coeffsum;
        Ok(())
    })
}

/// First `m` with `|F^m(z0)| > escape_radius`, or -1 if none within
/// `max_iter`. `z0` holds `dim` interleaved (re, im) pairs.
///
/// # Safety
/// `germ` must be live; `z0` must hold `2 * dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_escape_time(
    germ: *const GermlabGerm,
    z0: *const f64,
    max_iter: u64,
    escape_radius: f64,
    precision_bits: u32,
    out: *mut i64,
) -> GermlabStatus {
    guard(|| {
        let g = in_ref(germ)?;
        let out = out_ref(out)?;
        if z0.is_null() {
            return Err(fail(GermlabStatus::NullPointer, "null z0"));
        }
        let prec = precision(precision_bits)?;
        let raw = std::slice::from_raw_parts(z0, 2 * g.0.dim());
        let z: Vec<_> = raw.chunks(2).map(|c| numeric::from_f64(prec, c[0], c[1])).collect();
        let opts = OrbitOptions { max_iter, escape_radius, precision: prec, stride: 0 };
        let rec = stability::orbit(&g.0, &z, &opts).or_status()?;
        if rec.overflow {
            return Err(fail(GermlabStatus::Numeric, "orbit overflowed"));
        }
        *out = rec.escape_time.map_or(-1, |t| i64::try_from(t).unwrap_or(i64::MAX));
        Ok(())
    })
}

// ---- continued fractions ----

/// Continued fraction `[a_0; a_1, ...]` from `len >= 3` quotients.
///
/// # Safety
/// `quotients` must hold `len` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_from_quotients(
    quotients: *const u64,
    len: usize,
    precision_bits: u32,
    out: *mut *mut GermlabCf,
) -> GermlabStatus {
    guard(|| {
        if quotients.is_null() {
            return Err(fail(GermlabStatus::NullPointer, "null quotients"));
        }
        let out = out_ref(out)?;
        let qs = std::slice::from_raw_parts(quotients, len);
        let cf = ContinuedFraction::from_u64(qs, precision(precision_bits)?).or_status()?;
        *out = Box::into_raw(Box::new(GermlabCf(cf)));
        Ok(())
    })
}

/// Golden mean with `depth` quotients after `a_0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_golden(
    depth: usize,
    precision_bits: u32,
    out: *mut *mut GermlabCf,
) -> GermlabStatus {
    guard(|| {
        let out = out_ref(out)?;
        let cf = cf::golden(depth, precision(precision_bits)?).or_status()?;
        *out = Box::into_raw(Box::new(GermlabCf(cf)));
        Ok(())
    })
}

/// Factorial-growth quotients `a_{k+1} = round(q_k!^s / q_k)`. Stops early
/// once magnitudes leave the representable range; `reached` (may be NULL)
/// receives the depth actually built.
///
/// # Safety
/// `out` writable; `reached` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_factorial_growth(
    s: f64,
    depth: usize,
    q1: u64,
    precision_bits: u32,
    out: *mut *mut GermlabCf,
    reached: *mut usize,
) -> GermlabStatus {
    guard(|| {
        let out = out_ref(out)?;
        let prec = precision(precision_bits)?;
        let built = build_quotients_saturating(s, depth, q1, prec).or_status()?;
        if let Some(r) = reached.as_mut() {
            *r = built.reached;
        }
        let cf = ContinuedFraction::new(built.quotients, prec).or_status()?;
        *out = Box::into_raw(Box::new(GermlabCf(cf)));
        Ok(())
    })
}

/// # Safety
/// `cf` must be NULL or a handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_free(cf: *mut GermlabCf) {
    if !cf.is_null() {
        drop(Box::from_raw(cf));
    }
}

/// # Safety
/// `cf` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_depth(cf: *const GermlabCf) -> usize {
    cf.as_ref().map_or(0, |c| c.0.depth())
}

/// `sum_{j<=k} ln q_{j+1} / q_j`.
///
/// # Safety
/// `cf` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_bruno_partial_sum(cf: *const GermlabCf, k: usize, out: *mut f64) -> GermlabStatus {
    guard(|| {
        let c = in_ref(cf)?;
        *out_ref(out)? = c.0.bruno_partial_sum(k).or_status()?.to_f64();
        Ok(())
    })
}

/// `beta_k`; `k = -1` gives `beta_{-1} = 1`.
///
/// # Safety
/// `cf` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_beta(cf: *const GermlabCf, k: i64, out: *mut f64) -> GermlabStatus {
    guard(|| {
        let c = in_ref(cf)?;
        let idx = match k {
            -1 => None,
            k if k >= 0 => Some(k as usize),
            _ => return Err(fail(GermlabStatus::InvalidArgument, "k must be at least -1")),
        };
        *out_ref(out)? = c.0.beta(idx).or_status()?.to_f64();
        Ok(())
    })
}

/// Diagnostic record of `kind` (`btilde_s`, `bprime_s`, `bgammasigma`,
/// `perez_marco`) as JSON. The caller owns `out`.
///
/// # Safety
/// `cf` live; `kind` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_cf_condition_json(
    cf: *const GermlabCf,
    kind: *const c_char,
    s: f64,
    out: *mut *mut c_char,
) -> GermlabStatus {
    guard(|| {
        let c = in_ref(cf)?;
        let kind = ConditionKind::parse(read_str(kind)?).or_status()?;
        let out = out_ref(out)?;
        let params = if kind == ConditionKind::Bgammasigma {
            ConditionParams::geometric_sequences(s, c.0.depth())
        } else {
            ConditionParams::with_s(s)
        };
        let diag = evaluate_condition(kind, &c.0, &params).or_status()?;
        let text = serde_json::to_string(&diag).map_err(|e| fail(GermlabStatus::Numeric, e.to_string()))?;
        *out = give_string(text);
        Ok(())
    })
}

// ---- truncation and horizons ----

/// Optimal truncation order `N = floor(B4 (r_star / |z|)^{1/s})`, at least 2.
/// `clamped` (may be NULL) is set when the floor fell below 2.
///
/// # Safety
/// `n_bar` writable; `clamped` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_optimal_truncation(
    r_star: f64,
    z_abs: f64,
    s: f64,
    b4: f64,
    n_bar: *mut u32,
    clamped: *mut bool,
) -> GermlabStatus {
    guard(|| {
        let n = out_ref(n_bar)?;
        let opt = optimal_truncation(r_star, z_abs, s, b4).or_status()?;
        *n = opt.n_bar;
        if let Some(c) = clamped.as_mut() {
            *c = opt.clamped;
        }
        Ok(())
    })
}

/// `K = floor(R/a exp(b/(2R)^alpha))`, saturating at `UINT64_MAX`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_lemma_horizon(r: f64, a: f64, b: f64, alpha: f64, out: *mut u64) -> GermlabStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = IterationParams::new(r, a, b, alpha).or_status()?.horizon();
        Ok(())
    })
}

/// `ln K*` with `K* = A**^{-1} exp(B** (r** / |z0|)^{1/s})`.
///
/// # Safety
/// `ln_k` writable.
#[no_mangle]
pub unsafe extern "C" fn germlab_stability_ln_horizon(
    a_double_star: f64,
    b_double_star: f64,
    r_double_star: f64,
    s: f64,
    z0_abs: f64,
    ln_k: *mut f64,
) -> GermlabStatus {
    guard(|| {
        let out = out_ref(ln_k)?;
        *out = stability::stability_horizon(a_double_star, b_double_star, 1.0, r_double_star, s, z0_abs)
            .or_status()?
            .ln_k_star;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> Option<String> {
        LAST_ERROR.with(|e| e.borrow().as_ref().map(|c| c.to_string_lossy().into_owned()))
    }

    #[test]
    fn status_names_match_library_codes() {
        let errors = [
            Error::DimensionMismatch { expected: 1, found: 2 },
            Error::ConstantTerm,
            Error::NotTangentToIdentity,
            Error::Resonant { alpha: vec![2], component: 0 },
            Error::PrecisionFloor { modulus: 0.0, required_bits: 9000 },
            Error::InsufficientDepth { needed: 3, depth: 2 },
            Error::DepthOverflow { requested: 8, representable: 6 },
            Error::Domain("x".into()),
            Error::InvalidArgument("x".into()),
            Error::Missing("x".into()),
            Error::DegenerateFit("x".into()),
            Error::Parse("x".into()),
            Error::Numeric("x".into()),
        ];
        for e in &errors {
            let name = unsafe { CStr::from_ptr(germlab_status_name(GermlabStatus::from(e))) };
            assert_eq!(name.to_str().unwrap(), e.code());
        }
    }

    #[test]
    fn guard_turns_panics_into_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, GermlabStatus::Panic);
        assert_eq!(last_error().as_deref(), Some("internal panic"));
    }

    #[test]
    fn guard_clears_stale_errors() {
        let _ = guard(|| Err(fail(GermlabStatus::Domain, "bad")));
        assert_eq!(last_error().as_deref(), Some("bad"));
        assert_eq!(guard(|| Ok(())), GermlabStatus::Ok);
        assert_eq!(last_error(), None);
    }

    #[test]
    fn nul_bytes_in_messages_are_replaced() {
        let p = give_string("a\0b".into());
        let s = unsafe { CString::from_raw(p) };
        assert_eq!(s.to_str().unwrap(), "a b");
    }
}
