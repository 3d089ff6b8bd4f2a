//! C ABI for the twistlab library: opaque representation handles, status
//! codes, and a thread-local error message. The header is generated into
//! include/twistlab.h by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twistlab::construct::{build_rep, random_dt_rep, ActionCoords, AngleVector};
use twistlab::dynamics::{dehn_twist_power, twist_flow};
use twistlab::error::TwistError;
use twistlab::surface::{curve_angle, moment_map, ChainCurve, ChainRep};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    TlOk = 0,
    TlInvalidInput = 1,
    TlAnglesCondition = 2,
    TlPolytopeViolation = 3,
    TlNotElliptic = 4,
    TlDegenerateOrbit = 5,
    TlIntegrityFailure = 6,
    TlNumericalFailure = 7,
    TlNullPointer = 8,
    TlBadUtf8 = 9,
    TlPanic = 10,
}

/// Opaque handle to a chain representation.
pub struct TlRep {
    inner: ChainRep,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(msg).ok();
    });
}

fn status_of(err: &TwistError) -> TlStatus {
    match err {
        TwistError::AnglesConditionViolated { .. } => TlStatus::TlAnglesCondition,
        TwistError::PolytopeViolation => TlStatus::TlPolytopeViolation,
        TwistError::NotElliptic | TwistError::NotTotallyElliptic { .. } => TlStatus::TlNotElliptic,
        TwistError::DegenerateOrbit { .. } => TlStatus::TlDegenerateOrbit,
        TwistError::IntegrityFailure { .. } | TwistError::DichotomyViolated { .. } => {
            TlStatus::TlIntegrityFailure
        }
        TwistError::NumericalFailure(_) | TwistError::NotNormalized => {
            TlStatus::TlNumericalFailure
        }
        _ => TlStatus::TlInvalidInput,
    }
}

fn fail(err: TwistError) -> TlStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

fn guarded(f: impl FnOnce() -> TlStatus) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            TlStatus::TlPanic
        }
    }
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() && len > 0 {
        None
    } else if len == 0 {
        Some(&[])
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn curve_arg(s: *const c_char, n: usize) -> Result<ChainCurve, TlStatus> {
    if s.is_null() {
        set_error("null curve string".into());
        return Err(TlStatus::TlNullPointer);
    }
    let text = match CStr::from_ptr(s).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("curve string is not valid UTF-8".into());
            return Err(TlStatus::TlBadUtf8);
        }
    };
    let c: ChainCurve = text.parse().map_err(fail)?;
    c.validate(n).map_err(fail)?;
    Ok(c)
}

/// Last error message of the current thread, or null. Owned by the library;
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Library version string (static storage).
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a representation from n peripheral angles, n-3 moment values and
/// n-3 twist parameters.
///
/// # Safety
/// `alpha` must point to n doubles, `x` and `twists` to n-3 doubles, and
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_build(
    alpha: *const f64,
    n: usize,
    x: *const f64,
    twists: *const f64,
    out: *mut *mut TlRep,
) -> TlStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return TlStatus::TlNullPointer;
        }
        let dim = n.saturating_sub(3);
        let (Some(alpha), Some(x), Some(twists)) = (
            slice_arg(alpha, n),
            slice_arg(x, dim),
            slice_arg(twists, dim),
        ) else {
            set_error("null array argument".into());
            return TlStatus::TlNullPointer;
        };
        let alpha = match AngleVector::new(alpha.to_vec()) {
            Ok(a) => a,
            Err(e) => return fail(e),
        };
        match build_rep(&alpha, &ActionCoords(x.to_vec()), twists) {
            Ok(rep) => {
                *out = Box::into_raw(Box::new(TlRep { inner: rep }));
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds a seeded random representation on the Deroin-Tholozan locus.
///
/// # Safety
/// `alpha` must point to n doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_random(
    alpha: *const f64,
    n: usize,
    seed: u64,
    out: *mut *mut TlRep,
) -> TlStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return TlStatus::TlNullPointer;
        }
        let Some(alpha) = slice_arg(alpha, n) else {
            set_error("null alpha".into());
            return TlStatus::TlNullPointer;
        };
        let alpha = match AngleVector::new(alpha.to_vec()) {
            Ok(a) => a,
            Err(e) => return fail(e),
        };
        match random_dt_rep(&alpha, seed) {
            Ok(rep) => {
                *out = Box::into_raw(Box::new(TlRep { inner: rep }));
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Frees a representation handle. Null is a no-op.
///
/// # Safety
/// `rep` must be a handle returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_free(rep: *mut TlRep) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Number of punctures of the underlying sphere.
///
/// # Safety
/// `rep` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_n(rep: *const TlRep) -> usize {
    if rep.is_null() {
        0
    } else {
        (*rep).inner.n
    }
}

/// Copies the generator matrices into `out` as 4n doubles, row-major per
/// generator (m11, m12, m21, m22).
///
/// # Safety
/// `out` must have room for 4 * tl_rep_n(rep) doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_generators(rep: *const TlRep, out: *mut f64) -> TlStatus {
    guarded(|| {
        if rep.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        let gens = &(*rep).inner.generators;
        let dst = std::slice::from_raw_parts_mut(out, 4 * gens.len());
        for (i, g) in gens.iter().enumerate() {
            dst[4 * i] = g.m11;
            dst[4 * i + 1] = g.m12;
            dst[4 * i + 2] = g.m21;
            dst[4 * i + 3] = g.m22;
        }
        TlStatus::TlOk
    })
}

/// Serializes the representation to JSON. Free the result with
/// tl_string_free.
///
/// # Safety
/// `rep` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_to_json(rep: *const TlRep, out: *mut *mut c_char) -> TlStatus {
    guarded(|| {
        if rep.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        let json = serde_json::to_string(&(*rep).inner).unwrap();
        *out = CString::new(json).unwrap().into_raw();
        TlStatus::TlOk
    })
}

/// Parses a representation from JSON and verifies its invariants.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_rep_from_json(json: *const c_char, out: *mut *mut TlRep) -> TlStatus {
    guarded(|| {
        if json.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("JSON is not valid UTF-8".into());
                return TlStatus::TlBadUtf8;
            }
        };
        let rep: ChainRep = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                set_error(format!("JSON parse error: {e}"));
                return TlStatus::TlInvalidInput;
            }
        };
        if let Err(e) = rep.verify(1e-7) {
            return fail(e);
        }
        *out = Box::into_raw(Box::new(TlRep { inner: rep }));
        TlStatus::TlOk
    })
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Twist flow for time t along a chain curve ("b1", "d2", ...), returning a
/// new handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_twist_flow(
    rep: *const TlRep,
    curve: *const c_char,
    t: f64,
    out: *mut *mut TlRep,
) -> TlStatus {
    guarded(|| {
        if rep.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        let c = match curve_arg(curve, (*rep).inner.n) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match twist_flow(&(*rep).inner, &c, t) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(TlRep { inner: r }));
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// m-fold Dehn twist along a chain curve, returning a new handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_dehn_twist(
    rep: *const TlRep,
    curve: *const c_char,
    m: i64,
    out: *mut *mut TlRep,
) -> TlStatus {
    guarded(|| {
        if rep.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        let c = match curve_arg(curve, (*rep).inner.n) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match dehn_twist_power(&(*rep).inner, &c, m) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(TlRep { inner: r }));
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Rotation angle of a curve holonomy.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_curve_angle(
    rep: *const TlRep,
    curve: *const c_char,
    out: *mut f64,
) -> TlStatus {
    guarded(|| {
        if rep.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        let c = match curve_arg(curve, (*rep).inner.n) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match curve_angle(&(*rep).inner, &c) {
            Ok(a) => {
                *out = a;
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Relative Euler class and volume.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_volume(
    rep: *const TlRep,
    k_out: *mut i64,
    vol_out: *mut f64,
) -> TlStatus {
    guarded(|| {
        if rep.is_null() || k_out.is_null() || vol_out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        match twistlab::euler::relative_euler_class(&(*rep).inner) {
            Ok(r) => {
                *k_out = r.k;
                *vol_out = r.vol;
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Moment-map values theta(b_1..b_{n-3}); `out` needs n-3 doubles.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_moment_map(rep: *const TlRep, out: *mut f64) -> TlStatus {
    guarded(|| {
        if rep.is_null() || (out.is_null() && (*rep).inner.moment_dim() > 0) {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        match moment_map(&(*rep).inner) {
            Ok(x) => {
                let dst = std::slice::from_raw_parts_mut(out, x.len());
                dst.copy_from_slice(&x);
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// The two bracket zeros along the b_i-orbit, written to `zeros_out[0..2]`.
///
/// # Safety
/// `zeros_out` must have room for two doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_bracket_zeros(
    rep: *const TlRep,
    i: usize,
    zeros_out: *mut f64,
) -> TlStatus {
    guarded(|| {
        if rep.is_null() || zeros_out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        match twistlab::bracket::find_bracket_zeros(&(*rep).inner, i) {
            Ok(scan) => {
                let dst = std::slice::from_raw_parts_mut(zeros_out, 2);
                dst[0] = scan.zeros[0];
                dst[1] = scan.zeros[1];
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Set-E membership: 1 if some twisted bracket with |m| <= m_max is nonzero,
/// 0 otherwise.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_in_e(
    rep: *const TlRep,
    i: usize,
    m_max: i64,
    out: *mut i32,
) -> TlStatus {
    guarded(|| {
        if rep.is_null() || out.is_null() {
            set_error("null pointer".into());
            return TlStatus::TlNullPointer;
        }
        match twistlab::bracket::in_e(&(*rep).inner, i, m_max) {
            Ok(b) => {
                *out = b as i32;
                TlStatus::TlOk
            }
            Err(e) => fail(e),
        }
    })
}
