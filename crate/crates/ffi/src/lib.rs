//! C ABI over `aimg-core`.
//!
//! Every function returns an [`AimgStatus`]; on failure the message is
//! available from [`aimg_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function. Strings returned by the
//! library are released with [`aimg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aimg_core::classifier::{check_curve, parse_catalog, CatalogEntry, ClassifyError, CurveVerdict};
use aimg_core::matgroup::GroupError;
use aimg_core::modgenus::genus;
use aimg_core::opengroup::{GroupSpec, OpenSubgroup};
use aimg_core::ratfunc::{parse_rational, solve_left_factor, RatError, RationalMap};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AimgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Group = 4,
    ResourceExceeded = 5,
    NoDecomposition = 6,
    UnknownLabel = 7,
    InvariantViolation = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AimgCurveVerdict {
    Member = 0,
    NotMember = 1,
    ExcludedJ = 2,
}

pub struct AimgGroup(OpenSubgroup);

pub struct AimgMap(RationalMap);

pub struct AimgCatalog(Vec<CatalogEntry>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

struct Failure(AimgStatus, String);

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        let code = match e {
            GroupError::ResourceExceeded { .. } | GroupError::SaturationExceeded { .. } => {
                AimgStatus::ResourceExceeded
            }
            _ => AimgStatus::Group,
        };
        Failure(code, e.to_string())
    }
}

impl From<RatError> for Failure {
    fn from(e: RatError) -> Self {
        let code = match e {
            RatError::NoDecomposition | RatError::DegreeMismatch { .. } => AimgStatus::NoDecomposition,
            _ => AimgStatus::Parse,
        };
        Failure(code, e.to_string())
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        let code = match &e {
            ClassifyError::UnknownLabel(_) => AimgStatus::UnknownLabel,
            ClassifyError::InvariantViolation { .. } => AimgStatus::InvariantViolation,
            ClassifyError::Group(_) => AimgStatus::Group,
            _ => AimgStatus::Parse,
        };
        Failure(code, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AimgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AimgStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside aimg");
            AimgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(AimgStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AimgStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(AimgStatus::NullPointer, "null handle".into()))
}

fn out_arg<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(AimgStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failure on this thread; owned by the library.
#[no_mangle]
pub extern "C" fn aimg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn aimg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn aimg_set_cap_order(cap: usize) {
    aimg_core::limits::set_cap_order(cap);
}

/// Parses `{"level": N, "gens": [[a,b,c,d], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_group_from_json(json: *const c_char, out: *mut *mut AimgGroup) -> AimgStatus {
    guard(|| {
        out_arg(out)?;
        let spec: GroupSpec =
            serde_json::from_str(str_arg(json)?).map_err(|e| Failure(AimgStatus::Parse, e.to_string()))?;
        let g = OpenSubgroup::from_spec(&spec)?;
        *out = Box::into_raw(Box::new(AimgGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must come from `aimg_group_from_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn aimg_group_free(g: *mut AimgGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_group_genus(g: *const AimgGroup, out: *mut u64) -> AimgStatus {
    guard(|| {
        out_arg(out)?;
        *out = genus(&ref_arg(g)?.0)?.genus;
        Ok(())
    })
}

/// Index of `[G,G]` in `G ∩ SL2(Ẑ)`.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_group_commutator_index(g: *const AimgGroup, out: *mut u64) -> AimgStatus {
    guard(|| {
        out_arg(out)?;
        *out = ref_arg(g)?.0.commutator_open()?.index;
        Ok(())
    })
}

/// Parses an expression in `t` such as `"(t^2+1)/(2*t)"`.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_map_parse(expr: *const c_char, out: *mut *mut AimgMap) -> AimgStatus {
    guard(|| {
        out_arg(out)?;
        let m: RationalMap = str_arg(expr)?.parse()?;
        *out = Box::into_raw(Box::new(AimgMap(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn aimg_map_free(m: *mut AimgMap) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Canonical text form; release with `aimg_string_free`.
///
/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aimg_map_to_string(m: *const AimgMap) -> *mut c_char {
    match m.as_ref() {
        Some(m) => to_c_string(m.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// `J` with `pi = J ∘ u`.
///
/// # Safety
/// `pi` and `u` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_solve_left_factor(
    pi: *const AimgMap,
    u: *const AimgMap,
    out: *mut *mut AimgMap,
) -> AimgStatus {
    guard(|| {
        out_arg(out)?;
        let j = solve_left_factor(&ref_arg(pi)?.0, &ref_arg(u)?.0)?;
        *out = Box::into_raw(Box::new(AimgMap(j)));
        Ok(())
    })
}

/// Loads catalog JSON text; fails on any invariant violation.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_catalog_from_json(json: *const c_char, out: *mut *mut AimgCatalog) -> AimgStatus {
    guard(|| {
        out_arg(out)?;
        let load = parse_catalog(str_arg(json)?)?;
        if let Some((label, which)) = load.violations.into_iter().next() {
            return Err(ClassifyError::InvariantViolation { label, which }.into());
        }
        *out = Box::into_raw(Box::new(AimgCatalog(load.entries)));
        Ok(())
    })
}

/// The catalog bundled with the library.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aimg_catalog_sample(out: *mut *mut AimgCatalog) -> AimgStatus {
    let text = CString::new(aimg_core::classifier::SAMPLE_CATALOG).expect("no NUL");
    aimg_catalog_from_json(text.as_ptr(), out)
}

/// # Safety
/// `c` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn aimg_catalog_free(c: *mut AimgCatalog) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Membership of `j` (text such as `"1732"` or `"-5/3"`) in `π_G(P^1(Q))`.
/// On `Member`, `witness` (if not null) receives the parameter `t`.
///
/// # Safety
/// Handles must be live, strings NUL-terminated, `verdict` writable and
/// `witness` writable or null.
#[no_mangle]
pub unsafe extern "C" fn aimg_check_curve(
    catalog: *const AimgCatalog,
    label: *const c_char,
    j: *const c_char,
    verdict: *mut AimgCurveVerdict,
    witness: *mut *mut c_char,
) -> AimgStatus {
    guard(|| {
        out_arg(verdict)?;
        let cat = ref_arg(catalog)?;
        let j = parse_rational(str_arg(j)?)?;
        let v = check_curve(str_arg(label)?, &j, &cat.0)?;
        if !witness.is_null() {
            *witness = ptr::null_mut();
        }
        *verdict = match v {
            CurveVerdict::Member { witness: w } => {
                if !witness.is_null() {
                    *witness = to_c_string(w.to_string());
                }
                AimgCurveVerdict::Member
            }
            CurveVerdict::NotMember => AimgCurveVerdict::NotMember,
            CurveVerdict::ExcludedJ => AimgCurveVerdict::ExcludedJ,
        };
        Ok(())
    })
}
