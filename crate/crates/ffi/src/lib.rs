//! C ABI for memlens.
//!
//! Objects are opaque handles created by `ml_*` constructors and released
//! with the matching `ml_*_free`. Every fallible call returns an [`MlStatus`];
//! on failure, [`ml_last_error_message`] describes the error for the calling
//! thread. Outputs are written through pointer arguments only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use memlens::bounds::{complexity_measure, DecayProfile};
use memlens::experiments::{make_target, Target};
use memlens::models::{synthesize_lowrank, synthesize_radix, CnnSpec, CnnSpecFile};
use memlens::sequence::parse_sequence_json;
use memlens::tensor::truncation_error_bound;
use memlens::{Error, Sequence, Spectrum, Tensor};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Computation = 3,
    Parse = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A causal sequence.
pub struct MlSequence(Sequence);

/// Pooled singular values of a tensorised sequence.
pub struct MlSpectrum(Spectrum);

/// A linear dilated CNN.
pub struct MlCnnSpec(CnnSpec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> MlStatus {
    match e {
        Error::Parse(_) => MlStatus::Parse,
        Error::InvalidParameter(_)
        | Error::InvalidDilation
        | Error::DimensionMismatch { .. }
        | Error::NotScalar(_)
        | Error::ShapeMismatch(_)
        | Error::ModeOutOfRange { .. } => MlStatus::InvalidArgument,
        _ => MlStatus::Computation,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (MlStatus, String)>) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MlStatus::Panic
        }
    }
}

fn lib(e: Error) -> (MlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MlStatus, String) {
    (MlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MlStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (MlStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (MlStatus::Parse, format!("{what}: {e}")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next `ml_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from an `ml_*` function that returns an owned string, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ml_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Finite sequence from `len` row-major values of dimension `dim`.
///
/// # Safety
/// `values` must point to `len` readable doubles (may be NULL when `len == 0`);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_from_values(
    dim: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut MlSequence,
) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = if len == 0 {
            Vec::new()
        } else if values.is_null() {
            return Err(null("values"));
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        if dim == 0 || !len.is_multiple_of(dim) {
            return Err((MlStatus::InvalidArgument, format!("{len} values do not fill rows of dimension {dim}")));
        }
        *out = boxed(MlSequence(Sequence::finite(dim, data).map_err(lib)?));
        Ok(())
    })
}

/// Builtin target: `rho1`, `rho2`, `rho3`, `exp:<gamma>` or `impulse:<t>`.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_builtin(id: *const c_char, out: *mut *mut MlSequence) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let target: Target = c_str(id, "id")?.parse().map_err(lib)?;
        *out = boxed(MlSequence(make_target(target).map_err(lib)?));
        Ok(())
    })
}

/// Sequence from its JSON literal.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_from_json(json: *const c_char, out: *mut *mut MlSequence) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(MlSequence(parse_sequence_json(c_str(json, "json")?).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `seq` must come from an `ml_sequence_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_free(seq: *mut MlSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Channel dimension of `seq`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_dim(seq: *const MlSequence, out: *mut usize) -> MlStatus {
    guard(|| {
        *out_ptr(out, "out")? = as_ref(seq, "seq")?.0.dim();
        Ok(())
    })
}

/// Largest time index with a nonzero entry, or -1 for empty support.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_radius(seq: *const MlSequence, out: *mut i64) -> MlStatus {
    guard(|| {
        let r = as_ref(seq, "seq")?.0.radius();
        *out_ptr(out, "out")? = r.map_or(-1, |r| r as i64);
        Ok(())
    })
}

/// Values at times `0..n` (row-major, `n * dim` doubles) into `buf`.
///
/// # Safety
/// `buf` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_values(seq: *const MlSequence, n: usize, buf: *mut f64, cap: usize) -> MlStatus {
    guard(|| {
        let s = &as_ref(seq, "seq")?.0;
        let need = n.checked_mul(s.dim()).ok_or((MlStatus::InvalidArgument, "n too large".to_string()))?;
        if need > cap {
            return Err((MlStatus::BufferTooSmall, format!("need {need} doubles, buffer holds {cap}")));
        }
        if need > 0 && buf.is_null() {
            return Err(null("buf"));
        }
        for t in 0..n {
            for c in 0..s.dim() {
                *buf.add(t * s.dim() + c) = s.get(t, c);
            }
        }
        Ok(())
    })
}

/// `sqrt(sum_{t >= start} |s(t)|^2)` as a value and an interval half-width.
///
/// # Safety
/// Pointers must be valid; `half_width` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_tail_norm(
    seq: *const MlSequence,
    start: usize,
    value: *mut f64,
    half_width: *mut f64,
) -> MlStatus {
    guard(|| {
        let t = as_ref(seq, "seq")?.0.tail_norm(start);
        *out_ptr(value, "value")? = t.value;
        if let Some(h) = half_width.as_mut() {
            *h = t.half_width;
        }
        Ok(())
    })
}

/// Spectrum of the order-`k` tensorisation of `seq` restricted to `[0, l^k)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_compute(
    seq: *const MlSequence,
    l: usize,
    k: usize,
    out: *mut *mut MlSpectrum,
) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = &as_ref(seq, "seq")?.0;
        let n = l
            .checked_pow(k as u32)
            .ok_or((MlStatus::InvalidArgument, format!("{l}^{k} overflows")))?;
        let t = Tensor::tensorize(&s.head(n), l, k).map_err(lib)?;
        *out = boxed(MlSpectrum(t.singular_values()));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from [`ml_spectrum_compute`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_free(spec: *mut MlSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_len(spec: *const MlSpectrum, out: *mut usize) -> MlStatus {
    guard(|| {
        *out_ptr(out, "out")? = as_ref(spec, "spec")?.0.len();
        Ok(())
    })
}

/// Sorted values, and optionally their 0-based modes.
///
/// # Safety
/// `values` (and `modes` when non-NULL) must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_values(
    spec: *const MlSpectrum,
    values: *mut f64,
    modes: *mut usize,
    cap: usize,
) -> MlStatus {
    guard(|| {
        let s = &as_ref(spec, "spec")?.0;
        if s.len() > cap {
            return Err((MlStatus::BufferTooSmall, format!("need {} entries, buffer holds {cap}", s.len())));
        }
        if values.is_null() && !s.is_empty() {
            return Err(null("values"));
        }
        for (i, e) in s.entries().iter().enumerate() {
            *values.add(i) = e.value;
            if !modes.is_null() {
                *modes.add(i) = e.mode;
            }
        }
        Ok(())
    })
}

/// Number of values above `rtol` times the largest.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_rank(spec: *const MlSpectrum, rtol: f64, out: *mut usize) -> MlStatus {
    guard(|| {
        *out_ptr(out, "out")? = as_ref(spec, "spec")?.0.rank(rtol);
        Ok(())
    })
}

/// Root of the squared spectrum tail past the first `kept` values.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_truncation_error(spec: *const MlSpectrum, kept: usize, out: *mut f64) -> MlStatus {
    guard(|| {
        *out_ptr(out, "out")? = truncation_error_bound(&as_ref(spec, "spec")?.0, kept).value;
        Ok(())
    })
}

/// Complexity measure of a finitely supported `seq` for the decay profile
/// given as JSON, e.g. `{"family":"exponential","scale":1,"base":0.5}`.
/// May write +infinity.
///
/// # Safety
/// Pointers must be valid; `g_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ml_complexity_measure(
    seq: *const MlSequence,
    l: usize,
    g_json: *const c_char,
    out: *mut f64,
) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g: DecayProfile =
            serde_json::from_str(c_str(g_json, "g_json")?).map_err(|e| (MlStatus::Parse, e.to_string()))?;
        *out = complexity_measure(&as_ref(seq, "seq")?.0, l, &g).map_err(lib)?.value;
        Ok(())
    })
}

/// Exact CNN from one-hot filters on the base-`l` digits of each nonzero time.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_synthesize_radix(seq: *const MlSequence, l: usize, out: *mut *mut MlCnnSpec) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(MlCnnSpec(synthesize_radix(&as_ref(seq, "seq")?.0, l).map_err(lib)?));
        Ok(())
    })
}

/// Exact depth-`k` CNN from the HOSVD of the tensorised target.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_synthesize_lowrank(
    seq: *const MlSequence,
    l: usize,
    k: usize,
    out: *mut *mut MlCnnSpec,
) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(MlCnnSpec(synthesize_lowrank(&as_ref(seq, "seq")?.0, l, k).map_err(lib)?));
        Ok(())
    })
}

/// CNN from its JSON form.
///
/// # Safety
/// `json` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_from_json(json: *const c_char, out: *mut *mut MlCnnSpec) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let file: CnnSpecFile =
            serde_json::from_str(c_str(json, "json")?).map_err(|e| (MlStatus::Parse, e.to_string()))?;
        *out = boxed(MlCnnSpec(CnnSpec::try_from(file).map_err(lib)?));
        Ok(())
    })
}

/// JSON form of `spec`; free with [`ml_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_to_json(spec: *const MlCnnSpec, out: *mut *mut c_char) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = serde_json::to_string(&CnnSpecFile::from(&as_ref(spec, "spec")?.0))
            .map_err(|e| (MlStatus::Computation, e.to_string()))?;
        *out = CString::new(text).map_err(|e| (MlStatus::Computation, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Number of nonzero filters.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_filter_count(spec: *const MlCnnSpec, out: *mut usize) -> MlStatus {
    guard(|| {
        *out_ptr(out, "out")? = as_ref(spec, "spec")?.0.filter_count();
        Ok(())
    })
}

/// Depth of `spec`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_depth(spec: *const MlCnnSpec, out: *mut usize) -> MlStatus {
    guard(|| {
        *out_ptr(out, "out")? = as_ref(spec, "spec")?.0.depth();
        Ok(())
    })
}

/// The representation the network induces, as a new sequence.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_representation(spec: *const MlCnnSpec, out: *mut *mut MlSequence) -> MlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(MlSequence(as_ref(spec, "spec")?.0.representation()));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from an `ml_cnn_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ml_cnn_free(spec: *mut MlCnnSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}
