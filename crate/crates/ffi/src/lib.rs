//! C ABI over `cordspec`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every entry point returns a [`CsStatus`]; on
//! failure, `cs_last_error` copies a message for the calling thread. Panics are
//! caught at the boundary and reported as [`CsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cordspec::cords::{enumerate_cords, max_embedded_height, ActionSpectrum};
use cordspec::group::GroupPresentation;
use cordspec::torus::{euler_char, hw_rank_table, Ambient, TorusKnotParams};
use cordspec::variational::{hessian, index_nullity};
use cordspec::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Computation = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsAmbient {
    S3 = 0,
    S2xS1 = 1,
}

/// A holonomy representation of a one-cusped manifold group.
pub struct CsGroup {
    rep: GroupPresentation,
}

/// Cords of a group up to a length cutoff.
pub struct CsSpectrum {
    spec: ActionSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_) | Error::Config(_) => CsStatus::Config,
        Error::InvalidParams(_) | Error::NotEmbedded { .. } => CsStatus::InvalidArgument,
        _ => CsStatus::Computation,
    }
}

fn guard<F>(f: F) -> CsStatus
where
    F: FnOnce() -> Result<(), (CsStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            CsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (CsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CsStatus, String) {
    (CsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (CsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Copies `s` with a trailing NUL. `needed` (if non-null) receives the
/// required capacity including the NUL.
unsafe fn copy_str(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), (CsStatus, String)> {
    let n = s.len() + 1;
    if !needed.is_null() {
        needed.write(n);
    }
    if buf.is_null() || cap < n {
        return Err((CsStatus::BufferTooSmall, format!("need {n} bytes, have {cap}")));
    }
    ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
    buf.add(s.len()).write(0);
    Ok(())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn cs_status_string(status: CsStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CsStatus::Ok => c"ok",
        CsStatus::NullPointer => c"null pointer",
        CsStatus::InvalidArgument => c"invalid argument",
        CsStatus::Config => c"configuration or input error",
        CsStatus::Computation => c"computation failed",
        CsStatus::BufferTooSmall => c"buffer too small",
        CsStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message of the last failed call on this thread.
///
/// # Safety
/// `buf` must be valid for `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> CsStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_str(&msg, buf, cap, needed) {
        Ok(()) => CsStatus::Ok,
        Err((s, _)) => s,
    }
}

/// The bundled figure-eight knot group.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_group_figure_eight(out: *mut *mut CsGroup) -> CsStatus {
    guard(|| {
        let rep = GroupPresentation::from_json(cordspec::FIGURE_EIGHT_JSON)
            .and_then(|r| r.normalized())
            .map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CsGroup { rep })), "out")
    })
}

/// Parses a holonomy file's JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_group_from_json(json: *const c_char, out: *mut *mut CsGroup) -> CsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CsStatus::InvalidArgument, e.to_string()))?;
        let rep = GroupPresentation::from_json(text)
            .and_then(|r| r.normalized())
            .map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CsGroup { rep })), "out")
    })
}

/// # Safety
/// `g` must come from a `cs_group_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn cs_group_free(g: *mut CsGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Largest height at which the cusp horoball is embedded.
///
/// # Safety
/// `g` must be a live group handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_group_max_embedded_height(g: *const CsGroup, out: *mut f64) -> CsStatus {
    guard(|| {
        let g = deref(g, "group")?;
        let h = max_embedded_height(&g.rep).map_err(lib)?;
        write_out(out, h, "out")
    })
}

/// Cords of length ≤ `cutoff` for the cusp horoball at `height`
/// (`height ≤ 0` selects the largest embedded height).
///
/// # Safety
/// `g` must be a live group handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_spectrum_enumerate(
    g: *const CsGroup,
    height: f64,
    cutoff: f64,
    out: *mut *mut CsSpectrum,
) -> CsStatus {
    guard(|| {
        let g = deref(g, "group")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err((CsStatus::InvalidArgument, format!("cutoff {cutoff}")));
        }
        let a0 = if height > 0.0 { height } else { max_embedded_height(&g.rep).map_err(lib)? };
        let spec = enumerate_cords(&g.rep, a0, cutoff).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CsSpectrum { spec })), "out")
    })
}

/// # Safety
/// `s` must come from `cs_spectrum_enumerate`, or be null.
#[no_mangle]
pub unsafe extern "C" fn cs_spectrum_free(s: *mut CsSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live spectrum handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_spectrum_len(s: *const CsSpectrum, out: *mut usize) -> CsStatus {
    guard(|| write_out(out, deref(s, "spectrum")?.spec.len(), "out"))
}

unsafe fn entry<'a>(s: *const CsSpectrum, i: usize) -> Result<&'a ActionSpectrum, (CsStatus, String)> {
    let s = &deref(s, "spectrum")?.spec;
    if i >= s.len() {
        return Err((CsStatus::InvalidArgument, format!("index {i} out of range {}", s.len())));
    }
    Ok(s)
}

/// Length of cord `i` (cords are sorted by length).
///
/// # Safety
/// `s` must be a live spectrum handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_spectrum_length(s: *const CsSpectrum, i: usize, out: *mut f64) -> CsStatus {
    guard(|| write_out(out, entry(s, i)?.entries[i].length, "out"))
}

/// Class word of cord `i`, NUL-terminated.
///
/// # Safety
/// `s` must be a live spectrum handle, `buf` valid for `cap` bytes; `needed`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn cs_spectrum_class_word(
    s: *const CsSpectrum,
    i: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> CsStatus {
    guard(|| copy_str(&entry(s, i)?.entries[i].class_word, buf, cap, needed))
}

/// Morse index, nullity and smallest Hessian eigenvalue of cord `i` on a
/// mesh of `mesh` segments.
///
/// # Safety
/// `s` must be a live spectrum handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cs_spectrum_index(
    s: *const CsSpectrum,
    i: usize,
    mesh: usize,
    index: *mut usize,
    nullity: *mut usize,
    min_eigenvalue: *mut f64,
) -> CsStatus {
    guard(|| {
        let spec = entry(s, i)?;
        if mesh < 4 {
            return Err((CsStatus::InvalidArgument, format!("mesh {mesh}")));
        }
        let r = index_nullity(&hessian(&spec.cords[i], mesh).map_err(lib)?).map_err(lib)?;
        write_out(index, r.index, "index")?;
        write_out(nullity, r.nullity, "nullity")?;
        write_out(min_eigenvalue, r.min_eigenvalue, "min_eigenvalue")
    })
}

/// `2p + q − pq`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_torus_euler_char(p: i64, q: i64, ambient: CsAmbient, out: *mut i64) -> CsStatus {
    guard(|| {
        let params = TorusKnotParams::new(p, q, ambient.into()).map_err(lib)?;
        write_out(out, euler_char(&params), "out")
    })
}

/// Degree-0 and degree-1 counts of cord families of length ≤ `max_length`;
/// all higher degrees vanish.
///
/// # Safety
/// `count0` and `count1` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cs_torus_rank_counts(
    p: i64,
    q: i64,
    ambient: CsAmbient,
    max_length: f64,
    count0: *mut usize,
    count1: *mut usize,
) -> CsStatus {
    guard(|| {
        if count0.is_null() || count1.is_null() {
            return Err(null("count"));
        }
        let params = TorusKnotParams::new(p, q, ambient.into()).map_err(lib)?;
        let t = hw_rank_table(&params, max_length).map_err(lib)?;
        write_out(count0, t.count(0), "count0")?;
        write_out(count1, t.count(1), "count1")
    })
}

impl From<CsAmbient> for Ambient {
    fn from(a: CsAmbient) -> Self {
        match a {
            CsAmbient::S3 => Ambient::S3,
            CsAmbient::S2xS1 => Ambient::S2xS1,
        }
    }
}
