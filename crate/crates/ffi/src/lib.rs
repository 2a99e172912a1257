//! C ABI over a loaded model bundle.
//!
//! Every function returns an [`RdStatus`]; on failure the message is kept per
//! thread and read with [`rd_last_error_message`]. Pipelines are opaque
//! handles released with [`rd_pipeline_free`]. Domain indices follow
//! [`rd_domain_name`]: 0-6 are the risk-factor domains, 7 is `Other`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use riskdomain::bundle::load_bundle;
use riskdomain::classification::Pipeline;
use riskdomain::corpus::{Domain, NUM_DOMAINS};
use riskdomain::evaluation::{fleiss_kappa, multi_kappa};
use riskdomain::text::porter_stem;
use riskdomain::Error;

/// Number of risk-factor domains, the length of a score array.
pub const RD_NUM_DOMAINS: usize = 7;
/// Risk-factor domains plus `Other`; the most labels a paragraph can get.
pub const RD_MAX_LABELS: usize = 8;

const _: () = assert!(RD_NUM_DOMAINS == NUM_DOMAINS && RD_MAX_LABELS == Domain::ALL.len());

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdStatus {
    Ok = 0,
    /// Invalid configuration or parameters.
    Config = 1,
    /// Malformed or inconsistent input data, including unreadable files.
    Data = 2,
    /// A numerical failure such as an undefined statistic.
    Numerical = 3,
    /// Null pointer, invalid UTF-8 or an out-of-range argument.
    InvalidArgument = 4,
    /// Internal panic caught at the boundary.
    Internal = 5,
}

/// Loaded classification pipeline.
pub struct RdPipeline {
    inner: Pipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: RdStatus, message: &str) -> RdStatus {
    set_error(message);
    status
}

fn from_error(e: &Error) -> RdStatus {
    let status = match e.exit_code() {
        1 => RdStatus::Config,
        3 => RdStatus::Numerical,
        _ => RdStatus::Data,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, turning panics into [`RdStatus::Internal`].
fn guard(f: impl FnOnce() -> RdStatus) -> RdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == RdStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(RdStatus::Internal, "internal error (panic) in riskdomain"),
    }
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, RdStatus> {
    if p.is_null() {
        return Err(fail(RdStatus::InvalidArgument, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RdStatus::InvalidArgument, &format!("{what} is not valid UTF-8")))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Display name of domain `index` (0-7) as a static string, or null.
#[no_mangle]
pub extern "C" fn rd_domain_name(index: u32) -> *const c_char {
    const NAMES: [&str; RD_MAX_LABELS] = [
        "Appearance\0",
        "Thought Content\0",
        "Interpersonal\0",
        "Mood\0",
        "Occupation\0",
        "Thought Process\0",
        "Substance\0",
        "Other\0",
    ];
    NAMES.get(index as usize).map_or(ptr::null(), |s| s.as_ptr().cast())
}

/// Loads the bundle directory `dir` into `*out`.
///
/// # Safety
/// `dir` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rd_pipeline_load(dir: *const c_char, out: *mut *mut RdPipeline) -> RdStatus {
    guard(|| {
        if out.is_null() {
            return fail(RdStatus::InvalidArgument, "out is null");
        }
        *out = ptr::null_mut();
        let dir = match utf8(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        match load_bundle(Path::new(dir)) {
            Ok((inner, _)) => {
                *out = Box::into_raw(Box::new(RdPipeline { inner }));
                RdStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Releases a pipeline; null is ignored.
///
/// # Safety
/// `pipeline` must come from [`rd_pipeline_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rd_pipeline_free(pipeline: *mut RdPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Classifies one paragraph.
///
/// `scores` receives [`RD_NUM_DOMAINS`] values in domain order. `labels`
/// receives up to [`RD_MAX_LABELS`] domain indices, best first, and
/// `*n_labels` their count. Either of `scores` and `labels` may be null to
/// skip it; `n_labels` must be non-null when `labels` is.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `text` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rd_pipeline_classify(
    pipeline: *const RdPipeline,
    text: *const c_char,
    scores: *mut f64,
    labels: *mut u32,
    n_labels: *mut usize,
) -> RdStatus {
    guard(|| {
        if pipeline.is_null() {
            return fail(RdStatus::InvalidArgument, "pipeline is null");
        }
        if !labels.is_null() && n_labels.is_null() {
            return fail(RdStatus::InvalidArgument, "n_labels is null");
        }
        let text = match utf8(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let c = match (*pipeline).inner.classify(text) {
            Ok(c) => c,
            Err(e) => return from_error(&e),
        };
        if !scores.is_null() {
            ptr::copy_nonoverlapping(c.scores.0.as_ptr(), scores, NUM_DOMAINS);
        }
        if !labels.is_null() {
            for (i, d) in c.labels.iter().enumerate() {
                *labels.add(i) = d.index() as u32;
            }
            *n_labels = c.labels.len();
        } else if !n_labels.is_null() {
            *n_labels = c.labels.len();
        }
        RdStatus::Ok
    })
}

/// Porter stem of `word` in `*out`; release it with [`rd_string_free`].
///
/// # Safety
/// `word` must be nul-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rd_porter_stem(word: *const c_char, out: *mut *mut c_char) -> RdStatus {
    guard(|| {
        if out.is_null() {
            return fail(RdStatus::InvalidArgument, "out is null");
        }
        *out = ptr::null_mut();
        let word = match utf8(word, "word") {
            Ok(w) => w,
            Err(s) => return s,
        };
        let stem = CString::new(porter_stem(word)).expect("stem has no nul");
        *out = stem.into_raw();
        RdStatus::Ok
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

type Kappa = fn(&[Vec<i32>]) -> riskdomain::Result<f64>;

unsafe fn kappa_call(f: Kappa, ratings: *const i32, n_items: usize, n_raters: usize, out: *mut f64) -> RdStatus {
    guard(|| {
        if ratings.is_null() || out.is_null() {
            return fail(RdStatus::InvalidArgument, "ratings or out is null");
        }
        let Some(len) = n_items.checked_mul(n_raters) else {
            return fail(RdStatus::InvalidArgument, "table size overflows");
        };
        let flat = std::slice::from_raw_parts(ratings, len);
        let items: Vec<Vec<i32>> = flat.chunks(n_raters.max(1)).map(<[i32]>::to_vec).collect();
        match f(&items) {
            Ok(k) => {
                *out = k;
                RdStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Fleiss's kappa of a row-major `n_items x n_raters` table of category codes.
///
/// # Safety
/// `ratings` must hold `n_items * n_raters` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rd_fleiss_kappa(
    ratings: *const i32,
    n_items: usize,
    n_raters: usize,
    out: *mut f64,
) -> RdStatus {
    kappa_call(fleiss_kappa::<i32>, ratings, n_items, n_raters, out)
}

/// Multi-rater kappa (pairwise chance agreement; Cohen's kappa for two
/// raters) of a row-major `n_items x n_raters` table.
///
/// # Safety
/// As for [`rd_fleiss_kappa`].
#[no_mangle]
pub unsafe extern "C" fn rd_multi_kappa(
    ratings: *const i32,
    n_items: usize,
    n_raters: usize,
    out: *mut f64,
) -> RdStatus {
    kappa_call(multi_kappa::<i32>, ratings, n_items, n_raters, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_names_match_the_core_order() {
        for d in Domain::ALL {
            let name = unsafe { CStr::from_ptr(rd_domain_name(d.index() as u32)) };
            assert_eq!(name.to_str().unwrap(), d.display_name());
        }
        assert!(rd_domain_name(RD_MAX_LABELS as u32).is_null());
    }
}
