//! C ABI for loading pipeline snapshots, answering API queries and running
//! the pipeline.
//!
//! Every function returns an [`ExcStatus`]. Strings handed out through
//! `out_json` parameters are owned by the caller and must be released with
//! [`exc_string_free`]. After a non-`Ok` status, [`exc_last_error`] describes
//! the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use excavator::app::{api, run_pipeline, PipelineConfig, Snapshot};
use excavator::tcag::export_tcag_json;
use excavator::timeline::{event_monthly_counts, popularity_series, WindowPolicy};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Artifacts missing or inconsistent.
    Load = 3,
    /// Unknown route or focus node.
    NotFound = 4,
    /// Invalid parameters.
    BadRequest = 5,
    /// A pipeline stage failed.
    Pipeline = 6,
    /// A panic was caught at the boundary.
    Internal = 7,
}

/// Opaque handle to a loaded snapshot.
pub struct ExcSnapshot {
    inner: Snapshot,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: ExcStatus, message: impl Into<String>) -> ExcStatus {
    set_error(message);
    status
}

/// Run `body`, turning a panic into `Internal`.
fn guard(body: impl FnOnce() -> ExcStatus) -> ExcStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| fail(ExcStatus::Internal, "panic inside excavator"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, ExcStatus> {
    if p.is_null() {
        return Err(fail(ExcStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ExcStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn read_opt_str<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, ExcStatus> {
    if p.is_null() {
        Ok(None)
    } else {
        read_str(p, name).map(Some)
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> ExcStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            ExcStatus::Ok
        }
        Err(_) => fail(ExcStatus::Internal, "output contains a NUL byte"),
    }
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn exc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread. Valid until the next call
/// into the library from the same thread; never null.
#[no_mangle]
pub extern "C" fn exc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Load the artifacts in `dir` into a new snapshot.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn exc_snapshot_open(dir: *const c_char, out: *mut *mut ExcSnapshot) -> ExcStatus {
    guard(|| {
        if out.is_null() {
            return fail(ExcStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let dir = try_status!(read_str(dir, "dir"));
        match Snapshot::load(&PathBuf::from(dir)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ExcSnapshot { inner }));
                ExcStatus::Ok
            }
            Err(e) => fail(ExcStatus::Load, e.to_string()),
        }
    })
}

/// Release a snapshot. Null is ignored.
///
/// # Safety
/// `snapshot` must come from [`exc_snapshot_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn exc_snapshot_free(snapshot: *mut ExcSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

/// Answer one API request (`path` such as `/api/tcag`, `query` such as
/// `focus=Lockdown`, which may be null). The HTTP-equivalent status goes to
/// `out_http_status` and the JSON body to `out_json`, for errors too.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn exc_snapshot_get(
    snapshot: *const ExcSnapshot,
    path: *const c_char,
    query: *const c_char,
    out_http_status: *mut u16,
    out_json: *mut *mut c_char,
) -> ExcStatus {
    guard(|| {
        if snapshot.is_null() || out_json.is_null() || out_http_status.is_null() {
            return fail(ExcStatus::NullArgument, "snapshot and output pointers must not be null");
        }
        let path = try_status!(read_str(path, "path"));
        let query = try_status!(read_opt_str(query, "query")).unwrap_or("");
        let resp = api::handle(&(*snapshot).inner, path, query);
        *out_http_status = resp.status;
        let written = write_string(out_json, resp.body.to_string());
        if written != ExcStatus::Ok {
            return written;
        }
        match resp.status {
            200 => ExcStatus::Ok,
            404 => fail(ExcStatus::NotFound, resp.body["error"].as_str().unwrap_or_default()),
            _ => fail(ExcStatus::BadRequest, resp.body["error"].as_str().unwrap_or_default()),
        }
    })
}

/// The unfiltered graph as canonical `tcag/1` JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn exc_snapshot_tcag_json(snapshot: *const ExcSnapshot, out_json: *mut *mut c_char) -> ExcStatus {
    guard(|| {
        if snapshot.is_null() || out_json.is_null() {
            return fail(ExcStatus::NullArgument, "snapshot and `out_json` must not be null");
        }
        let bytes = export_tcag_json(&(*snapshot).inner.tcag);
        write_string(out_json, String::from_utf8(bytes).expect("JSON is UTF-8"))
    })
}

/// Popularity series of `event` (optionally limited to `geo`, which may be
/// null) with an odd `window`; `strict` divides every window by its length.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn exc_snapshot_popularity(
    snapshot: *const ExcSnapshot,
    event: *const c_char,
    geo: *const c_char,
    window: usize,
    strict: bool,
    out_json: *mut *mut c_char,
) -> ExcStatus {
    guard(|| {
        if snapshot.is_null() || out_json.is_null() {
            return fail(ExcStatus::NullArgument, "snapshot and `out_json` must not be null");
        }
        let snap = &(*snapshot).inner;
        let event = try_status!(read_str(event, "event"));
        let geo = try_status!(read_opt_str(geo, "geo"));
        if !snap.taxonomy.contains(event) {
            return fail(ExcStatus::BadRequest, format!("unknown event type `{event}`"));
        }
        let policy = if strict { WindowPolicy::Strict } else { WindowPolicy::Shrink };
        let counts = event_monthly_counts(&snap.mentions, event, geo);
        match popularity_series(&counts, &snap.corpus_stats(), window, policy) {
            Ok(series) => write_string(out_json, serde_json::to_string(&series).expect("series serializes")),
            Err(e) => fail(ExcStatus::BadRequest, e.to_string()),
        }
    })
}

/// Run the pipeline over one JSONL `input` with built-in resources, writing
/// artifacts to `out_dir`. On success `out_json` (may be null) receives the
/// summary counts.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn exc_run_pipeline(
    input: *const c_char,
    out_dir: *const c_char,
    out_json: *mut *mut c_char,
) -> ExcStatus {
    guard(|| {
        let input = try_status!(read_str(input, "input"));
        let out_dir = try_status!(read_str(out_dir, "out_dir"));
        let config = PipelineConfig {
            inputs: vec![PathBuf::from(input)],
            out_dir: PathBuf::from(out_dir),
            ..PipelineConfig::default()
        };
        match run_pipeline(&config) {
            Ok(summary) if !out_json.is_null() => {
                write_string(out_json, serde_json::to_string(&summary).expect("summary serializes"))
            }
            Ok(_) => ExcStatus::Ok,
            Err(e) => fail(ExcStatus::Pipeline, e.to_string()),
        }
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn exc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
