//! C interface to `caidgeo`.
//!
//! Channels and reports are opaque handles owned by the caller and released with
//! the matching `_free` function. Every fallible call returns a [`CaidgeoStatus`];
//! on failure, [`caidgeo_last_error`] describes the problem for the calling thread.
//! Strings returned by the library stay valid until the owning handle is freed
//! (or, for the error text, until the next failing call on the same thread).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use caidgeo::cli::{build_report, exit_code, CliError, Request, Stage};
use caidgeo::corpus::{self, AnyModel, CorpusParams};
use caidgeo::divergence::Channel;
use caidgeo::geometry::Polyhedron;
use caidgeo::report::Report;
use caidgeo::spec_file::{self, ChannelSpecFile, Kind};

/// Result of a call. The nonzero values match the command-line exit codes where they overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaidgeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    SolverFailure = 3,
    /// The report was produced but `A` is only a lower bound, so part of it is withheld.
    Partial = 4,
    /// The report was produced and certification found violations.
    Violations = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// What [`caidgeo_run`] computes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaidgeoStage {
    Capacity = 0,
    Constants = 1,
    Certify = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CaidgeoOptions {
    pub stage: CaidgeoStage,
    /// 1 to 4.
    pub theorem: u8,
    pub samples: usize,
    pub seed: u64,
    /// Solver duality-gap tolerance; zero selects the default.
    pub tol: f64,
}

/// A channel together with its constraint set.
pub struct CaidgeoChannel {
    spec: ChannelSpecFile,
}

pub struct CaidgeoReport {
    report: Report,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CaidgeoStatus, msg: &str) -> CaidgeoStatus {
    set_error(msg);
    status
}

fn status_of(code: i32) -> CaidgeoStatus {
    match code {
        0 => CaidgeoStatus::Ok,
        3 => CaidgeoStatus::SolverFailure,
        4 => CaidgeoStatus::Partial,
        5 => CaidgeoStatus::Violations,
        _ => CaidgeoStatus::InvalidInput,
    }
}

fn from_cli(e: CliError) -> CaidgeoStatus {
    fail(status_of(e.code), &e.message)
}

fn guard(f: impl FnOnce() -> CaidgeoStatus) -> CaidgeoStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CaidgeoStatus::Internal, "internal panic"))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, CaidgeoStatus> {
    if s.is_null() {
        return Err(fail(CaidgeoStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CaidgeoStatus::InvalidInput, "string argument is not UTF-8"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> CaidgeoStatus {
    *out = Box::into_raw(Box::new(value));
    CaidgeoStatus::Ok
}

/// Text of the last failure on this thread; empty if there was none.
#[no_mangle]
pub extern "C" fn caidgeo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn caidgeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON channel file held in memory.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_channel_from_json(json: *const c_char, out: *mut *mut CaidgeoChannel) -> CaidgeoStatus {
    guard(|| {
        if out.is_null() {
            return fail(CaidgeoStatus::NullPointer, "output pointer is null");
        }
        let s = match text(json) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match spec_file::parse(s) {
            Ok(spec) => put(out, CaidgeoChannel { spec }),
            Err(e) => fail(CaidgeoStatus::InvalidInput, &e.to_string()),
        }
    })
}

/// Builds a classical channel on the full simplex from a row-major `inputs x outputs` matrix.
///
/// # Safety
/// `rows` must point to `inputs * outputs` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_channel_from_matrix(
    rows: *const f64,
    inputs: usize,
    outputs: usize,
    out: *mut *mut CaidgeoChannel,
) -> CaidgeoStatus {
    guard(|| {
        if out.is_null() || rows.is_null() {
            return fail(CaidgeoStatus::NullPointer, "matrix or output pointer is null");
        }
        let Some(len) = inputs.checked_mul(outputs) else {
            return fail(CaidgeoStatus::InvalidInput, "matrix size overflows");
        };
        let data = std::slice::from_raw_parts(rows, len);
        let rows: Vec<Vec<f64>> = data.chunks(outputs.max(1)).map(<[f64]>::to_vec).collect();
        match Channel::new(rows) {
            Ok(w) => put(
                out,
                CaidgeoChannel {
                    spec: ChannelSpecFile {
                        kind: Kind::Classical,
                        model: AnyModel::Classical(w),
                        constraint: Polyhedron::simplex(inputs),
                        labels: (0..inputs).map(|x| x.to_string()).collect(),
                        corpus: None,
                        params: None,
                        output_truncation: None,
                    },
                },
            ),
            Err(e) => fail(CaidgeoStatus::InvalidInput, &e.to_string()),
        }
    })
}

/// Loads a built-in channel with its default parameters.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_channel_from_corpus(name: *const c_char, out: *mut *mut CaidgeoChannel) -> CaidgeoStatus {
    guard(|| {
        if out.is_null() {
            return fail(CaidgeoStatus::NullPointer, "output pointer is null");
        }
        let name = match text(name) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match corpus::build(name, CorpusParams::default()) {
            Ok(e) => {
                let n = e.model.inputs();
                put(
                    out,
                    CaidgeoChannel {
                        spec: ChannelSpecFile {
                            kind: if e.model.is_quantum() { Kind::ClassicalQuantum } else { Kind::Classical },
                            model: e.model,
                            constraint: e.constraint,
                            labels: (0..n).map(|x| x.to_string()).collect(),
                            corpus: Some(e.name),
                            params: Some(CorpusParams::default()),
                            output_truncation: e.output_truncation,
                        },
                    },
                )
            }
            Err(e) => fail(CaidgeoStatus::InvalidInput, &e.to_string()),
        }
    })
}

/// Number of input letters; zero for a null handle.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_channel_inputs(channel: *const CaidgeoChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.spec.model.inputs())
}

/// # Safety
/// `channel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_channel_free(channel: *mut CaidgeoChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Runs the pipeline. On `Ok`, `Partial` and `Violations` a report is stored in `out`.
///
/// # Safety
/// `channel` must be a live handle; `options` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_run(
    channel: *const CaidgeoChannel,
    options: *const CaidgeoOptions,
    out: *mut *mut CaidgeoReport,
) -> CaidgeoStatus {
    guard(|| {
        let (Some(c), Some(o)) = (channel.as_ref(), options.as_ref()) else {
            return fail(CaidgeoStatus::NullPointer, "channel or options pointer is null");
        };
        if out.is_null() {
            return fail(CaidgeoStatus::NullPointer, "output pointer is null");
        }
        let req = Request {
            stage: match o.stage {
                CaidgeoStage::Capacity => Stage::Capacity,
                CaidgeoStage::Constants => Stage::Constants,
                CaidgeoStage::Certify => Stage::Certify,
            },
            theorem: o.theorem,
            samples: o.samples,
            seed: o.seed,
            tol: if o.tol == 0.0 { caidgeo::capacity::SolverOptions::default().tol } else { o.tol },
        };
        match build_report(&c.spec, &req) {
            Ok((report, _)) => {
                let status = status_of(exit_code(&report));
                let json = CString::new(report.to_json()).unwrap_or_default();
                put(out, CaidgeoReport { report, json });
                status
            }
            Err(e) => from_cli(e),
        }
    })
}

/// The report as JSON, valid until the report is freed.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_report_json(report: *const CaidgeoReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// Capacity in nats, or NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_report_capacity(report: *const CaidgeoReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.capacity.capacity)
}

/// Copies the maximizer into `buf` (capacity `len`) and returns the number of letters.
///
/// # Safety
/// `report` must be null or a live handle; `buf` must hold `len` doubles or be null.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_report_maximizer(report: *const CaidgeoReport, buf: *mut f64, len: usize) -> usize {
    let Some(r) = report.as_ref() else {
        return 0;
    };
    let m = &r.report.capacity.maximizer;
    if !buf.is_null() {
        let k = m.len().min(len);
        ptr::copy_nonoverlapping(m.as_ptr(), buf, k);
    }
    m.len()
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn caidgeo_report_free(report: *mut CaidgeoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
