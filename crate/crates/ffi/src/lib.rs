//! C ABI over the majsearch library.
//!
//! Every fallible call returns an `MsStatus`; on failure the message is kept per thread and
//! read with `ms_last_error`. Handles are opaque and freed with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use majsearch::design::{build_design_random56, build_design_thm3ii, codegree_stats, Design};
use majsearch::explore::RandomChooser;
use majsearch::model::{AnswerModel, Coloring};
use majsearch::oracle::{ChoiceOracle, Session};
use majsearch::search::{find_nonminority_adaptive_3, find_nonminority_adaptive_even, find_nonminority_adaptive_odd};
use majsearch::selection::SelectConfig;
use majsearch::solver::{design_determines, exact_adaptive_complexity, Goal, Value};
use majsearch::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    Domain = 1,
    Config = 2,
    Capacity = 3,
    Contradiction = 4,
    Input = 5,
    Usage = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

impl From<&Error> for MsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => MsStatus::Domain,
            Error::Config(_) => MsStatus::Config,
            Error::Capacity(_) => MsStatus::Capacity,
            Error::Contradiction(_) => MsStatus::Contradiction,
            Error::Input(_) => MsStatus::Input,
            Error::Usage(_) => MsStatus::Usage,
            Error::Io(_) => MsStatus::Io,
        }
    }
}

/// A non-adaptive query design.
pub struct MsDesign(Design);

/// Outcome of one strategy run against a hidden coloring.
pub struct MsRun {
    ball: usize,
    transcript: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), MsFail>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(MsFail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MsStatus::NullPointer
        }
        Ok(Err(MsFail::Lib(e))) => {
            set_error(e.to_string());
            MsStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MsStatus::Panic
        }
    }
}

enum MsFail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for MsFail {
    fn from(e: Error) -> Self {
        MsFail::Lib(e)
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, MsFail> {
    // SAFETY: callers pass pointers obtained from this library or valid C objects.
    unsafe { p.as_ref() }.ok_or(MsFail::Null(what))
}

fn out_ptr<T>(p: *mut T, what: &'static str) -> Result<&'static mut T, MsFail> {
    // SAFETY: the caller owns the output slot for the duration of the call.
    unsafe { p.as_mut() }.ok_or(MsFail::Null(what))
}

fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, MsFail> {
    if p.is_null() {
        return Err(MsFail::Null(what));
    }
    // SAFETY: non-null and NUL-terminated by contract.
    let s = unsafe { CStr::from_ptr(p) };
    s.to_str().map_err(|_| MsFail::Lib(Error::Input(format!("{what} is not UTF-8"))))
}

fn model_of(p: *const c_char) -> Result<AnswerModel, MsFail> {
    if p.is_null() {
        return Ok(AnswerModel::Majority);
    }
    Ok(AnswerModel::parse(c_str(p, "model")?)?)
}

/// Message of the last failed call on this thread. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn ms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact minimax query count. `model` may be NULL (majority). `fraction` 0 asks for a
/// non-minority ball, A > 0 for a ball agreeing with (n-1)/A others. Sets `impossible`
/// when no strategy always succeeds.
#[no_mangle]
pub extern "C" fn ms_exact(
    n: usize,
    q: usize,
    model: *const c_char,
    fraction: usize,
    budget: u64,
    value: *mut u32,
    impossible: *mut bool,
) -> MsStatus {
    guard(|| {
        let model = model_of(model)?;
        let goal = if fraction == 0 { Goal::NonMinority } else { Goal::Fraction(fraction) };
        let v = exact_adaptive_complexity(n, q, model, goal, budget)?;
        let (value, impossible) = (out_ptr(value, "value")?, out_ptr(impossible, "impossible")?);
        match v {
            Value::Finite(x) => {
                *value = x;
                *impossible = false;
            }
            Value::Impossible => {
                *value = 0;
                *impossible = true;
            }
        }
        Ok(())
    })
}

/// Builds a design: kind is "complete" (uses q), "thm3ii" or "random56" (uses seed).
#[no_mangle]
pub extern "C" fn ms_design_build(kind: *const c_char, n: usize, q: usize, seed: u64, out: *mut *mut MsDesign) -> MsStatus {
    guard(|| {
        let d = match c_str(kind, "kind")? {
            "complete" => Design::complete(n, q)?,
            "thm3ii" => build_design_thm3ii(n)?,
            "random56" => build_design_random56(n, seed)?.design,
            k => return Err(Error::Usage(format!("unknown design kind {k:?}")).into()),
        };
        *out_ptr(out, "out")? = Box::into_raw(Box::new(MsDesign(d)));
        Ok(())
    })
}

/// Parses the text format: a header "n q", then one ascending query per line.
#[no_mangle]
pub extern "C" fn ms_design_parse(text: *const c_char, out: *mut *mut MsDesign) -> MsStatus {
    guard(|| {
        let d = Design::from_text(c_str(text, "text")?)?;
        *out_ptr(out, "out")? = Box::into_raw(Box::new(MsDesign(d)));
        Ok(())
    })
}

/// Text form of a design; free with `ms_string_free`.
#[no_mangle]
pub extern "C" fn ms_design_to_text(d: *const MsDesign, out: *mut *mut c_char) -> MsStatus {
    guard(|| {
        let d = non_null(d, "design")?;
        let s = CString::new(d.0.to_text()).map_err(|e| Error::Input(e.to_string()))?;
        *out_ptr(out, "out")? = s.into_raw();
        Ok(())
    })
}

/// Number of queries, minimum degree and minimum co-degree.
#[no_mangle]
pub extern "C" fn ms_design_stats(d: *const MsDesign, size: *mut usize, delta: *mut usize, delta2: *mut usize) -> MsStatus {
    guard(|| {
        let st = codegree_stats(&non_null(d, "design")?.0);
        *out_ptr(size, "size")? = st.size;
        *out_ptr(delta, "delta")? = st.delta;
        *out_ptr(delta2, "delta2")? = st.delta2;
        Ok(())
    })
}

/// Whether every consistent answer table pins down a non-minority ball.
#[no_mangle]
pub extern "C" fn ms_design_determines(d: *const MsDesign, model: *const c_char, budget: u64, out: *mut bool) -> MsStatus {
    guard(|| {
        let d = non_null(d, "design")?;
        let r = design_determines(&d.0, model_of(model)?, budget)?;
        *out_ptr(out, "out")? = r.determines;
        Ok(())
    })
}

/// # Safety
/// `d` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_design_free(d: *mut MsDesign) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Runs a strategy ("a3", "odd" or "even") against the hidden coloring `colors[0..n]`
/// (0 red, 1 blue) with seeded tie choices among valid majority answers.
///
/// # Safety
/// `colors` must point to `n` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn ms_run(
    strategy: *const c_char,
    colors: *const u8,
    n: usize,
    q: usize,
    seed: u64,
    out: *mut *mut MsRun,
) -> MsStatus {
    guard(|| {
        let strategy = c_str(strategy, "strategy")?;
        if colors.is_null() {
            return Err(MsFail::Null("colors"));
        }
        // SAFETY: caller guarantees n readable bytes.
        let cs = unsafe { std::slice::from_raw_parts(colors, n) };
        let c = Coloring::from_colors(cs)?;
        let oracle = ChoiceOracle::new(c, q, AnswerModel::Majority, RandomChooser::new(seed))?;
        let mut sess = Session::new(oracle);
        let cfg = SelectConfig::MOM3_DEFAULT;
        let ball = match strategy {
            "a3" => find_nonminority_adaptive_3(&mut sess, cfg)?,
            "odd" if q % 2 == 1 => find_nonminority_adaptive_odd(&mut sess, (q - 1) / 2, cfg)?,
            "even" if q % 2 == 0 => find_nonminority_adaptive_even(&mut sess, q / 2)?,
            s => return Err(Error::Usage(format!("unknown strategy {s:?} for q={q}")).into()),
        };
        let transcript = CString::new(sess.transcript().to_json()).map_err(|e| Error::Input(e.to_string()))?;
        *out_ptr(out, "out")? = Box::into_raw(Box::new(MsRun { ball, transcript }));
        Ok(())
    })
}

/// The returned ball, or `usize::MAX` for a NULL handle.
#[no_mangle]
pub extern "C" fn ms_run_ball(r: *const MsRun) -> usize {
    // SAFETY: pointer from `ms_run` or NULL.
    unsafe { r.as_ref() }.map_or(usize::MAX, |r| r.ball)
}

/// Transcript JSON, owned by the handle; NULL for a NULL handle.
#[no_mangle]
pub extern "C" fn ms_run_transcript(r: *const MsRun) -> *const c_char {
    // SAFETY: pointer from `ms_run` or NULL.
    unsafe { r.as_ref() }.map_or(ptr::null(), |r| r.transcript.as_ptr())
}

/// # Safety
/// `r` must come from `ms_run` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_run_free(r: *mut MsRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
