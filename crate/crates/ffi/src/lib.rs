//! C ABI over the perpetuity library.
//!
//! Joint laws are opaque handles built from experiment-file text. Every
//! function returns a [`PerpStatus`]; on failure the message is available
//! from [`perp_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use perpetuity::asymptotics::{perpetuity_cf, predict_tail};
use perpetuity::cli::config;
use perpetuity::criteria::{moment_verdict, CriteriaError, Verdict};
use perpetuity::model::JointInput;
use perpetuity::oracle::{find_case, reference_survival};
use perpetuity::simulate::{check_convergence, sample_batch, ConvergenceVerdict, SimConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerpStatus {
    Ok = 0,
    /// Null pointer, bad length or non-UTF-8 text.
    InvalidArgument = 1,
    /// The experiment text does not parse or describes an invalid law.
    Config = 2,
    /// The series defining X diverges.
    Divergent = 3,
    /// No tail theorem applies, or the characteristic function is unavailable.
    NoTheorem = 5,
    /// A quadrature or other numeric routine failed.
    Numerical = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerpVerdict {
    Finite = 0,
    Infinite = 1,
    Inconclusive = 2,
}

/// P{X > x} ~ a·x^c·e^{−bx}; `std_err` is zero unless the constant was
/// estimated by simulation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PerpTailForm {
    pub a: f64,
    pub c: f64,
    pub b: f64,
    pub constant: f64,
    pub std_err: f64,
}

/// Opaque joint law of (A, B).
pub struct PerpJoint {
    joint: JointInput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

type Fallible = Result<(), (PerpStatus, String)>;

fn guard(f: impl FnOnce() -> Fallible) -> PerpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PerpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PerpStatus::Panic
        }
    }
}

fn invalid(msg: &str) -> (PerpStatus, String) {
    (PerpStatus::InvalidArgument, msg.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PerpStatus, String)> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

unsafe fn joint<'a>(h: *const PerpJoint) -> Result<&'a JointInput, (PerpStatus, String)> {
    h.as_ref().map(|h| &h.joint).ok_or_else(|| invalid("joint handle is null"))
}

fn converging(j: &JointInput) -> Fallible {
    let c = check_convergence(j).map_err(|e| (PerpStatus::Config, e.to_string()))?;
    if c.verdict == ConvergenceVerdict::Diverges {
        return Err((PerpStatus::Divergent, c.evidence));
    }
    Ok(())
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn perp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn perp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a joint law from experiment-file text (`joint.*` keys; other
/// sections are accepted and ignored). Free with [`perp_joint_free`].
///
/// # Safety
/// `config_text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perp_joint_from_config(config_text: *const c_char, out: *mut *mut PerpJoint) -> PerpStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = ptr::null_mut();
        let cfg = config::parse(text(config_text, "config_text")?).map_err(|e| (PerpStatus::Config, e.to_string()))?;
        let j = cfg.joint.ok_or_else(|| (PerpStatus::Config, "config has no joint law".to_string()))?;
        j.validate_parameters().map_err(|e| (PerpStatus::Config, e.to_string()))?;
        *out = Box::into_raw(Box::new(PerpJoint { joint: j }));
        Ok(())
    })
}

/// # Safety
/// `joint` must come from [`perp_joint_from_config`] and not be used
/// afterwards. Null is accepted.
#[no_mangle]
pub unsafe extern "C" fn perp_joint_free(joint: *mut PerpJoint) {
    if !joint.is_null() {
        drop(Box::from_raw(joint));
    }
}

/// Writes `n` draws of X into `out`. Results depend only on the law, `n`
/// and `seed`, not on `n_streams`.
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn perp_simulate(
    joint: *const PerpJoint,
    n: usize,
    seed: u64,
    n_streams: usize,
    out: *mut f64,
) -> PerpStatus {
    guard(|| {
        let j = self::joint(joint)?;
        if out.is_null() && n > 0 {
            return Err(invalid("out is null"));
        }
        if n_streams == 0 {
            return Err(invalid("n_streams must be at least 1"));
        }
        converging(j)?;
        let cfg = SimConfig::default().with_samples(n).with_seed(seed).with_streams(n_streams);
        let batch = sample_batch(j, &cfg).map_err(|e| (PerpStatus::Config, e.to_string()))?;
        if n > 0 {
            std::slice::from_raw_parts_mut(out, n).copy_from_slice(&batch.values);
        }
        Ok(())
    })
}

/// Decides whether E exp(rX) is finite.
///
/// # Safety
/// `verdict` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perp_moment_verdict(joint: *const PerpJoint, r: f64, verdict: *mut PerpVerdict) -> PerpStatus {
    guard(|| {
        let j = self::joint(joint)?;
        if verdict.is_null() {
            return Err(invalid("verdict is null"));
        }
        let v = moment_verdict(j, r, None).map_err(|e| match e {
            CriteriaError::Divergent(m) => (PerpStatus::Divergent, m),
            CriteriaError::BadR(_) => invalid(&e.to_string()),
            other => (PerpStatus::Config, other.to_string()),
        })?;
        *verdict = match v.verdict {
            Verdict::Finite => PerpVerdict::Finite,
            Verdict::Infinite => PerpVerdict::Infinite,
            Verdict::Inconclusive => PerpVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Tail prediction; constants estimated by simulation use `n` draws.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perp_tail_prediction(
    joint: *const PerpJoint,
    n: usize,
    seed: u64,
    out: *mut PerpTailForm,
) -> PerpStatus {
    guard(|| {
        let j = self::joint(joint)?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        converging(j)?;
        let cfg = SimConfig::default().with_samples(n).with_seed(seed);
        let p = predict_tail(j, &cfg).map_err(|misses| {
            let why: Vec<String> = misses.iter().map(|m| format!("{:?}: {}", m.theorem, m.reason)).collect();
            (PerpStatus::NoTheorem, why.join("; "))
        })?;
        *out = PerpTailForm { a: p.form.a, c: p.form.c, b: p.form.b, constant: p.constant, std_err: p.std_err().unwrap_or(0.0) };
        Ok(())
    })
}

/// E e^{itX} for A ~ Beta(λ, 1).
///
/// # Safety
/// `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn perp_charfn(joint: *const PerpJoint, t: f64, re: *mut f64, im: *mut f64) -> PerpStatus {
    guard(|| {
        let j = self::joint(joint)?;
        if re.is_null() || im.is_null() {
            return Err(invalid("re or im is null"));
        }
        let z = perpetuity_cf(j, t, 1e-10).map_err(|e| match e {
            perpetuity::asymptotics::AsymptoticsError::Precondition { .. } => (PerpStatus::NoTheorem, e.to_string()),
            other => (PerpStatus::Numerical, other.to_string()),
        })?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Exact P{X > x} for a reference case ("E1".."E5").
///
/// # Safety
/// `case_id` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn perp_reference_survival(case_id: *const c_char, x: f64, out: *mut f64) -> PerpStatus {
    guard(|| {
        let id = text(case_id, "case_id")?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let case = find_case(id).ok_or_else(|| (PerpStatus::Config, format!("unknown reference case `{id}`")))?;
        *out = reference_survival(&case, x).map_err(|e| (PerpStatus::Numerical, e.to_string()))?;
        Ok(())
    })
}
