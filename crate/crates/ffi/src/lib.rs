//! C interface to k2reg. Every function returns a [`K2Status`]; on failure the message is
//! available from [`k2reg_last_error`] until the next call on the same thread. Strings returned
//! through `out` parameters are owned by the caller and released with [`k2reg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use k2reg::canonical;
use k2reg::numerics::EmbeddedConfig;
use k2reg::regulator::{regulator_matrix, theorem_elements, RegulatorOptions};
use k2reg::symbols::generator_list;
use k2reg::tame::verify_k2t;
use k2reg::{Embedding, Error, ExactScalar, LineConfiguration};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K2Status {
    Ok = 0,
    /// Null pointer or non-UTF-8 string.
    InvalidArgument = 1,
    /// Malformed or schema-violating input.
    InvalidInput = 2,
    /// A numerical or internal computation failed.
    ComputationFailed = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

/// Opaque handle to a validated line configuration.
pub struct K2Config {
    inner: LineConfiguration,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> K2Status {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => K2Status::Ok,
        Ok(Err(Failure::Arg(m))) => {
            set_error(&m);
            K2Status::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            if e.is_input_error() {
                K2Status::InvalidInput
            } else {
                K2Status::ComputationFailed
            }
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&format!("panic: {msg}"));
            K2Status::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{name} is not UTF-8")))
}

unsafe fn config<'a>(p: *const K2Config) -> Result<&'a LineConfiguration, Failure> {
    p.as_ref()
        .map(|c| &c.inner)
        .ok_or_else(|| Failure::Arg("config is null".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Arg("out is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure::Arg("output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::Arg("out is null".into()))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn k2reg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn k2reg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a configuration from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_config_from_json(
    json: *const c_char,
    out: *mut *mut K2Config,
) -> K2Status {
    guard(|| {
        check_out(out)?;
        let cfg = LineConfiguration::from_json(read_str(json, "json")?)?;
        cfg.ensure_valid()?;
        *out = Box::into_raw(Box::new(K2Config { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`k2reg_config_from_json`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn k2reg_config_free(cfg: *mut K2Config) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Serializes the configuration back to JSON.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_config_to_json(
    cfg: *const K2Config,
    out: *mut *mut c_char,
) -> K2Status {
    guard(|| write_string(out, config(cfg)?.to_json()))
}

/// Genus of the curve, equal to the number of special intersection points.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_config_genus(cfg: *const K2Config, out: *mut u64) -> K2Status {
    guard(|| {
        check_out(out)?;
        *out = config(cfg)?.genus()?;
        Ok(())
    })
}

/// Hypothesis checks as JSON.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_validate_json(
    cfg: *const K2Config,
    out: *mut *mut c_char,
) -> K2Status {
    guard(|| {
        let rep = config(cfg)?.validate();
        write_string(
            out,
            serde_json::to_string_pretty(&rep).expect("report serializes"),
        )
    })
}

/// Tame symbols of every generator at every place at infinity, as JSON. `passed` is set to
/// whether all of them are 1.
///
/// # Safety
/// `cfg` must be a live handle; `out` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_tame_check_json(
    cfg: *const K2Config,
    out: *mut *mut c_char,
    passed: *mut bool,
) -> K2Status {
    guard(|| {
        check_out(passed)?;
        let cfg = config(cfg)?;
        let mut reports = Vec::new();
        for e in generator_list(cfg)? {
            reports.push((e.label.clone(), verify_k2t(cfg, &e.symbol)?));
        }
        *passed = reports.iter().all(|(_, r)| r.passed);
        write_string(
            out,
            serde_json::to_string_pretty(&reports).expect("report serializes"),
        )
    })
}

/// Regulator matrix of the theorem elements at parameter `t` (the configuration's own `t` when
/// `t` is 0), with the projection picked by `seed`. Writes the report as JSON and `|det| / |log t|^g`
/// to `normalized`.
///
/// # Safety
/// `cfg` must be a live handle; `out` and `normalized` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_regulator_json(
    cfg: *const K2Config,
    t: f64,
    seed: u64,
    out: *mut *mut c_char,
    normalized: *mut f64,
) -> K2Status {
    guard(|| {
        check_out(normalized)?;
        let mut cfg = config(cfg)?.clone();
        if !t.is_finite() {
            return Err(Failure::Lib(Error::invalid("t must be finite")));
        }
        if t != 0.0 {
            cfg = cfg.with_t(ExactScalar::from_f64_exact(t)?)?;
        }
        let emb = EmbeddedConfig::from_config(&cfg, Embedding::Plus, seed)?;
        let rep = regulator_matrix(&emb, &theorem_elements(&cfg)?, &RegulatorOptions::default())?;
        *normalized = rep.normalized;
        write_string(out, rep.to_json())
    })
}

/// Hyperellipticity of the three-group curve `(n1, n2, n3)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_is_hyperelliptic(
    n1: usize,
    n2: usize,
    n3: usize,
    out: *mut bool,
) -> K2Status {
    guard(|| {
        check_out(out)?;
        *out = canonical::is_hyperelliptic(n1, n2, n3)?;
        Ok(())
    })
}

/// Runs a command-line invocation (`argv` without the program name). The rendered output goes
/// to `out` and the process exit code the command would have had to `exit_code`.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings; `out` and `exit_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn k2reg_run(
    argv: *const *const c_char,
    argc: usize,
    out: *mut *mut c_char,
    exit_code: *mut i32,
) -> K2Status {
    guard(|| {
        check_out(exit_code)?;
        if argv.is_null() && argc > 0 {
            return Err(Failure::Arg("argv is null".into()));
        }
        let mut args = Vec::with_capacity(argc);
        for i in 0..argc {
            args.push(read_str(*argv.add(i), "argv entry")?.to_string());
        }
        let (code, text) = match k2reg::cli::parse_args(args) {
            Ok(cmd) => {
                let o = k2reg::cli::run(&cmd);
                if !o.diagnostics.is_empty() {
                    set_error(&o.diagnostics.join("\n"));
                }
                (o.code, o.output)
            }
            Err(e) => {
                set_error(&e.to_string());
                (k2reg::cli::EXIT_USAGE, String::new())
            }
        };
        *exit_code = code;
        write_string(out, text)
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn k2reg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
