//! C ABI for the scalesim cluster simulator.
//!
//! Conventions:
//! - Every fallible call returns a [`ScaleSimStatus`]; results travel through
//!   out-pointers. On any non-OK status, [`scalesim_last_error`] holds a
//!   human-readable message for the calling thread until the next call.
//! - Scenario handles are opaque; release them with [`scalesim_scenario_free`].
//! - Strings produced by this library are NUL-terminated, UTF-8, and owned by
//!   the caller; release them with [`scalesim_string_free`] only.

// Pointer contracts are stated in each function's doc comment in ABI terms
// (what C callers read via the generated header) rather than in Rust
// `# Safety` sections.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use scalesim::harness::{
    compare_policies, comparison_rows, load_config, run_policy, train_command, HarnessError,
    LoadedScenario, RunOptions, RunRequest,
};

/// Result of every fallible library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleSimStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input was rejected: unreadable or malformed config, bad index,
    /// bad option. Nothing was executed.
    ValidationError = 3,
    /// The request was valid but executing it failed (I/O, simulation
    /// fault). Artifacts may be partially written.
    RuntimeError = 4,
    /// An internal invariant failed. State on this handle should be
    /// considered poisoned; free it and report a bug.
    Panic = 5,
}

/// Opaque handle to a loaded scenario configuration.
pub struct ScaleSimScenario {
    inner: LoadedScenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).expect("NUL bytes removed"));
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn fail(status: ScaleSimStatus, message: &str) -> ScaleSimStatus {
    set_last_error(message);
    status
}

fn status_of(error: &HarnessError) -> ScaleSimStatus {
    match error {
        HarnessError::Validation(_) => ScaleSimStatus::ValidationError,
        HarnessError::Runtime(_) => ScaleSimStatus::RuntimeError,
    }
}

/// Runs `body` with panics converted to [`ScaleSimStatus::Panic`].
fn guarded(body: impl FnOnce() -> ScaleSimStatus) -> ScaleSimStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(ScaleSimStatus::Panic, &format!("internal panic: {message}"))
        }
    }
}

/// Borrows a required UTF-8 string argument.
///
/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, ScaleSimStatus> {
    if ptr.is_null() {
        return Err(fail(ScaleSimStatus::NullArgument, &format!("{name} is NULL")));
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        fail(ScaleSimStatus::InvalidUtf8, &format!("{name} is not valid UTF-8"))
    })
}

/// Hands a Rust string to the caller through `out`.
///
/// # Safety
/// `out` must be NULL or a valid pointer to a `char *` slot.
unsafe fn emit_string(value: String, out: *mut *mut c_char, name: &str) -> ScaleSimStatus {
    if out.is_null() {
        return fail(ScaleSimStatus::NullArgument, &format!("{name} is NULL"));
    }
    let c = CString::new(value.replace('\0', " ")).expect("NUL bytes removed");
    unsafe { *out = c.into_raw() };
    ScaleSimStatus::Ok
}

unsafe fn scenario_arg<'a>(
    ptr: *const ScaleSimScenario,
) -> Result<&'a ScaleSimScenario, ScaleSimStatus> {
    if ptr.is_null() {
        return Err(fail(ScaleSimStatus::NullArgument, "scenario is NULL"));
    }
    Ok(unsafe { &*ptr })
}

fn run_options(out_dir: PathBuf, seed_override: i64) -> RunOptions {
    RunOptions {
        seed_override: (seed_override >= 0).then_some(seed_override as u64),
        out_override: Some(out_dir),
        event_log: false,
    }
}

/// Returns the library version as a static NUL-terminated string. Never
/// fails; do not free the result.
#[no_mangle]
pub extern "C" fn scalesim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message for the calling thread's most recent failure, or an
/// empty string if the last call succeeded. The pointer stays valid until
/// the next library call on this thread; do not free it.
#[no_mangle]
pub extern "C" fn scalesim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(message) => message.as_ptr(),
        None => c"".as_ptr(),
    })
}

/// Parses and validates the scenario config at `path` (UTF-8 file path) and
/// stores a handle in `*out`. On failure `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn scalesim_scenario_load(
    path: *const c_char,
    out: *mut *mut ScaleSimScenario,
) -> ScaleSimStatus {
    guarded(|| {
        let path = match unsafe { str_arg(path, "path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(ScaleSimStatus::NullArgument, "out is NULL");
        }
        match load_config(path.as_ref()) {
            Ok(inner) => {
                let handle = Box::new(ScaleSimScenario { inner });
                unsafe { *out = Box::into_raw(handle) };
                ScaleSimStatus::Ok
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Releases a scenario handle. NULL is a no-op. Each handle must be freed
/// exactly once.
#[no_mangle]
pub unsafe extern "C" fn scalesim_scenario_free(scenario: *mut ScaleSimScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Returns how many policy bundles the scenario defines; 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn scalesim_scenario_policy_count(
    scenario: *const ScaleSimScenario,
) -> usize {
    if scenario.is_null() {
        return 0;
    }
    unsafe { &*scenario }.inner.config.policies.len()
}

/// Stores the label of policy `index` in `*out` as a caller-owned string.
#[no_mangle]
pub unsafe extern "C" fn scalesim_scenario_policy_label(
    scenario: *const ScaleSimScenario,
    index: usize,
    out: *mut *mut c_char,
) -> ScaleSimStatus {
    guarded(|| {
        let scenario = match unsafe { scenario_arg(scenario) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match scenario.inner.config.policies.get(index) {
            Some(bundle) => unsafe { emit_string(bundle.label(), out, "out") },
            None => fail(
                ScaleSimStatus::ValidationError,
                &format!(
                    "policy index {index} out of range ({} policies)",
                    scenario.inner.config.policies.len()
                ),
            ),
        }
    })
}

/// Simulates one policy bundle in memory, writing no files.
///
/// `seed_override` replaces the config seed when non-negative. On success
/// `*out_json` holds a caller-owned JSON object with the run's headline
/// metrics: policy, completed, rejected, rt_mean, rt_p95, util_mean,
/// util_var, scale_eff, cost, arrivals_sha256.
#[no_mangle]
pub unsafe extern "C" fn scalesim_simulate(
    scenario: *const ScaleSimScenario,
    policy_index: usize,
    seed_override: i64,
    out_json: *mut *mut c_char,
) -> ScaleSimStatus {
    guarded(|| {
        let scenario = match unsafe { scenario_arg(scenario) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut effective = scenario.inner.clone();
        if seed_override >= 0 {
            effective.config.seed = seed_override as u64;
        }
        let Some(bundle) = effective.config.policies.get(policy_index) else {
            return fail(
                ScaleSimStatus::ValidationError,
                &format!(
                    "policy index {policy_index} out of range ({} policies)",
                    effective.config.policies.len()
                ),
            );
        };
        let run = run_policy(RunRequest {
            scenario: &effective,
            bundle,
            agent: None,
            train: false,
            capture_events: false,
            episode: 0,
        });
        match run {
            Ok((output, _)) => {
                let rows = comparison_rows(std::slice::from_ref(&output.summary));
                let row = &rows[0];
                let json = serde_json::json!({
                    "policy": row.policy,
                    "completed": row.completed,
                    "rejected": row.rejected,
                    "rt_mean": row.rt_mean,
                    "rt_p95": row.rt_p95,
                    "util_mean": row.util_mean,
                    "util_var": row.util_var,
                    "scale_eff": row.scale_eff,
                    "cost": row.cost,
                    "arrivals_sha256": output.arrivals_sha256,
                });
                unsafe { emit_string(json.to_string(), out_json, "out_json") }
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Runs every policy bundle on a shared workload and writes the full
/// artifact set (metrics, comparison table, charts, manifest) under
/// `out_dir`. On success `*out_csv` holds the caller-owned comparison table
/// as CSV text.
#[no_mangle]
pub unsafe extern "C" fn scalesim_compare(
    scenario: *const ScaleSimScenario,
    out_dir: *const c_char,
    seed_override: i64,
    out_csv: *mut *mut c_char,
) -> ScaleSimStatus {
    guarded(|| {
        let scenario = match unsafe { scenario_arg(scenario) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out_dir = match unsafe { str_arg(out_dir, "out_dir") } {
            Ok(d) => PathBuf::from(d),
            Err(status) => return status,
        };
        match compare_policies(&scenario.inner, &run_options(out_dir, seed_override)) {
            Ok(artifacts) => match std::fs::read_to_string(&artifacts.comparison_csv) {
                Ok(csv) => unsafe { emit_string(csv, out_csv, "out_csv") },
                Err(e) => fail(
                    ScaleSimStatus::RuntimeError,
                    &format!("comparison table written but unreadable: {e}"),
                ),
            },
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Trains the scenario's learned balancer and writes checkpoint, training
/// log, and manifest under `out_dir`. On success `*out_json` holds a
/// caller-owned JSON object with checkpoint path, training-log path, and
/// per-episode mean rewards.
#[no_mangle]
pub unsafe extern "C" fn scalesim_train(
    scenario: *const ScaleSimScenario,
    out_dir: *const c_char,
    seed_override: i64,
    out_json: *mut *mut c_char,
) -> ScaleSimStatus {
    guarded(|| {
        let scenario = match unsafe { scenario_arg(scenario) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let out_dir = match unsafe { str_arg(out_dir, "out_dir") } {
            Ok(d) => PathBuf::from(d),
            Err(status) => return status,
        };
        match train_command(&scenario.inner, &run_options(out_dir, seed_override)) {
            Ok(artifacts) => {
                let json = serde_json::json!({
                    "checkpoint": artifacts.checkpoint.to_string_lossy(),
                    "training_csv": artifacts.training_csv.to_string_lossy(),
                    "episode_rewards": artifacts.episode_rewards,
                });
                unsafe { emit_string(json.to_string(), out_json, "out_json") }
            }
            Err(e) => fail(status_of(&e), &e.to_string()),
        }
    })
}

/// Releases a string produced by this library. NULL is a no-op. Each string
/// must be freed exactly once, and only with this function.
#[no_mangle]
pub unsafe extern "C" fn scalesim_string_free(string: *mut c_char) {
    if !string.is_null() {
        drop(unsafe { CString::from_raw(string) });
    }
}
