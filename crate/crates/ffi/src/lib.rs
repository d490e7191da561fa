//! C ABI for zpflab.
//!
//! Every function returns a [`ZpfStatus`]; results go through out-pointers.
//! On failure the message is available from [`zpf_last_error`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Strings returned through `char **` are owned by the caller and
//! released with [`zpf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use zpflab::bipartite::{phase_assignment, Family, FamilyTag};
use zpflab::covariance::{analytic_covariance, build_entangled_state, mc_covariance, quantum_covariance, ObservablePair};
use zpflab::phase::{PhaseParameter, SpinLabel};
use zpflab::response::{commutator, harmonic_oscillator, momentum_matrix, trk_sum, LevelSystem, ResponseMatrix};
use zpflab::scenario::{run_scenario, ScenarioConfig};
use zpflab::spin::{exchange_factor, pauli_feasibility};
use zpflab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Arguments outside the operation's domain (dimensions, levels, phases).
    InvalidArgument = 3,
    /// A numerical precondition failed (non-Hermitian input, vanishing state).
    Numerical = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

/// Level system handle.
pub struct ZpfSystem(LevelSystem);

/// Response matrix handle.
pub struct ZpfMatrix(ResponseMatrix);

/// Monte Carlo covariance summary.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ZpfMcReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub analytic: f64,
    pub quantum: f64,
    pub z_score: f64,
    pub samples: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ZpfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) => ZpfStatus::Config,
            Error::Io(_) => ZpfStatus::Io,
            Error::NotHermitian(_) | Error::VanishingState(_) | Error::ImaginaryResidual(_) => ZpfStatus::Numerical,
            _ => ZpfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ZpfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ZpfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZpfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ZpfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ZpfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(ZpfStatus::Numerical, "output contains a nul byte".into()))?;
    write(out, c.into_raw(), "out")
}

fn pair(f: &ZpfMatrix, g: &ZpfMatrix) -> Result<ObservablePair, Failure> {
    Ok(ObservablePair::new(f.0.clone(), g.0.clone())?)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn zpf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn zpf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Truncated harmonic oscillator: system and position matrix.
///
/// # Safety
/// `out_system` and `out_x` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_oscillator_new(
    dim: usize,
    mass: f64,
    omega0: f64,
    hbar: f64,
    out_system: *mut *mut ZpfSystem,
    out_x: *mut *mut ZpfMatrix,
) -> ZpfStatus {
    guard(|| {
        if out_system.is_null() || out_x.is_null() {
            return Err(null("out"));
        }
        let (sys, x) = harmonic_oscillator(dim, mass, omega0, hbar)?;
        write(out_system, Box::into_raw(Box::new(ZpfSystem(sys))), "out_system")?;
        write(out_x, Box::into_raw(Box::new(ZpfMatrix(x))), "out_x")
    })
}

/// Level system from `dim` energies.
///
/// # Safety
/// `energies` must point to `dim` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_system_new(
    energies: *const f64,
    dim: usize,
    mass: f64,
    hbar: f64,
    out: *mut *mut ZpfSystem,
) -> ZpfStatus {
    guard(|| {
        if energies.is_null() {
            return Err(null("energies"));
        }
        let e = std::slice::from_raw_parts(energies, dim).to_vec();
        let sys = LevelSystem::new(e, mass, hbar)?;
        write(out, Box::into_raw(Box::new(ZpfSystem(sys))), "out")
    })
}

/// # Safety
/// `system` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zpf_system_free(system: *mut ZpfSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// # Safety
/// `system` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_system_dim(system: *const ZpfSystem, out: *mut usize) -> ZpfStatus {
    guard(|| write(out, deref(system, "system")?.0.dim(), "out"))
}

/// Hermitian matrix from row-major real and imaginary parts. `im` may be
/// null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn zpf_matrix_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut ZpfMatrix,
) -> ZpfStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        let n = dim
            .checked_mul(dim)
            .ok_or_else(|| Failure(ZpfStatus::InvalidArgument, "dimension overflows".into()))?;
        let re = std::slice::from_raw_parts(re, n);
        let m = if im.is_null() {
            ResponseMatrix::from_real_rows(dim, re)?
        } else {
            let im = std::slice::from_raw_parts(im, n);
            let c = zpflab::response::CMatrix::from_fn(dim, dim, |i, j| {
                num_complex::Complex64::new(re[i * dim + j], im[i * dim + j])
            });
            ResponseMatrix::new(c)?
        };
        write(out, Box::into_raw(Box::new(ZpfMatrix(m))), "out")
    })
}

/// # Safety
/// `matrix` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zpf_matrix_free(matrix: *mut ZpfMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// `2m/ħ² Σ_k (E_k - E_n)|x_nk|²` at level `n`.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_trk_sum(
    system: *const ZpfSystem,
    x: *const ZpfMatrix,
    n: usize,
    out: *mut f64,
) -> ZpfStatus {
    guard(|| {
        let v = trk_sum(&deref(x, "x")?.0, &deref(system, "system")?.0, n)?;
        write(out, v, "out")
    })
}

/// Largest entrywise deviation of `[x, p]` from `iħ·1` on the block that
/// excludes the top level.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_commutator_deviation(
    system: *const ZpfSystem,
    x: *const ZpfMatrix,
    out: *mut f64,
) -> ZpfStatus {
    guard(|| {
        let sys = &deref(system, "system")?.0;
        let x = &deref(x, "x")?.0;
        let c = commutator(x, &momentum_matrix(x, sys)?)?;
        let d = sys.dim() - 1;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { sys.hbar() } else { 0.0 };
                worst = worst.max((c[(i, j)] - num_complex::Complex64::new(0.0, want)).norm());
            }
        }
        write(out, worst, "out")
    })
}

/// Field-induced covariance of `f` on particle 1 and `g` on particle 2 with
/// levels `n != m`. `zeta_half_units` is `2ζ` and must be even.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_analytic_covariance(
    f: *const ZpfMatrix,
    g: *const ZpfMatrix,
    n: usize,
    m: usize,
    zeta_half_units: i64,
    out: *mut f64,
) -> ZpfStatus {
    guard(|| {
        let p = pair(deref(f, "f")?, deref(g, "g")?)?;
        let v = analytic_covariance(&p, n, m, PhaseParameter::from_half_units(zeta_half_units))?;
        write(out, v, "out")
    })
}

/// Covariance of `f ⊗ g` in the entangled energy state of levels `n`, `m`.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_quantum_covariance(
    f: *const ZpfMatrix,
    g: *const ZpfMatrix,
    n: usize,
    m: usize,
    zeta_half_units: i64,
    out: *mut f64,
) -> ZpfStatus {
    guard(|| {
        let p = pair(deref(f, "f")?, deref(g, "g")?)?;
        let psi = build_entangled_state(n, m, PhaseParameter::from_half_units(zeta_half_units))?;
        write(out, quantum_covariance(&p, &psi)?, "out")
    })
}

/// Monte Carlo covariance over `samples` field realizations.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_mc_covariance(
    system: *const ZpfSystem,
    f: *const ZpfMatrix,
    g: *const ZpfMatrix,
    n: usize,
    m: usize,
    zeta_half_units: i64,
    samples: usize,
    seed: u64,
    out: *mut ZpfMcReport,
) -> ZpfStatus {
    guard(|| {
        let sys = &deref(system, "system")?.0;
        let p = pair(deref(f, "f")?, deref(g, "g")?)?;
        let r = mc_covariance(sys, &p, n, m, PhaseParameter::from_half_units(zeta_half_units), samples, seed)?;
        let report = ZpfMcReport {
            estimate: r.estimate,
            standard_error: r.standard_error,
            analytic: r.analytic,
            quantum: r.quantum,
            z_score: r.z_score,
            samples: r.samples,
        };
        write(out, report, "out")
    })
}

/// `(-1)^ζ (-1)^{2γ}` with both arguments in half units.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_exchange_factor(zeta_half_units: i64, gamma_half_units: i64, out: *mut i32) -> ZpfStatus {
    guard(|| {
        let v = exchange_factor(
            PhaseParameter::from_half_units(zeta_half_units),
            SpinLabel::from_half_units(gamma_half_units),
        )?;
        write(out, v, "out")
    })
}

/// Exclusion search for `k` labels in `-Υ..Υ`, as JSON.
///
/// # Safety
/// `out` must be valid for writes; free the string with [`zpf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn zpf_pauli_json(upsilon_half_units: i64, k: usize, out: *mut *mut c_char) -> ZpfStatus {
    guard(|| {
        let outcome = pauli_feasibility(PhaseParameter::from_half_units(upsilon_half_units), k)?;
        write_string(out, serde_json::to_string(&outcome).map_err(Error::from)?)
    })
}

/// Phase assignment for `count` members; `family` is 0 for B, 1 for F.
///
/// # Safety
/// `out` must be valid for writes; free the string with [`zpf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn zpf_phase_assignment_json(
    family: u32,
    upsilon_half_units: i64,
    count: usize,
    out: *mut *mut c_char,
) -> ZpfStatus {
    guard(|| {
        let tag = match family {
            0 => Family::B,
            1 => Family::F,
            other => return Err(Failure(ZpfStatus::InvalidArgument, format!("unknown family {other}"))),
        };
        let tag = FamilyTag::new(tag, PhaseParameter::from_half_units(upsilon_half_units))?;
        let a = phase_assignment(count, tag)?;
        write_string(out, serde_json::to_string(&a).map_err(Error::from)?)
    })
}

/// Runs a scenario config given as JSON text and returns the report JSON.
/// Matrix paths resolve against `base_dir`, or the working directory when
/// it is null. A failing check is not an error: inspect `"pass"`.
///
/// # Safety
/// `config` (and `base_dir` when non-null) must be nul-terminated strings;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zpf_run_scenario_json(
    config: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut c_char,
) -> ZpfStatus {
    guard(|| {
        let text = read_str(config, "config")?;
        let base = if base_dir.is_null() { "." } else { read_str(base_dir, "base_dir")? };
        let cfg = ScenarioConfig::from_json(text)?;
        let report = run_scenario(&cfg, Path::new(base))?;
        write_string(out, report.to_json_pretty())
    })
}
