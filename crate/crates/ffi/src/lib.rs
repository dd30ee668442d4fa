//! C ABI over `dtc-core`.
//!
//! A `DtcSystem` is an opaque handle owning a lattice, drive and one or two
//! spin configurations. Every fallible call returns a `DtcStatus`; on
//! failure `dtc_last_error_message` describes the most recent error on the
//! calling thread. Spin arrays cross the boundary as three `double` arrays
//! (`sx`, `sy`, `sz`) of length `dtc_system_n_sites`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use dtc_core::cli::{emit_tables, parse_plan};
use dtc_core::dynamics::{DriveParams, FieldPath, FieldSolver, Trajectory};
use dtc_core::experiments::{run_sweep, RunOptions};
use dtc_core::lattice::{build_kernel, kac_normalization, Alpha, InteractionKernel, LatticeSpec};
use dtc_core::observables::{
    decorrelator, energy_first_half, energy_period_averaged, magnetization, subharmonic_order_parameter, TimeSeries,
};
use dtc_core::state::{init_polarized_noisy, perturb_copy, Purpose, RngStream, SpinConfig};
use dtc_core::Error;

const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// Result codes; zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtcStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    SizeMismatch = -3,
    Io = -4,
    Plan = -5,
    NoCopy = -6,
    Panic = -7,
}

/// Effective-field evaluation strategy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtcFieldPath {
    /// Direct taps for nearest-neighbour kernels, FFT otherwise.
    Auto = 0,
    Fft = 1,
    Direct = 2,
}

/// Opaque simulation handle.
pub struct DtcSystem {
    spec: LatticeSpec,
    kernel: Arc<InteractionKernel>,
    params: DriveParams,
    path: FieldPath,
    traj: Option<Trajectory>,
    /// Periods elapsed before the current trajectory was (re)built.
    offset: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> DtcStatus {
    match err {
        Error::SizeMismatch { .. } => DtcStatus::SizeMismatch,
        Error::Io { .. } | Error::Csv(_) | Error::Png(_) => DtcStatus::Io,
        Error::Plan(_) | Error::Json(_) | Error::UnknownPreset { .. } => DtcStatus::Plan,
        _ => DtcStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (DtcStatus, String)>) -> DtcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DtcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DtcStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (DtcStatus, String)>;
}

impl<T> IntoFfi<T> for Result<T, Error> {
    fn ffi(self) -> Result<T, (DtcStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (DtcStatus, String) {
    (DtcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn system<'a>(ptr: *const DtcSystem) -> Result<&'a DtcSystem, (DtcStatus, String)> {
    ptr.as_ref().ok_or_else(|| null("system"))
}

unsafe fn system_mut<'a>(ptr: *mut DtcSystem) -> Result<&'a mut DtcSystem, (DtcStatus, String)> {
    ptr.as_mut().ok_or_else(|| null("system"))
}

unsafe fn out_ref<'a, T>(ptr: *mut T) -> Result<&'a mut T, (DtcStatus, String)> {
    ptr.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn c_path<'a>(ptr: *const c_char, what: &str) -> Result<&'a Path, (DtcStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(Path::new)
        .map_err(|_| (DtcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

impl DtcSystem {
    fn traj(&self) -> &Trajectory {
        self.traj.as_ref().expect("trajectory is always rebuilt")
    }

    fn rebuild(&mut self, primary: SpinConfig, copy: Option<SpinConfig>) -> Result<(), Error> {
        let elapsed = self.traj.as_ref().map_or(0, |t| t.period());
        let solver = FieldSolver::new(self.kernel.clone(), self.path);
        let mut traj = Trajectory::new(solver, self.params, primary)?;
        if let Some(c) = copy {
            traj = traj.with_copy(c)?;
        }
        self.offset += elapsed;
        self.traj = Some(traj);
        Ok(())
    }

    fn configs(&mut self) -> (SpinConfig, Option<SpinConfig>) {
        let t = self.traj.as_ref().expect("trajectory is always rebuilt");
        (t.primary().clone(), t.copy().cloned())
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `dtc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dtc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dtc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Kac normalization `N_α` of a `D`-dimensional torus of side `L`.
/// Pass `INFINITY` for nearest-neighbour coupling.
#[no_mangle]
pub unsafe extern "C" fn dtc_kac_normalization(dim: u32, len: u32, alpha: f64, out: *mut f64) -> DtcStatus {
    guard(|| {
        let out = out_ref(out)?;
        let spec = LatticeSpec::new(dim as usize, len as usize, Alpha::from_f64(alpha)).ffi()?;
        *out = kac_normalization(&spec);
        Ok(())
    })
}

/// Creates a system polarized along `+z` with drive period `period`.
/// `alpha` may be `INFINITY`. Free with `dtc_system_free`.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_new(
    dim: u32,
    len: u32,
    alpha: f64,
    period: f64,
    g: f64,
    h: f64,
    field_path: DtcFieldPath,
    out: *mut *mut DtcSystem,
) -> DtcStatus {
    guard(|| {
        let out = out_ref(out)?;
        let spec = LatticeSpec::new(dim as usize, len as usize, Alpha::from_f64(alpha)).ffi()?;
        let params = DriveParams::from_period(period, g, h).ffi()?;
        let kernel = Arc::new(build_kernel(&spec));
        let path = match field_path {
            DtcFieldPath::Auto => FieldPath::default_for(&kernel),
            DtcFieldPath::Fft => FieldPath::Fft,
            DtcFieldPath::Direct => FieldPath::Direct,
        };
        let mut sys = DtcSystem {
            spec,
            kernel,
            params,
            path,
            traj: None,
            offset: 0,
        };
        let n = sys.spec.n_sites();
        sys.rebuild(SpinConfig::polarized(n), None).ffi()?;
        *out = Box::into_raw(Box::new(sys));
        Ok(())
    })
}

/// Releases a system; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_free(sys: *mut DtcSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dtc_system_n_sites(sys: *const DtcSystem) -> usize {
    system(sys).map_or(0, |s| s.spec.n_sites())
}

/// Stroboscopic periods evolved since creation.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_period(sys: *const DtcSystem) -> u64 {
    system(sys).map_or(0, |s| s.offset + s.traj().period())
}

/// Replaces the state by the noisy polarized ensemble draw for
/// (`seed`, `realization`) and drops any perturbed copy.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_init_noisy(sys: *mut DtcSystem, w: f64, seed: u64, realization: u64) -> DtcStatus {
    guard(|| {
        let sys = system_mut(sys)?;
        let cfg = init_polarized_noisy(&sys.spec, w, RngStream::new(seed, realization, Purpose::Init)).ffi()?;
        sys.rebuild(cfg, None).ffi()
    })
}

/// Adds (or replaces) a twin copy perturbed by `delta` from the current
/// primary state; it evolves alongside the primary.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_add_copy(sys: *mut DtcSystem, delta: f64, seed: u64, realization: u64) -> DtcStatus {
    guard(|| {
        let sys = system_mut(sys)?;
        let (primary, _) = sys.configs();
        let copy = perturb_copy(&primary, delta, RngStream::new(seed, realization, Purpose::Perturb)).ffi()?;
        sys.rebuild(primary, Some(copy)).ffi()
    })
}

/// Advances by `n_periods` stroboscopic periods.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_step(sys: *mut DtcSystem, n_periods: u64) -> DtcStatus {
    guard(|| {
        let sys = system_mut(sys)?;
        sys.traj.as_mut().expect("trajectory is always rebuilt").run(n_periods).ffi()
    })
}

unsafe fn copy_out(cfg: &SpinConfig, sx: *mut f64, sy: *mut f64, sz: *mut f64, n: usize) -> Result<(), (DtcStatus, String)> {
    if sx.is_null() || sy.is_null() || sz.is_null() {
        return Err(null("spin array"));
    }
    if n != cfg.len() {
        return Err((DtcStatus::SizeMismatch, format!("expected {} sites, got buffers of {n}", cfg.len())));
    }
    std::slice::from_raw_parts_mut(sx, n).copy_from_slice(&cfg.sx);
    std::slice::from_raw_parts_mut(sy, n).copy_from_slice(&cfg.sy);
    std::slice::from_raw_parts_mut(sz, n).copy_from_slice(&cfg.sz);
    Ok(())
}

/// Copies the primary spins into caller buffers of length `n`.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_get_spins(
    sys: *const DtcSystem,
    sx: *mut f64,
    sy: *mut f64,
    sz: *mut f64,
    n: usize,
) -> DtcStatus {
    guard(|| copy_out(system(sys)?.traj().primary(), sx, sy, sz, n))
}

/// Copies the perturbed copy's spins; fails with `NoCopy` if there is none.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_get_copy_spins(
    sys: *const DtcSystem,
    sx: *mut f64,
    sy: *mut f64,
    sz: *mut f64,
    n: usize,
) -> DtcStatus {
    guard(|| {
        let copy = system(sys)?
            .traj()
            .copy()
            .ok_or((DtcStatus::NoCopy, "system has no perturbed copy".to_string()))?;
        copy_out(copy, sx, sy, sz, n)
    })
}

/// Overwrites the primary spins (the copy, if any, is kept). Each spin
/// must have unit norm to within `1e-9`.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_set_spins(
    sys: *mut DtcSystem,
    sx: *const f64,
    sy: *const f64,
    sz: *const f64,
    n: usize,
) -> DtcStatus {
    guard(|| {
        let sys = system_mut(sys)?;
        if sx.is_null() || sy.is_null() || sz.is_null() {
            return Err(null("spin array"));
        }
        let read = |p: *const f64| std::slice::from_raw_parts(p, n).to_vec();
        let cfg = SpinConfig::from_components(read(sx), read(sy), read(sz)).ffi()?;
        if cfg.len() != sys.spec.n_sites() {
            return Err((
                DtcStatus::SizeMismatch,
                format!("expected {} sites, got {n}", sys.spec.n_sites()),
            ));
        }
        let finite = [&cfg.sx, &cfg.sy, &cfg.sz].iter().all(|c| c.iter().all(|v| v.is_finite()));
        if !finite || cfg.max_norm_deviation() > UNIT_NORM_TOLERANCE {
            return Err((DtcStatus::InvalidArgument, "spins must be finite unit vectors".to_string()));
        }
        let (_, copy) = sys.configs();
        sys.rebuild(cfg, copy).ffi()
    })
}

/// Mean `S^z` of the primary.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_magnetization(sys: *const DtcSystem, out: *mut f64) -> DtcStatus {
    guard(|| {
        let sys = system(sys)?;
        *out_ref(out)? = magnetization(sys.traj().primary());
        Ok(())
    })
}

/// Period-averaged energy per spin `H_T / N` of the primary.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_energy_period(sys: *const DtcSystem, out: *mut f64) -> DtcStatus {
    guard(|| {
        let sys = system(sys)?;
        *out_ref(out)? = energy_period_averaged(sys.traj().primary(), &sys.kernel, &sys.params).ffi()?;
        Ok(())
    })
}

/// First-half energy per spin `H_1 / N` of the primary.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_energy_first_half(sys: *const DtcSystem, out: *mut f64) -> DtcStatus {
    guard(|| {
        let sys = system(sys)?;
        *out_ref(out)? = energy_first_half(sys.traj().primary(), &sys.kernel, sys.params.h()).ffi()?;
        Ok(())
    })
}

/// Decorrelator between primary and copy.
#[no_mangle]
pub unsafe extern "C" fn dtc_system_decorrelator(sys: *const DtcSystem, out: *mut f64) -> DtcStatus {
    guard(|| {
        let sys = system(sys)?;
        let t = sys.traj();
        let copy = t.copy().ok_or((DtcStatus::NoCopy, "system has no perturbed copy".to_string()))?;
        *out_ref(out)? = decorrelator(t.primary(), copy).ffi()?;
        Ok(())
    })
}

/// Subharmonic order parameter `|m̃(−ω/n)| + |m̃(ω/n)|` of a magnetization
/// record `m[0..len]` sampled once per period; the whole record is the window.
#[no_mangle]
pub unsafe extern "C" fn dtc_order_parameter(m: *const f64, len: usize, n: u32, out: *mut f64) -> DtcStatus {
    guard(|| {
        if m.is_null() {
            return Err(null("magnetization record"));
        }
        let out = out_ref(out)?;
        let values = std::slice::from_raw_parts(m, len).to_vec();
        let series = TimeSeries::from_parts("m", (0..len as u64).collect(), values).ffi()?;
        *out = subharmonic_order_parameter(&series, len, n as usize).ffi()?;
        Ok(())
    })
}

/// Runs a JSON plan file and writes its tables to `out_dir`.
/// `threads = 0` uses the default worker pool.
#[no_mangle]
pub unsafe extern "C" fn dtc_run_plan_file(plan_path: *const c_char, out_dir: *const c_char, threads: u32) -> DtcStatus {
    guard(|| {
        let plan = parse_plan(c_path(plan_path, "plan path")?).ffi()?;
        let out = c_path(out_dir, "output directory")?;
        let options = RunOptions {
            threads: (threads > 0).then_some(threads as usize),
        };
        let result = run_sweep(&plan, options).ffi()?;
        emit_tables(&result, out).ffi()?;
        Ok(())
    })
}
