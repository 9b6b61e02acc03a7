//! C interface to the simulator. Every function returns a [`SymflowStatus`];
//! on failure, [`symflow_last_error`] copies a message describing it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use symflow::bundle::BundleState;
use symflow::config::RunConfig;
use symflow::flow::{Engine, RunOptions, StopReason};
use symflow::functionals::DiagnosticsRecord;
use symflow::holonomy::Holonomy;
use symflow::mat2::Sym2;
use symflow::scenario::{bundle_state, warped_state};
use symflow::warped::WarpedState;
use symflow::{spd, FlowError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Panic = 5,
}

/// Why a simulation stopped, or `Running` while it has not.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymflowStop {
    Running = 0,
    ReachedTEnd = 1,
    CurvatureBlowup = 2,
    StepUnderflow = 3,
}

/// One diagnostics row. Columns that do not apply to the run are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SymflowRecord {
    pub t: f64,
    pub dt: f64,
    pub v: f64,
    pub e: f64,
    pub min_s: f64,
    pub max_gradu_sq: f64,
    pub max_riem: f64,
    pub gauss_bonnet: f64,
    pub l: f64,
    pub det_g_min: f64,
    pub det_g_max: f64,
    pub max_energy_density: f64,
    pub w_plus: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub max_r: f64,
    pub min_r: f64,
    pub dissipation: f64,
    pub sol_residual: f64,
}

impl From<&DiagnosticsRecord> for SymflowRecord {
    fn from(r: &DiagnosticsRecord) -> Self {
        let o = |v: Option<f64>| v.unwrap_or(f64::NAN);
        SymflowRecord {
            t: r.t,
            dt: r.dt,
            v: r.v,
            e: r.e,
            min_s: r.min_s,
            max_gradu_sq: o(r.max_gradu_sq),
            max_riem: r.max_riem,
            gauss_bonnet: o(r.gauss_bonnet),
            l: o(r.l),
            det_g_min: o(r.det_g_min),
            det_g_max: o(r.det_g_max),
            max_energy_density: o(r.max_energy_density),
            w_plus: o(r.w_plus),
            u_min: o(r.u_min),
            u_max: o(r.u_max),
            max_r: o(r.max_r),
            min_r: o(r.min_r),
            dissipation: o(r.dissipation),
            sol_residual: o(r.sol_residual),
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SymflowSolLimit {
    /// Symmetric `X` with `e^X = HᵀH`, as `[xx, xy, yy]`.
    pub x: [f64; 3],
    /// `½Tr(X²)`.
    pub slope: f64,
    pub c: f64,
    /// `4c²`.
    pub slope_conjugation_invariant: f64,
}

enum Inner {
    Warped(Engine<WarpedState>),
    Bundle(Engine<BundleState>),
}

/// Opaque simulation handle owning one engine.
pub struct SymflowSim {
    inner: Inner,
    stop: SymflowStop,
}

impl SymflowSim {
    fn records(&self) -> &[DiagnosticsRecord] {
        match &self.inner {
            Inner::Warped(e) => &e.trajectory.records,
            Inner::Bundle(e) => &e.trajectory.records,
        }
    }

    fn time(&self) -> f64 {
        use symflow::flow::FlowState;
        match &self.inner {
            Inner::Warped(e) => e.state.time(),
            Inner::Bundle(e) => e.state.time(),
        }
    }

    fn advance(&mut self) -> Result<SymflowStop, FlowError> {
        if self.stop != SymflowStop::Running {
            return Ok(self.stop);
        }
        let r = match &mut self.inner {
            Inner::Warped(e) => e.advance()?,
            Inner::Bundle(e) => e.advance()?,
        };
        self.stop = match r {
            None => SymflowStop::Running,
            Some(StopReason::ReachedTEnd) => SymflowStop::ReachedTEnd,
            Some(StopReason::CurvatureBlowup) => SymflowStop::CurvatureBlowup,
            Some(StopReason::StepUnderflow) => SymflowStop::StepUnderflow,
        };
        Ok(self.stop)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &FlowError) -> SymflowStatus {
    match e {
        FlowError::Config(_)
        | FlowError::DeterminantNotOne(_)
        | FlowError::PoleRegularity { .. }
        | FlowError::Io(_)
        | FlowError::Json(_)
        | FlowError::Csv(_)
        | FlowError::Format(_) => SymflowStatus::Config,
        FlowError::InvalidArgument(_) | FlowError::GridMismatch(_) | FlowError::NotHyperbolic => {
            SymflowStatus::InvalidArgument
        }
        _ => SymflowStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), FlowError>) -> SymflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SymflowStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SymflowStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return SymflowStatus::NullPointer;
        })+
    };
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, FlowError> {
    CStr::from_ptr(p).to_str().map_err(|_| FlowError::InvalidArgument("string is not UTF-8".into()))
}

fn build(cfg: &RunConfig) -> Result<SymflowSim, FlowError> {
    cfg.validate()?;
    let opts = RunOptions { snapshot_dt: cfg.snapshot_dt, full_diagnostics: cfg.full_diagnostics };
    let inner = if cfg.scenario.is_bundle() {
        let s = bundle_state(cfg.scenario, cfg.n, &cfg.initial)?;
        Inner::Bundle(Engine::new(s, cfg.controller.clone(), cfg.mode, opts)?)
    } else {
        let s = warped_state(cfg.scenario, cfg.n, &cfg.initial)?;
        Inner::Warped(Engine::new(s, cfg.controller.clone(), cfg.mode, opts)?)
    };
    Ok(SymflowSim { inner, stop: SymflowStop::Running })
}

/// Creates a simulation from a named preset. `n = 0` keeps the preset grid
/// and `t_end ≤ 0` keeps the preset end time.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_from_preset(
    name: *const c_char,
    n: u32,
    t_end: f64,
    out: *mut *mut SymflowSim,
) -> SymflowStatus {
    non_null!(name, out);
    guard(|| {
        let mut cfg = RunConfig::preset(c_str(name)?.parse()?);
        if n > 0 {
            cfg.n = n as usize;
        }
        if t_end > 0.0 {
            cfg.controller.t_end = t_end;
        }
        *out = Box::into_raw(Box::new(build(&cfg)?));
        Ok(())
    })
}

/// Creates a simulation from configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_from_config(text: *const c_char, out: *mut *mut SymflowSim) -> SymflowStatus {
    non_null!(text, out);
    guard(|| {
        let cfg = RunConfig::parse(c_str(text)?)?;
        *out = Box::into_raw(Box::new(build(&cfg)?));
        Ok(())
    })
}

/// Takes one step and reports whether the run is over.
///
/// # Safety
/// `sim` must come from a constructor here and `stop` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_step(sim: *mut SymflowSim, stop: *mut SymflowStop) -> SymflowStatus {
    non_null!(sim, stop);
    guard(|| {
        *stop = (*sim).advance()?;
        Ok(())
    })
}

/// Steps until the run stops.
///
/// # Safety
/// As for [`symflow_sim_step`].
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_run(sim: *mut SymflowSim, stop: *mut SymflowStop) -> SymflowStatus {
    non_null!(sim, stop);
    guard(|| {
        let s = &mut *sim;
        while s.advance()? == SymflowStop::Running {}
        *stop = s.stop;
        Ok(())
    })
}

/// # Safety
/// `sim` must come from a constructor here and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_time(sim: *const SymflowSim, out: *mut f64) -> SymflowStatus {
    non_null!(sim, out);
    *out = (*sim).time();
    SymflowStatus::Ok
}

/// Number of stored diagnostics rows, the initial state included.
///
/// # Safety
/// `sim` must come from a constructor here and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_record_count(sim: *const SymflowSim, out: *mut usize) -> SymflowStatus {
    non_null!(sim, out);
    *out = (*sim).records().len();
    SymflowStatus::Ok
}

/// # Safety
/// `sim` must come from a constructor here and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_record(
    sim: *const SymflowSim,
    index: usize,
    out: *mut SymflowRecord,
) -> SymflowStatus {
    non_null!(sim, out);
    match (*sim).records().get(index) {
        Some(r) => {
            *out = r.into();
            SymflowStatus::Ok
        }
        None => {
            set_error(format!("row {index} out of range"));
            SymflowStatus::InvalidArgument
        }
    }
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from a constructor here and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn symflow_sim_free(sim: *mut SymflowSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Geodesic distance between two positive-definite matrices given as
/// `[xx, xy, yy]`.
///
/// # Safety
/// `a` and `b` must point to three doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_spd_distance(a: *const f64, b: *const f64, out: *mut f64) -> SymflowStatus {
    non_null!(a, b, out);
    let (a, b) = (std::slice::from_raw_parts(a, 3), std::slice::from_raw_parts(b, 3));
    guard(|| {
        *out = spd::spd_distance(&Sym2::new(a[0], a[1], a[2]), &Sym2::new(b[0], b[1], b[2]))?;
        Ok(())
    })
}

/// Limit data of the Sol attractor for the integer matrix `h` in row-major order.
///
/// # Safety
/// `h` must point to four integers and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn symflow_sol_limit(h: *const i64, out: *mut SymflowSolLimit) -> SymflowStatus {
    non_null!(h, out);
    let h = std::slice::from_raw_parts(h, 4);
    guard(|| {
        let lim = spd::sol_limit_data(&Holonomy::new(h[0], h[1], h[2], h[3])?)?;
        *out = SymflowSolLimit {
            x: [lim.x.xx, lim.x.xy, lim.x.yy],
            slope: lim.slope,
            c: lim.c,
            slope_conjugation_invariant: lim.slope_conjugation_invariant,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns the full message length.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn symflow_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn symflow_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
