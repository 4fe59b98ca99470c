//! C interface to the `bubbleflow` simulator.
//!
//! Every function returns a [`BfStatus`]. On failure the message of the
//! most recent error on the calling thread is available from
//! [`bf_last_error_message`]. Handles are created by
//! [`bf_simulation_from_config`] or [`bf_simulation_from_preset`] and must
//! be released with [`bf_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bubbleflow::config::parse_config;
use bubbleflow::model::{total_energy, EnergyLedger, SimState};
use bubbleflow::scenario::{preset_config, Scenario};
use bubbleflow::stationary::solve_stationary;
use bubbleflow::stepper::run;
use bubbleflow::Error;

/// Status codes. The first five match the exit codes of the command-line
/// tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    ConfigError = 1,
    StepAborted = 2,
    RootFindingFailed = 3,
    ConfinementFailed = 4,
    InvalidArgument = 10,
    NullPointer = 11,
    Panic = 12,
}

/// Energy split of the current state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BfEnergy {
    pub total: f64,
    pub kinetic: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub potential: f64,
    /// Dissipation rate of the current state.
    pub dissipation: f64,
}

/// Opaque simulation handle.
pub struct BfSimulation {
    scenario: Scenario,
    state: SimState,
    ledger: EnergyLedger,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> BfStatus {
    set_error(e.to_string());
    match e.exit_code() {
        2 => BfStatus::StepAborted,
        3 => BfStatus::RootFindingFailed,
        _ => BfStatus::ConfigError,
    }
}

fn guard(f: impl FnOnce() -> BfStatus) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            BfStatus::Panic
        }
    }
}

fn null(what: &str) -> BfStatus {
    set_error(format!("`{what}` is null"));
    BfStatus::NullPointer
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, BfStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("`{what}` is not valid UTF-8"));
        BfStatus::InvalidArgument
    })
}

fn create(
    cfg: bubbleflow::Result<bubbleflow::config::RunConfig>,
    out: *mut *mut BfSimulation,
) -> BfStatus {
    let built = cfg.and_then(|c| {
        let scenario = Scenario::new(c)?;
        let ledger = EnergyLedger::start(
            &scenario.initial,
            &scenario.potential,
            &scenario.config.params,
        )?;
        Ok(BfSimulation {
            state: scenario.initial.clone(),
            scenario,
            ledger,
        })
    });
    match built {
        Ok(sim) => {
            unsafe { *out = Box::into_raw(Box::new(sim)) };
            BfStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Builds a simulation from the text of a configuration document. Relative
/// paths in the document resolve against the working directory.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_from_config(
    config: *const c_char,
    out: *mut *mut BfSimulation,
) -> BfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        match text(config, "config") {
            Ok(t) => create(parse_config(t), out),
            Err(s) => s,
        }
    })
}

/// Builds a simulation from a shipped preset (`column_1d`, `halfline_1d`,
/// `double_well_1d`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_from_preset(
    name: *const c_char,
    out: *mut *mut BfSimulation,
) -> BfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        match text(name, "name") {
            Ok(t) => create(preset_config(t), out),
            Err(s) => s,
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_free(sim: *mut BfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn with_sim(
    sim: *mut BfSimulation,
    f: impl FnOnce(&mut BfSimulation) -> BfStatus,
) -> BfStatus {
    guard(|| match sim.as_mut() {
        Some(s) => f(s),
        None => null("sim"),
    })
}

fn advance(sim: &mut BfSimulation, t_end: f64) -> BfStatus {
    if !(t_end.is_finite() && t_end >= sim.state.time) {
        set_error(format!(
            "t_end = {t_end} precedes the current time {}",
            sim.state.time
        ));
        return BfStatus::InvalidArgument;
    }
    let cfg = &sim.scenario.config;
    match run(
        &sim.state,
        &sim.scenario.potential,
        &cfg.params,
        &cfg.step,
        t_end,
    ) {
        Ok((state, ledger)) => {
            sim.ledger.rows.extend_from_slice(&ledger.rows[1..]);
            sim.state = state;
            BfStatus::Ok
        }
        Err(f) => {
            sim.ledger
                .rows
                .extend_from_slice(f.ledger.rows.get(1..).unwrap_or_default());
            sim.state = f.state;
            status_of(&f.error)
        }
    }
}

/// Advances by one step of the configured size, halving it on rejection.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_step(sim: *mut BfSimulation) -> BfStatus {
    with_sim(sim, |s| {
        let t = s.state.time + s.scenario.config.step.h;
        advance(s, t)
    })
}

/// Advances to `t_end`. On a step failure the handle keeps the last
/// accepted state.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_run(sim: *mut BfSimulation, t_end: f64) -> BfStatus {
    with_sim(sim, |s| advance(s, t_end))
}

/// # Safety
/// `sim` must be a live handle and `time` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_time(sim: *mut BfSimulation, time: *mut f64) -> BfStatus {
    with_sim(sim, |s| match time.as_mut() {
        Some(t) => {
            *t = s.state.time;
            BfStatus::Ok
        }
        None => null("time"),
    })
}

/// Number of cells and spatial dimension.
///
/// # Safety
/// `sim` must be a live handle; `cells` and `dim` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_cell_count(
    sim: *mut BfSimulation,
    cells: *mut usize,
    dim: *mut usize,
) -> BfStatus {
    with_sim(sim, |s| {
        if cells.is_null() || dim.is_null() {
            return null("cells/dim");
        }
        *cells = s.state.grid.len();
        *dim = s.state.grid.dim();
        BfStatus::Ok
    })
}

/// Copies the current fields. `rho` and `eta` hold `len` values, `velocity`
/// holds `len * dim` values, cell-major. Any of the three may be null to
/// skip it.
///
/// # Safety
/// Non-null buffers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_copy_fields(
    sim: *mut BfSimulation,
    rho: *mut f64,
    velocity: *mut f64,
    eta: *mut f64,
    len: usize,
) -> BfStatus {
    with_sim(sim, |s| {
        let n = s.state.grid.len();
        if len != n {
            set_error(format!("buffer length {len} does not match the {n} cells"));
            return BfStatus::InvalidArgument;
        }
        if !rho.is_null() {
            ptr::copy_nonoverlapping(s.state.rho.as_ptr(), rho, n);
        }
        if !eta.is_null() {
            ptr::copy_nonoverlapping(s.state.eta.as_ptr(), eta, n);
        }
        if !velocity.is_null() {
            let dim = s.state.grid.dim();
            let out = std::slice::from_raw_parts_mut(velocity, n * dim);
            for (c, u) in s.state.velocity().iter().enumerate() {
                out[c * dim..(c + 1) * dim].copy_from_slice(&u[..dim]);
            }
        }
        BfStatus::Ok
    })
}

/// Energy of the current state and its dissipation rate.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_energy(
    sim: *mut BfSimulation,
    out: *mut BfEnergy,
) -> BfStatus {
    with_sim(sim, |s| {
        let Some(out) = out.as_mut() else {
            return null("out");
        };
        let p = &s.scenario.config.params;
        match total_energy(&s.state, &s.scenario.potential, p) {
            Ok(e) => {
                let d = bubbleflow::model::dissipation(&s.state, &s.scenario.potential, p);
                *out = BfEnergy {
                    total: e.total,
                    kinetic: e.kinetic,
                    pressure: e.pressure,
                    entropy: e.entropy,
                    potential: e.potential,
                    dissipation: d.map(|d| d.total).unwrap_or(f64::NAN),
                };
                BfStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Masses of the current state.
///
/// # Safety
/// `sim` must be a live handle; `mass_rho` and `mass_eta` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_masses(
    sim: *mut BfSimulation,
    mass_rho: *mut f64,
    mass_eta: *mut f64,
) -> BfStatus {
    with_sim(sim, |s| {
        if mass_rho.is_null() || mass_eta.is_null() {
            return null("mass_rho/mass_eta");
        }
        (*mass_rho, *mass_eta) = s.state.masses();
        BfStatus::Ok
    })
}

/// Number of accepted steps so far.
///
/// # Safety
/// `sim` must be a live handle and `steps` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_simulation_steps(
    sim: *mut BfSimulation,
    steps: *mut usize,
) -> BfStatus {
    with_sim(sim, |s| match steps.as_mut() {
        Some(k) => {
            *k = s.ledger.len() - 1;
            BfStatus::Ok
        }
        None => null("steps"),
    })
}

/// Stationary profiles with the masses of the initial state. Profile
/// buffers hold `len` values and may be null; `c_rho` and `c_eta` may be
/// null as well.
///
/// # Safety
/// Non-null pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn bf_stationary_solve(
    sim: *mut BfSimulation,
    rho_s: *mut f64,
    eta_s: *mut f64,
    len: usize,
    c_rho: *mut f64,
    c_eta: *mut f64,
) -> BfStatus {
    with_sim(sim, |s| {
        let n = s.state.grid.len();
        if len != n {
            set_error(format!("buffer length {len} does not match the {n} cells"));
            return BfStatus::InvalidArgument;
        }
        let (mr, me) = s.scenario.masses();
        match solve_stationary(&s.scenario.potential, &s.scenario.config.params, mr, me) {
            Ok(st) => {
                if !rho_s.is_null() {
                    ptr::copy_nonoverlapping(st.rho_s.as_ptr(), rho_s, n);
                }
                if !eta_s.is_null() {
                    ptr::copy_nonoverlapping(st.eta_s.as_ptr(), eta_s, n);
                }
                if let Some(c) = c_rho.as_mut() {
                    *c = st.c_rho;
                }
                if let Some(c) = c_eta.as_mut() {
                    *c = st.c_eta;
                }
                BfStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Message of the last error on this thread, empty if there was none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
