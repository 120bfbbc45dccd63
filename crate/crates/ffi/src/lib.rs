//! C ABI over the `indoordim` library.
//!
//! Every fallible function returns an [`IndoordimStatus`]; on failure the
//! message is available from [`indoordim_last_error`] on the same thread.
//! Scenarios and dimensioning results are opaque heap handles owned by the
//! caller and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use indoordim::channel::{path_loss_db, PropagationParams};
use indoordim::engine::{
    dimension, evaluate_deployment, scenario_ladder, throughput_to_demand, DeploymentRecord, DimensioningResult,
    SystemKind, TrafficParams,
};
use indoordim::scenario::Scenario;
use indoordim::stats::Estimate;
use indoordim::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndoordimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// Scenario failed validation; the message names the key.
    Config = 4,
    /// Scenario text could not be parsed.
    Parse = 5,
    SingularChannel = 6,
    RedrawLimit = 7,
    Io = 8,
    OutOfRange = 9,
    /// A Rust panic was caught at the boundary.
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndoordimSystem {
    WifiBaseline = 0,
    WifiAggressive = 1,
    Static = 2,
    ZfIdeal = 3,
    ZfErroneous = 4,
}

impl From<IndoordimSystem> for SystemKind {
    fn from(s: IndoordimSystem) -> Self {
        match s {
            IndoordimSystem::WifiBaseline => SystemKind::WifiBaseline,
            IndoordimSystem::WifiAggressive => SystemKind::WifiAggressive,
            IndoordimSystem::Static => SystemKind::Static,
            IndoordimSystem::ZfIdeal => SystemKind::ZfIdeal,
            IndoordimSystem::ZfErroneous => SystemKind::ZfErroneous,
        }
    }
}

/// Mean with a 95% confidence interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndoordimEstimate {
    pub mean: f64,
    pub halfwidth: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: u64,
}

impl From<Estimate> for IndoordimEstimate {
    fn from(e: Estimate) -> Self {
        IndoordimEstimate {
            mean: e.mean,
            halfwidth: e.halfwidth,
            lower: e.lower,
            upper: e.upper,
            n: e.n,
        }
    }
}

/// Estimates for one system on one deployment.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndoordimDeployment {
    pub nx: u32,
    pub ny: u32,
    pub ap_count: u32,
    /// APs/km^2.
    pub ap_density: f64,
    /// Channels in use, 0 for zero-forcing.
    pub k: u32,
    /// Area throughput, Mbps/km^2.
    pub throughput: IndoordimEstimate,
    /// Outage proportion over served users.
    pub outage: IndoordimEstimate,
    /// Mbps/user.
    pub mu: f64,
    /// GB/month/user.
    pub demand: f64,
    pub outage_ok: bool,
    pub redraws: u64,
    pub solver_fallbacks: u64,
}

impl From<&DeploymentRecord> for IndoordimDeployment {
    fn from(r: &DeploymentRecord) -> Self {
        IndoordimDeployment {
            nx: r.nx as u32,
            ny: r.ny as u32,
            ap_count: r.ap_count as u32,
            ap_density: r.ap_density,
            k: r.k.unwrap_or(0) as u32,
            throughput: r.estimate.throughput.into(),
            outage: r.estimate.outage.into(),
            mu: r.mu,
            demand: r.demand,
            outage_ok: r.outage_ok,
            redraws: r.estimate.redraws,
            solver_fallbacks: r.estimate.solver_fallbacks,
        }
    }
}

/// Opaque scenario handle.
pub struct IndoordimScenario {
    inner: Scenario,
}

/// Opaque dimensioning result handle.
pub struct IndoordimDimensioning {
    inner: DimensioningResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> IndoordimStatus {
    match err {
        Error::InvalidArgument(_) => IndoordimStatus::InvalidArgument,
        Error::SingularChannel { .. } => IndoordimStatus::SingularChannel,
        Error::RedrawLimit { .. } => IndoordimStatus::RedrawLimit,
        Error::Config { .. } => IndoordimStatus::Config,
        Error::Parse(_) => IndoordimStatus::Parse,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => IndoordimStatus::Io,
    }
}

fn fail(status: IndoordimStatus, msg: &str) -> IndoordimStatus {
    set_last_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F>(f: F) -> IndoordimStatus
where
    F: FnOnce() -> Result<(), IndoordimStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IndoordimStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(IndoordimStatus::Panic, &msg)
        }
    }
}

fn lift<T>(r: indoordim::Result<T>) -> Result<T, IndoordimStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, IndoordimStatus> {
    if s.is_null() {
        return Err(fail(IndoordimStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(IndoordimStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), IndoordimStatus> {
    if p.is_null() {
        Err(fail(IndoordimStatus::NullPointer, &format!("null {what}")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn indoordim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a scenario from a built-in preset name.
///
/// # Safety
/// `name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_scenario_from_preset(
    name: *const c_char,
    out: *mut *mut IndoordimScenario,
) -> IndoordimStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let name = read_str(name)?;
        let inner = lift(Scenario::preset(name))?;
        *out = Box::into_raw(Box::new(IndoordimScenario { inner }));
        Ok(())
    })
}

/// Parses and validates a TOML scenario.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut IndoordimScenario,
) -> IndoordimStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let text = read_str(text)?;
        let inner = lift(Scenario::from_toml_str(text))?;
        *out = Box::into_raw(Box::new(IndoordimScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn indoordim_scenario_free(scenario: *mut IndoordimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Overrides the snapshot count and master seed.
///
/// # Safety
/// `scenario` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn indoordim_scenario_set_engine(
    scenario: *mut IndoordimScenario,
    n_snapshots: u32,
    seed: u64,
) -> IndoordimStatus {
    guard(|| {
        non_null(scenario, "scenario")?;
        let s = &mut (*scenario).inner;
        let mut next = s.clone();
        next.engine.n_snapshots = n_snapshots as usize;
        next.engine.seed = seed;
        lift(next.validate())?;
        *s = next;
        Ok(())
    })
}

/// Serializes the scenario to TOML. Release the string with
/// [`indoordim_string_free`].
///
/// # Safety
/// `scenario` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_scenario_to_toml(
    scenario: *const IndoordimScenario,
    out: *mut *mut c_char,
) -> IndoordimStatus {
    guard(|| {
        non_null(scenario, "scenario")?;
        non_null(out, "output pointer")?;
        let text = lift((*scenario).inner.to_toml())?;
        let c = CString::new(text).map_err(|_| fail(IndoordimStatus::InvalidArgument, "nul in TOML"))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn indoordim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluates one system on the `nx` x `ny` grid.
///
/// # Safety
/// `scenario` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_evaluate_deployment(
    scenario: *const IndoordimScenario,
    system: IndoordimSystem,
    nx: u32,
    ny: u32,
    out: *mut IndoordimDeployment,
) -> IndoordimStatus {
    guard(|| {
        non_null(scenario, "scenario")?;
        non_null(out, "output pointer")?;
        let rec = lift(evaluate_deployment(
            &(*scenario).inner,
            system.into(),
            nx as usize,
            ny as usize,
        ))?;
        *out = IndoordimDeployment::from(&rec);
        Ok(())
    })
}

/// Minimum AP count per demand point of the scenario's demand grid.
///
/// # Safety
/// `scenario` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_dimension(
    scenario: *const IndoordimScenario,
    system: IndoordimSystem,
    stop_early: bool,
    out: *mut *mut IndoordimDimensioning,
) -> IndoordimStatus {
    guard(|| {
        non_null(scenario, "scenario")?;
        non_null(out, "output pointer")?;
        let s = &(*scenario).inner;
        let inner = lift(dimension(s, system.into(), &scenario_ladder(s), stop_early))?;
        *out = Box::into_raw(Box::new(IndoordimDimensioning { inner }));
        Ok(())
    })
}

/// Number of demand points.
///
/// # Safety
/// `result` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn indoordim_dimensioning_len(result: *const IndoordimDimensioning) -> usize {
    if result.is_null() {
        return 0;
    }
    (*result).inner.points.len()
}

/// AP count of the largest ladder rung.
///
/// # Safety
/// `result` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn indoordim_dimensioning_ladder_cap(result: *const IndoordimDimensioning) -> u32 {
    if result.is_null() {
        return 0;
    }
    (*result).inner.ladder_cap as u32
}

/// Demand point `index`. `ap_count` is 0 when the demand is infeasible up to
/// the ladder cap.
///
/// # Safety
/// `result` must be a valid handle; `demand` and `ap_count` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn indoordim_dimensioning_point(
    result: *const IndoordimDimensioning,
    index: usize,
    demand: *mut f64,
    ap_count: *mut u32,
) -> IndoordimStatus {
    guard(|| {
        non_null(result, "result")?;
        non_null(demand, "demand pointer")?;
        non_null(ap_count, "ap_count pointer")?;
        let points = &(*result).inner.points;
        let p = points.get(index).ok_or_else(|| {
            fail(
                IndoordimStatus::OutOfRange,
                &format!("index {index} out of range for {} points", points.len()),
            )
        })?;
        *demand = p.demand;
        *ap_count = p.ap_count.unwrap_or(0) as u32;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn indoordim_dimensioning_free(result: *mut IndoordimDimensioning) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Multiwall pathloss in dB.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_path_loss_db(
    l0_db: f64,
    alpha: f64,
    lw_db: f64,
    distance_m: f64,
    walls: u32,
    out: *mut f64,
) -> IndoordimStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let params = PropagationParams { l0_db, alpha, lw_db };
        *out = lift(path_loss_db(&params, distance_m, walls as usize))?;
        Ok(())
    })
}

/// Mbps/user to GB/month/user.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn indoordim_throughput_to_demand(
    mu_mbps_per_user: f64,
    omega: f64,
    out: *mut f64,
) -> IndoordimStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let traffic = TrafficParams { omega, lambda_u: 1.0 };
        *out = lift(throughput_to_demand(mu_mbps_per_user, &traffic))?;
        Ok(())
    })
}
