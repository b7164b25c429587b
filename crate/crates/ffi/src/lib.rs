//! C interface to the prediction library.
//!
//! Databases are opaque heap handles owned by the caller and released with
//! [`wam_database_free`]. Every fallible function returns a [`WamStatus`];
//! on failure [`wam_last_error_message`] describes the error for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wam::kernel::{self, InteractionParams};
use wam::physics::{min_horizon, BrakingQuery};
use wam::predictor::{self, constant_velocity_predict};
use wam::trajectory_data::read_corpus_file;
use wam::{DisplacementDatabase, Error, Prediction, RoadUserState, SimilarityParams, TrafficSituationState, Vec2};

/// Result codes. Values from 3 on mirror the library's error kinds and the
/// command-line exit statuses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WamStatus {
    Ok = 0,
    NullPointer = 1,
    Panic = 2,
    InvalidArgument = 3,
    Parse = 4,
    DuplicateKey = 5,
    StationaryTrajectory = 6,
    NoValidSplit = 7,
    NoSimilarData = 8,
    Empty = 9,
    UnknownHorizon = 10,
    MissingHorizons = 11,
    MissingSituations = 12,
    Format = 13,
    Io = 14,
    Csv = 15,
}

impl From<&Error> for WamStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => WamStatus::InvalidArgument,
            Error::Parse { .. } => WamStatus::Parse,
            Error::DuplicateKey { .. } => WamStatus::DuplicateKey,
            Error::StationaryTrajectory => WamStatus::StationaryTrajectory,
            Error::NoValidSplit(_) => WamStatus::NoValidSplit,
            Error::NoSimilarData { .. } => WamStatus::NoSimilarData,
            Error::Empty(_) => WamStatus::Empty,
            Error::UnknownHorizon(_) => WamStatus::UnknownHorizon,
            Error::MissingHorizons(_) => WamStatus::MissingHorizons,
            Error::MissingSituations => WamStatus::MissingSituations,
            Error::Format(_) => WamStatus::Format,
            Error::Io { .. } => WamStatus::Io,
            Error::Csv(_) => WamStatus::Csv,
        }
    }
}

/// Opaque displacement database.
pub struct WamDatabase {
    inner: DisplacementDatabase,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WamState {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    /// Unit heading vector.
    pub ox: f64,
    pub oy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WamParams {
    pub a: f64,
    pub b: f64,
    pub c_orient: f64,
    /// Cutoff radius in metres.
    pub r: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WamPrediction {
    pub horizon_steps: usize,
    pub dx: f64,
    pub dy: f64,
    pub x: f64,
    pub y: f64,
    pub total_weight: f64,
    pub support_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WamStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WamStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            WamStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            WamStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            WamStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("path is not valid UTF-8".into()))?;
    Ok(Path::new(s))
}

impl WamState {
    fn to_state(self) -> Result<RoadUserState, Error> {
        RoadUserState::new(Vec2::new(self.x, self.y), self.speed, Vec2::new(self.ox, self.oy))
    }
}

impl WamParams {
    fn to_params(self) -> Result<SimilarityParams, Error> {
        SimilarityParams::new(self.a, self.b, self.c_orient, self.r)
    }
}

impl From<Prediction> for WamPrediction {
    fn from(p: Prediction) -> Self {
        WamPrediction {
            horizon_steps: p.horizon_steps,
            dx: p.displacement.x,
            dy: p.displacement.y,
            x: p.position.x,
            y: p.position.y,
            total_weight: p.total_weight,
            support_count: p.support_count,
        }
    }
}

fn into_handle(db: DisplacementDatabase) -> *mut WamDatabase {
    Box::into_raw(Box::new(WamDatabase { inner: db }))
}

/// Loads a database file. On success `*out` receives a new handle.
///
/// # Safety
/// `file` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wam_database_load(file: *const c_char, out_db: *mut *mut WamDatabase) -> WamStatus {
    guard(|| {
        let slot = out(out_db, "out_db")?;
        *slot = ptr::null_mut();
        let db = predictor::read_database_file(path(file)?)?;
        *slot = into_handle(db);
        Ok(())
    })
}

/// Builds a database from a corpus file for the given horizons.
///
/// # Safety
/// `file` must be a NUL-terminated string, `horizons` must point to
/// `n_horizons` values and `out_db` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wam_database_build(
    file: *const c_char,
    horizons: *const usize,
    n_horizons: usize,
    warmup_offset: usize,
    out_db: *mut *mut WamDatabase,
) -> WamStatus {
    guard(|| {
        let slot = out(out_db, "out_db")?;
        *slot = ptr::null_mut();
        if horizons.is_null() {
            return Err(Failure::Null("horizons"));
        }
        let hs = std::slice::from_raw_parts(horizons, n_horizons);
        let corpus = read_corpus_file(path(file)?)?;
        *slot = into_handle(DisplacementDatabase::build(&corpus, hs, warmup_offset)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `db` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wam_database_free(db: *mut WamDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Number of entries, or 0 for a null handle.
///
/// # Safety
/// `db` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wam_database_len(db: *const WamDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.inner.len())
}

/// Sample period in seconds, or 0 for a null handle.
///
/// # Safety
/// `db` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wam_database_sample_period(db: *const WamDatabase) -> f64 {
    db.as_ref().map_or(0.0, |d| d.inner.sample_period())
}

/// Weighted average prediction.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wam_predict(
    db: *const WamDatabase,
    params: *const WamParams,
    state: *const WamState,
    horizon_steps: usize,
    out_prediction: *mut WamPrediction,
) -> WamStatus {
    guard(|| {
        let db = deref(db, "db")?;
        let p = deref(params, "params")?.to_params()?;
        let s = deref(state, "state")?.to_state()?;
        let o = out(out_prediction, "out_prediction")?;
        *o = db.inner.predict(&p, &s, horizon_steps)?.into();
        Ok(())
    })
}

/// Interaction-aware prediction. `has_other = false` queries a situation
/// without another vehicle and ignores `other_x`, `other_y`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn wam_interaction_predict(
    db: *const WamDatabase,
    params: *const WamParams,
    d: f64,
    e: f64,
    state: *const WamState,
    has_other: bool,
    other_x: f64,
    other_y: f64,
    horizon_steps: usize,
    out_prediction: *mut WamPrediction,
) -> WamStatus {
    guard(|| {
        let db = deref(db, "db")?;
        let ip = InteractionParams::new(deref(params, "params")?.to_params()?, d, e)?;
        let s = deref(state, "state")?.to_state()?;
        let other = has_other.then(|| Vec2::new(other_x, other_y));
        let o = out(out_prediction, "out_prediction")?;
        *o = db
            .inner
            .interaction_predict(&ip, &TrafficSituationState::new(s, other)?, horizon_steps)?
            .into();
        Ok(())
    })
}

/// Constant-velocity baseline.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wam_constant_velocity_predict(
    state: *const WamState,
    horizon_steps: usize,
    sample_period: f64,
    out_prediction: *mut WamPrediction,
) -> WamStatus {
    guard(|| {
        let s = deref(state, "state")?.to_state()?;
        let o = out(out_prediction, "out_prediction")?;
        *o = constant_velocity_predict(&s, horizon_steps, sample_period)?.into();
        Ok(())
    })
}

/// Similarity of two states, 0 outside the cutoff radius.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wam_similarity(
    params: *const WamParams,
    a: *const WamState,
    b: *const WamState,
    out_value: *mut f64,
) -> WamStatus {
    guard(|| {
        let p = deref(params, "params")?.to_params()?;
        let sa = deref(a, "a")?.to_state()?;
        let sb = deref(b, "b")?.to_state()?;
        *out(out_value, "out_value")? = kernel::similarity(&p, &sa, &sb);
        Ok(())
    })
}

/// Seconds to brake from `v0` m/s with friction coefficient `mu`.
///
/// # Safety
/// `out_seconds` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wam_min_horizon(v0: f64, mu: f64, out_seconds: *mut f64) -> WamStatus {
    guard(|| {
        *out(out_seconds, "out_seconds")? = min_horizon(&BrakingQuery::new(v0, mu))?;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn wam_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
