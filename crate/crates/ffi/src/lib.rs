//! C ABI over `risradar`.
//!
//! Every function returns an [`RrStatus`]; on failure the message is kept per
//! thread and read back with [`rr_last_error_message`]. Handles are opaque and
//! must be released with their `_free` function. Matrices are column-major
//! with separate real and imaginary arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use risradar::analysis::{optimal_phases_and_max_gain, PlacementScenario};
use risradar::geometry::{Direction, PlanarLayout, RadarGeometry};
use risradar::hypothesis::enumerate_hypotheses;
use risradar::sdp::{solve_diag_sdp, DiagSdpProblem, SdpOptions};
use risradar::sim::{run_sweep, ExperimentConfig, MetricsRow, Profile, Scheme};
use risradar::{CMat, Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Geometry = 4,
    Shape = 5,
    Singular = 6,
    Infeasible = 7,
    NoConvergence = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RrStatus {
    match e {
        Error::Domain(_) | Error::Underflow | Error::SearchTooLarge(_) => RrStatus::Domain,
        Error::Geometry(_) => RrStatus::Geometry,
        Error::Shape(_) => RrStatus::Shape,
        Error::SingularEstimation(_) => RrStatus::Singular,
        Error::InfeasibleHypothesis(_) => RrStatus::Infeasible,
        Error::SdpConvergence { .. } => RrStatus::NoConvergence,
        Error::Config(_) => RrStatus::Config,
        Error::Io(_) | Error::Csv(_) => RrStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs `f`, records any failure and maps it to a status.
fn guard(f: impl FnOnce() -> Outcome) -> RrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RrStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RrStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(msg);
            RrStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            RrStatus::Panic
        }
    }
}

fn nonnull<T>(p: *const T, what: &'static str) -> std::result::Result<*const T, Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(p)
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> std::result::Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    Ok(std::slice::from_raw_parts(nonnull(p, what)?, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> std::result::Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    nonnull(p as *const T, what)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// excluding the terminator, or 0 when there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn rr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Planar layout; lengths in meters except spacings and offset, which are in
/// wavelengths. `element_gain <= 0` selects `4π S^e / λ²`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RrLayout {
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub antenna_rows: usize,
    pub antenna_cols: usize,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub antenna_spacing: f64,
    pub array_offset: [f64; 3],
    pub eta: f64,
    pub phase_levels: usize,
    pub antenna_gain: f64,
    pub element_gain: f64,
}

impl From<&PlanarLayout> for RrLayout {
    fn from(p: &PlanarLayout) -> Self {
        Self {
            ris_rows: p.ris_rows,
            ris_cols: p.ris_cols,
            antenna_rows: p.antenna_rows,
            antenna_cols: p.antenna_cols,
            wavelength: p.wavelength,
            element_spacing: p.element_spacing,
            antenna_spacing: p.antenna_spacing,
            array_offset: p.array_offset,
            eta: p.eta,
            phase_levels: p.phase_levels,
            antenna_gain: p.antenna_gain,
            element_gain: p.element_gain.unwrap_or(0.0),
        }
    }
}

impl From<&RrLayout> for PlanarLayout {
    fn from(p: &RrLayout) -> Self {
        Self {
            ris_rows: p.ris_rows,
            ris_cols: p.ris_cols,
            antenna_rows: p.antenna_rows,
            antenna_cols: p.antenna_cols,
            wavelength: p.wavelength,
            element_spacing: p.element_spacing,
            antenna_spacing: p.antenna_spacing,
            array_offset: p.array_offset,
            eta: p.eta,
            phase_levels: p.phase_levels,
            antenna_gain: p.antenna_gain,
            element_gain: (p.element_gain > 0.0).then_some(p.element_gain),
        }
    }
}

/// Opaque radar geometry.
pub struct RrGeometry {
    inner: RadarGeometry,
}

/// Writes the default layout (8×8 surface, 2×2 array) to `out`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rr_layout_default(out: *mut RrLayout) -> RrStatus {
    guard(|| {
        nonnull(out as *const RrLayout, "out")?;
        *out = RrLayout::from(&PlanarLayout::default());
        Ok(())
    })
}

/// # Safety
/// `layout` and `out` must be valid pointers. On success `*out` owns a handle.
#[no_mangle]
pub unsafe extern "C" fn rr_geometry_new(layout: *const RrLayout, out: *mut *mut RrGeometry) -> RrStatus {
    guard(|| {
        let l = &*nonnull(layout, "layout")?;
        nonnull(out as *const *mut RrGeometry, "out")?;
        let g = RadarGeometry::planar(&PlanarLayout::from(l))?;
        *out = Box::into_raw(Box::new(RrGeometry { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `geom` must come from [`rr_geometry_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rr_geometry_free(geom: *mut RrGeometry) {
    if !geom.is_null() {
        drop(Box::from_raw(geom));
    }
}

/// # Safety
/// `geom` must be a live handle; outputs may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn rr_geometry_counts(geom: *const RrGeometry, elements: *mut usize, antennas: *mut usize) -> RrStatus {
    guard(|| {
        let g = &(*nonnull(geom, "geom")?).inner;
        if !elements.is_null() {
            *elements = g.element_count();
        }
        if !antennas.is_null() {
            *antennas = g.antenna_count();
        }
        Ok(())
    })
}

/// Maximum two-way power gain toward `(theta, phi)` for a single-antenna
/// geometry, with the aligning phase shifts written to `phases` (length
/// equal to the element count, may be null when that count is 0).
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn rr_max_power_gain(
    geom: *const RrGeometry,
    theta: f64,
    phi: f64,
    gain: *mut f64,
    phases: *mut f64,
    phases_len: usize,
) -> RrStatus {
    guard(|| {
        let g = &(*nonnull(geom, "geom")?).inner;
        nonnull(gain as *const f64, "gain")?;
        if phases_len != g.element_count() {
            return Err(Failure::Invalid(format!("phases_len {phases_len} != element count {}", g.element_count())));
        }
        let (s, b) = optimal_phases_and_max_gain(g, Direction::new(theta, phi)?)?;
        slice_mut(phases, phases_len, "phases")?.copy_from_slice(s.shifts());
        *gain = b;
        Ok(())
    })
}

/// Top-view placement gain `B(lateral, height)` of a line of `elements`
/// half-wavelength elements, for each `(lateral[i], height[i])`.
///
/// # Safety
/// Arrays must hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn rr_power_gain_profile(
    elements: usize,
    wavelength: f64,
    eta: f64,
    theta: f64,
    lateral: *const f64,
    height: *const f64,
    count: usize,
    gain: *mut f64,
) -> RrStatus {
    guard(|| {
        if !(wavelength > 0.0) || !(eta > 0.0 && eta <= 1.0) {
            return Err(Failure::Invalid("wavelength must be positive and eta in (0, 1]".into()));
        }
        let s = PlacementScenario::physical(elements, wavelength, eta, theta);
        let lx = slice(lateral, count, "lateral")?;
        let lz = slice(height, count, "height")?;
        let out = slice_mut(gain, count, "gain")?;
        for i in 0..count {
            out[i] = s.power_gain(lx[i], lz[i])?;
        }
        Ok(())
    })
}

/// Number of hypotheses with up to `max_targets` targets over `grid_count` cells.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rr_hypothesis_count(grid_count: usize, max_targets: usize, out: *mut usize) -> RrStatus {
    guard(|| {
        nonnull(out as *const usize, "out")?;
        *out = enumerate_hypotheses(grid_count, max_targets).len();
        Ok(())
    })
}

/// Maximizes `Re tr(C X)` over Hermitian `X ⪰ 0` with `X_ii = targets[i]`.
/// `C` is `dim×dim` column-major; `x_re`/`x_im` receive `X`.
///
/// # Safety
/// Matrix arrays must hold `dim*dim` values, `targets` `dim` values.
#[no_mangle]
pub unsafe extern "C" fn rr_solve_diag_sdp(
    dim: usize,
    cost_re: *const f64,
    cost_im: *const f64,
    targets: *const f64,
    x_re: *mut f64,
    x_im: *mut f64,
    value: *mut f64,
) -> RrStatus {
    guard(|| {
        if dim == 0 {
            return Err(Failure::Invalid("dim must be positive".into()));
        }
        let n2 = dim * dim;
        let re = slice(cost_re, n2, "cost_re")?;
        let im = slice(cost_im, n2, "cost_im")?;
        let t = slice(targets, dim, "targets")?.to_vec();
        nonnull(value as *const f64, "value")?;
        let c = CMat::from_iterator(dim, dim, re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)));
        let sol = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, t)?, &SdpOptions::default())?;
        let xr = slice_mut(x_re, n2, "x_re")?;
        let xi = slice_mut(x_im, n2, "x_im")?;
        for (k, z) in sol.x.iter().enumerate() {
            xr[k] = z.re;
            xi[k] = z.im;
        }
        *value = sol.primal;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrProfile {
    Desk = 0,
    Paper = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrScheme {
    Proposed = 0,
    Random = 1,
    Mimo = 2,
}

/// One metrics row; absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RrMetricsRow {
    pub axis_value: f64,
    pub scheme: RrScheme,
    pub cycle: usize,
    pub p_detect: f64,
    pub p_misdetect: f64,
    pub stderr: f64,
    pub stderr_misdetect: f64,
}

impl From<&MetricsRow> for RrMetricsRow {
    fn from(r: &MetricsRow) -> Self {
        Self {
            axis_value: r.axis_value.unwrap_or(f64::NAN),
            scheme: match r.scheme {
                Scheme::Proposed => RrScheme::Proposed,
                Scheme::Random => RrScheme::Random,
                Scheme::Mimo => RrScheme::Mimo,
            },
            cycle: r.cycle,
            p_detect: r.p_detect,
            p_misdetect: r.p_misdetect.unwrap_or(f64::NAN),
            stderr: r.stderr,
            stderr_misdetect: r.stderr_misdetect.unwrap_or(f64::NAN),
        }
    }
}

/// Opaque Monte Carlo experiment and its results.
pub struct RrSimulation {
    config: ExperimentConfig,
    rows: Vec<MetricsRow>,
}

/// Creates an experiment from a profile and optional TOML overrides (null
/// for none).
///
/// # Safety
/// `overrides` must be null or NUL-terminated UTF-8; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_simulation_new(
    profile: RrProfile,
    overrides: *const c_char,
    out: *mut *mut RrSimulation,
) -> RrStatus {
    guard(|| {
        nonnull(out as *const *mut RrSimulation, "out")?;
        let base = ExperimentConfig::profile(match profile {
            RrProfile::Desk => Profile::Desk,
            RrProfile::Paper => Profile::Paper,
        });
        let config = if overrides.is_null() {
            base
        } else {
            let text = CStr::from_ptr(overrides)
                .to_str()
                .map_err(|e| Failure::Invalid(format!("overrides are not UTF-8: {e}")))?;
            ExperimentConfig::from_toml_over(text, &base)?
        };
        *out = Box::into_raw(Box::new(RrSimulation { config, rows: Vec::new() }));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from [`rr_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rr_simulation_free(sim: *mut RrSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs the experiment (or its sweep) and stores the rows.
///
/// # Safety
/// `sim` must be a live handle; `rows` may be null.
#[no_mangle]
pub unsafe extern "C" fn rr_simulation_run(sim: *mut RrSimulation, rows: *mut usize) -> RrStatus {
    guard(|| {
        nonnull(sim as *const RrSimulation, "sim")?;
        let s = &mut *sim;
        s.rows = run_sweep(&s.config)?;
        if !rows.is_null() {
            *rows = s.rows.len();
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rr_simulation_row(sim: *const RrSimulation, index: usize, out: *mut RrMetricsRow) -> RrStatus {
    guard(|| {
        let s = &*nonnull(sim, "sim")?;
        nonnull(out as *const RrMetricsRow, "out")?;
        let r = s
            .rows
            .get(index)
            .ok_or_else(|| Failure::Invalid(format!("row {index} out of range ({} rows)", s.rows.len())))?;
        *out = RrMetricsRow::from(r);
        Ok(())
    })
}
