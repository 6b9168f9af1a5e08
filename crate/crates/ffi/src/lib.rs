//! C interface to `conerad`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`ConeradStatus`]; on failure [`conerad_last_error`] gives a message for
//! the calling thread. Panics are caught and reported as
//! [`ConeradStatus::Panic`].
//!
//! A `pad_factor` of 1 or less means no padding. Forward transforms add the
//! attenuation margin below the grid on top of the factor.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use conerad::crtf;
use conerad::fields::{GridSpec, PadSpec, ScalarField};
use conerad::inversion::invert;
use conerad::phantoms::PhantomSpec;
use conerad::rangeops::{check_range, l_apply_spectral, RangeTolerances, Theorem};
use conerad::transforms::{
    aux_forward_spectral, aux_forward_spectral_padded, cone_forward_spectral,
    cone_forward_spectral_padded, transform_padding, TransformParams,
};
use conerad::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeradStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Argument outside the mathematical domain (e.g. wrong parity of `n`).
    Domain = 3,
    /// Numerical precondition failed: boundary contamination, symmetry,
    /// alignment, geometry or stencil size.
    Numerical = 4,
    Format = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeradTheorem {
    COdd = 0,
    CEven = 1,
    AOdd = 2,
    AEven = 3,
}

impl From<ConeradTheorem> for Theorem {
    fn from(t: ConeradTheorem) -> Self {
        match t {
            ConeradTheorem::COdd => Theorem::COdd,
            ConeradTheorem::CEven => Theorem::CEven,
            ConeradTheorem::AOdd => Theorem::AOdd,
            ConeradTheorem::AEven => Theorem::AEven,
        }
    }
}

/// Outcome of a range test.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeradRangeReport {
    pub passed: bool,
    pub support_ok: bool,
    pub moment_residual: f64,
    /// Smallest per-axis margin; negative when the support leaks out.
    pub min_margin: f64,
}

/// Transform parameters `(mu, psi, n)`.
pub struct ConeradParams(TransformParams);

/// Real field on a uniform grid.
pub struct ConeradField(ScalarField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(ConeradStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) | Error::Singularity(_) => ConeradStatus::Domain,
            Error::Symmetry { .. }
            | Error::BoundaryContamination { .. }
            | Error::Alignment(_)
            | Error::Geometry(_)
            | Error::Stencil { .. } => ConeradStatus::Numerical,
            Error::Invalid(_) => ConeradStatus::InvalidArgument,
            Error::Format(_) => ConeradStatus::Format,
            Error::Io(_) => ConeradStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ConeradStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ConeradStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ConeradStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ConeradStatus::Panic
        }
    }
}

unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ConeradStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(Path::new(s))
}

fn uniform_padding(ndim: usize, factor: f64) -> Result<PadSpec, Failure> {
    if factor <= 1.0 {
        Ok(PadSpec::none(ndim))
    } else {
        Ok(PadSpec::uniform(ndim, factor)?)
    }
}

fn forward_padding(params: &TransformParams, factor: f64) -> Result<PadSpec, Failure> {
    Ok(transform_padding(params, factor.max(1.0))?)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn conerad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_params_new(
    mu: f64,
    psi: f64,
    n: usize,
    out: *mut *mut ConeradParams,
) -> ConeradStatus {
    guard(|| put(out, ConeradParams(TransformParams::new(mu, psi, n)?)))
}

/// # Safety
/// `params` must come from [`conerad_params_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn conerad_params_free(params: *mut ConeradParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Constant of the cone multiplier.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_params_alpha(
    params: *const ConeradParams,
    out: *mut f64,
) -> ConeradStatus {
    guard(|| {
        let p = handle(params, "params")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = p.0.alpha();
        Ok(())
    })
}

/// Constant of the auxiliary multiplier; `n >= 2`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_params_beta(
    params: *const ConeradParams,
    out: *mut f64,
) -> ConeradStatus {
    guard(|| {
        let p = handle(params, "params")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = p.0.beta()?;
        Ok(())
    })
}

/// Field from explicit grid and row-major values (last axis fastest).
///
/// # Safety
/// `dims`, `origin` and `spacing` must hold `ndim` elements and `values`
/// the product of `dims`.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_new(
    ndim: usize,
    dims: *const usize,
    origin: *const f64,
    spacing: *const f64,
    values: *const f64,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let dims = array(dims, ndim, "dims")?.to_vec();
        let spec = GridSpec::new(
            dims,
            array(origin, ndim, "origin")?.to_vec(),
            array(spacing, ndim, "spacing")?.to_vec(),
        )?;
        let values = array(values, spec.len(), "values")?.to_vec();
        put(out, ConeradField(ScalarField::new(spec, values)?))
    })
}

/// One smooth bump sampled on the periodic grid with `dims` samples over
/// `[lo, hi)` per axis.
///
/// # Safety
/// `dims`, `lo`, `hi` and `center` must hold `ndim` elements.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_bump(
    ndim: usize,
    dims: *const usize,
    lo: *const f64,
    hi: *const f64,
    center: *const f64,
    radius: f64,
    amplitude: f64,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let spec = GridSpec::from_extent(
            array(dims, ndim, "dims")?,
            array(lo, ndim, "lo")?,
            array(hi, ndim, "hi")?,
        )?;
        let ph = PhantomSpec::single(array(center, ndim, "center")?.to_vec(), radius, amplitude)?;
        put(out, ConeradField(ph.sample(&spec)?))
    })
}

/// # Safety
/// `field` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_free(field: *mut ConeradField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of axes; 0 for a null handle.
///
/// # Safety
/// `field` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_ndim(field: *const ConeradField) -> usize {
    field.as_ref().map_or(0, |f| f.0.spec().ndim())
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `field` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_len(field: *const ConeradField) -> usize {
    field.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copy dims, origin and spacing into caller buffers of `capacity`
/// elements each; any of the three may be null to skip it.
///
/// # Safety
/// Non-null buffers must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_grid(
    field: *const ConeradField,
    dims: *mut usize,
    origin: *mut f64,
    spacing: *mut f64,
    capacity: usize,
) -> ConeradStatus {
    guard(|| {
        let spec = handle(field, "field")?.0.spec();
        let n = spec.ndim();
        if capacity < n {
            return Err(Failure(
                ConeradStatus::InvalidArgument,
                format!("capacity {capacity} < ndim {n}"),
            ));
        }
        if !dims.is_null() {
            slice::from_raw_parts_mut(dims, n).copy_from_slice(spec.dims());
        }
        if !origin.is_null() {
            slice::from_raw_parts_mut(origin, n).copy_from_slice(spec.origin());
        }
        if !spacing.is_null() {
            slice::from_raw_parts_mut(spacing, n).copy_from_slice(spec.spacing());
        }
        Ok(())
    })
}

/// Copy the samples into `out`, which holds `capacity` doubles.
///
/// # Safety
/// `out` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_values(
    field: *const ConeradField,
    out: *mut f64,
    capacity: usize,
) -> ConeradStatus {
    guard(|| {
        let v = handle(field, "field")?.0.values();
        if out.is_null() {
            return Err(null("out"));
        }
        if capacity < v.len() {
            return Err(Failure(
                ConeradStatus::InvalidArgument,
                format!("capacity {capacity} < {} samples", v.len()),
            ));
        }
        slice::from_raw_parts_mut(out, v.len()).copy_from_slice(v);
        Ok(())
    })
}

/// Relative L2 distance `|a - b| / |b|` on identical grids.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_rel_l2_error(
    a: *const ConeradField,
    b: *const ConeradField,
    out: *mut f64,
) -> ConeradStatus {
    guard(|| {
        let r = handle(a, "a")?.0.rel_l2_error(&handle(b, "b")?.0)?;
        *out.as_mut().ok_or_else(|| null("out"))? = r;
        Ok(())
    })
}

/// Read a real `CRTF` file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_load(
    path: *const c_char,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let f = crtf::load_real(path_arg(path)?)?;
        put(out, ConeradField(f))
    })
}

/// Write a real `CRTF` file.
///
/// # Safety
/// `field` must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn conerad_field_save(
    field: *const ConeradField,
    path: *const c_char,
) -> ConeradStatus {
    guard(|| {
        Ok(crtf::save_real(
            path_arg(path)?,
            &handle(field, "field")?.0,
        )?)
    })
}

/// Cone transform through its multiplier. With `keep_padding` the result
/// stays on the padded working grid, ready for range checks and inversion
/// with `pad_factor = 1`.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_cone_forward(
    field: *const ConeradField,
    params: *const ConeradParams,
    pad_factor: f64,
    keep_padding: bool,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let (f, p) = (&handle(field, "field")?.0, &handle(params, "params")?.0);
        let pad = forward_padding(p, pad_factor)?;
        let g = if keep_padding {
            cone_forward_spectral_padded(f, p, &pad)?
        } else {
            cone_forward_spectral(f, p, &pad)?
        };
        put(out, ConeradField(g))
    })
}

/// Auxiliary transform through its multiplier; `n >= 2`.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_aux_forward(
    field: *const ConeradField,
    params: *const ConeradParams,
    pad_factor: f64,
    keep_padding: bool,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let (f, p) = (&handle(field, "field")?.0, &handle(params, "params")?.0);
        let pad = forward_padding(p, pad_factor)?;
        let g = if keep_padding {
            aux_forward_spectral_padded(f, p, &pad)?
        } else {
            aux_forward_spectral(f, p, &pad)?
        };
        put(out, ConeradField(g))
    })
}

/// `L^power g` through the symbol.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_apply_l(
    field: *const ConeradField,
    params: *const ConeradParams,
    power: u32,
    pad_factor: f64,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let (g, p) = (&handle(field, "field")?.0, &handle(params, "params")?.0);
        let pad = uniform_padding(g.spec().ndim(), pad_factor)?;
        put(out, ConeradField(l_apply_spectral(g, p, power, &pad)?))
    })
}

/// Range test of `theorem` with the support region `[region_lo,
/// region_hi]`. `window_lo`/`window_hi` (both null or both set) restrict
/// the observation to a sub-box, e.g. the original domain of data kept on
/// its padded grid.
///
/// # Safety
/// Region and window arrays must hold one entry per axis; handles must be
/// live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_range_check(
    field: *const ConeradField,
    params: *const ConeradParams,
    theorem: ConeradTheorem,
    region_lo: *const f64,
    region_hi: *const f64,
    window_lo: *const f64,
    window_hi: *const f64,
    eps_support: f64,
    moment_tol: f64,
    pad_factor: f64,
    out: *mut ConeradRangeReport,
) -> ConeradStatus {
    guard(|| {
        let (g, p) = (&handle(field, "field")?.0, &handle(params, "params")?.0);
        let nd = g.spec().ndim();
        let mut tol = RangeTolerances::new(
            array(region_lo, nd, "region_lo")?.to_vec(),
            array(region_hi, nd, "region_hi")?.to_vec(),
        )?;
        tol.eps_support = eps_support;
        tol.moment_tol = moment_tol;
        match (window_lo.is_null(), window_hi.is_null()) {
            (true, true) => {}
            (false, false) => {
                tol = tol.with_window(
                    array(window_lo, nd, "window_lo")?.to_vec(),
                    array(window_hi, nd, "window_hi")?.to_vec(),
                )
            }
            _ => {
                return Err(Failure(
                    ConeradStatus::InvalidArgument,
                    "window_lo and window_hi must both be set or both be null".into(),
                ))
            }
        }
        let pad = uniform_padding(nd, pad_factor)?;
        let r = check_range(g, p, theorem.into(), &tol, &pad)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ConeradRangeReport {
            passed: r.passed,
            support_ok: r.support_ok,
            moment_residual: r.moment_residual,
            min_margin: r.margin.iter().copied().fold(f64::INFINITY, f64::min),
        };
        Ok(())
    })
}

/// Reconstruct `f` along the path of `theorem`, on the input grid.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn conerad_invert(
    field: *const ConeradField,
    params: *const ConeradParams,
    theorem: ConeradTheorem,
    pad_factor: f64,
    out: *mut *mut ConeradField,
) -> ConeradStatus {
    guard(|| {
        let (g, p) = (&handle(field, "field")?.0, &handle(params, "params")?.0);
        let pad = uniform_padding(g.spec().ndim(), pad_factor)?;
        put(out, ConeradField(invert(g, p, theorem.into(), &pad)?.f_hat))
    })
}
