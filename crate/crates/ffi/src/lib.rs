//! C ABI over `vortex_patch`.
//!
//! Objects are opaque heap handles created by `*_new` and released by the
//! matching `*_free`. Every fallible call returns a [`VpStatus`]; the message
//! of the most recent failure on the calling thread is available through
//! [`vp_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use vortex_patch::dynamics::{conserved_set, evera_rhs, integrate};
use vortex_patch::rectification::rectify;
use vortex_patch::spectral::{critical_gamma, mode_data, StabilityClass};
use vortex_patch::{EllipseParams, Error, Grid, RadialDeformation};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SelfIntersecting = 3,
    BlowUp = 4,
    NonConvergence = 5,
    Io = 6,
    Panic = 7,
}

/// Kirchhoff ellipse constants for one aspect ratio.
pub struct VpEllipse(EllipseParams);

/// Radial deformation sampled on a uniform grid.
pub struct VpState(RadialDeformation);

/// Conserved quantities of a state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VpConserved {
    pub circulation: f64,
    pub center_modulus: f64,
    pub angular_momentum: f64,
    pub pseudo_energy: f64,
    /// NaN when the ellipse is a disk.
    pub rectified_momentum: f64,
}

/// Linear data of one Fourier mode at the ellipse.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VpModeData {
    pub n: u32,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub omega_n: f64,
    pub m_n: f64,
    /// 0 elliptic, 1 hyperbolic, 2 degenerate.
    pub class_code: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut v = msg.as_bytes().to_vec();
        v.retain(|&b| b != 0);
        *e.borrow_mut() = v;
    });
}

fn status_of(err: &Error) -> VpStatus {
    match err {
        Error::Domain(_) => VpStatus::InvalidArgument,
        Error::SelfIntersecting(_) => VpStatus::SelfIntersecting,
        Error::BlowUp { .. } => VpStatus::BlowUp,
        Error::NonConvergence(_) => VpStatus::NonConvergence,
        Error::Io(_) => VpStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (VpStatus, String)>) -> VpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VpStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            VpStatus::Panic
        }
    }
}

fn lift<T>(r: vortex_patch::Result<T>) -> Result<T, (VpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (VpStatus, String) {
    (VpStatus::NullPointer, format!("{name} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, (VpStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn vp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Creates the ellipse handle for aspect ratio `gamma ≥ 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vp_ellipse_new(gamma: f64, out: *mut *mut VpEllipse) -> VpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = lift(EllipseParams::new(gamma))?;
        *out = Box::into_raw(Box::new(VpEllipse(p)));
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a handle from [`vp_ellipse_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_ellipse_free(e: *mut VpEllipse) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Angular velocity `Ω_γ`, `ℵ` and `α` (the last two NaN for the disk).
///
/// # Safety
/// `e` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn vp_ellipse_constants(
    e: *const VpEllipse,
    omega: *mut f64,
    aleph: *mut f64,
    alpha: *mut f64,
) -> VpStatus {
    guard(|| {
        let p = &borrow(e, "ellipse")?.0;
        if let Some(o) = omega.as_mut() {
            *o = p.omega_gamma;
        }
        if let Some(a) = aleph.as_mut() {
            *a = p.aleph.unwrap_or(f64::NAN);
        }
        if let Some(a) = alpha.as_mut() {
            *a = p.alpha_const.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// # Safety
/// `e` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vp_mode_data(
    e: *const VpEllipse,
    n: u32,
    out: *mut VpModeData,
) -> VpStatus {
    guard(|| {
        let p = &borrow(e, "ellipse")?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = lift(mode_data(n, p))?;
        *out = VpModeData {
            n: m.n,
            mu_plus: m.mu_plus,
            mu_minus: m.mu_minus,
            omega_n: m.omega_n,
            m_n: m.m_n,
            class_code: match m.class {
                StabilityClass::Elliptic => 0,
                StabilityClass::Hyperbolic => 1,
                StabilityClass::Degenerate => 2,
            },
        };
        Ok(())
    })
}

/// Critical aspect ratio `γ̄_n`, `n ≥ 3`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vp_critical_gamma(n: u32, out: *mut f64) -> VpStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(critical_gamma(n))?;
        Ok(())
    })
}

/// State from `n_points` samples; the mean is projected out.
///
/// # Safety
/// `values` must point to `n_points` readable doubles, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vp_state_new(
    values: *const f64,
    n_points: usize,
    out: *mut *mut VpState,
) -> VpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = lift(Grid::new(n_points))?;
        let v = slice::from_raw_parts(values, n_points).to_vec();
        let s = lift(RadialDeformation::projected(grid, v))?;
        *out = Box::into_raw(Box::new(VpState(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_state_free(s: *mut VpState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_state_len(s: *const VpState) -> usize {
    s.as_ref().map(|s| s.0.n_points()).unwrap_or(0)
}

/// Copies the samples into `out` (length `len` must equal the state size).
///
/// # Safety
/// `s` live; `out` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vp_state_values(s: *const VpState, out: *mut f64, len: usize) -> VpStatus {
    guard(|| {
        let s = &borrow(s, "state")?.0;
        write_out(&s.values, out, len)
    })
}

unsafe fn write_out(v: &[f64], out: *mut f64, len: usize) -> Result<(), (VpStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len != v.len() {
        return Err((
            VpStatus::InvalidArgument,
            format!("buffer length {len}, expected {}", v.len()),
        ));
    }
    slice::from_raw_parts_mut(out, len).copy_from_slice(v);
    Ok(())
}

/// Right-hand side of the evolution law at angular velocity `omega`.
///
/// # Safety
/// Handles live; `out` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vp_rhs(
    s: *const VpState,
    e: *const VpEllipse,
    omega: f64,
    out: *mut f64,
    len: usize,
) -> VpStatus {
    guard(|| {
        let s = &borrow(s, "state")?.0;
        let p = &borrow(e, "ellipse")?.0;
        let r = lift(evera_rhs(s, omega, p))?;
        write_out(&r, out, len)
    })
}

/// # Safety
/// Handles live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vp_conserved(
    s: *const VpState,
    e: *const VpEllipse,
    out: *mut VpConserved,
) -> VpStatus {
    guard(|| {
        let s = &borrow(s, "state")?.0;
        let p = &borrow(e, "ellipse")?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = lift(conserved_set(s, p))?;
        *out = VpConserved {
            circulation: c.circulation,
            center_modulus: c.center_modulus,
            angular_momentum: c.angular_momentum,
            pseudo_energy: c.pseudo_energy,
            rectified_momentum: c.rectified_momentum.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// RK4 integration to `t_end`; the final state is returned as a new handle.
///
/// # Safety
/// Handles live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn vp_integrate(
    s: *const VpState,
    e: *const VpEllipse,
    omega: f64,
    dt: f64,
    t_end: f64,
    out: *mut *mut VpState,
) -> VpStatus {
    guard(|| {
        let s = &borrow(s, "state")?.0;
        let p = &borrow(e, "ellipse")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let steps = ((t_end / dt).ceil() as usize).max(1);
        let rec = lift(integrate(s, omega, p, dt, t_end, steps))?;
        let last = rec
            .states
            .last()
            .cloned()
            .unwrap_or_else(|| s.values.clone());
        let st = RadialDeformation {
            grid: s.grid.clone(),
            values: last,
        };
        *out = Box::into_raw(Box::new(VpState(st)));
        Ok(())
    })
}

/// Rectified momentum `𝒥` and time of impact `t̄` of a state.
///
/// # Safety
/// Handles live; output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn vp_rectify(
    s: *const VpState,
    e: *const VpEllipse,
    j_coord: *mut f64,
    t_coord: *mut f64,
) -> VpStatus {
    guard(|| {
        let s = &borrow(s, "state")?.0;
        let p = &borrow(e, "ellipse")?.0;
        let j = j_coord.as_mut().ok_or_else(|| null("j_coord"))?;
        let t = t_coord.as_mut().ok_or_else(|| null("t_coord"))?;
        let r = lift(rectify(s, p))?;
        *j = r.j_coord;
        *t = r.t_coord;
        Ok(())
    })
}
