//! C interface to `teichlab`.
//!
//! Objects are opaque handles created by `tl_*_new`-style calls and released
//! with the matching `tl_*_free`. Every call returns a status code; on failure
//! `tl_last_error_message` describes the most recent error on the calling
//! thread. Complex arrays are passed as separate real and imaginary buffers.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use teichlab::bers::{aw_section, bers_projection};
use teichlab::fields::{
    lp_norm_hyperbolic, sup_norm_weighted, BeltramiField, DiskGrid, GridSpec, HolomorphicField,
};
use teichlab::rigidity::terms_for;
use teichlab::solver::{solve_principal, SolverConfig};
use teichlab::wp::subdivision::steps_for;
use teichlab::wp::teich_distance;
use teichlab::Error;

pub const TL_OK: i32 = 0;
pub const TL_NULL_POINTER: i32 = 1;
pub const TL_PANIC: i32 = 2;
pub const TL_INVALID_ARGUMENT: i32 = 3;
/// Library errors use their own codes, from 10 upwards.
pub const TL_ERROR_BASE: i32 = 10;

/// Sample grid on the unit disk.
pub struct TlGrid(Arc<DiskGrid>);

/// Beltrami coefficient sampled on a grid.
pub struct TlBeltrami(BeltramiField);

/// Quadratic differential on the exterior disk.
pub struct TlHolomorphic(HolomorphicField);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TL_OK,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TL_NULL_POINTER
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            TL_INVALID_ARGUMENT
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            e.code()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TL_PANIC
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_scalar<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = value;
    Ok(())
}

unsafe fn write_complex(
    values: &[C64],
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> Result<(), Fail> {
    if re.is_null() || im.is_null() {
        return Err(Fail::Null("re/im"));
    }
    if len != values.len() {
        return Err(Fail::Arg(format!(
            "buffer length {len}, expected {}",
            values.len()
        )));
    }
    let (re, im) = (
        std::slice::from_raw_parts_mut(re, len),
        std::slice::from_raw_parts_mut(im, len),
    );
    for (i, v) in values.iter().enumerate() {
        re[i] = v.re;
        im[i] = v.im;
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns its full length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Grid with cutoff `1 - 2^-k` and `angles` nodes per ring.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_grid_new(k: u32, angles: usize, out: *mut *mut TlGrid) -> i32 {
    guard(|| {
        let g = GridSpec::default()
            .with_cutoff(k)
            .with_angles(angles)
            .build()?;
        store(out, TlGrid(Arc::new(g)))
    })
}

/// # Safety
/// `grid` must come from `tl_grid_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_grid_free(grid: *mut TlGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_grid_len(grid: *const TlGrid, out: *mut usize) -> i32 {
    guard(|| write_scalar(out, borrow(grid, "grid")?.0.len()))
}

/// Writes the disk nodes; `len` must equal `tl_grid_len`.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_grid_nodes(
    grid: *const TlGrid,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> i32 {
    guard(|| write_complex(&borrow(grid, "grid")?.0.nodes(), re, im, len))
}

/// The constant coefficient `re + i im` on the disk.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_beltrami_constant(
    grid: *const TlGrid,
    re: f64,
    im: f64,
    out: *mut *mut TlBeltrami,
) -> i32 {
    guard(|| {
        let g = borrow(grid, "grid")?;
        store(
            out,
            TlBeltrami(BeltramiField::constant(g.0.clone(), C64::new(re, im))?),
        )
    })
}

/// A coefficient from node samples in grid order.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_beltrami_from_samples(
    grid: *const TlGrid,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut TlBeltrami,
) -> i32 {
    guard(|| {
        let g = borrow(grid, "grid")?;
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        let (re, im) = (
            std::slice::from_raw_parts(re, len),
            std::slice::from_raw_parts(im, len),
        );
        let values = re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect();
        store(
            out,
            TlBeltrami(BeltramiField::from_samples(g.0.clone(), values)?),
        )
    })
}

/// # Safety
/// `mu` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_beltrami_free(mu: *mut TlBeltrami) {
    if !mu.is_null() {
        drop(Box::from_raw(mu));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_beltrami_sup(mu: *const TlBeltrami, out: *mut f64) -> i32 {
    guard(|| write_scalar(out, borrow(mu, "mu")?.0.sup()))
}

/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_beltrami_values(
    mu: *const TlBeltrami,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> i32 {
    guard(|| write_complex(borrow(mu, "mu")?.0.values(), re, im, len))
}

/// `(re + i im) z^-n` with `n >= 4`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_holomorphic_monomial(
    grid: *const TlGrid,
    re: f64,
    im: f64,
    n: usize,
    out: *mut *mut TlHolomorphic,
) -> i32 {
    guard(|| {
        let g = borrow(grid, "grid")?;
        if n < 4 {
            return Err(Fail::Arg(format!("power {n} must be at least 4")));
        }
        store(
            out,
            TlHolomorphic(HolomorphicField::monomial(g.0.clone(), C64::new(re, im), n)),
        )
    })
}

/// # Safety
/// `phi` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_holomorphic_free(phi: *mut TlHolomorphic) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// Values at the reflected nodes `1/z̄`, in grid order.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_holomorphic_values(
    phi: *const TlHolomorphic,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> i32 {
    guard(|| write_complex(borrow(phi, "phi")?.0.values(), re, im, len))
}

/// Hyperbolic sup norm `sup ρ^-2 |φ|`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_holomorphic_sup_norm(phi: *const TlHolomorphic, out: *mut f64) -> i32 {
    guard(|| write_scalar(out, sup_norm_weighted(&borrow(phi, "phi")?.0, -2.0)?.value))
}

/// Hyperbolic `L^p` norm.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_holomorphic_lp_norm(
    phi: *const TlHolomorphic,
    p: f64,
    out: *mut f64,
) -> i32 {
    guard(|| write_scalar(out, lp_norm_hyperbolic(&borrow(phi, "phi")?.0, p)?.value))
}

/// Principal solution values `f(z)` at the disk nodes.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_solve_principal(
    mu: *const TlBeltrami,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        let sol = solve_principal(&borrow(mu, "mu")?.0, &SolverConfig::default())?;
        write_complex(sol.values(), re, im, len)
    })
}

/// Bers projection `Φ(μ)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_bers_projection(
    mu: *const TlBeltrami,
    out: *mut *mut TlHolomorphic,
) -> i32 {
    guard(|| {
        let phi = bers_projection(&borrow(mu, "mu")?.0, &SolverConfig::default())?;
        store(out, TlHolomorphic(phi))
    })
}

/// Ahlfors-Weill section `σ(φ)`; needs `‖φ‖_∞ < 1/2`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_aw_section(
    phi: *const TlHolomorphic,
    out: *mut *mut TlBeltrami,
) -> i32 {
    guard(|| store(out, TlBeltrami(aw_section(&borrow(phi, "phi")?.0)?)))
}

/// Teichmüller distance between two representatives.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tl_teich_distance(
    a: *const TlBeltrami,
    b: *const TlBeltrami,
    out: *mut f64,
) -> i32 {
    guard(|| write_scalar(out, teich_distance(&borrow(a, "a")?.0, &borrow(b, "b")?.0)?))
}

/// Orbit series length for multiplier `lambda`, decay `alpha` and relative tail `tol`.
#[no_mangle]
pub extern "C" fn tl_orbit_terms(lambda: f64, alpha: f64, tol: f64, out: *mut usize) -> i32 {
    guard(|| {
        if !(lambda > 0.0 && lambda < 1.0 && alpha > 0.0 && tol > 0.0) {
            return Err(Fail::Arg("need 0 < λ < 1, α > 0, tol > 0".into()));
        }
        unsafe { write_scalar(out, terms_for(lambda, alpha, tol)) }
    })
}

/// Number of subdivision steps for `‖μ‖_∞ = k` and ball radius `delta0`.
#[no_mangle]
pub extern "C" fn tl_subdivision_steps(k: f64, delta0: f64, out: *mut usize) -> i32 {
    guard(|| {
        if !(0.0..1.0).contains(&k) || !(delta0 > 0.0) {
            return Err(Fail::Arg("need 0 <= k < 1 and δ₀ > 0".into()));
        }
        unsafe { write_scalar(out, steps_for(k, delta0).0) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 256];
        let n = unsafe { tl_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|c| *c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn null_and_argument_errors() {
        unsafe {
            assert_eq!(tl_grid_len(ptr::null(), ptr::null_mut()), TL_NULL_POINTER);
            assert!(last_error().contains("null"));
            let mut g = ptr::null_mut();
            assert_eq!(tl_grid_new(14, 7, &mut g), 19);
            assert!(g.is_null());
            assert!(last_error().contains("angle"));
            assert_eq!(
                tl_orbit_terms(2.0, 0.5, 1e-10, ptr::null_mut()),
                TL_INVALID_ARGUMENT
            );
            tl_grid_free(ptr::null_mut());
        }
    }

    #[test]
    fn error_message_truncates() {
        unsafe {
            tl_grid_len(ptr::null(), ptr::null_mut());
            let mut small = [1 as c_char; 5];
            let full = tl_last_error_message(small.as_mut_ptr(), 5);
            assert!(full > 4);
            assert_eq!(small[4], 0);
            assert_eq!(tl_last_error_message(ptr::null_mut(), 0), full);
        }
    }

    #[test]
    fn arithmetic_helpers() {
        let mut n = 0usize;
        assert_eq!(tl_orbit_terms(0.25, 0.5, 1e-10, &mut n), TL_OK);
        assert_eq!(n, 34);
        assert_eq!(tl_subdivision_steps(0.3, 0.25, &mut n), TL_OK);
        assert_eq!(n, 2);
        let v = unsafe { std::ffi::CStr::from_ptr(tl_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
