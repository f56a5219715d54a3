//! C ABI over `ecomplex-core`.
//!
//! Objects cross the boundary as opaque handles (`EcxMatrix`,
//! `EcxTrajectory`) that must be released with the matching `*_free`
//! function. Every fallible call returns an [`EcxStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`ecx_last_error_message`]. Output arrays are caller-allocated and their
//! length is checked.
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the access the function
//! documents: handles must come from this library and not yet be freed,
//! input arrays must hold the stated number of elements and output buffers
//! must be writable for `len` elements. Handles may be shared across threads
//! for reading but must not be freed while in use.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ecomplex_core::capability::{derive_matrix, sample_world, ModelParams};
use ecomplex_core::nulls::{null_comparison, NullLevel, NullModelSpec};
use ecomplex_core::{
    compute_rca, diversification, normalize, random_walk_check, reflect, threshold_to_binary,
    ubiquity, BipartiteMatrix, Error, ErrorKind, ExportVolumeTable, ReflectionTrajectory,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcxStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or malformed.
    InvalidArgument = 2,
    /// A caller buffer has the wrong length.
    BufferSize = 3,
    /// Input data could not be read or parsed.
    Input = 4,
    /// The input holds no usable data.
    NoData = 5,
    /// The computation is undefined for this input (degenerate, collinear...).
    Computation = 6,
    /// A Rust panic was caught at the boundary. This is a bug.
    Panic = 7,
}

pub const ECX_NULL_DENSITY_ONLY: u32 = 0;
pub const ECX_NULL_PRESERVE_COUNTRY_DEGREES: u32 = 1;
pub const ECX_NULL_PRESERVE_PRODUCT_DEGREES: u32 = 2;
pub const ECX_NULL_PRESERVE_BOTH: u32 = 3;

/// Binary country-product matrix.
pub struct EcxMatrix(BipartiteMatrix);

/// Result of the method of reflections.
pub struct EcxTrajectory(ReflectionTrajectory);

/// Capability model parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EcxModelParams {
    pub n_countries: usize,
    pub n_products: usize,
    pub n_capabilities: usize,
    pub r: f64,
    pub q: f64,
}

/// Summary of a null-model comparison. Undefined values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EcxNullResult {
    pub observed: f64,
    pub null_mean: f64,
    pub null_stdev: f64,
    pub p_value: f64,
    pub degenerate_samples: usize,
    pub no_rewiring_possible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(EcxStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Input => EcxStatus::Input,
            ErrorKind::NoData => EcxStatus::NoData,
            ErrorKind::Computation => EcxStatus::Computation,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(EcxStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EcxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            EcxStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EcxStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(EcxStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_slice<'a, T>(
    p: *mut T,
    len: usize,
    expected: usize,
    name: &str,
) -> Result<&'a mut [T], Fail> {
    if len != expected {
        return Err(Fail(
            EcxStatus::BufferSize,
            format!("{name} has length {len}, expected {expected}"),
        ));
    }
    if expected == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail(EcxStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(EcxStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(EcxStatus::NullPointer, format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

fn padded_ids(prefix: char, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the length of the
/// full message excluding the terminator, so a caller can size a retry.
#[no_mangle]
pub unsafe extern "C" fn ecx_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ecx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a matrix from `n_edges` (country, product) index pairs. Countries
/// and products get zero-padded ids `c0..`, `p0..` in index order.
#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_from_edges(
    n_countries: usize,
    n_products: usize,
    countries: *const usize,
    products: *const usize,
    n_edges: usize,
    out: *mut *mut EcxMatrix,
) -> EcxStatus {
    guard(|| {
        let cs = in_slice(countries, n_edges, "countries")?;
        let ps = in_slice(products, n_edges, "products")?;
        let m = BipartiteMatrix::new(
            padded_ids('c', n_countries),
            padded_ids('p', n_products),
            cs.iter().copied().zip(ps.iter().copied()),
        )?;
        put(out, Box::into_raw(Box::new(EcxMatrix(m))), "out")
    })
}

/// Builds a matrix from a row-major `n_countries x n_products` array of
/// export values: RCA, then an edge wherever RCA >= `threshold`.
#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_from_exports(
    values: *const f64,
    n_countries: usize,
    n_products: usize,
    threshold: f64,
    out: *mut *mut EcxMatrix,
) -> EcxStatus {
    guard(|| {
        let len = n_countries
            .checked_mul(n_products)
            .ok_or_else(|| invalid("matrix size overflows"))?;
        let vals = in_slice(values, len, "values")?;
        let cids = padded_ids('c', n_countries);
        let pids = padded_ids('p', n_products);
        let mut table = ExportVolumeTable::new(0);
        for (i, c) in cids.iter().enumerate() {
            for (j, p) in pids.iter().enumerate() {
                table.insert(c, p, vals[i * n_products + j])?;
            }
        }
        let rca = compute_rca(&table)?;
        let m = threshold_to_binary(&rca, threshold)?;
        put(out, Box::into_raw(Box::new(EcxMatrix(m))), "out")
    })
}

/// Loads a matrix artifact written by `ecomplex ingest` (the `.json`
/// sidecar path, UTF-8).
#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_load(
    path: *const c_char,
    out: *mut *mut EcxMatrix,
) -> EcxStatus {
    guard(|| {
        if path.is_null() {
            return Err(Fail(EcxStatus::NullPointer, "path is null".into()));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not valid UTF-8"))?;
        let (m, _) = ecomplex_core::io::read_matrix_artifact(Path::new(path))?;
        put(out, Box::into_raw(Box::new(EcxMatrix(m))), "out")
    })
}

/// Releases a matrix. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_free(m: *mut EcxMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_dims(
    m: *const EcxMatrix,
    n_countries: *mut usize,
    n_products: *mut usize,
    n_edges: *mut usize,
) -> EcxStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        put(n_countries, m.n_countries(), "n_countries")?;
        put(n_products, m.n_products(), "n_products")?;
        put(n_edges, m.n_edges(), "n_edges")
    })
}

/// Writes k_{c,0} for every country; `len` must equal the country count.
#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_diversification(
    m: *const EcxMatrix,
    out: *mut usize,
    len: usize,
) -> EcxStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        out_slice(out, len, m.n_countries(), "out")?.copy_from_slice(&diversification(m));
        Ok(())
    })
}

/// Writes k_{p,0} for every product; `len` must equal the product count.
#[no_mangle]
pub unsafe extern "C" fn ecx_matrix_ubiquity(
    m: *const EcxMatrix,
    out: *mut usize,
    len: usize,
) -> EcxStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        out_slice(out, len, m.n_products(), "out")?.copy_from_slice(&ubiquity(m));
        Ok(())
    })
}

/// Runs the method of reflections to `depth` (>= 0). Isolated countries and
/// products are excluded, so the trajectory may be smaller than the matrix.
#[no_mangle]
pub unsafe extern "C" fn ecx_reflect(
    m: *const EcxMatrix,
    depth: i32,
    out: *mut *mut EcxTrajectory,
) -> EcxStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        let depth = usize::try_from(depth)
            .map_err(|_| invalid(format!("depth must be >= 0, got {depth}")))?;
        let t = reflect(m, depth)?;
        put(out, Box::into_raw(Box::new(EcxTrajectory(t))), "out")
    })
}

/// Releases a trajectory. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ecx_trajectory_free(t: *mut EcxTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ecx_trajectory_dims(
    t: *const EcxTrajectory,
    depth: *mut usize,
    n_countries: *mut usize,
    n_products: *mut usize,
) -> EcxStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        put(depth, t.depth(), "depth")?;
        put(n_countries, t.countries().len(), "n_countries")?;
        put(n_products, t.products().len(), "n_products")
    })
}

/// Copies the id of trajectory country `index` into `buf` (NUL-terminated).
#[no_mangle]
pub unsafe extern "C" fn ecx_trajectory_country_id(
    t: *const EcxTrajectory,
    index: usize,
    buf: *mut c_char,
    len: usize,
) -> EcxStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        let id = t
            .countries()
            .get(index)
            .ok_or_else(|| invalid(format!("country index {index} out of range")))?;
        let dst = out_slice(buf, len, len, "buf")?;
        if dst.len() <= id.len() {
            return Err(Fail(
                EcxStatus::BufferSize,
                format!(
                    "buffer of {len} bytes cannot hold {} bytes plus terminator",
                    id.len()
                ),
            ));
        }
        for (d, b) in dst.iter_mut().zip(id.bytes()) {
            *d = b as c_char;
        }
        dst[id.len()] = 0;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ecx_trajectory_country_level(
    t: *const EcxTrajectory,
    level: usize,
    out: *mut f64,
    len: usize,
) -> EcxStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        let values = t.country_level(level)?;
        out_slice(out, len, values.len(), "out")?.copy_from_slice(values);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ecx_trajectory_product_level(
    t: *const EcxTrajectory,
    level: usize,
    out: *mut f64,
    len: usize,
) -> EcxStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        let values = t.product_level(level)?;
        out_slice(out, len, values.len(), "out")?.copy_from_slice(values);
        Ok(())
    })
}

/// Z-scores of country level `level` (population standard deviation).
#[no_mangle]
pub unsafe extern "C" fn ecx_normalize(
    t: *const EcxTrajectory,
    level: usize,
    out: *mut f64,
    len: usize,
) -> EcxStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        let z = normalize(t, level)?;
        out_slice(out, len, z.values.len(), "out")?.copy_from_slice(&z.values);
        Ok(())
    })
}

/// Largest absolute difference between `level` of the trajectory and the
/// same quantity computed through explicit random-walk operator powers.
#[no_mangle]
pub unsafe extern "C" fn ecx_random_walk_check(
    m: *const EcxMatrix,
    t: *const EcxTrajectory,
    level: usize,
    out: *mut f64,
) -> EcxStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        let t = &deref(t, "trajectory")?.0;
        put(out, random_walk_check(m, t, level)?, "out")
    })
}

/// Samples a matrix from the capability model.
#[no_mangle]
pub unsafe extern "C" fn ecx_capability_sample_matrix(
    params: *const EcxModelParams,
    seed: u64,
    out: *mut *mut EcxMatrix,
) -> EcxStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let world = sample_world(
            ModelParams {
                n_countries: p.n_countries,
                n_products: p.n_products,
                n_capabilities: p.n_capabilities,
                r: p.r,
                q: p.q,
            },
            seed,
        )?;
        put(
            out,
            Box::into_raw(Box::new(EcxMatrix(derive_matrix(&world)))),
            "out",
        )
    })
}

/// Compares corr(k_c0, k_c1) with `n_samples` null matrices. `level` is one
/// of the `ECX_NULL_*` constants; `swaps_per_edge` only affects
/// `ECX_NULL_PRESERVE_BOTH`.
#[no_mangle]
pub unsafe extern "C" fn ecx_null_comparison(
    m: *const EcxMatrix,
    level: u32,
    n_samples: usize,
    seed: u64,
    swaps_per_edge: usize,
    out: *mut EcxNullResult,
) -> EcxStatus {
    guard(|| {
        let m = &deref(m, "matrix")?.0;
        let level = match level {
            ECX_NULL_DENSITY_ONLY => NullLevel::DensityOnly,
            ECX_NULL_PRESERVE_COUNTRY_DEGREES => NullLevel::PreserveCountryDegrees,
            ECX_NULL_PRESERVE_PRODUCT_DEGREES => NullLevel::PreserveProductDegrees,
            ECX_NULL_PRESERVE_BOTH => NullLevel::PreserveBoth,
            other => return Err(invalid(format!("unknown null level {other}"))),
        };
        let spec = NullModelSpec {
            level,
            n_samples,
            seed,
            swaps_per_edge,
        };
        let c = null_comparison(m, &spec)?;
        put(
            out,
            EcxNullResult {
                observed: c.observed,
                null_mean: c.null_mean.unwrap_or(f64::NAN),
                null_stdev: c.null_stdev.unwrap_or(f64::NAN),
                p_value: c.p_value.unwrap_or(f64::NAN),
                degenerate_samples: c.degenerate_samples,
                no_rewiring_possible: c.no_rewiring_possible,
            },
            "out",
        )
    })
}
