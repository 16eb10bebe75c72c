//! C ABI for `basicgap`.
//!
//! Every fallible call returns a [`BgStatus`]; on failure the message is
//! available from [`bg_last_error_message`] on the same thread. Results are
//! written through out-pointers. Handles are released with their `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use basicgap::bounds::{self, BoundError, BoundInput, Regime};
use basicgap::foliation_zoo::{self, FoliationExample, ZooError};
use basicgap::model_ode::{self, ModelError, ModelProblem};
use basicgap::psi_kernel::{self, PsiError};
use basicgap::sl_engine::{self, EndpointKind, SLProblem, SlError, SpectrumResult};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    InvalidArgument = 1,
    DomainError = 2,
    NonConvergence = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
    NoReduction = 6,
    Panic = 7,
}

/// Result of maximising the one-parameter family over s.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgOptimalS {
    pub a: f64,
    pub b: f64,
    pub s0: f64,
    /// 0 for an interior optimum, 1 for the boundary regime s → 1.
    pub regime: i32,
    pub s_star: f64,
    pub bound: f64,
}

/// Drift `F(x)` supplied by the caller. Must be callable from any thread.
pub type BgDriftFn = Option<unsafe extern "C" fn(user_data: *mut c_void, x: f64) -> f64>;

/// Opaque spectrum handle.
pub struct BgSpectrum(SpectrumResult);

/// Opaque fixture handle.
pub struct BgExample(FoliationExample);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend(msg.bytes().filter(|&b| b != 0));
    });
}

struct Failure(BgStatus, String);

impl From<SlError> for Failure {
    fn from(e: SlError) -> Self {
        let status = match e {
            SlError::NonConvergence(_) | SlError::BracketFailure { .. } | SlError::StiffIntegration { .. } => {
                BgStatus::NonConvergence
            }
            _ => BgStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Solver(s) => s.into(),
            ModelError::Domain(_) => Failure(BgStatus::DomainError, e.to_string()),
        }
    }
}

impl From<PsiError> for Failure {
    fn from(e: PsiError) -> Self {
        let status = match e {
            PsiError::QuadratureFailure { .. } => BgStatus::NonConvergence,
            _ => BgStatus::DomainError,
        };
        Failure(status, e.to_string())
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Model(m) => m.into(),
            BoundError::Psi(p) => p.into(),
            _ => Failure(BgStatus::DomainError, e.to_string()),
        }
    }
}

impl From<ZooError> for Failure {
    fn from(e: ZooError) -> Self {
        match e {
            ZooError::Solver(s) => s.into(),
            ZooError::Psi(p) => p.into(),
            ZooError::Bound(b) => b.into(),
            _ => Failure(BgStatus::InvalidArgument, e.to_string()),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(BgStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            BgStatus::Panic
        }
    }
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn bound_input(n: u32, k: f64, d: f64) -> Result<BoundInput, Failure> {
    Ok(BoundInput::new(n, k, d)?)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bg_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// π²/d².
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_zhong_yang(n: u32, k_curv: f64, d: f64, out: *mut f64) -> BgStatus {
    guard(|| put(out, bounds::zhong_yang(&bound_input(n, k_curv, d)?).value))
}

/// nK; `valid` receives whether K > 0.
///
/// # Safety
/// `out` and `valid` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_lichnerowicz(n: u32, k_curv: f64, d: f64, out: *mut f64, valid: *mut bool) -> BgStatus {
    guard(|| {
        let r = bounds::lichnerowicz(&bound_input(n, k_curv, d)?);
        put(valid, r.valid)?;
        put(out, r.value)
    })
}

/// 4s(1−s)π²/d² + s(n−1)K for s ∈ (0, 1).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_shi_zhang(n: u32, k_curv: f64, d: f64, s: f64, out: *mut f64) -> BgStatus {
    guard(|| put(out, bounds::shi_zhang(&bound_input(n, k_curv, d)?, s)?.value))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_optimal_s(n: u32, k_curv: f64, d: f64, out: *mut BgOptimalS) -> BgStatus {
    guard(|| {
        let o = bounds::optimal_s(&bound_input(n, k_curv, d)?);
        put(
            out,
            BgOptimalS {
                a: o.a,
                b: o.b,
                s0: o.s0,
                regime: match o.regime {
                    Regime::Interior => 0,
                    Regime::Boundary => 1,
                },
                s_star: o.s_star,
                bound: o.bound,
            },
        )
    })
}

/// First nonzero Neumann eigenvalue of the comparison model on `[a, a + delta]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_model_eigenvalue(k_curv: f64, n: u32, a: f64, delta: f64, tol: f64, out: *mut f64) -> BgStatus {
    guard(|| {
        let p = ModelProblem::new(k_curv, n, a, delta)?;
        put(out, model_ode::model_eigenvalue(&p, tol)?)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_psi(theta: f64, out: *mut f64) -> BgStatus {
    guard(|| put(out, psi_kernel::psi(theta)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_psi_ode_residual(theta: f64, out: *mut f64) -> BgStatus {
    guard(|| put(out, psi_kernel::psi_ode_residual(theta)?))
}

/// `∫₀^{π/2} ψ²` by adaptive Simpson at `quad_tol` ∈ [1e-12, 1e-6].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_barrier_integral(quad_tol: f64, out: *mut f64) -> BgStatus {
    guard(|| put(out, psi_kernel::barrier_integral(quad_tol)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_refined_zhong_yang(d: f64, k: f64, out: *mut f64) -> BgStatus {
    guard(|| put(out, psi_kernel::refined_zhong_yang(d, k)?))
}

#[derive(Clone, Copy)]
struct Callback {
    f: unsafe extern "C" fn(*mut c_void, f64) -> f64,
    user: *mut c_void,
}

// SAFETY: the caller promises the callback and its user data are thread-safe.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, x: f64) -> f64 {
        // SAFETY: validity of `f` and `user` is the caller's contract.
        unsafe { (self.f)(self.user, x) }
    }
}

fn endpoint(multiplicity: f64) -> EndpointKind {
    if multiplicity == 0.0 {
        EndpointKind::NeumannRegular
    } else {
        EndpointKind::pole(multiplicity)
    }
}

fn build_problem(
    left: f64,
    right: f64,
    drift: BgDriftFn,
    drift_derivative: BgDriftFn,
    user_data: *mut c_void,
    left_multiplicity: f64,
    right_multiplicity: f64,
) -> Result<SLProblem, Failure> {
    let mut p = match drift {
        Some(f) => {
            let cb = Callback { f, user: user_data };
            SLProblem::new(left, right, move |x| cb.call(x))?
        }
        None => SLProblem::free(left, right)?,
    };
    if let Some(f) = drift_derivative {
        let cb = Callback { f, user: user_data };
        p = p.with_drift_derivative(move |x| cb.call(x));
    }
    Ok(p.with_endpoints(endpoint(left_multiplicity), endpoint(right_multiplicity)))
}

/// Lowest `count` Neumann eigenvalues of `v'' + F v' = −λ v` by shooting.
///
/// A null `drift` means `F ≡ 0`; a null `drift_derivative` falls back to a
/// difference quotient. A multiplicity of 0 marks a regular Neumann end,
/// a positive one a pole `F ~ m/(x − end)`.
///
/// # Safety
/// The callbacks must be safe to call with `user_data` from any thread for
/// the duration of the call. `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_shooting(
    left: f64,
    right: f64,
    drift: BgDriftFn,
    drift_derivative: BgDriftFn,
    user_data: *mut c_void,
    left_multiplicity: f64,
    right_multiplicity: f64,
    count: usize,
    tol: f64,
    out: *mut *mut BgSpectrum,
) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = build_problem(left, right, drift, drift_derivative, user_data, left_multiplicity, right_multiplicity)?;
        let r = sl_engine::solve_neumann_shooting(&p, count, tol)?;
        put(out, Box::into_raw(Box::new(BgSpectrum(r))))
    })
}

/// Same as [`bg_spectrum_shooting`] with the finite-difference solver on `mesh` cells.
///
/// # Safety
/// See [`bg_spectrum_shooting`].
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_fd(
    left: f64,
    right: f64,
    drift: BgDriftFn,
    drift_derivative: BgDriftFn,
    user_data: *mut c_void,
    left_multiplicity: f64,
    right_multiplicity: f64,
    count: usize,
    mesh: usize,
    out: *mut *mut BgSpectrum,
) -> BgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = build_problem(left, right, drift, drift_derivative, user_data, left_multiplicity, right_multiplicity)?;
        let r = sl_engine::solve_neumann_fd(&p, count, mesh)?;
        put(out, Box::into_raw(Box::new(BgSpectrum(r))))
    })
}

/// Number of eigenvalues held by the handle (0 for null).
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_count(h: *const BgSpectrum) -> usize {
    h.as_ref().map_or(0, |s| s.0.eigenvalues.len())
}

/// # Safety
/// `h` must be null or a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_eigenvalue(h: *const BgSpectrum, index: usize, out: *mut f64) -> BgStatus {
    guard(|| {
        let s = h.as_ref().ok_or_else(|| null("spectrum"))?;
        let v = s.0.eigenvalues.get(index).copied().ok_or_else(|| {
            Failure(BgStatus::InvalidArgument, format!("index {index} out of range"))
        })?;
        put(out, v)
    })
}

/// # Safety
/// `h` must be null or a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_residual(h: *const BgSpectrum, out: *mut f64) -> BgStatus {
    guard(|| {
        let s = h.as_ref().ok_or_else(|| null("spectrum"))?;
        put(out, s.0.residual)
    })
}

/// Copies the samples `(x, v(x))` of eigenfunction `index` into `xs`/`vs`.
///
/// `written` receives the number of samples. If `capacity` is too small
/// nothing is copied and `BG_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `h` must be a live handle, `xs` and `vs` valid for `capacity` doubles,
/// `written` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_samples(
    h: *const BgSpectrum,
    index: usize,
    xs: *mut f64,
    vs: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> BgStatus {
    guard(|| {
        let s = h.as_ref().ok_or_else(|| null("spectrum"))?;
        let samples = s.0.eigenfunction_samples.get(index).ok_or_else(|| {
            Failure(BgStatus::InvalidArgument, format!("index {index} out of range"))
        })?;
        put(written, samples.len())?;
        if capacity < samples.len() {
            return Err(Failure(
                BgStatus::BufferTooSmall,
                format!("need {} samples, capacity {capacity}", samples.len()),
            ));
        }
        if xs.is_null() || vs.is_null() {
            return Err(null("sample buffer"));
        }
        for (i, &(x, v)) in samples.iter().enumerate() {
            *xs.add(i) = x;
            *vs.add(i) = v;
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bg_spectrum_free(h: *mut BgSpectrum) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

unsafe fn put_example(out: *mut *mut BgExample, e: FoliationExample) -> Result<(), Failure> {
    put(out, Box::into_raw(Box::new(BgExample(e))))
}

/// Hopf fibration of S^{2m+1}.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_zoo_hopf(n_complex: u32, out: *mut *mut BgExample) -> BgStatus {
    guard(|| put_example(out, foliation_zoo::hopf_example(n_complex)?))
}

/// Isoparametric foliation of S^n with `g` principal curvatures.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_zoo_isoparametric(g: u32, n: u32, m1: u32, m2: u32, out: *mut *mut BgExample) -> BgStatus {
    guard(|| put_example(out, foliation_zoo::isoparametric_example(g, n, m1, m2)?))
}

/// Flat mapping torus with circle leaf space and first basic eigenvalue `lambda`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_zoo_mapping_torus(lambda: f64, out: *mut *mut BgExample) -> BgStatus {
    guard(|| put_example(out, foliation_zoo::mapping_torus_example(lambda)?))
}

/// Fills any non-null out-pointer with the fixture's closed-form data.
///
/// # Safety
/// `h` must be a live handle; each out-pointer must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn bg_zoo_data(
    h: *const BgExample,
    ambient_dim: *mut u32,
    k_ambient: *mut f64,
    known_lambda1b: *mut f64,
    known_diameter: *mut f64,
) -> BgStatus {
    guard(|| {
        let e = &h.as_ref().ok_or_else(|| null("example"))?.0;
        if !ambient_dim.is_null() {
            *ambient_dim = e.ambient_dim;
        }
        if !k_ambient.is_null() {
            *k_ambient = e.k_ambient;
        }
        if !known_lambda1b.is_null() {
            *known_lambda1b = e.known_lambda1b;
        }
        if !known_diameter.is_null() {
            *known_diameter = e.known_diameter;
        }
        Ok(())
    })
}

/// First eigenvalue of the fixture's transverse drift problem, when it has one.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_zoo_reduction_eigenvalue(h: *const BgExample, tol: f64, out: *mut f64) -> BgStatus {
    guard(|| {
        let e = &h.as_ref().ok_or_else(|| null("example"))?.0;
        let red = e
            .reduction
            .ok_or_else(|| Failure(BgStatus::NoReduction, format!("{} has no reduction", e.name)))?;
        put(out, red.first_eigenvalue(tol)?)
    })
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bg_zoo_free(h: *mut BgExample) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
