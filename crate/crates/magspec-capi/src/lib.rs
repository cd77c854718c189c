//! C interface for the magspec spectral-numerics library.
//!
//! Everything exported here follows four conventions:
//!
//! * **Status codes, not unwinding.**  Every fallible function returns a
//!   [`MagspecStatus`]; `MAGSPEC_STATUS_OK` is zero.  Panics are caught at
//!   the boundary and surface as `MAGSPEC_STATUS_PANIC` instead of crossing
//!   into the caller.  The code grouping mirrors the CLI exit-code contract:
//!   caller mistakes (invalid input, configuration) versus accuracy
//!   certificates the computation failed to meet.
//! * **Opaque handles.**  Stateful objects cross the boundary as opaque
//!   pointers ([`MagspecModel`]), created by `*_new` and released by the
//!   matching `*_free`.  Freeing null is a no-op; freeing twice is undefined
//!   behaviour, exactly as with `free(3)`.
//! * **Out-pointers.**  Results are written through caller-supplied pointers,
//!   which must be non-null and writable.  A null out-pointer is reported as
//!   `MAGSPEC_STATUS_NULL_POINTER` and nothing is written.
//! * **Thread-local error text.**  [`magspec_last_error_message`] describes
//!   the most recent failure *on the calling thread*; the pointer stays valid
//!   until the next failing call on that thread.
//!
//! The companion header `include/magspec.h` is regenerated by the build
//! script with cbindgen and committed, so C consumers only need a linker.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{self, AssertUnwindSafe};

use magspec::error::Error;
use magspec::harness::{dirac_gap_value, selftest, SweepConfig, SweepQuantity};
use magspec::kernels::{model_kernel, radial_kernel, weyl_kernel, ModelParams};
use magspec::landau::{
    landau_levels, level_count, magnetic_weyl_density, weyl_density_diag, ModelScalars,
};
use magspec::regimes::{report, BoundBranch, Regime};

/// Return code of every fallible `magspec_*` function.
///
/// Zero is success.  Codes 1–7 map the library's error classes one-to-one;
/// 8 and 9 are boundary conditions that can only arise in the C layer.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagspecStatus {
    /// The call succeeded and all out-pointers were written.
    Ok = 0,
    /// A parameter lies outside the documented domain.
    InvalidInput = 1,
    /// The computation ran but failed its internal accuracy certificate.
    Accuracy = 2,
    /// A data set is too small for the requested statistic.
    InsufficientData = 3,
    /// An eigendecomposition failed or lost its symmetry.
    Eigen = 4,
    /// The request would allocate an unreasonably large dense object.
    MemoryGuard = 5,
    /// A configuration value could not be interpreted.
    Config = 6,
    /// An underlying file-system operation failed.
    Io = 7,
    /// A required pointer argument was null.
    NullPointer = 8,
    /// An internal panic was caught at the boundary; please report it.
    Panic = 9,
}

/// Field-strength classification, mirroring the library's three regimes.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagspecRegime {
    /// `μ ≤ (h|ln h|)^{-1/4}`.
    Weak = 0,
    /// Between the weak and strong edges.
    Intermediate = 1,
    /// `μ > (h|ln h|)^{-2/5}`.
    Strong = 2,
}

/// Which remainder bound applies for a given `(μ, h)`.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagspecBranch {
    /// The four-term weak-field bound applies.
    WeakField = 0,
    /// The two-term intermediate-field bound applies.
    IntermediateField = 1,
    /// Strong field: no bound is stated.
    NotStated = 2,
}

impl From<Regime> for MagspecRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::Weak => MagspecRegime::Weak,
            Regime::Intermediate => MagspecRegime::Intermediate,
            Regime::Strong => MagspecRegime::Strong,
        }
    }
}

impl From<BoundBranch> for MagspecBranch {
    fn from(b: BoundBranch) -> Self {
        match b {
            BoundBranch::WeakField => MagspecBranch::WeakField,
            BoundBranch::IntermediateField => MagspecBranch::IntermediateField,
            BoundBranch::NotStated => MagspecBranch::NotStated,
        }
    }
}

/// One Dirac-energy gap evaluation: the localised pair functional against
/// its smooth reference, with the signed and relative gaps and the
/// theoretical remainder overlay for the same `(μ, h, κ)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MagspecGapResult {
    /// Pair functional of the model projector kernel.
    pub pair_energy: f64,
    /// Same functional with the smooth reference kernel.
    pub weyl_reference: f64,
    /// `pair_energy - weyl_reference`.
    pub gap: f64,
    /// `|gap| / |weyl_reference|`.
    pub rel_gap: f64,
    /// Theoretical remainder value for the applicable branch (NaN when no
    /// bound is stated for the regime).
    pub remainder_overlay: f64,
}

/// Threshold scales, classification and remainder-bound values for one
/// `(μ, h)` pair.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MagspecRegimeReport {
    /// Perturbation-validity horizon `min(μ^m h^{1+δ}, 1)`.
    pub t_star: f64,
    /// Distinguishability scale `(μh|ln h|)^{1/3}`.
    pub t2_star: f64,
    /// `(μh|ln h|)^{2/3}` in the stronger fields, `μ^{-1}` otherwise.
    pub t3_star: f64,
    /// Logarithmic horizon `μ³h|ln h|`.
    pub t4_star: f64,
    /// Polar-cap angular width `(μh|ln h|)^{1/2}`.
    pub rho_bar: f64,
    /// Field-strength classification.
    pub regime: MagspecRegime,
    /// Which of the three bounds applies.
    pub applicable: MagspecBranch,
    /// Four-term weak-field bound at the requested `κ`.
    pub bound_weak_field: f64,
    /// Two-term intermediate-field bound at the requested `κ`.
    pub bound_intermediate_field: f64,
    /// Three-term short-time bound at the requested `κ`.
    pub bound_general: f64,
    /// Value of the applicable bound; NaN when no bound is stated.
    pub remainder_value: f64,
}

/// Opaque handle around a validated model-kernel parameter set.
///
/// Create with [`magspec_model_new`], release with [`magspec_model_free`].
pub struct MagspecModel {
    params: ModelParams,
    n_max: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn fail(e: &Error) -> MagspecStatus {
    set_error(&e.to_string());
    match e {
        Error::InvalidInput(_) => MagspecStatus::InvalidInput,
        Error::Accuracy(_) => MagspecStatus::Accuracy,
        Error::InsufficientData(_) => MagspecStatus::InsufficientData,
        Error::Eigen(_) => MagspecStatus::Eigen,
        Error::MemoryGuard(_) => MagspecStatus::MemoryGuard,
        Error::Config(_) => MagspecStatus::Config,
        Error::Io(_) => MagspecStatus::Io,
    }
}

fn null_arg(name: &str) -> MagspecStatus {
    set_error(&format!("{name} must not be null"));
    MagspecStatus::NullPointer
}

fn invalid(message: String) -> MagspecStatus {
    fail(&Error::InvalidInput(message))
}

/// Runs a closure with a panic barrier so unwinding never crosses the ABI.
fn guard<F: FnOnce() -> MagspecStatus>(f: F) -> MagspecStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at the C boundary");
            MagspecStatus::Panic
        }
    }
}

/// Library version as a static, NUL-terminated UTF-8 string.
#[no_mangle]
pub extern "C" fn magspec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Human-readable description of the most recent failure on the calling
/// thread, as a NUL-terminated UTF-8 string (empty if nothing failed yet).
///
/// The pointer stays valid until the next failing `magspec_*` call on the
/// same thread; copy the text if it must outlive that.
#[no_mangle]
pub extern "C" fn magspec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds a model-kernel handle for coupling `mu`, semiclassical parameter
/// `h`, potential `w` and energy shift `v`, sized so kernel evaluations are
/// accurate for coordinates with `|x₂|, |y₂| ≤ x2_extent`.
///
/// On success writes the new handle to `out`; the caller owns it and must
/// release it with [`magspec_model_free`].
///
/// # Safety
/// `out` must be null (reported, nothing written) or valid for writing one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn magspec_model_new(
    mu: f64,
    h: f64,
    w: f64,
    v: f64,
    x2_extent: f64,
    out: *mut *mut MagspecModel,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if !(x2_extent >= 0.0 && x2_extent.is_finite()) {
            return invalid(format!(
                "x2_extent = {x2_extent} must be a finite non-negative coordinate bound"
            ));
        }
        let probe = match ModelParams::new(mu, h, w, v, 1) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        let n_max = probe.suggest_n_max(x2_extent);
        let params = match ModelParams::new(mu, h, w, v, n_max) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        let handle = Box::new(MagspecModel { params, n_max });
        unsafe { out.write(Box::into_raw(handle)) };
        MagspecStatus::Ok
    })
}

/// Releases a handle created by [`magspec_model_new`].  Passing null is a
/// no-op; passing the same handle twice is undefined behaviour.
///
/// # Safety
/// `model` must be null or a pointer previously returned by
/// [`magspec_model_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn magspec_model_free(model: *mut MagspecModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of oscillator modes the handle sums over (useful for sizing
/// caller-side diagnostics).
///
/// # Safety
/// `model` must be a live handle from [`magspec_model_new`]; `out` must be
/// null (reported) or valid for writing one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn magspec_model_mode_count(
    model: *const MagspecModel,
    out: *mut usize,
) -> MagspecStatus {
    guard(|| {
        if model.is_null() {
            return null_arg("model");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let handle = unsafe { &*model };
        unsafe { out.write(handle.n_max + 1) };
        MagspecStatus::Ok
    })
}

/// Evaluates the model projector kernel at `x = (x1, x2)`, `y = (y1, y2)`
/// and writes its real and imaginary parts.
///
/// # Safety
/// `model` must be a live handle from [`magspec_model_new`]; `out_re` and
/// `out_im` must be null (reported) or valid for writing one `double` each.
#[no_mangle]
pub unsafe extern "C" fn magspec_model_kernel(
    model: *const MagspecModel,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MagspecStatus {
    guard(|| {
        if model.is_null() {
            return null_arg("model");
        }
        if out_re.is_null() {
            return null_arg("out_re");
        }
        if out_im.is_null() {
            return null_arg("out_im");
        }
        let handle = unsafe { &*model };
        match model_kernel(&handle.params, [x1, x2], [y1, y2]) {
            Ok(value) => {
                unsafe {
                    out_re.write(value.re);
                    out_im.write(value.im);
                }
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Closed-form radial profile of the kernel at separation `s` (defined for
/// handles built with `v = 0`, where the kernel modulus is radial).
///
/// # Safety
/// `model` must be a live handle from [`magspec_model_new`]; `out` must be
/// null (reported) or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn magspec_model_radial_kernel(
    model: *const MagspecModel,
    s: f64,
    out: *mut f64,
) -> MagspecStatus {
    guard(|| {
        if model.is_null() {
            return null_arg("model");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let handle = unsafe { &*model };
        match radial_kernel(&handle.params, s) {
            Ok(value) => {
                unsafe { out.write(value) };
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

fn scalars(mu: f64, h: f64, f: f64, v: f64, sqrt_g: f64, tau: f64) -> Result<ModelScalars, Error> {
    ModelScalars::new(mu, h, f, v, sqrt_g, tau)
}

/// Number of spectral levels at or below the energy threshold for the given
/// scalar data (`f` field strength, `sqrt_g` metric density, `tau` shift).
///
/// # Safety
/// `out` must be null (reported) or valid for writing one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn magspec_level_count(
    mu: f64,
    h: f64,
    f: f64,
    v: f64,
    sqrt_g: f64,
    tau: f64,
    out: *mut usize,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match scalars(mu, h, f, v, sqrt_g, tau) {
            Ok(s) => {
                unsafe { out.write(level_count(&s)) };
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes the spectral levels at or below the energy threshold into `buf`.
///
/// The total level count is always stored in `written`; at most `capacity`
/// leading values are copied into `buf`, so callers can pass `capacity = 0`
/// (with a null `buf`) to query the size, then call again.
///
/// # Safety
/// `written` must be null (reported) or valid for writing one `size_t`;
/// `buf` must be valid for writing `capacity` doubles (null is accepted only
/// when `capacity` is zero).
#[no_mangle]
pub unsafe extern "C" fn magspec_landau_levels(
    mu: f64,
    h: f64,
    f: f64,
    v: f64,
    sqrt_g: f64,
    tau: f64,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MagspecStatus {
    guard(|| {
        if written.is_null() {
            return null_arg("written");
        }
        if buf.is_null() && capacity > 0 {
            return null_arg("buf");
        }
        let s = match scalars(mu, h, f, v, sqrt_g, tau) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let count = level_count(&s);
        if count > 0 {
            let levels = match landau_levels(&s, count - 1) {
                Ok(l) => l,
                Err(e) => return fail(&e),
            };
            for (i, &level) in levels.iter().take(capacity).enumerate() {
                unsafe { buf.add(i).write(level) };
            }
        }
        unsafe { written.write(count) };
        MagspecStatus::Ok
    })
}

/// Magnetic Weyl density `N μ f √g / (2π h)` for the given scalar data.
///
/// # Safety
/// `out` must be null (reported) or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn magspec_magnetic_weyl_density(
    mu: f64,
    h: f64,
    f: f64,
    v: f64,
    sqrt_g: f64,
    tau: f64,
    out: *mut f64,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match scalars(mu, h, f, v, sqrt_g, tau) {
            Ok(s) => {
                unsafe { out.write(magnetic_weyl_density(&s)) };
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Field-free Weyl density `(V + 2τ)√g / (4π h²)` for the given scalar data.
///
/// # Safety
/// `out` must be null (reported) or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn magspec_weyl_density_diag(
    mu: f64,
    h: f64,
    f: f64,
    v: f64,
    sqrt_g: f64,
    tau: f64,
    out: *mut f64,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match scalars(mu, h, f, v, sqrt_g, tau) {
            Ok(s) => {
                unsafe { out.write(weyl_density_diag(&s)) };
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Field-free reference kernel at `x = (x1, x2)`, `y = (y1, y2)` for
/// potential `v`, shift `tau` and the symmetric metric
/// `[[g11, g12], [g12, g22]]`.
///
/// # Safety
/// `out` must be null (reported) or valid for writing one `double`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn magspec_weyl_kernel(
    v: f64,
    h: f64,
    tau: f64,
    g11: f64,
    g12: f64,
    g22: f64,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    out: *mut f64,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match weyl_kernel(v, h, tau, [[g11, g12], [g12, g22]], [x1, x2], [y1, y2]) {
            Ok(value) => {
                unsafe { out.write(value) };
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Evaluates the localised pair functional of the model kernel against its
/// smooth reference at one `(mu, h)` cell and fills `out` with both values,
/// the gaps and the remainder overlay.
///
/// `w` is the model potential, `kappa ∈ (0, 2)` the weight-singularity
/// exponent, `rho` the localisation radius; the three orders control the
/// far-zone, radial and angular quadrature rules (the shipped defaults are
/// 32, 64 and 16).
///
/// # Safety
/// `out` must be null (reported) or valid for writing one
/// `MagspecGapResult`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn magspec_dirac_gap(
    mu: f64,
    h: f64,
    w: f64,
    kappa: f64,
    rho: f64,
    outer_order: usize,
    radial_order: usize,
    angular_order: usize,
    out: *mut MagspecGapResult,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let mut cfg = SweepConfig::new(SweepQuantity::DiracGap, vec![mu], vec![h], "capi-inline");
        cfg.w = w;
        cfg.kappa = kappa;
        cfg.cutoff_radius = rho;
        cfg.outer_order = outer_order;
        cfg.radial_order = radial_order;
        cfg.angular_order = angular_order;
        if let Err(e) = cfg.validate() {
            return fail(&e);
        }
        match dirac_gap_value(&cfg, mu, h) {
            Ok(row) => {
                unsafe {
                    out.write(MagspecGapResult {
                        pair_energy: row.value_main,
                        weyl_reference: row.value_reference,
                        gap: row.gap,
                        rel_gap: row.rel_gap,
                        remainder_overlay: row.overlay,
                    });
                }
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Computes the threshold scales, field-strength classification and
/// remainder-bound values for `(mu, h)` at perturbation order `m`,
/// singularity exponent `kappa` and safety exponent `delta`.
///
/// # Safety
/// `out` must be null (reported) or valid for writing one
/// `MagspecRegimeReport`.
#[no_mangle]
pub unsafe extern "C" fn magspec_regime_report(
    mu: f64,
    h: f64,
    m: u32,
    kappa: f64,
    delta: f64,
    out: *mut MagspecRegimeReport,
) -> MagspecStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match report(mu, h, m, kappa, delta) {
            Ok(r) => {
                let remainder_value = match r.applicable {
                    BoundBranch::WeakField => r.bound_weak_field,
                    BoundBranch::IntermediateField => r.bound_intermediate_field,
                    BoundBranch::NotStated => f64::NAN,
                };
                unsafe {
                    out.write(MagspecRegimeReport {
                        t_star: r.t_star,
                        t2_star: r.t2_star,
                        t3_star: r.t3_star,
                        t4_star: r.t4_star,
                        rho_bar: r.rho_bar,
                        regime: r.regime.into(),
                        applicable: r.applicable.into(),
                        bound_weak_field: r.bound_weak_field,
                        bound_intermediate_field: r.bound_intermediate_field,
                        bound_general: r.bound_general,
                        remainder_value,
                    });
                }
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Runs the deterministic self-test battery with the given seed and writes
/// whether every check passed.  A non-`MAGSPEC_STATUS_OK` return means the
/// battery itself could not run; individual gate failures are reported
/// through `all_passed` instead.
///
/// # Safety
/// `all_passed` must be null (reported) or valid for writing one `bool`.
#[no_mangle]
pub unsafe extern "C" fn magspec_selftest(seed: u64, all_passed: *mut bool) -> MagspecStatus {
    guard(|| {
        if all_passed.is_null() {
            return null_arg("all_passed");
        }
        match selftest(seed) {
            Ok(report) => {
                unsafe { all_passed.write(report.all_passed()) };
                MagspecStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(magspec_last_error_message()) }
            .to_string_lossy()
            .into_owned()
    }

    fn new_model(mu: f64, h: f64, w: f64, v: f64, extent: f64) -> *mut MagspecModel {
        let mut handle: *mut MagspecModel = ptr::null_mut();
        let status = unsafe { magspec_model_new(mu, h, w, v, extent, &mut handle) };
        assert_eq!(status, MagspecStatus::Ok, "{}", last_error());
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn version_is_a_readable_c_string() {
        let text = unsafe { CStr::from_ptr(magspec_version()) }
            .to_str()
            .expect("version should be UTF-8");
        assert_eq!(text, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn model_handle_reproduces_the_library_kernel() {
        let (mu, h, w, v) = (6.0, 0.1, 1.0, 0.0);
        let handle = new_model(mu, h, w, v, 1.0);

        let mut modes = 0usize;
        assert_eq!(
            unsafe { magspec_model_mode_count(handle, &mut modes) },
            MagspecStatus::Ok
        );
        let probe = ModelParams::new(mu, h, w, v, 1).expect("probe");
        let n_max = probe.suggest_n_max(1.0);
        assert_eq!(modes, n_max + 1);

        let params = ModelParams::new(mu, h, w, v, n_max).expect("params");
        let x = [0.3, -0.2];
        let y = [0.1, 0.4];
        let expected = model_kernel(&params, x, y).expect("kernel");

        let (mut re, mut im) = (0.0, 0.0);
        let status =
            unsafe { magspec_model_kernel(handle, x[0], x[1], y[0], y[1], &mut re, &mut im) };
        assert_eq!(status, MagspecStatus::Ok, "{}", last_error());
        assert_eq!(re, expected.re);
        assert_eq!(im, expected.im);

        let s = 0.35;
        let mut radial = 0.0;
        assert_eq!(
            unsafe { magspec_model_radial_kernel(handle, s, &mut radial) },
            MagspecStatus::Ok
        );
        assert_eq!(radial, radial_kernel(&params, s).expect("radial"));

        unsafe { magspec_model_free(handle) };
        unsafe { magspec_model_free(ptr::null_mut()) };
    }

    #[test]
    fn level_functions_agree_with_the_scalar_layer() {
        let (mu, h, f, v, g, tau) = (10.0, 0.02, 1.0, 1.0, 1.0, 0.0);
        let s = ModelScalars::new(mu, h, f, v, g, tau).expect("scalars");

        let mut count = 0usize;
        assert_eq!(
            unsafe { magspec_level_count(mu, h, f, v, g, tau, &mut count) },
            MagspecStatus::Ok
        );
        assert_eq!(count, level_count(&s));
        assert_eq!(count, 3);

        let mut written = 0usize;
        assert_eq!(
            unsafe {
                magspec_landau_levels(mu, h, f, v, g, tau, ptr::null_mut(), 0, &mut written)
            },
            MagspecStatus::Ok,
            "size query with a null buffer should succeed"
        );
        assert_eq!(written, 3);

        let mut buf = [0.0f64; 8];
        assert_eq!(
            unsafe {
                magspec_landau_levels(mu, h, f, v, g, tau, buf.as_mut_ptr(), buf.len(), &mut written)
            },
            MagspecStatus::Ok
        );
        assert_eq!(written, 3);
        let expected = landau_levels(&s, 2).expect("levels");
        assert_eq!(&buf[..3], expected.as_slice());

        let mut short = [0.0f64; 2];
        assert_eq!(
            unsafe {
                magspec_landau_levels(mu, h, f, v, g, tau, short.as_mut_ptr(), 2, &mut written)
            },
            MagspecStatus::Ok
        );
        assert_eq!(written, 3, "truncated fills still report the full count");
        assert_eq!(&short[..], &expected[..2]);

        let mut density = 0.0;
        assert_eq!(
            unsafe { magspec_magnetic_weyl_density(mu, h, f, v, g, tau, &mut density) },
            MagspecStatus::Ok
        );
        assert_eq!(density, magnetic_weyl_density(&s));

        let mut diag = 0.0;
        assert_eq!(
            unsafe { magspec_weyl_density_diag(mu, h, f, v, g, tau, &mut diag) },
            MagspecStatus::Ok
        );
        assert_eq!(diag, weyl_density_diag(&s));
    }

    #[test]
    fn weyl_kernel_matches_the_direct_call() {
        let mut value = 0.0;
        let status = unsafe {
            magspec_weyl_kernel(
                1.0, 0.05, 0.0, 1.0, 0.0, 1.0, 0.3, 0.1, -0.2, 0.25, &mut value,
            )
        };
        assert_eq!(status, MagspecStatus::Ok);
        let expected = weyl_kernel(
            1.0,
            0.05,
            0.0,
            [[1.0, 0.0], [0.0, 1.0]],
            [0.3, 0.1],
            [-0.2, 0.25],
        )
        .expect("weyl");
        assert_eq!(value, expected);
    }

    #[test]
    fn dirac_gap_matches_the_sweep_cell() {
        let (mu, h) = (4.0, 0.1);
        let mut result = MagspecGapResult {
            pair_energy: 0.0,
            weyl_reference: 0.0,
            gap: 0.0,
            rel_gap: 0.0,
            remainder_overlay: 0.0,
        };
        let status =
            unsafe { magspec_dirac_gap(mu, h, 1.0, 0.5, 0.5, 24, 40, 12, &mut result) };
        assert_eq!(status, MagspecStatus::Ok, "{}", last_error());

        let mut cfg = SweepConfig::new(SweepQuantity::DiracGap, vec![mu], vec![h], "test");
        cfg.cutoff_radius = 0.5;
        cfg.outer_order = 24;
        cfg.radial_order = 40;
        cfg.angular_order = 12;
        let row = dirac_gap_value(&cfg, mu, h).expect("cell");
        assert_eq!(result.pair_energy, row.value_main);
        assert_eq!(result.weyl_reference, row.value_reference);
        assert_eq!(result.gap, row.gap);
        assert_eq!(result.rel_gap, row.rel_gap);
        assert_eq!(result.remainder_overlay, row.overlay);
        assert!(result.rel_gap > 0.0 && result.rel_gap < 1.0);
    }

    #[test]
    fn regime_report_exposes_worked_values_and_branches() {
        let mut r = unsafe { std::mem::zeroed::<MagspecRegimeReport>() };
        let status = unsafe { magspec_regime_report(10.0, 1e-4, 2, 1.0, 0.0, &mut r) };
        assert_eq!(status, MagspecStatus::Ok);
        assert_eq!(r.t_star, 0.01);
        assert_eq!(r.regime, MagspecRegime::Intermediate);
        assert_eq!(r.applicable, MagspecBranch::IntermediateField);
        assert_eq!(r.remainder_value, r.bound_intermediate_field);
        assert!(r.rho_bar > 0.09 && r.rho_bar < 0.1);

        let status = unsafe { magspec_regime_report(100.0, 1e-4, 2, 1.0, 0.0, &mut r) };
        assert_eq!(status, MagspecStatus::Ok);
        assert_eq!(r.regime, MagspecRegime::Strong);
        assert_eq!(r.applicable, MagspecBranch::NotStated);
        assert!(r.remainder_value.is_nan());
    }

    #[test]
    fn failures_set_status_and_error_text() {
        let mut out = 0usize;
        let status = unsafe { magspec_level_count(-1.0, 0.1, 1.0, 1.0, 1.0, 0.0, &mut out) };
        assert_eq!(status, MagspecStatus::InvalidInput);
        assert!(last_error().contains("mu"), "got: {}", last_error());

        let status =
            unsafe { magspec_level_count(1.0, 0.1, 1.0, 1.0, 1.0, 0.0, ptr::null_mut()) };
        assert_eq!(status, MagspecStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut handle: *mut MagspecModel = ptr::null_mut();
        let status = unsafe { magspec_model_new(2.0, 0.1, 1.0, 0.0, f64::NAN, &mut handle) };
        assert_eq!(status, MagspecStatus::InvalidInput);
        assert!(handle.is_null());

        let mut gap = unsafe { std::mem::zeroed::<MagspecGapResult>() };
        let status = unsafe { magspec_dirac_gap(4.0, 0.1, 1.0, 2.5, 0.5, 24, 40, 12, &mut gap) };
        assert_eq!(status, MagspecStatus::Config);
        assert!(last_error().contains("kappa"));
    }

    #[test]
    fn selftest_battery_runs_through_the_boundary() {
        let mut passed = false;
        let status = unsafe { magspec_selftest(42, &mut passed) };
        assert_eq!(status, MagspecStatus::Ok, "{}", last_error());
        assert!(passed);
    }
}
