//! Off-diagonal spectral-projector kernels of the model operator.
//!
//! The model operator on `R²` is
//!
//! ```text
//!     A = 1/2 [ (h D₁ − μ x₂)² + h² D₂² − W − 2 v x₂ ],      W > 0,
//! ```
//!
//! i.e. a constant magnetic field of unit intensity in Landau gauge with a
//! constant potential part `W` and a linear tilt `2 v x₂`.  A partial
//! Fourier transform in `x₁` reduces `A` to a family of shifted harmonic
//! oscillators, and the Schwartz kernel of the spectral projector onto
//! `A ≤ 0` becomes a sum over Landau indices `n` of one-dimensional
//! `ζ`-integrals of Hermite-function products:
//!
//! ```text
//!   e(x, y, 0) = (2π)^{-1} μ^{3/2} h^{-3/2}
//!                · exp(i μ h^{-1} (½(x₂+y₂) − v μ^{-2}) (x₁−y₁))
//!                · Σ_n ∫ Υ_n(a(s−ζ)) Υ_n(−a(s+ζ)) e^{i μ h^{-1} ζ (x₁−y₁)} dζ,
//! ```
//!
//! with `a = √(μ/h)`, `s = ½(x₂−y₂)`, and the `ζ`-domain of level `n` cut
//! out by the spectral condition `(2n+1) μ h ≤ W + v(x₂+y₂) − v²μ^{-2} +
//! 2vζ`.  For `v = 0` the condition is `ζ`-independent: exactly the first
//! `N = level_count` levels contribute on their full Hermite envelope, the
//! `ζ`-integrals collapse by orthonormality on the diagonal, and the kernel
//! has the independent **Laguerre closed form**
//!
//! ```text
//!   e(x, y, 0) = (μ / 2πh) e^{i μ (x₂+y₂)(x₁−y₁)/(2h)}
//!                · Σ_{n<N} L_n(z) e^{-z/2},        z = μ|x−y|²/(2h),
//! ```
//!
//! whose level sum telescopes to `L_{N-1}^{(1)}(z) e^{-z/2}`.  The two
//! routes share no quadrature and cross-validate each other to 1e-8.
//!
//! The smooth counterpart is the non-magnetic **Weyl kernel**
//!
//! ```text
//!   e^W(x, y) = (2πh)^{-2} ∫_{ξᵀGξ ≤ V+2τ} e^{i⟨x−y, ξ⟩/h} dξ
//!             = det(G)^{-1/2} · r · J₁(r s / h) / (2π h s),
//! ```
//!
//! with `r = √(V+2τ)` and `s² = (x−y)ᵀ G^{-1} (x−y)`.
//!
//! Gauge convention: the oscillatory prefactor is kept explicitly and
//! recorded in field metadata; every quadratic functional downstream
//! multiplies `e(x,y) e(y,x) = |e(x,y)|²`, so the phase must (and does)
//! cancel there.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landau::{self, ModelScalars};
use crate::specfun::{self, QuadratureKind, QuadratureRule};

/// Largest axis length accepted by [`kernel_grid`] (the dense pair matrix
/// grows quadratically).
const GRID_AXIS_MAX: usize = 2048;

/// Hermite envelope margin: `Υ_n` is below 1e-14 beyond
/// `|u| > √(2n+1) + HERMITE_TAIL`.
const HERMITE_TAIL: f64 = 8.0;

// =====================================================================
// Parameters and field types
// =====================================================================

/// Constants of the model operator: coupling `μ`, semiclassical `h`,
/// constant potential part `W`, linear tilt coefficient `v`, and the Landau
/// truncation index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Magnetic coupling `μ > 0`.
    pub mu: f64,
    /// Semiclassical parameter `h ∈ (0, 1]` with `μh ≤ 1`.
    pub h: f64,
    /// Constant potential part `W > 0`.
    pub w: f64,
    /// Linear tilt coefficient `v` (the degenerate case is `v = 0`).
    pub v: f64,
    /// Landau truncation: levels `n ≤ n_max` are included; evaluation fails
    /// if the spectral condition is still active beyond it.
    pub n_max: usize,
}

impl ModelParams {
    /// Validates and builds a parameter set.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] unless `μ > 0`, `h ∈ (0, 1]`, `μh ≤ 1` and
    /// `W > 0`.
    pub fn new(mu: f64, h: f64, w: f64, v: f64, n_max: usize) -> Result<Self> {
        let p = ModelParams { mu, h, w, v, n_max };
        p.validate()?;
        Ok(p)
    }

    /// Re-checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        if ![self.mu, self.h, self.w, self.v].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("model params must be finite".into()));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidInput(format!("mu = {} must be > 0", self.mu)));
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "h = {} must lie in (0, 1]",
                self.h
            )));
        }
        if self.mu * self.h > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "mu*h = {} violates mu*h <= 1",
                self.mu * self.h
            )));
        }
        if self.w <= 0.0 {
            return Err(Error::InvalidInput(format!("W = {} must be > 0", self.w)));
        }
        Ok(())
    }

    /// Magnetic length unit `a = √(μ/h)` (the Hermite argument scale).
    fn osc_scale(&self) -> f64 {
        (self.mu / self.h).sqrt()
    }

    /// Number of filled Landau levels in the degenerate (`v = 0`) model at
    /// spectral level `0`, i.e. `#{n : (2n+1) μh ≤ W}`.
    pub fn degenerate_level_count(&self) -> usize {
        rhs_level_count(self.mu, self.h, self.w)
    }

    /// Smallest truncation index that provably covers every pair whose
    /// `x₂`-coordinates stay within `[-x2_abs_max, x2_abs_max]`: the first
    /// `n` whose spectral condition cannot meet the Hermite envelope
    /// anywhere in that strip.
    pub fn suggest_n_max(&self, x2_abs_max: f64) -> usize {
        let rhs_best = self.w + 2.0 * self.v.abs() * x2_abs_max - self.v.powi(2) / self.mu.powi(2);
        let a = self.osc_scale();
        for n in 0..100_000usize {
            let level = (2 * n + 1) as f64 * self.mu * self.h;
            let reach = if self.v == 0.0 {
                0.0
            } else {
                2.0 * self.v.abs() * (((2 * n + 1) as f64).sqrt() + HERMITE_TAIL) / a
            };
            if level > rhs_best + reach {
                return n;
            }
        }
        100_000
    }
}

/// Phase conventions a kernel field can be recorded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// `exp(i μ h^{-1} (½(x₂+y₂) − v μ^{-2})(x₁−y₁))` — the factor produced
    /// by the partial Fourier reduction in `x₁`.
    MidpointLinear,
}

/// Gauge metadata attached to a kernel field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeRecord {
    /// Which phase factor the stored values carry.
    pub phase_convention: PhaseConvention,
    /// Point at which the phase factor degenerates: `x₂ + y₂ = 2 v μ^{-2}`.
    pub center: [f64; 2],
}

/// A dense table of kernel values `e(x_i, y_j, 0)` with its gauge metadata.
#[derive(Debug, Clone)]
pub struct SpectralKernelField {
    /// Row sample points.
    pub points_x: Vec<[f64; 2]>,
    /// Column sample points.
    pub points_y: Vec<[f64; 2]>,
    /// Row-major values, `values[i * points_y.len() + j] = e(x_i, y_j, 0)`.
    pub values: Vec<Complex64>,
    /// Phase convention the values are recorded in.
    pub gauge: GaugeRecord,
    /// Parameters the field was built from.
    pub params: ModelParams,
}

impl SpectralKernelField {
    /// Kernel value at row `i`, column `j`.
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.points_y.len() + j]
    }

    /// Checks the projector-kernel invariants: Hermitian symmetry across
    /// sampled pairs (1e-10 relative) and real nonnegative diagonal values
    /// (1e-10 absolute against the diagonal scale).
    ///
    /// # Errors
    /// [`Error::Accuracy`] describing the first violated invariant.
    pub fn validate(&self) -> Result<()> {
        let nx = self.points_x.len();
        let ny = self.points_y.len();
        if self.values.len() != nx * ny {
            return Err(Error::InvalidInput(format!(
                "field shape mismatch: {} values for {nx} x {ny} points",
                self.values.len()
            )));
        }
        let scale = self
            .values
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for (i, px) in self.points_x.iter().enumerate() {
            for (j, py) in self.points_y.iter().enumerate() {
                if let Some(ji) = pair_index(&self.points_y, &self.points_x, py, px) {
                    let fwd = self.values[i * ny + j];
                    let bwd = self.values[ji.0 * ny + ji.1];
                    if (fwd - bwd.conj()).norm() > 1e-10 * scale {
                        return Err(Error::Accuracy(format!(
                            "hermitian symmetry violated at pair ({i},{j}): \
                             {fwd} vs conj {bwd}"
                        )));
                    }
                }
                if px == py {
                    let z = self.values[i * ny + j];
                    if z.im.abs() > 1e-10 * scale || z.re < -1e-10 * scale {
                        return Err(Error::Accuracy(format!(
                            "diagonal value at point {i} not real-nonnegative: {z}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes the field as CSV rows `x1,x2,y1,y2,re,im` with 17 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x1,x2,y1,y2,re,im")?;
        let ny = self.points_y.len();
        for (i, px) in self.points_x.iter().enumerate() {
            for (j, py) in self.points_y.iter().enumerate() {
                let z = self.values[i * ny + j];
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    px[0], px[1], py[0], py[1], z.re, z.im
                )?;
            }
        }
        Ok(())
    }

    /// Serialises the field, parameters and gauge metadata to JSON.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "gauge": self.gauge,
            "points_x": self.points_x,
            "points_y": self.points_y,
            "values_re": self.values.iter().map(|z| z.re).collect::<Vec<_>>(),
            "values_im": self.values.iter().map(|z| z.im).collect::<Vec<_>>(),
        })
    }

    /// Rebuilds a field from [`SpectralKernelField::to_json`] output.
    ///
    /// # Errors
    /// [`Error::Config`] on missing or malformed entries.
    pub fn from_json(doc: &serde_json::Value) -> Result<Self> {
        fn get<'a>(doc: &'a serde_json::Value, key: &str) -> Result<&'a serde_json::Value> {
            doc.get(key)
                .ok_or_else(|| Error::Config(format!("kernel field JSON missing '{key}'")))
        }
        let params: ModelParams = serde_json::from_value(get(doc, "params")?.clone())
            .map_err(|e| Error::Config(format!("bad params: {e}")))?;
        let gauge: GaugeRecord = serde_json::from_value(get(doc, "gauge")?.clone())
            .map_err(|e| Error::Config(format!("bad gauge: {e}")))?;
        let points_x: Vec<[f64; 2]> = serde_json::from_value(get(doc, "points_x")?.clone())
            .map_err(|e| Error::Config(format!("bad points_x: {e}")))?;
        let points_y: Vec<[f64; 2]> = serde_json::from_value(get(doc, "points_y")?.clone())
            .map_err(|e| Error::Config(format!("bad points_y: {e}")))?;
        let re: Vec<f64> = serde_json::from_value(get(doc, "values_re")?.clone())
            .map_err(|e| Error::Config(format!("bad values_re: {e}")))?;
        let im: Vec<f64> = serde_json::from_value(get(doc, "values_im")?.clone())
            .map_err(|e| Error::Config(format!("bad values_im: {e}")))?;
        if re.len() != im.len() || re.len() != points_x.len() * points_y.len() {
            return Err(Error::Config("kernel field JSON has inconsistent shapes".into()));
        }
        let values = re
            .into_iter()
            .zip(im)
            .map(|(r, i)| Complex64::new(r, i))
            .collect();
        Ok(SpectralKernelField {
            points_x,
            points_y,
            values,
            gauge,
            params,
        })
    }
}

/// Finds the index pair of `(px, py)` inside the given point lists, if both
/// are sampled (used for the Hermitian cross-check).
fn pair_index(
    xs: &[[f64; 2]],
    ys: &[[f64; 2]],
    px: &[f64; 2],
    py: &[f64; 2],
) -> Option<(usize, usize)> {
    let i = xs.iter().position(|p| p == px)?;
    let j = ys.iter().position(|p| p == py)?;
    Some((i, j))
}

// =====================================================================
// Scaled Laguerre evaluation (closed-form route)
// =====================================================================

/// Evaluates `L_n^{(α)}(z) · e^{-z/2}` by running the Laguerre recurrence on
/// pre-damped values, with exponent tracking so the `e^{-z/2}` head never
/// underflows.  The damped family is uniformly bounded (`|L_n e^{-z/2}| ≤ 1`
/// for `α = 0`), so overflow cannot occur either.
fn scaled_laguerre(n: usize, alpha: f64, z: f64) -> f64 {
    let t = -z / (2.0 * std::f64::consts::LN_2);
    let ti = t.floor();
    let mut e = ti as i64;
    let mut p0 = 2f64.powf(t - ti); // L_0 e^{-z/2} mantissa
    if n == 0 {
        return ldexp_local(p0, e);
    }
    let mut p1 = (1.0 + alpha - z) * p0;
    renorm_local(&mut p0, &mut p1, &mut e);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 + alpha - z) * p1 - (kf + alpha) * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        renorm_local(&mut p0, &mut p1, &mut e);
    }
    ldexp_local(p1, e)
}

fn ldexp_local(mut m: f64, mut e: i64) -> f64 {
    const CHUNK: i32 = 900;
    while e > i64::from(CHUNK) {
        m *= 2f64.powi(CHUNK);
        e -= i64::from(CHUNK);
        if !m.is_finite() {
            return m;
        }
    }
    while e < -i64::from(CHUNK) {
        m *= 2f64.powi(-CHUNK);
        e += i64::from(CHUNK);
        if m == 0.0 {
            return 0.0;
        }
    }
    m * 2f64.powi(e as i32)
}

fn renorm_local(p0: &mut f64, p1: &mut f64, e: &mut i64) {
    let a = p0.abs().max(p1.abs());
    if a > 2f64.powi(512) {
        let s = 2f64.powi(-512);
        *p0 *= s;
        *p1 *= s;
        *e += 512;
    } else if a > 0.0 && a < 2f64.powi(-512) {
        let s = 2f64.powi(512);
        *p0 *= s;
        *p1 *= s;
        *e -= 512;
    }
}

/// Level count for threshold value `rhs` against the ladder `(2n+1)μh`,
/// sharing the boundary convention of [`landau::level_count`].
fn rhs_level_count(mu: f64, h: f64, rhs: f64) -> usize {
    landau::level_count(&ModelScalars {
        mu,
        h,
        f: 1.0,
        v: rhs,
        sqrt_g: 1.0,
        tau: 0.0,
    })
}

/// Signed radial profile of the degenerate (`v = 0`) kernel: the value of
/// `e(x, y, 0)` with the gauge phase stripped, as a function of the
/// separation `s = |x−y|`:
///
/// ```text
///     K(s) = (μ / 2πh) · L_{N-1}^{(1)}(z) · e^{-z/2},    z = μ s² / (2h),
/// ```
///
/// using the telescoped Laguerre closed form over the `N` filled levels.
/// Returns `0` when no level is filled.
///
/// # Errors
/// [`Error::InvalidInput`] on invalid parameters, non-zero tilt, or `s < 0`.
pub fn radial_kernel(p: &ModelParams, s: f64) -> Result<f64> {
    p.validate()?;
    if p.v != 0.0 {
        return Err(Error::InvalidInput(
            "radial_kernel requires the degenerate model (v = 0)".into(),
        ));
    }
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidInput(format!(
            "separation s = {s} must be finite and >= 0"
        )));
    }
    let n = p.degenerate_level_count();
    if n == 0 {
        return Ok(0.0);
    }
    let z = p.mu * s * s / (2.0 * p.h);
    Ok(p.mu / (2.0 * std::f64::consts::PI * p.h) * scaled_laguerre(n - 1, 1.0, z))
}

/// Closed form of the `n`-th Landau-level projector kernel in the model's
/// gauge: `(μ/2πh) · L_n(z) e^{-z/2} · exp(iμ(x₂+y₂)(x₁−y₁)/(2h))` with
/// `z = μ|x−y|²/(2h)`.  Summed over the filled levels this reproduces the
/// degenerate model kernel pointwise; it is the independent oracle for the
/// `ζ`-quadrature route.
///
/// # Errors
/// [`Error::InvalidInput`] for non-positive `μ` or `h`, or non-finite input.
pub fn landau_projector_kernel(
    n: usize,
    mu: f64,
    h: f64,
    x: [f64; 2],
    y: [f64; 2],
) -> Result<Complex64> {
    if !(mu > 0.0 && mu.is_finite() && h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "landau_projector_kernel: mu = {mu}, h = {h} must be positive finite"
        )));
    }
    if !x.iter().chain(y.iter()).all(|c| c.is_finite()) {
        return Err(Error::InvalidInput("points must be finite".into()));
    }
    let dx1 = x[0] - y[0];
    let dx2 = x[1] - y[1];
    let z = mu * (dx1 * dx1 + dx2 * dx2) / (2.0 * h);
    let radial = mu / (2.0 * std::f64::consts::PI * h) * scaled_laguerre(n, 0.0, z);
    let phase = Complex64::from_polar(1.0, mu * (x[1] + y[1]) * dx1 / (2.0 * h));
    Ok(radial * phase)
}

// =====================================================================
// Model kernel via the ζ-quadrature route
// =====================================================================

/// Gauss–Legendre rules reused across levels, pairs and threads.  Orders are
/// rounded up to multiples of 32 so the cache stays small.
fn cached_gl(order: usize) -> Arc<QuadratureRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(order)
        .or_insert_with(|| {
            Arc::new(
                specfun::make_rule(QuadratureKind::GaussLegendre, order)
                    .expect("cached order within supported range"),
            )
        })
        .clone()
}

/// ζ-integration interval of level `n` for a pair with `s = ½(x₂−y₂)`:
/// the intersection of both Hermite envelopes with the spectral half-line
/// (`v ≠ 0`) or the all-or-nothing spectral condition (`v = 0`, where the
/// first `n_filled` levels carry their full envelope).  Returns `None` when
/// the level cannot contribute.
fn level_interval(
    p: &ModelParams,
    n: usize,
    s: f64,
    rhs0: f64,
    n_filled_v0: usize,
) -> Option<(f64, f64)> {
    let a = p.osc_scale();
    let reach = (((2 * n + 1) as f64).sqrt() + HERMITE_TAIL) / a;
    let mut lo = s.abs() - reach;
    let mut hi = -s.abs() + reach;
    if p.v == 0.0 {
        if n >= n_filled_v0 {
            return None;
        }
    } else {
        let zc = ((2 * n + 1) as f64 * p.mu * p.h - rhs0) / (2.0 * p.v);
        if p.v > 0.0 {
            lo = lo.max(zc);
        } else {
            hi = hi.min(zc);
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// One full pass of the level sum at a given order multiplier.
fn integrate_levels(
    p: &ModelParams,
    x: [f64; 2],
    y: [f64; 2],
    order_mult: usize,
) -> Result<Complex64> {
    let a = p.osc_scale();
    let s = 0.5 * (x[1] - y[1]);
    let dx1 = x[0] - y[0];
    let rhs0 = p.w + p.v * (x[1] + y[1]) - p.v.powi(2) / p.mu.powi(2);
    let n_filled = rhs_level_count(p.mu, p.h, rhs0);
    let phase_freq = p.mu * dx1 / p.h;

    // Truncation guard: the level beyond n_max must be inactive.
    if level_interval(p, p.n_max + 1, s, rhs0, n_filled).is_some() {
        return Err(Error::InvalidInput(format!(
            "n_max = {} too small: the spectral condition is still active \
             beyond it for this pair",
            p.n_max
        )));
    }

    let mut total = Complex64::new(0.0, 0.0);
    for n in 0..=p.n_max {
        let Some((lo, hi)) = level_interval(p, n, s, rhs0, n_filled) else {
            if p.v == 0.0 && n >= n_filled {
                break;
            }
            continue;
        };
        let len = hi - lo;
        let osc = phase_freq.abs() * len / (2.0 * std::f64::consts::PI);
        let order = ((8.0 * a * len + 8.0 * osc + 16.0).ceil() as usize)
            .max(32)
            .saturating_mul(order_mult)
            .div_ceil(32)
            * 32;
        let rule = cached_gl(order.min(specfun::RULE_ORDER_MAX));
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * len;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let zeta = mid + half * t;
            let u1 = specfun::hermite_fn(n.min(specfun::HERMITE_N_MAX), a * (s - zeta))?;
            let u2 = specfun::hermite_fn(n.min(specfun::HERMITE_N_MAX), -a * (s + zeta))?;
            acc += w * u1 * u2 * Complex64::from_polar(1.0, phase_freq * zeta);
        }
        total += half * acc;
    }
    let pref = p.mu.powf(1.5) * p.h.powf(-1.5) / (2.0 * std::f64::consts::PI);
    let gauge = Complex64::from_polar(
        1.0,
        p.mu / p.h * (0.5 * (x[1] + y[1]) - p.v / p.mu.powi(2)) * dx1,
    );
    Ok(pref * gauge * total)
}

/// Natural magnitude scale of the kernel near the given pair: one level's
/// worth of diagonal density times the number of active levels.
fn kernel_scale(p: &ModelParams, x: [f64; 2], y: [f64; 2]) -> f64 {
    let rhs0 = p.w + p.v * (x[1] + y[1]) - p.v.powi(2) / p.mu.powi(2);
    let n = rhs_level_count(p.mu, p.h, rhs0).max(1);
    n as f64 * p.mu / (2.0 * std::f64::consts::PI * p.h)
}

/// Evaluates the spectral-projector kernel `e(x, y, 0)` of the model
/// operator by the per-level `ζ`-quadrature route.
///
/// Per level, the `ζ`-interval is the intersection of the two Hermite
/// envelopes `|ζ ∓ s| ≤ (√(2n+1)+8)√(h/μ)` with the spectral condition
/// (a half-line for `v ≠ 0`); Gauss–Legendre order scales with
/// `√(μ/h) ·` interval length plus the oscillation count of
/// `e^{iμh^{-1}ζ(x₁−y₁)}`.  The whole sum is evaluated twice, at the base
/// and doubled orders, and the doubled value is returned.
///
/// # Errors
/// * [`Error::InvalidInput`] when parameters are invalid or `n_max` is too
///   small (the spectral condition is still active beyond it);
/// * [`Error::Accuracy`] when the two refinement passes disagree by more
///   than 1e-8, relative to the larger of the refined value and 1e-3 of the
///   diagonal density scale.
pub fn model_kernel(p: &ModelParams, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
    p.validate()?;
    if !x.iter().chain(y.iter()).all(|c| c.is_finite()) {
        return Err(Error::InvalidInput("points must be finite".into()));
    }
    let base = integrate_levels(p, x, y, 1)?;
    let fine = integrate_levels(p, x, y, 2)?;
    let denom = fine.norm().max(1e-3 * kernel_scale(p, x, y));
    let diff = (base - fine).norm();
    if diff > 1e-8 * denom {
        return Err(Error::Accuracy(format!(
            "model_kernel quadrature not converged at x={x:?}, y={y:?}: \
             doubling moved the value by {diff:.3e} (scale {denom:.3e})"
        )));
    }
    Ok(fine)
}

// =====================================================================
// Weyl kernel
// =====================================================================

/// Evaluates the non-magnetic Weyl kernel
/// `(2πh)^{-2} ∫_{ξᵀGξ ≤ V+2τ} e^{i⟨x−y,ξ⟩/h} dξ` in closed form:
/// the metric ellipse is mapped to a disk, whose Fourier transform is
/// `det(G)^{-1/2} r J₁(r s/h) / (2π h s)` with `r = √(V+2τ)` and
/// `s² = (x−y)ᵀG^{-1}(x−y)`.  For `s < 1e-12` the diagonal closed form
/// `det(G)^{-1/2} r² / (4π h²)` is returned.
///
/// # Errors
/// [`Error::InvalidInput`] when `V + 2τ < 0`, the metric is not symmetric
/// positive definite, or `h ≤ 0`.
pub fn weyl_kernel(
    v: f64,
    h: f64,
    tau: f64,
    metric: [[f64; 2]; 2],
    x: [f64; 2],
    y: [f64; 2],
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("h = {h} must be positive")));
    }
    let energy = v + 2.0 * tau;
    if !energy.is_finite() || energy < 0.0 {
        return Err(Error::InvalidInput(format!(
            "V + 2*tau = {energy} must be >= 0"
        )));
    }
    let [[g11, g12], [g21, g22]] = metric;
    let norm = g11.abs().max(g22.abs()).max(g12.abs());
    if (g12 - g21).abs() > 1e-12 * norm.max(1.0) {
        return Err(Error::InvalidInput("metric must be symmetric".into()));
    }
    let det = g11 * g22 - g12 * g21;
    if g11 <= 0.0 || det <= 0.0 {
        return Err(Error::InvalidInput(
            "metric must be positive definite".into(),
        ));
    }
    let d = [x[0] - y[0], x[1] - y[1]];
    // s² = dᵀ G^{-1} d with G^{-1} = adj(G)/det.
    let s2 = (g22 * d[0] * d[0] - 2.0 * g12 * d[0] * d[1] + g11 * d[1] * d[1]) / det;
    let s = s2.max(0.0).sqrt();
    let r = energy.sqrt();
    let vol = 1.0 / det.sqrt();
    if s < 1e-12 {
        return Ok(vol * r * r / (4.0 * std::f64::consts::PI * h * h));
    }
    Ok(vol * r * specfun::bessel_j1(r * s / h)? / (2.0 * std::f64::consts::PI * h * s))
}

// =====================================================================
// Field construction and the local counting functional
// =====================================================================

/// Evaluates the model kernel on all pairs of the given axis points, in
/// parallel, and validates the projector-kernel invariants on the result.
///
/// # Errors
/// Propagates [`model_kernel`] errors; [`Error::MemoryGuard`] for axes
/// beyond 2048 points; [`Error::Accuracy`] if the computed field violates
/// Hermitian symmetry or diagonal realness.
pub fn kernel_grid(p: &ModelParams, axis: &[[f64; 2]]) -> Result<SpectralKernelField> {
    p.validate()?;
    if axis.is_empty() {
        return Err(Error::InvalidInput("kernel_grid: axis is empty".into()));
    }
    if axis.len() > GRID_AXIS_MAX {
        return Err(Error::MemoryGuard(format!(
            "kernel_grid: {} axis points would allocate {} pair values",
            axis.len(),
            axis.len() * axis.len()
        )));
    }
    let n = axis.len();
    let values: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| model_kernel(p, axis[idx / n], axis[idx % n]))
        .collect::<Result<_>>()?;
    let field = SpectralKernelField {
        points_x: axis.to_vec(),
        points_y: axis.to_vec(),
        values,
        gauge: GaugeRecord {
            phase_convention: PhaseConvention::MidpointLinear,
            center: [0.0, p.v / p.mu.powi(2)],
        },
        params: *p,
    };
    field.validate()?;
    Ok(field)
}

/// Local counting functional `J = ∫ e(x, x, 0) ψ(x) dx` over the square
/// tensor window of the supplied rule's natural domain (`[-1, 1]²` for
/// Gauss–Legendre).
///
/// The integral is evaluated at the rule's order and at doubled order; the
/// doubled value is returned.
///
/// # Errors
/// * [`Error::InvalidInput`] unless the rule is Gauss–Legendre and `ψ` is
///   supported inside the window (boundary samples must stay below 1e-3 of
///   the peak);
/// * [`Error::Accuracy`] when order doubling moves `J` by more than 0.5%
///   relative — smooth compactly-supported cutoffs are not analytic, so
///   Gauss–Legendre converges superalgebraically rather than geometrically
///   and a sub-ppm gate would reject legitimate resolutions;
/// * propagated [`model_kernel`] errors.
pub fn local_count<F>(p: &ModelParams, psi: F, quad: &QuadratureRule) -> Result<f64>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    p.validate()?;
    if quad.kind != QuadratureKind::GaussLegendre {
        return Err(Error::InvalidInput(
            "local_count expects a gauss_legendre rule for its tensor window".into(),
        ));
    }
    let eval = |rule: &QuadratureRule| -> Result<f64> {
        let n = rule.nodes.len();
        let terms: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let pt = [rule.nodes[i], rule.nodes[j]];
                let w = rule.weights[i] * rule.weights[j];
                let psival = psi(pt);
                if psival == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * psival * model_kernel(p, pt, pt)?.re)
            })
            .collect::<Result<_>>()?;
        Ok(specfun::pairwise_sum(&terms))
    };
    // Support check: ψ on the window boundary must be negligible.
    let peak = {
        let probe = quad.nodes.iter().map(|&t| psi([t, t]).abs());
        probe.fold(0.0_f64, f64::max)
    };
    let boundary = quad
        .nodes
        .iter()
        .flat_map(|&t| [[t, 1.0], [t, -1.0], [1.0, t], [-1.0, t]])
        .map(|pt| psi(pt).abs())
        .fold(0.0_f64, f64::max);
    if peak > 0.0 && boundary > 1e-3 * peak {
        return Err(Error::InvalidInput(format!(
            "psi is not supported inside the quadrature window: boundary \
             value {boundary:.3e} vs peak {peak:.3e}"
        )));
    }
    let coarse = eval(quad)?;
    let fine_rule = specfun::make_rule(
        QuadratureKind::GaussLegendre,
        (2 * quad.order).min(specfun::RULE_ORDER_MAX),
    )?;
    let fine = eval(&fine_rule)?;
    if (coarse - fine).abs() > 5e-3 * fine.abs().max(1e-12) {
        return Err(Error::Accuracy(format!(
            "local_count quadrature not converged: {coarse} -> {fine}"
        )));
    }
    Ok(fine)
}

// =====================================================================
// Tests
// =====================================================================
