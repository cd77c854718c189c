//! Threshold time scales, field-strength regimes and remainder-bound
//! shapes.
//!
//! The asymptotic analysis organises `(μ, h)` into three field-strength
//! regimes separated by the scales `(h|ln h|)^{-1/4}` and
//! `(h|ln h|)^{-2/5}`, and attaches to each a family of characteristic
//! times — the perturbation-validity horizon `T*`, the distinguishability
//! scales `T*₂`, `T*₃`, the logarithmic horizon `T*₄` — plus the polar-cap
//! angular width `ρ̄`.  This module evaluates those scales and the three
//! headline remainder-bound expressions with every unnamed constant set to
//! one: the artifact's role is to expose the *shape* of the bounds for
//! sweep overlays, not an absolute calibration, and the source analysis
//! never fixes the constants.
//!
//! All logarithms are natural; `|ln h|` is used wherever a
//! base-unspecified `|log h|` appears in the source analysis.
//!
//! Everything here is a pure closed-form function of its arguments.

use serde::Serialize;

use crate::error::{Error, Result};

/// Field-strength regime of a `(μ, h)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `μ ≤ (h|ln h|)^{-1/4}`: magnetic corrections stay subordinate.
    Weak,
    /// `(h|ln h|)^{-1/4} < μ ≤ (h|ln h|)^{-2/5}`.
    Intermediate,
    /// `μ > (h|ln h|)^{-2/5}`: the weak-field approach fails outright.
    Strong,
}

/// Which remainder bound applies to a `(μ, h)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// The four-term weak-field bound applies.
    WeakField,
    /// The two-term intermediate-field bound applies.
    IntermediateField,
    /// Strong field: no bound is stated for this regime.
    NotStated,
}

/// Threshold scales, classification and remainder-bound values for one
/// `(μ, h)` pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimeReport {
    /// Magnetic coupling.
    pub mu: f64,
    /// Semiclassical parameter.
    pub h: f64,
    /// Perturbation order used in `T*` (2 or 3).
    pub m: u32,
    /// Singularity exponent the bound values are evaluated at.
    pub kappa: f64,
    /// Time-scale safety exponent in `T*`.
    pub delta: f64,
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
    pub regime: Regime,
    /// Four-term weak-field remainder bound at this `κ`.
    pub bound_weak_field: f64,
    /// Two-term intermediate-field remainder bound at this `κ`.
    pub bound_intermediate_field: f64,
    /// Three-term short-time remainder bound at this `κ`.
    pub bound_general: f64,
    /// Which of the bounds applies, per the classification.
    pub applicable: BoundBranch,
}

/// Remainder-bound values and the applicable branch for one `(μ, h, κ)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RemainderEstimate {
    /// The applicable bound's value; `None` in the strong regime, where no
    /// bound is stated.
    pub value: Option<f64>,
    /// Which branch `value` came from.
    pub branch: BoundBranch,
    /// Four-term weak-field bound.
    pub weak_field: f64,
    /// Two-term intermediate-field bound.
    pub intermediate_field: f64,
    /// Three-term short-time bound.
    pub general: f64,
}

/// `|ln h|`.
fn log_factor(h: f64) -> f64 {
    h.ln().abs()
}

fn validate_pair(mu: f64, h: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "coupling mu = {mu} must be positive finite"
        )));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInput(format!(
            "semiclassical parameter h = {h} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Classifies `(μ, h)` into a field-strength regime:
/// weak for `μ ≤ (h|ln h|)^{-1/4}`, intermediate up to
/// `(h|ln h|)^{-2/5}`, strong beyond (all constants one).
///
/// # Errors
/// [`Error::InvalidInput`] for scalars outside `μ > 0`, `0 < h < 1`.
pub fn regime_classify(mu: f64, h: f64) -> Result<Regime> {
    validate_pair(mu, h)?;
    let base = h * log_factor(h);
    if mu <= base.powf(-0.25) {
        Ok(Regime::Weak)
    } else if mu <= base.powf(-0.4) {
        Ok(Regime::Intermediate)
    } else {
        Ok(Regime::Strong)
    }
}

/// Four-term weak-field remainder bound
/// `μ^{2κ+1}h^{-1} + μ^{3κ}h^{-1} + μ²h^{-1/2-κ}|ln h|^{1/2} + μ^{-1}h^{-1-κ}`.
fn bound_weak_field(mu: f64, h: f64, kappa: f64) -> f64 {
    mu.powf(2.0 * kappa + 1.0) / h
        + mu.powf(3.0 * kappa) / h
        + mu * mu * h.powf(-0.5 - kappa) * log_factor(h).sqrt()
        + h.powf(-1.0 - kappa) / mu
}

/// Two-term intermediate-field remainder bound
/// `(μ⁴h|ln h|)^{2/3} h^{-1-κ} + μ^{2κ+1}h^{-1}`.
fn bound_intermediate_field(mu: f64, h: f64, kappa: f64) -> f64 {
    (mu.powi(4) * h * log_factor(h)).powf(2.0 / 3.0) * h.powf(-1.0 - kappa)
        + mu.powf(2.0 * kappa + 1.0) / h
}

/// Three-term short-time remainder bound
/// `(μ^{2κ+1} + μ^{3κ})h^{-1} + μ^{5/2}h^{-1/2-κ} + μ^{-1}h^{-1-κ}`.
fn bound_general(mu: f64, h: f64, kappa: f64) -> f64 {
    (mu.powf(2.0 * kappa + 1.0) + mu.powf(3.0 * kappa)) / h
        + mu.powf(2.5) * h.powf(-0.5 - kappa)
        + h.powf(-1.0 - kappa) / mu
}

/// Evaluates the remainder bounds at `(μ, h, κ)` and selects the branch
/// dictated by [`regime_classify`]: the weak-field bound in the weak
/// regime, the intermediate-field bound in the intermediate regime, and
/// no stated bound in the strong regime.
///
/// # Errors
/// [`Error::InvalidInput`] for invalid scalars or `κ ∉ (0, 2)`.
pub fn remainder_estimate(mu: f64, h: f64, kappa: f64) -> Result<RemainderEstimate> {
    validate_pair(mu, h)?;
    if !(kappa > 0.0 && kappa < 2.0) {
        return Err(Error::InvalidInput(format!(
            "singularity exponent kappa = {kappa} must lie in (0, 2)"
        )));
    }
    let weak_field = bound_weak_field(mu, h, kappa);
    let intermediate_field = bound_intermediate_field(mu, h, kappa);
    let general = bound_general(mu, h, kappa);
    let (branch, value) = match regime_classify(mu, h)? {
        Regime::Weak => (BoundBranch::WeakField, Some(weak_field)),
        Regime::Intermediate => (BoundBranch::IntermediateField, Some(intermediate_field)),
        Regime::Strong => (BoundBranch::NotStated, None),
    };
    Ok(RemainderEstimate {
        value,
        branch,
        weak_field,
        intermediate_field,
        general,
    })
}

/// Full report at an explicit singularity exponent `κ`: all threshold
/// scales, the classification, and the three bound values.
///
/// Scales (constants one, `|ln h|` natural):
///
/// ```text
///     T*  = min(μ^m h^{1+δ}, 1)            T*₂ = (μh|ln h|)^{1/3}
///     T*₃ = (μh|ln h|)^{2/3}  if μ ≥ (h|ln h|)^{-2/5},  else μ^{-1}
///     T*₄ = μ³h|ln h|                      ρ̄  = (μh|ln h|)^{1/2}
/// ```
///
/// # Errors
/// [`Error::InvalidInput`] for invalid scalars, `m ∉ {2, 3}`, `δ < 0`, or
/// `κ ∉ (0, 2)`.
pub fn report(mu: f64, h: f64, m: u32, kappa: f64, delta: f64) -> Result<RegimeReport> {
    validate_pair(mu, h)?;
    if !(m == 2 || m == 3) {
        return Err(Error::InvalidInput(format!(
            "perturbation order m = {m} must be 2 or 3"
        )));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "safety exponent delta = {delta} must be nonnegative"
        )));
    }
    let base = mu * h * log_factor(h);
    let estimate = remainder_estimate(mu, h, kappa)?;
    let regime = regime_classify(mu, h)?;
    Ok(RegimeReport {
        mu,
        h,
        m,
        kappa,
        delta,
        t_star: (mu.powi(m as i32) * h.powf(1.0 + delta)).min(1.0),
        t2_star: base.powf(1.0 / 3.0),
        t3_star: if mu >= (h * log_factor(h)).powf(-0.4) {
            base.powf(2.0 / 3.0)
        } else {
            1.0 / mu
        },
        t4_star: mu.powi(3) * h * log_factor(h),
        rho_bar: base.sqrt(),
        regime,
        bound_weak_field: estimate.weak_field,
        bound_intermediate_field: estimate.intermediate_field,
        bound_general: estimate.general,
        applicable: estimate.branch,
    })
}

/// Threshold scales and classification at the reference exponent `κ = 1`
/// (the scale-invariant midpoint of the admissible range); use [`report`]
/// to evaluate the bound fields at another `κ`.
///
/// # Errors
/// As for [`report`].
pub fn thresholds(mu: f64, h: f64, m: u32, delta: f64) -> Result<RegimeReport> {
    report(mu, h, m, 1.0, delta)
}
