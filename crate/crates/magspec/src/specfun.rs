//! Numerically stable special functions and quadrature rules.
//!
//! Everything downstream — projector kernels, pair-energy quadrature,
//! oscillator ladders — reduces to four scalar ingredients:
//!
//! * **Orthonormal Hermite functions** `Υ_n(x) = (2ⁿ n! √π)^{-1/2} H_n(x)
//!   e^{-x²/2}`, evaluated by the three-term recurrence on the *orthonormal*
//!   family,
//!
//!   ```text
//!       Υ_{n+1}(x) = x √(2/(n+1)) Υ_n(x) − √(n/(n+1)) Υ_{n−1}(x),
//!   ```
//!
//!   with exponent-tracked scaling: the head `Υ₀(x) = π^{-1/4} e^{-x²/2}`
//!   underflows `f64` already at `|x| ≈ 38`, so the recurrence carries a
//!   mantissa pair together with a shared power-of-two exponent and only
//!   materialises each value at the end.  No intermediate under- or
//!   overflows occur for `|x| ≤ 60`, `n ≤ 2048`.
//!
//! * **Laguerre polynomials** `L_n` and the associated family `L_n^{(α)}`
//!   by their stable forward recurrences.  The associated family with
//!   `α = 1` telescopes partial sums, `Σ_{k≤n} L_k = L_n^{(1)}`, which is
//!   the independent closed-form route to the Landau projector kernel.
//!
//! * **Bessel `J₁`**, split at `x = 8` between the ascending power series
//!   and the Hankel asymptotic expansion; both branches are validated
//!   against the integral representation `(1/π)∫₀^π cos(θ − x sin θ) dθ`.
//!
//! * **Quadrature rules**: Gauss–Legendre on `[-1, 1]` (Newton iteration on
//!   the Legendre recurrence), Gauss–Hermite on the real line (Newton on the
//!   orthonormal Hermite functions, with *compensated* weights — see
//!   [`QuadratureRule`]), and a truncated tanh–sinh rule on `(0, 1]` for
//!   endpoint singularities `x^{-κ}`, `κ < 2`.
//!
//! All operations are pure; constructed rules are immutable and safe to
//! share across threads.

use crate::error::{Error, Result};

/// Largest Hermite index the recurrence is certified for.
pub const HERMITE_N_MAX: usize = 2048;

/// Largest Laguerre degree accepted by the recurrences.
pub const LAGUERRE_N_MAX: usize = 512;

/// Inclusive bounds on quadrature order accepted by [`make_rule`].
pub const RULE_ORDER_MIN: usize = 2;
/// See [`RULE_ORDER_MIN`].
pub const RULE_ORDER_MAX: usize = 4096;

// =====================================================================
// Exponent-tracked scaling helpers
// =====================================================================

/// Mantissas are renormalised whenever they leave `[2^{-512}, 2^{512}]`.
const RENORM_EXP: i32 = 512;

/// Multiplies `m · 2^e` out to a plain `f64`, saturating to `0` on deep
/// underflow.  Overflow cannot occur for bounded function families, but the
/// helper saturates to `±inf` defensively.
fn ldexp2(mut m: f64, mut e: i64) -> f64 {
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

/// Splits `e^{-x²/2}` as `m · 2^e` with `m ∈ [1, 2)`, entirely in
/// logarithmic arithmetic so the value never underflows.
fn gaussian_head(x: f64) -> (f64, i64) {
    let t = -x * x / (2.0 * std::f64::consts::LN_2);
    let ti = t.floor();
    (2f64.powf(t - ti), ti as i64)
}

/// One renormalisation step for a mantissa pair sharing the exponent `e`.
fn renorm(prev: &mut f64, cur: &mut f64, e: &mut i64) {
    let a = prev.abs().max(cur.abs());
    if a > 2f64.powi(RENORM_EXP) {
        let s = 2f64.powi(-RENORM_EXP);
        *prev *= s;
        *cur *= s;
        *e += i64::from(RENORM_EXP);
    } else if a > 0.0 && a < 2f64.powi(-RENORM_EXP) {
        let s = 2f64.powi(RENORM_EXP);
        *prev *= s;
        *cur *= s;
        *e -= i64::from(RENORM_EXP);
    }
}

// =====================================================================
// Hermite functions
// =====================================================================

fn hermite_guard(n: usize, x: f64) -> Result<()> {
    if n > HERMITE_N_MAX {
        return Err(Error::InvalidInput(format!(
            "hermite index n = {n} exceeds n_max = {HERMITE_N_MAX}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "hermite argument x = {x} is not finite"
        )));
    }
    Ok(())
}

/// Scaled recurrence up to index `n`: returns mantissas of
/// `(Υ_{n-1}(x), Υ_n(x))` together with their shared exponent.
///
/// For `n = 0` the first mantissa is `0` (the fictitious `Υ_{-1}`).
fn hermite_scaled_pair(n: usize, x: f64) -> (f64, f64, i64) {
    let (m0, mut e) = gaussian_head(x);
    let mut prev = 0.0_f64;
    let mut cur = m0 / std::f64::consts::PI.powf(0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        renorm(&mut prev, &mut cur, &mut e);
    }
    (prev, cur, e)
}

/// Evaluates the orthonormal Hermite function `Υ_n(x)`.
///
/// # Arguments
/// * `n` - function index, `n ≤ 2048`
/// * `x` - evaluation point; certified underflow-free for `|x| ≤ 60`
///
/// # Returns
/// `Υ_n(x)`, with `∫ Υ_n² dx = 1`.  Values below the `f64` range (deep in
/// the classically forbidden region) flush cleanly to `0`.
///
/// # Errors
/// [`Error::InvalidInput`] when `n > 2048` or `x` is not finite.
pub fn hermite_fn(n: usize, x: f64) -> Result<f64> {
    hermite_guard(n, x)?;
    let (_, cur, e) = hermite_scaled_pair(n, x);
    Ok(ldexp2(cur, e))
}

/// Evaluates `Υ₀(x) … Υ_{n_max}(x)` in a single recurrence pass.
///
/// # Arguments
/// * `n_max` - largest index, `n_max ≤ 2048`
/// * `x` - evaluation point
///
/// # Returns
/// A vector of length `n_max + 1` whose element `k` equals
/// [`hermite_fn`]`(k, x)` bit-for-bit (both paths run the identical
/// renormalised recurrence).
///
/// # Errors
/// [`Error::InvalidInput`] as for [`hermite_fn`].
pub fn hermite_batch(n_max: usize, x: f64) -> Result<Vec<f64>> {
    hermite_guard(n_max, x)?;
    let (m0, mut e) = gaussian_head(x);
    let mut prev = 0.0_f64;
    let mut cur = m0 / std::f64::consts::PI.powf(0.25);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(ldexp2(cur, e));
    for k in 0..n_max {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        renorm(&mut prev, &mut cur, &mut e);
        out.push(ldexp2(cur, e));
    }
    Ok(out)
}

// =====================================================================
// Laguerre polynomials
// =====================================================================

fn laguerre_guard(n: usize, x: f64) -> Result<()> {
    if n > LAGUERRE_N_MAX {
        return Err(Error::InvalidInput(format!(
            "laguerre degree n = {n} exceeds n_max = {LAGUERRE_N_MAX}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "laguerre argument x = {x} is not finite"
        )));
    }
    Ok(())
}

/// Evaluates the Laguerre polynomial `L_n(x)` by the forward recurrence
/// `(k+1) L_{k+1} = (2k+1−x) L_k − k L_{k−1}`.
///
/// # Errors
/// [`Error::InvalidInput`] when `n > 512` or `x` is not finite.
pub fn laguerre_poly(n: usize, x: f64) -> Result<f64> {
    laguerre_assoc(n, 0.0, x)
}

/// Evaluates the associated Laguerre polynomial `L_n^{(α)}(x)`.
///
/// The `α = 1` member telescopes partial sums of the plain family,
/// `Σ_{k=0}^{n} L_k(x) = L_n^{(1)}(x)`, which is used as the closed-form
/// route to Landau projector kernels.
///
/// # Errors
/// [`Error::InvalidInput`] when `n > 512`, `α ≤ −1`, or an argument is not
/// finite.
pub fn laguerre_assoc(n: usize, alpha: f64, x: f64) -> Result<f64> {
    laguerre_guard(n, x)?;
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::InvalidInput(format!(
            "laguerre order alpha = {alpha} must be finite and > -1"
        )));
    }
    let mut p0 = 1.0_f64;
    if n == 0 {
        return Ok(p0);
    }
    let mut p1 = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 + alpha - x) * p1 - (kf + alpha) * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    Ok(p1)
}

// =====================================================================
// Bessel J1
// =====================================================================

/// Upper end of the ascending-series branch.
const J1_SERIES_MAX: f64 = 8.0;
/// Lower end of the Hankel asymptotic branch.  Below this point the
/// divergent expansion bottoms out above `1e-12`; the window
/// `[8, 15)` is bridged by quadrature of the integral representation.
const J1_HANKEL_MIN: f64 = 15.0;

/// Fixed Gauss–Legendre data for the bridge window, mapped to `[0, π]` and
/// carrying the `1/π` prefactor of the integral representation.
fn j1_bridge_rule() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = gauss_legendre(128).expect("fixed-order Gauss-Legendre rule");
        let half_pi = 0.5 * std::f64::consts::PI;
        let thetas: Vec<f64> = rule.nodes.iter().map(|&t| half_pi * (t + 1.0)).collect();
        // w · (π/2 interval scale) · (1/π prefactor) = w/2.
        let weights: Vec<f64> = rule.weights.iter().map(|&w| 0.5 * w).collect();
        (thetas, weights)
    })
}

/// Evaluates the Bessel function `J₁(x)` for `x ≥ 0` with absolute error
/// below `1e-12`.
///
/// Splits at `x = 8`: the ascending power series below, continued evaluation
/// above.  The continuation uses the Hankel asymptotic expansion
/// `J₁(x) = √(2/πx) (P cos χ − Q sin χ)`, `χ = x − 3π/4`, truncated at its
/// smallest term, once that smallest term is below the accuracy target
/// (`x ≥ 15`); on the window `8 ≤ x < 15` it evaluates the integral
/// representation `(1/π)∫₀^π cos(θ − x sin θ) dθ` with a fixed 128-point
/// Gauss–Legendre rule instead (the same representation both branches are
/// validated against).
///
/// # Errors
/// [`Error::InvalidInput`] for negative or non-finite `x`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidInput(format!(
            "bessel argument x = {x} must be finite and >= 0"
        )));
    }
    if x < J1_SERIES_MAX {
        // J1(x) = (x/2) Σ_k (−1)^k (x²/4)^k / (k! (k+1)!)
        let q = 0.25 * x * x;
        let mut term = 0.5 * x;
        let mut sum = term;
        let mut k = 1.0_f64;
        loop {
            term *= -q / (k * (k + 1.0));
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() + 1e-300 {
                return Ok(sum);
            }
            k += 1.0;
            if k > 60.0 {
                return Ok(sum);
            }
        }
    }
    if x < J1_HANKEL_MIN {
        let (thetas, weights) = j1_bridge_rule();
        let mut sum = 0.0;
        for (&theta, &w) in thetas.iter().zip(weights) {
            sum += w * (theta - x * theta.sin()).cos();
        }
        return Ok(sum);
    }
    // Hankel symbols c_m = (1,m)/x^m with (1,m) = Π_{j≤m}(4−(2j−1)²)/(m! 8^m);
    // P = Σ_k (−1)^k c_{2k}, Q = Σ_k (−1)^k c_{2k+1}.  The expansion is
    // divergent-asymptotic: sum strictly decreasing terms, stop either when
    // they fall below 1e-17 or when they turn around (optimal truncation).
    let mut p = 1.0_f64;
    let mut q = 0.0_f64;
    let mut term = 1.0_f64;
    let mut prev_mag = f64::INFINITY;
    for m in 1..=60usize {
        let mf = m as f64;
        term *= (4.0 - (2.0 * mf - 1.0).powi(2)) / (8.0 * mf * x);
        if term.abs() >= prev_mag {
            break;
        }
        prev_mag = term.abs();
        let sgn = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if m % 2 == 1 {
            q += sgn * term;
        } else {
            p += sgn * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - 0.75 * std::f64::consts::PI;
    Ok((2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

// =====================================================================
// Quadrature rules
// =====================================================================

/// Families of quadrature rule built by [`make_rule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Nodes at Hermite zeros; weights are the **compensated** (Christoffel)
    /// weights `ŵ_i = w_i e^{x_i²} = 1 / Σ_{k<n} Υ_k(x_i)²`.
    GaussHermite,
    /// Classical rule on `[-1, 1]`.
    GaussLegendre,
    /// Double-exponential rule on `(0, 1]` for integrands singular at `0`.
    TanhSinh,
}

/// An immutable quadrature rule: `∫ f ≈ Σ_i weights[i] · f(nodes[i])` on the
/// kind's natural domain.
///
/// For [`QuadratureKind::GaussHermite`] the stored weights are compensated
/// by `e^{x²}` so that all stored quantities stay of order one up to order
/// 4096: `∫ g(x) dx ≈ Σ ŵ_i g(x_i)` holds directly for integrands `g` with
/// Gaussian-type decay (in particular products of Hermite functions), while
/// the classical form is recovered as `∫ e^{-x²} f ≈ Σ ŵ_i e^{-x_i²} f(x_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Rule family.
    pub kind: QuadratureKind,
    /// Strictly increasing evaluation points.
    pub nodes: Vec<f64>,
    /// Positive weights, same length as `nodes`.
    pub weights: Vec<f64>,
    /// Requested order (number of generating points).
    pub order: usize,
}

impl QuadratureRule {
    /// Applies the rule on its natural domain.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Applies the rule affinely mapped to `[a, b]`.
    ///
    /// Gauss–Legendre maps `[-1, 1] → [a, b]`; tanh–sinh maps `(0, 1] →
    /// (a, b]`, keeping its clustered endpoint at `a` (put the singularity
    /// there).
    ///
    /// # Errors
    /// [`Error::InvalidInput`] for Gauss–Hermite rules (unbounded natural
    /// domain) or when `b ≤ a`.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        if self.kind == QuadratureKind::GaussHermite {
            return Err(Error::InvalidInput(
                "integrate_on: gauss_hermite has an unbounded natural domain".into(),
            ));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput(format!(
                "integrate_on: invalid interval [{a}, {b}]"
            )));
        }
        let (shift, scale) = match self.kind {
            // [-1, 1] -> [a, b]
            QuadratureKind::GaussLegendre => (0.5 * (a + b), 0.5 * (b - a)),
            // (0, 1] -> (a, b]
            QuadratureKind::TanhSinh => (a, b - a),
            QuadratureKind::GaussHermite => unreachable!(),
        };
        Ok(scale
            * self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(shift + scale * x))
                .sum::<f64>())
    }
}

/// Builds a quadrature rule of the requested kind and order.
///
/// # Arguments
/// * `kind` - rule family
/// * `order` - number of generating points, `2 ≤ order ≤ 4096`
///
/// # Errors
/// [`Error::InvalidInput`] for orders outside `[2, 4096]`;
/// [`Error::Accuracy`] if a Newton root search fails to converge (not
/// observed for supported orders).
pub fn make_rule(kind: QuadratureKind, order: usize) -> Result<QuadratureRule> {
    if !(RULE_ORDER_MIN..=RULE_ORDER_MAX).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "quadrature order {order} outside [{RULE_ORDER_MIN}, {RULE_ORDER_MAX}]"
        )));
    }
    match kind {
        QuadratureKind::GaussLegendre => gauss_legendre(order),
        QuadratureKind::GaussHermite => gauss_hermite(order),
        QuadratureKind::TanhSinh => Ok(tanh_sinh(order)),
    }
}

/// Legendre recurrence: returns `(P_{n-1}(x), P_n(x))` for `n ≥ 1`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p0, p1)
}

fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-type initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0_f64;
        let mut converged = false;
        for _ in 0..100 {
            let (pnm1, pn) = legendre_pair(n, z);
            pp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * (1.0 + z.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Accuracy(format!(
                "gauss_legendre({n}): Newton iteration failed near node {i}"
            )));
        }
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
            let (pnm1, _) = legendre_pair(n, z);
            pp = n as f64 * (-pnm1) / (-1.0);
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        // z descends from +1; store mirrored pair.
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussLegendre,
        nodes,
        weights,
        order: n,
    })
}

fn gauss_hermite(n: usize) -> Result<QuadratureRule> {
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let m = n.div_ceil(2);
    let mut roots = vec![0.0_f64; m];
    for i in 0..m {
        // Standard initial guesses, marching inward from the largest root.
        let mut z = match i {
            0 => {
                let s = (2.0 * n as f64 + 1.0).sqrt();
                s - 1.85575 * s.powf(-1.0 / 3.0)
            }
            1 => roots[0] - 1.14 * (n as f64).powf(0.426) / roots[0],
            2 => 1.86 * roots[1] - 0.86 * roots[0],
            3 => 1.91 * roots[2] - 0.91 * roots[1],
            _ => 2.0 * roots[i - 1] - roots[i - 2],
        };
        let mut converged = false;
        for _ in 0..200 {
            // Newton step from the exponent-shared mantissa pair:
            // Υ_n' = √(2n) Υ_{n-1} − x Υ_n, so the shared 2^e cancels.
            let (pm1, pn, _) = hermite_scaled_pair(n, z);
            let deriv = (2.0 * n as f64).sqrt() * pm1 - z * pn;
            let dz = pn / deriv;
            z -= dz;
            if dz.abs() <= 1e-14 * (1.0 + z.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Accuracy(format!(
                "gauss_hermite({n}): Newton iteration failed near node {i}"
            )));
        }
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
        }
        roots[i] = z;
        // Compensated (Christoffel) weight: ŵ = 1 / Σ_{k<n} Υ_k(z)².
        let ups = hermite_batch(n - 1, z)?;
        let norm: f64 = ups.iter().map(|u| u * u).sum();
        let w = 1.0 / norm;
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussHermite,
        nodes,
        weights,
        order: n,
    })
}

/// Truncation parameter of the tanh–sinh grid: `t ∈ [-3.9, 3.9]` puts the
/// innermost node at distance `≈ 2e-34` from the singular endpoint.
const TANH_SINH_T: f64 = 3.9;

fn tanh_sinh(n: usize) -> QuadratureRule {
    let step = 2.0 * TANH_SINH_T / (n as f64 - 1.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut folded = 0.0_f64; // weight folded onto the endpoint x = 1
    for j in 0..n {
        let t = -TANH_SINH_T + step * j as f64;
        let u = std::f64::consts::PI * t.sinh();
        // σ(u) = 1/(1+e^{-u}) evaluated from the stable side.
        let (sig, sig_neg) = if u >= 0.0 {
            let e = (-u).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = u.exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        let x = sig;
        let w = step * std::f64::consts::PI * t.cosh() * sig * sig_neg;
        // Near the smooth endpoint successive abscissae collapse onto 1.0 at
        // f64 resolution; fold their (double-exponentially small) weights
        // onto a single terminal node to keep `nodes` strictly increasing.
        if x >= 1.0 - 2e-16 {
            folded += w;
        } else {
            nodes.push(x);
            weights.push(w);
        }
    }
    if folded > 0.0 {
        nodes.push(1.0);
        weights.push(folded);
    }
    QuadratureRule {
        kind: QuadratureKind::TanhSinh,
        nodes,
        weights,
        order: n,
    }
}

// =====================================================================
// Deterministic summation
// =====================================================================

/// Sums a slice by a fixed-shape pairwise (binary-tree) reduction.
///
/// The evaluation tree depends only on `values.len()`, never on thread
/// scheduling, so parallel producers that deposit into an indexed buffer and
/// reduce through this function get byte-identical results run to run.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

// =====================================================================
// Tests
// =====================================================================
