//! Landau levels and pointwise Weyl densities for constant-coefficient data.
//!
//! For constant field intensity `f`, potential value `V` and metric volume
//! factor `√g`, the model operator's spectrum is the arithmetic ladder of
//! *Landau levels*
//!
//! ```text
//!     λ_n = ((2n+1) μ h f − V) / 2,        n = 0, 1, 2, …
//! ```
//!
//! each of infinite multiplicity with local density `μ f √g / (2π h)`.  Two
//! pointwise approximations of the integrated spectral density at level `τ`
//! follow:
//!
//! * the **magnetic Weyl expression** `e^MW = (2π)^{-1} N μ h^{-1} f √g`,
//!   which counts the `N` Landau levels with `(2n+1) μ h f ≤ V + 2τ`, and
//! * the **non-magnetic Weyl expression** `e^W = (V + 2τ) √g / (4π h²)`,
//!   the `(2πh)^{-2}`-normalised phase-space area of the classically allowed
//!   ellipse.
//!
//! They bracket each other within one Landau level's worth of density,
//! `|e^MW − e^W| ≤ μ f √g / (2π h)` — the discreteness of the ladder is the
//! entire difference between the two.

use crate::error::{Error, Result};

/// Allocation guard for explicitly materialised level lists.
const LEVEL_LIST_MAX: usize = 1_000_000;

/// Constant-coefficient data of the model at one point: coupling `μ`,
/// semiclassical parameter `h`, field intensity `f`, potential value `V`,
/// metric volume factor `√g`, and spectral level `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelScalars {
    /// Magnetic coupling `μ > 0`.
    pub mu: f64,
    /// Semiclassical parameter `h ∈ (0, 1]`.
    pub h: f64,
    /// Field intensity `f > 0`.
    pub f: f64,
    /// Electric potential value `V`.
    pub v: f64,
    /// Metric volume factor `√g > 0`.
    pub sqrt_g: f64,
    /// Spectral level `τ` of the projector.
    pub tau: f64,
}

impl ModelScalars {
    /// Validates and builds a scalar set.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] unless `μ > 0`, `h ∈ (0, 1]`, `μh ≤ 1`,
    /// `f > 0`, `√g > 0` and every field is finite.  The right endpoint
    /// `h = 1` is admitted so the unit-scale reference configurations stay
    /// expressible.
    pub fn new(mu: f64, h: f64, f: f64, v: f64, sqrt_g: f64, tau: f64) -> Result<Self> {
        let s = ModelScalars {
            mu,
            h,
            f,
            v,
            sqrt_g,
            tau,
        };
        s.validate()?;
        Ok(s)
    }

    /// Re-checks the type invariants on an existing value.
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.mu, self.h, self.f, self.v, self.sqrt_g, self.tau]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("model scalars must be finite".into()));
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
        if self.mu * self.h > 1.0 {
            return Err(Error::InvalidInput(format!(
                "mu*h = {} violates the standing assumption mu*h <= 1",
                self.mu * self.h
            )));
        }
        if self.f <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "field intensity f = {} must be > 0",
                self.f
            )));
        }
        if self.sqrt_g <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sqrt_g = {} must be > 0",
                self.sqrt_g
            )));
        }
        Ok(())
    }

    /// Level spacing `μ h f` of the Landau ladder.
    pub fn spacing(&self) -> f64 {
        self.mu * self.h * self.f
    }

    /// Classical threshold `V + 2τ` that the ladder is compared against.
    pub fn threshold(&self) -> f64 {
        self.v + 2.0 * self.tau
    }
}

/// Computes the Landau levels `λ_n = ((2n+1) μ h f − V)/2` for
/// `n = 0 … n_max`.
///
/// # Returns
/// A strictly increasing vector of length `n_max + 1`; successive entries
/// differ by exactly the spacing `μ h f`.
///
/// # Errors
/// [`Error::InvalidInput`] on invalid scalars; [`Error::MemoryGuard`] when
/// `n_max` exceeds 10⁶.
pub fn landau_levels(s: &ModelScalars, n_max: usize) -> Result<Vec<f64>> {
    s.validate()?;
    if n_max >= LEVEL_LIST_MAX {
        return Err(Error::MemoryGuard(format!(
            "landau_levels: n_max = {n_max} exceeds the {LEVEL_LIST_MAX} guard"
        )));
    }
    let gap = s.spacing();
    Ok((0..=n_max)
        .map(|n| 0.5 * ((2 * n + 1) as f64 * gap - s.v))
        .collect())
}

/// Counts the Landau levels at or below the classical threshold:
/// `N = #{n ≥ 0 : (2n+1) μ h f ≤ V + 2τ}`.
///
/// The threshold comparison is closed (a level exactly at `V + 2τ` counts),
/// matching the right-continuous step convention `θ(0) = 1`.  The count is
/// evaluated in closed form, `N = ⌊(q − 1)/2⌋ + 1` with `q = (V+2τ)/(μhf)`,
/// rather than by iteration, so arbitrarily small `μh` cost nothing; a
/// half-ulp guard keeps exact boundary hits inside despite rounding in `q`.
pub fn level_count(s: &ModelScalars) -> usize {
    let q = s.threshold() / s.spacing();
    if q < 1.0 - 1e-12 {
        return 0;
    }
    (0.5 * (q - 1.0) + 1e-10).floor() as usize + 1
}

/// Magnetic Weyl expression `e^MW = (2π)^{-1} N μ h^{-1} f √g` for the
/// integrated spectral density at level `τ`.
pub fn magnetic_weyl_density(s: &ModelScalars) -> f64 {
    let per_level = s.mu * s.f * s.sqrt_g / (2.0 * std::f64::consts::PI * s.h);
    level_count(s) as f64 * per_level
}

/// Non-magnetic Weyl expression `e^W = (V + 2τ) √g / (4π h²)`: the
/// `(2πh)^{-2}`-normalised area of the classically allowed ellipse.
/// Returns `0` for `V + 2τ < 0` (empty ellipse).
pub fn weyl_density_diag(s: &ModelScalars) -> f64 {
    let t = s.threshold();
    if t <= 0.0 {
        return 0.0;
    }
    t * s.sqrt_g / (4.0 * std::f64::consts::PI * s.h * s.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn scalars(mu: f64, h: f64, f: f64, v: f64, sqrt_g: f64, tau: f64) -> ModelScalars {
        ModelScalars::new(mu, h, f, v, sqrt_g, tau).unwrap()
    }

    #[test]
    fn levels_match_direct_substitution() {
        let s = scalars(10.0, 0.02, 1.0, 1.0, 1.0, 0.0);
        let levels = landau_levels(&s, 3).unwrap();
        let expect = [-0.4, -0.2, 0.0, 0.2];
        for (l, e) in levels.iter().zip(expect) {
            assert_abs_diff_eq!(*l, e, epsilon = 1e-15);
        }

        // unit-scale reference: V = 0, spacing 1 gives the pure ladder
        let s = scalars(1.0, 1.0, 1.0, 0.0, 1.0, 0.0);
        let levels = landau_levels(&s, 1).unwrap();
        assert_abs_diff_eq!(levels[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(levels[1], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn levels_are_arithmetic_with_gap_muhf() {
        for &(mu, h, f) in &[(10.0, 0.02, 1.0), (3.0, 0.125, 0.7), (64.0, 0.01, 1.3)] {
            let s = scalars(mu, h, f, 0.8, 1.0, 0.1);
            let levels = landau_levels(&s, 20).unwrap();
            for w in levels.windows(2) {
                assert_relative_eq!(w[1] - w[0], s.spacing(), max_relative = 1e-12);
                assert!(w[1] > w[0]);
            }
        }
    }

    #[test]
    fn level_count_examples() {
        // (2n+1)·0.2 ≤ 1 ⇔ n ≤ 2
        assert_eq!(level_count(&scalars(10.0, 0.02, 1.0, 1.0, 1.0, 0.0)), 3);
        // lowest level above threshold
        assert_eq!(level_count(&scalars(1.0, 1.0, 1.0, 0.5, 1.0, 0.0)), 0);
    }

    #[test]
    fn level_count_boundary_is_closed() {
        // spacing exactly 1.0, threshold exactly 3.0: level n = 1 sits
        // exactly at threshold and must be counted.
        let s = scalars(4.0, 0.25, 1.0, 3.0, 1.0, 0.0);
        assert_eq!(level_count(&s), 2);
        // just below the boundary the count drops
        let s = scalars(4.0, 0.25, 1.0, 3.0 - 1e-6, 1.0, 0.0);
        assert_eq!(level_count(&s), 1);
        // threshold exactly at the first level
        let s = scalars(4.0, 0.25, 1.0, 1.0, 1.0, 0.0);
        assert_eq!(level_count(&s), 1);
    }

    #[test]
    fn level_count_monotone_in_tau_v_and_spacing() {
        let taus = [-0.2, 0.0, 0.3, 0.9];
        for w in taus.windows(2) {
            let lo = level_count(&scalars(8.0, 0.05, 1.0, 1.0, 1.0, w[0]));
            let hi = level_count(&scalars(8.0, 0.05, 1.0, 1.0, 1.0, w[1]));
            assert!(lo <= hi, "count must grow with tau");
        }
        let vs = [0.3, 0.7, 1.0, 2.5];
        for w in vs.windows(2) {
            let lo = level_count(&scalars(8.0, 0.05, 1.0, w[0], 1.0, 0.0));
            let hi = level_count(&scalars(8.0, 0.05, 1.0, w[1], 1.0, 0.0));
            assert!(lo <= hi, "count must grow with V");
        }
        let spacings = [0.05, 0.1, 0.2, 0.5];
        for w in spacings.windows(2) {
            let lo = level_count(&scalars(1.0, w[1], 1.0, 1.0, 1.0, 0.0));
            let hi = level_count(&scalars(1.0, w[0], 1.0, 1.0, 1.0, 0.0));
            assert!(hi >= lo, "count must shrink as the spacing grows");
        }
    }

    #[test]
    fn magnetic_weyl_density_example() {
        let s = scalars(10.0, 0.02, 1.0, 1.0, 1.0, 0.0);
        assert_relative_eq!(
            magnetic_weyl_density(&s),
            238.73241463784303,
            max_relative = 1e-12,
        );
        // empty ladder gives zero density
        let s = scalars(1.0, 1.0, 1.0, 0.5, 1.0, 0.0);
        assert_eq!(magnetic_weyl_density(&s), 0.0);
    }

    #[test]
    fn density_per_level_is_consistent() {
        for &(mu, h) in &[(10.0, 0.02), (5.0, 0.1), (32.0, 0.03)] {
            let s = scalars(mu, h, 1.3, 1.0, 0.8, 0.2);
            let n = level_count(&s);
            assert!(n > 0);
            let per_level = s.mu * s.f * s.sqrt_g / (2.0 * std::f64::consts::PI * s.h);
            assert_relative_eq!(
                magnetic_weyl_density(&s) / n as f64,
                per_level,
                max_relative = 1e-15,
            );
        }
    }

    #[test]
    fn weyl_density_diag_examples() {
        let s = scalars(1.0, 0.1, 1.0, 1.0, 1.0, 0.0);
        assert_relative_eq!(
            weyl_density_diag(&s),
            7.957747154594767,
            max_relative = 1e-12,
        );
        let s = scalars(1.0, 0.1, 1.0, 0.0, 1.0, 0.0);
        assert_eq!(weyl_density_diag(&s), 0.0);
        let s = scalars(1.0, 0.1, 1.0, 1.0, 2.0, 0.5);
        assert_relative_eq!(
            weyl_density_diag(&s),
            31.830988618379067,
            max_relative = 1e-12,
        );
        // empty ellipse
        let s = scalars(1.0, 0.1, 1.0, -1.0, 1.0, 0.0);
        assert_eq!(weyl_density_diag(&s), 0.0);
    }

    #[test]
    fn semiclassical_bracketing_within_one_level() {
        // For fixed V = 1, f = 1, sqrt_g = 1, tau = 0 the two Weyl
        // expressions differ by at most one Landau level of density.
        for k in 1..=16usize {
            let h = 1.0 / (10.0 * k as f64);
            let s = scalars(1.0, h, 1.0, 1.0, 1.0, 0.0);
            let gap = (magnetic_weyl_density(&s) - weyl_density_diag(&s)).abs();
            let one_level = s.mu * s.f * s.sqrt_g / (2.0 * std::f64::consts::PI * s.h);
            assert!(
                gap <= one_level * (1.0 + 1e-12),
                "h = {h}: |e^MW - e^W| = {gap} exceeds one level {one_level}"
            );
        }
    }

    #[test]
    fn scalar_validation_rejects_bad_inputs() {
        assert!(ModelScalars::new(-1.0, 0.1, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelScalars::new(1.0, 0.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelScalars::new(1.0, 1.2, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelScalars::new(20.0, 0.1, 1.0, 1.0, 1.0, 0.0).is_err(), "mu*h > 1");
        assert!(ModelScalars::new(1.0, 0.1, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModelScalars::new(1.0, 0.1, 1.0, 1.0, -2.0, 0.0).is_err());
        assert!(ModelScalars::new(1.0, 0.1, 1.0, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn level_list_guard() {
        let s = scalars(1.0, 0.5, 1.0, 1.0, 1.0, 0.0);
        assert!(matches!(
            landau_levels(&s, 2_000_000),
            Err(Error::MemoryGuard(_))
        ));
    }
}
