/* C interface for the magspec spectral-numerics library. Generated by cbindgen; do not edit by hand. */

#ifndef MAGSPEC_H
#define MAGSPEC_H

/* This file is regenerated by the crate's build script. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Which remainder bound applies for a given `(μ, h)`.
enum MagspecBranch
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  // The four-term weak-field bound applies.
  MAGSPEC_BRANCH_WEAK_FIELD = 0,
  // The two-term intermediate-field bound applies.
  MAGSPEC_BRANCH_INTERMEDIATE_FIELD = 1,
  // Strong field: no bound is stated.
  MAGSPEC_BRANCH_NOT_STATED = 2,
};
#ifndef __cplusplus
typedef int32_t MagspecBranch;
#endif // __cplusplus

// Field-strength classification, mirroring the library's three regimes.
enum MagspecRegime
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  // `μ ≤ (h|ln h|)^{-1/4}`.
  MAGSPEC_REGIME_WEAK = 0,
  // Between the weak and strong edges.
  MAGSPEC_REGIME_INTERMEDIATE = 1,
  // `μ > (h|ln h|)^{-2/5}`.
  MAGSPEC_REGIME_STRONG = 2,
};
#ifndef __cplusplus
typedef int32_t MagspecRegime;
#endif // __cplusplus

// Return code of every fallible `magspec_*` function.
//
// Zero is success.  Codes 1–7 map the library's error classes one-to-one;
// 8 and 9 are boundary conditions that can only arise in the C layer.
enum MagspecStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  // The call succeeded and all out-pointers were written.
  MAGSPEC_STATUS_OK = 0,
  // A parameter lies outside the documented domain.
  MAGSPEC_STATUS_INVALID_INPUT = 1,
  // The computation ran but failed its internal accuracy certificate.
  MAGSPEC_STATUS_ACCURACY = 2,
  // A data set is too small for the requested statistic.
  MAGSPEC_STATUS_INSUFFICIENT_DATA = 3,
  // An eigendecomposition failed or lost its symmetry.
  MAGSPEC_STATUS_EIGEN = 4,
  // The request would allocate an unreasonably large dense object.
  MAGSPEC_STATUS_MEMORY_GUARD = 5,
  // A configuration value could not be interpreted.
  MAGSPEC_STATUS_CONFIG = 6,
  // An underlying file-system operation failed.
  MAGSPEC_STATUS_IO = 7,
  // A required pointer argument was null.
  MAGSPEC_STATUS_NULL_POINTER = 8,
  // An internal panic was caught at the boundary; please report it.
  MAGSPEC_STATUS_PANIC = 9,
};
#ifndef __cplusplus
typedef int32_t MagspecStatus;
#endif // __cplusplus

// Opaque handle around a validated model-kernel parameter set.
//
// Create with [`magspec_model_new`], release with [`magspec_model_free`].
typedef struct MagspecModel MagspecModel;

// One Dirac-energy gap evaluation: the localised pair functional against
// its smooth reference, with the signed and relative gaps and the
// theoretical remainder overlay for the same `(μ, h, κ)`.
typedef struct MagspecGapResult {
  // Pair functional of the model projector kernel.
  double pair_energy;
  // Same functional with the smooth reference kernel.
  double weyl_reference;
  // `pair_energy - weyl_reference`.
  double gap;
  // `|gap| / |weyl_reference|`.
  double rel_gap;
  // Theoretical remainder value for the applicable branch (NaN when no
  // bound is stated for the regime).
  double remainder_overlay;
} MagspecGapResult;

// Threshold scales, classification and remainder-bound values for one
// `(μ, h)` pair.
typedef struct MagspecRegimeReport {
  // Perturbation-validity horizon `min(μ^m h^{1+δ}, 1)`.
  double t_star;
  // Distinguishability scale `(μh|ln h|)^{1/3}`.
  double t2_star;
  // `(μh|ln h|)^{2/3}` in the stronger fields, `μ^{-1}` otherwise.
  double t3_star;
  // Logarithmic horizon `μ³h|ln h|`.
  double t4_star;
  // Polar-cap angular width `(μh|ln h|)^{1/2}`.
  double rho_bar;
  // Field-strength classification.
  MagspecRegime regime;
  // Which of the three bounds applies.
  MagspecBranch applicable;
  // Four-term weak-field bound at the requested `κ`.
  double bound_weak_field;
  // Two-term intermediate-field bound at the requested `κ`.
  double bound_intermediate_field;
  // Three-term short-time bound at the requested `κ`.
  double bound_general;
  // Value of the applicable bound; NaN when no bound is stated.
  double remainder_value;
} MagspecRegimeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static, NUL-terminated UTF-8 string.
const char *magspec_version(void);

// Human-readable description of the most recent failure on the calling
// thread, as a NUL-terminated UTF-8 string (empty if nothing failed yet).
//
// The pointer stays valid until the next failing `magspec_*` call on the
// same thread; copy the text if it must outlive that.
const char *magspec_last_error_message(void);

// Builds a model-kernel handle for coupling `mu`, semiclassical parameter
// `h`, potential `w` and energy shift `v`, sized so kernel evaluations are
// accurate for coordinates with `|x₂|, |y₂| ≤ x2_extent`.
//
// On success writes the new handle to `out`; the caller owns it and must
// release it with [`magspec_model_free`].
//
// # Safety
// `out` must be null (reported, nothing written) or valid for writing one
// pointer.
MagspecStatus magspec_model_new(double mu,
                                double h,
                                double w,
                                double v,
                                double x2_extent,
                                struct MagspecModel **out);

// Releases a handle created by [`magspec_model_new`].  Passing null is a
// no-op; passing the same handle twice is undefined behaviour.
//
// # Safety
// `model` must be null or a pointer previously returned by
// [`magspec_model_new`] that has not been freed.
void magspec_model_free(struct MagspecModel *model);

// Number of oscillator modes the handle sums over (useful for sizing
// caller-side diagnostics).
//
// # Safety
// `model` must be a live handle from [`magspec_model_new`]; `out` must be
// null (reported) or valid for writing one `size_t`.
MagspecStatus magspec_model_mode_count(const struct MagspecModel *model, size_t *out);

// Evaluates the model projector kernel at `x = (x1, x2)`, `y = (y1, y2)`
// and writes its real and imaginary parts.
//
// # Safety
// `model` must be a live handle from [`magspec_model_new`]; `out_re` and
// `out_im` must be null (reported) or valid for writing one `double` each.
MagspecStatus magspec_model_kernel(const struct MagspecModel *model,
                                   double x1,
                                   double x2,
                                   double y1,
                                   double y2,
                                   double *out_re,
                                   double *out_im);

// Closed-form radial profile of the kernel at separation `s` (defined for
// handles built with `v = 0`, where the kernel modulus is radial).
//
// # Safety
// `model` must be a live handle from [`magspec_model_new`]; `out` must be
// null (reported) or valid for writing one `double`.
MagspecStatus magspec_model_radial_kernel(const struct MagspecModel *model, double s, double *out);

// Number of spectral levels at or below the energy threshold for the given
// scalar data (`f` field strength, `sqrt_g` metric density, `tau` shift).
//
// # Safety
// `out` must be null (reported) or valid for writing one `size_t`.
MagspecStatus magspec_level_count(double mu,
                                  double h,
                                  double f,
                                  double v,
                                  double sqrt_g,
                                  double tau,
                                  size_t *out);

// Writes the spectral levels at or below the energy threshold into `buf`.
//
// The total level count is always stored in `written`; at most `capacity`
// leading values are copied into `buf`, so callers can pass `capacity = 0`
// (with a null `buf`) to query the size, then call again.
//
// # Safety
// `written` must be null (reported) or valid for writing one `size_t`;
// `buf` must be valid for writing `capacity` doubles (null is accepted only
// when `capacity` is zero).
MagspecStatus magspec_landau_levels(double mu,
                                    double h,
                                    double f,
                                    double v,
                                    double sqrt_g,
                                    double tau,
                                    double *buf,
                                    size_t capacity,
                                    size_t *written);

// Magnetic Weyl density `N μ f √g / (2π h)` for the given scalar data.
//
// # Safety
// `out` must be null (reported) or valid for writing one `double`.
MagspecStatus magspec_magnetic_weyl_density(double mu,
                                            double h,
                                            double f,
                                            double v,
                                            double sqrt_g,
                                            double tau,
                                            double *out);

// Field-free Weyl density `(V + 2τ)√g / (4π h²)` for the given scalar data.
//
// # Safety
// `out` must be null (reported) or valid for writing one `double`.
MagspecStatus magspec_weyl_density_diag(double mu,
                                        double h,
                                        double f,
                                        double v,
                                        double sqrt_g,
                                        double tau,
                                        double *out);

// Field-free reference kernel at `x = (x1, x2)`, `y = (y1, y2)` for
// potential `v`, shift `tau` and the symmetric metric
// `[[g11, g12], [g12, g22]]`.
//
// # Safety
// `out` must be null (reported) or valid for writing one `double`.
MagspecStatus magspec_weyl_kernel(double v,
                                  double h,
                                  double tau,
                                  double g11,
                                  double g12,
                                  double g22,
                                  double x1,
                                  double x2,
                                  double y1,
                                  double y2,
                                  double *out);

// Evaluates the localised pair functional of the model kernel against its
// smooth reference at one `(mu, h)` cell and fills `out` with both values,
// the gaps and the remainder overlay.
//
// `w` is the model potential, `kappa ∈ (0, 2)` the weight-singularity
// exponent, `rho` the localisation radius; the three orders control the
// far-zone, radial and angular quadrature rules (the shipped defaults are
// 32, 64 and 16).
//
// # Safety
// `out` must be null (reported) or valid for writing one
// `MagspecGapResult`.
MagspecStatus magspec_dirac_gap(double mu,
                                double h,
                                double w,
                                double kappa,
                                double rho,
                                size_t outer_order,
                                size_t radial_order,
                                size_t angular_order,
                                struct MagspecGapResult *out);

// Computes the threshold scales, field-strength classification and
// remainder-bound values for `(mu, h)` at perturbation order `m`,
// singularity exponent `kappa` and safety exponent `delta`.
//
// # Safety
// `out` must be null (reported) or valid for writing one
// `MagspecRegimeReport`.
MagspecStatus magspec_regime_report(double mu,
                                    double h,
                                    uint32_t m,
                                    double kappa,
                                    double delta,
                                    struct MagspecRegimeReport *out);

// Runs the deterministic self-test battery with the given seed and writes
// whether every check passed.  A non-`MAGSPEC_STATUS_OK` return means the
// battery itself could not run; individual gate failures are reported
// through `all_passed` instead.
//
// # Safety
// `all_passed` must be null (reported) or valid for writing one `bool`.
MagspecStatus magspec_selftest(uint64_t seed, bool *all_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGSPEC_H */
