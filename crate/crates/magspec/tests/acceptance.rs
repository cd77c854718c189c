//! End-to-end acceptance battery: ten numbered criteria, one test each,
//! printing a single PASS/FAIL line per criterion (visible with
//! `--nocapture`; cargo prints the line automatically for failures).
//!
//! Every gate checks a property or an order of scaling against an
//! independent route — closed forms, an alternative discretization, a
//! different quadrature family, or values frozen from an independent
//! implementation — never against the code path under test itself.

use magspec::dirac_energy::{
    dirac_energy, radial_dirac_energy, CutoffPair, KernelInput, QuadratureSpec, SingularWeight,
};
use magspec::dynamics::{
    drift_velocity, hamiltonian, integrate_flow, self_intersections, tick_sqrt_fit,
    tick_structure, winding_distance, FlowState, ModelField,
};
use magspec::harness::{
    csv_report, fit_power_law, run_sweep, selftest, SweepConfig, SweepQuantity,
};
use magspec::kernels::{landau_projector_kernel, model_kernel, radial_kernel, weyl_kernel, ModelParams};
use magspec::landau::{level_count, magnetic_weyl_density, ModelScalars};
use magspec::perturbation::{
    build_ladder, discretize_model, duhamel_series, heisenberg_evolve, propagator,
    remainder_check, BasisKind, OperatorMatrix, OperatorMeta,
};
use magspec::regimes::{regime_classify, remainder_estimate, report, BoundBranch, Regime};
use magspec::specfun::{make_rule, QuadratureKind};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};

/// Runs one criterion body and prints its verdict line; failures are
/// re-raised so the cargo harness still reports them.
fn criterion<F: FnOnce()>(number: u32, label: &str, body: F) {
    let outcome = panic::catch_unwind(AssertUnwindSafe(body));
    let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("criterion {number} ({label}): {verdict}");
    if let Err(cause) = outcome {
        panic::resume_unwind(cause);
    }
}

/// Operator (spectral) norm through the Gram eigenproblem; local to the
/// battery so the bound checks do not lean on library internals.
fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    let gram = (&gram + gram.adjoint()).scale(0.5);
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0_f64, |a, &l| a.max(l))
        .max(0.0)
        .sqrt()
}

fn matrix_meta() -> OperatorMeta {
    OperatorMeta {
        mu: 1.0,
        h: 0.1,
        grid: None,
    }
}

fn random_hermitian(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> OperatorMatrix {
    let raw = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    });
    let sym = (&raw + raw.adjoint()).scale(scale);
    OperatorMatrix::new(sym, true, BasisKind::OscillatorTensor, matrix_meta()).expect("hermitian")
}

/// Degenerate model sized for kernel evaluations with `|x₂|, |y₂| ≤ extent`.
fn degenerate_model(mu: f64, h: f64, w: f64, extent: f64) -> ModelParams {
    let probe = ModelParams::new(mu, h, w, 0.0, 1).expect("probe");
    ModelParams::new(mu, h, w, 0.0, probe.suggest_n_max(extent)).expect("model")
}

// =====================================================================
// 1. Diagonal trace against the level-sum density
// =====================================================================

#[test]
fn criterion_1_trace_identity() {
    criterion(1, "diagonal trace matches the level-sum density", || {
        // twelve (μ, h, W) triples whose products μh span [0.05, 1.0] and
        // whose filled-level counts run from 1 to 10
        let triples: [(f64, f64, f64); 12] = [
            (1.0, 0.05, 1.0),
            (2.0, 0.04, 0.6),
            (2.0, 0.05, 1.0),
            (3.0, 0.05, 0.8),
            (2.0, 0.1, 1.1),
            (5.0, 0.05, 1.2),
            (4.0, 0.1, 1.0),
            (5.0, 0.1, 1.6),
            (6.0, 0.1, 0.9),
            (7.0, 0.1, 2.2),
            (8.0, 0.1, 1.0),
            (4.0, 0.25, 1.0),
        ];
        let products: Vec<f64> = triples.iter().map(|t| t.0 * t.1).collect();
        let lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = products.iter().cloned().fold(0.0_f64, f64::max);
        assert!(lo <= 0.05 + 1e-12 && hi >= 1.0 - 1e-12, "μh span {lo}..{hi}");

        for &(mu, h, w) in &triples {
            let scalars = ModelScalars::new(mu, h, 1.0, w, 1.0, 0.0).expect("scalars");
            let n = level_count(&scalars);
            assert!(n >= 1, "triple ({mu}, {h}, {w}) fills no level");
            let density = magnetic_weyl_density(&scalars);

            let p = degenerate_model(mu, h, w, 0.3);
            assert_eq!(p.degenerate_level_count(), n, "level counts disagree");
            // the kernel diagonal is constant; two probe points also check
            // the translation covariance of the quadrature route
            for x in [[0.0, 0.0], [0.2, -0.3]] {
                let diag = model_kernel(&p, x, x).expect("diagonal");
                assert!(
                    (diag.re - density).abs() <= 1e-8 * density,
                    "triple ({mu}, {h}, {w}) at {x:?}: diagonal {} vs density {density}",
                    diag.re
                );
                assert!(diag.im.abs() <= 1e-8 * density, "imaginary diagonal");
            }
        }
    });
}

// =====================================================================
// 2. Kernel oracles: closed-form level sum and grid eigensolver
// =====================================================================

#[test]
fn criterion_2_kernel_oracles() {
    criterion(2, "kernel agrees with both independent oracles", || {
        // (a) quadrature route vs the closed-form level sum on 16 pairs
        // across a single-level and a three-level model
        let pairs: [([f64; 2], [f64; 2]); 8] = [
            ([0.0, 0.0], [0.3, 0.4]),
            ([0.25, -0.3], [-0.2, 0.35]),
            ([0.5, 0.1], [0.45, 0.15]),
            ([-0.4, 0.2], [0.3, -0.5]),
            ([0.6, 0.0], [0.0, 0.6]),
            ([0.1, 0.1], [-0.1, -0.1]),
            ([0.7, -0.2], [0.66, -0.25]),
            ([0.05, 0.55], [-0.35, 0.2]),
        ];
        for (mu, h, w) in [(4.0, 0.1, 1.0), (2.0, 0.1, 1.1)] {
            let p = degenerate_model(mu, h, w, 0.7);
            let n = p.degenerate_level_count();
            assert!(n >= 1);
            let scale = n as f64 * mu / (2.0 * PI * h);
            for &(x, y) in &pairs {
                let quad = model_kernel(&p, x, y).expect("quadrature route");
                let mut level_sum = Complex64::new(0.0, 0.0);
                for level in 0..n {
                    level_sum += landau_projector_kernel(level, mu, h, x, y).expect("level");
                }
                assert!(
                    (quad - level_sum).norm() <= 1e-8 * scale,
                    "pair {x:?}/{y:?} at ({mu}, {h}, {w}): gap {:.3e} vs scale {scale:.3e}",
                    (quad - level_sum).norm()
                );
            }
        }

        // (b) vs the Fourier-grid eigensolver: monotone improvement over the
        // grid ladder and at most 5% at the finest grid
        let p = ModelParams::new(4.0, 0.25, 1.0, 0.0, 8).expect("model");
        let tau = 0.5;
        let oracle_pairs: [([f64; 2], [f64; 2]); 5] = [
            ([0.0, 0.0], [0.0, 0.0]),
            ([0.1, -0.1], [-0.2, 0.2]),
            ([0.3, 0.2], [0.0, -0.1]),
            ([-0.25, 0.3], [0.15, 0.05]),
            ([0.4, -0.3], [-0.1, -0.2]),
        ];
        let mut previous = f64::INFINITY;
        for n_grid in [32usize, 48, 64] {
            let grid = discretize_model(&p, 2.0, n_grid).expect("discretization");
            let mut worst = 0.0_f64;
            for &(x, y) in &oracle_pairs {
                let grid_val = grid.projector_kernel(tau, x, y).expect("grid kernel");
                let exact = model_kernel(&p, x, y).expect("kernel");
                let scale = model_kernel(&p, x, x).expect("diag").norm();
                worst = worst.max((grid_val - exact).norm() / scale);
            }
            assert!(
                worst < previous,
                "no improvement at n_grid = {n_grid}: {worst:.3e} vs {previous:.3e}"
            );
            previous = worst;
            if n_grid == 64 {
                assert!(worst <= 0.05, "eigensolver gap {worst:.3e} above 5%");
            }
        }
    });
}

// =====================================================================
// 3. Smooth reference kernel against a direct 2-D quadrature
// =====================================================================

/// Inverse square root of a 2×2 symmetric positive-definite matrix, via
/// `√M = (M + √det·I)/√(tr + 2√det)`.
fn inv_sqrt_2x2(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let (a, b, c) = (g[0][0], g[0][1], g[1][1]);
    let sq = (a * c - b * b).sqrt();
    let norm = (a + c + 2.0 * sq).sqrt();
    let (sa, sb, sc) = ((a + sq) / norm, b / norm, (c + sq) / norm);
    let sdet = sa * sc - sb * sb;
    [[sc / sdet, -sb / sdet], [-sb / sdet, sa / sdet]]
}

#[test]
fn criterion_3_weyl_kernel_quadrature() {
    criterion(3, "reference kernel matches a direct 2-D quadrature", || {
        // integrate e^{iξ·(x−y)/h} over the momentum ellipse ξᵀGξ ≤ V+2τ
        // directly (tensor Gauss–Legendre in elliptic polar coordinates, no
        // Bessel functions, no radial reduction)
        let radial = make_rule(QuadratureKind::GaussLegendre, 24).expect("radial rule");
        let angular = make_rule(QuadratureKind::GaussLegendre, 26).expect("angular rule");
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for sample in 0..10 {
            let v: f64 = rng.gen_range(0.5..2.0);
            let tau: f64 = rng.gen_range(0.0..0.3);
            let h: f64 = rng.gen_range(0.1..0.2);
            let g11: f64 = rng.gen_range(0.8..1.3);
            let g22: f64 = rng.gen_range(0.8..1.3);
            let g12: f64 = rng.gen_range(-0.2..0.2);
            let metric = [[g11, g12], [g12, g22]];
            let x = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
            let y = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];

            let closed = weyl_kernel(v, h, tau, metric, x, y).expect("closed form");
            let scale = weyl_kernel(v, h, tau, metric, x, x).expect("diagonal");

            let r = (v + 2.0 * tau).sqrt();
            let det = g11 * g22 - g12 * g12;
            let m = inv_sqrt_2x2(metric);
            let d = [x[0] - y[0], x[1] - y[1]];
            let w = [m[0][0] * d[0] + m[0][1] * d[1], m[1][0] * d[0] + m[1][1] * d[1]];
            let mut re = 0.0;
            let mut im = 0.0;
            for (&nr, &wr) in radial.nodes.iter().zip(&radial.weights) {
                let rho = 0.5 * (nr + 1.0);
                for (&na, &wa) in angular.nodes.iter().zip(&angular.weights) {
                    let theta = PI * (na + 1.0);
                    let phase =
                        r * rho * (theta.cos() * w[0] + theta.sin() * w[1]) / h;
                    let weight = 0.5 * wr * PI * wa * rho;
                    re += weight * phase.cos();
                    im += weight * phase.sin();
                }
            }
            let jacobian = r * r / det.sqrt() / (2.0 * PI * h).powi(2);
            let direct = re * jacobian;
            assert!(
                (closed - direct).abs() <= 1e-6 * scale,
                "sample {sample}: closed {closed:.9e} vs direct {direct:.9e} \
                 (scale {scale:.3e})"
            );
            // the imaginary part vanishes analytically; the quadrature
            // reproduces the cancellation at its own accuracy
            assert!(
                (im * jacobian).abs() <= 1e-6 * scale,
                "sample {sample}: imaginary residue {:.3e}",
                im * jacobian
            );
        }
    });
}

// =====================================================================
// 4. Pair functional: planar route vs radial reduction, gauge, positivity
// =====================================================================

#[test]
fn criterion_4_pair_functional_cross_path() {
    criterion(4, "pair functional agrees across independent routes", || {
        let p = degenerate_model(4.0, 0.1, 1.0, 1.0);
        let profile = move |x: [f64; 2], y: [f64; 2]| -> Complex64 {
            let s = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            let k = radial_kernel(&p, s).expect("radial profile");
            let phase = p.mu * (x[1] + y[1]) * (x[0] - y[0]) / (2.0 * p.h);
            k * Complex64::new(0.0, phase).exp()
        };
        let c = CutoffPair::bump(0.6).expect("cutoff");
        let q = QuadratureSpec::model_default(0.6, 4.0, 0.1).expect("quadrature");

        for kappa in [0.5, 1.0, 1.5] {
            let w = SingularWeight::power_law(kappa).expect("weight");
            let planar = dirac_energy(&KernelInput::Callback(&profile), &w, &c, &q)
                .expect("planar route");
            let radial = radial_dirac_energy(&p, &w, &c, &q).expect("radial route");
            assert!(planar > 0.0, "positivity fails at kappa = {kappa}");
            assert!(
                (planar - radial).abs() <= 1e-3 * radial.abs(),
                "kappa = {kappa}: planar {planar:.8e} vs radial {radial:.8e}"
            );
        }

        // multiplying by a pure gauge phase e^{i(θ(x)−θ(y))} must leave the
        // functional unchanged to rounding
        let twisted = move |x: [f64; 2], y: [f64; 2]| -> Complex64 {
            let theta = |z: [f64; 2]| 0.4 * z[0] - 0.2 * z[1] + 0.3 * z[0] * z[1];
            Complex64::new(0.0, theta(x) - theta(y)).exp() * profile(x, y)
        };
        let w = SingularWeight::power_law(1.0).expect("weight");
        let base = dirac_energy(&KernelInput::Callback(&profile), &w, &c, &q).expect("base");
        let gauged = dirac_energy(&KernelInput::Callback(&twisted), &w, &c, &q).expect("twisted");
        assert!(base > 0.0);
        assert!(
            (base - gauged).abs() <= 1e-10 * base.abs(),
            "gauge phase moved the functional: {base:.12e} vs {gauged:.12e}"
        );
    });
}

// =====================================================================
// 5. Relative gap to the smooth reference scales like the first power of h
// =====================================================================

/// Relative gaps frozen from an independent implementation of the same
/// sweep (fixed-order polar quadrature over the closed-form profiles) at
/// exactly this configuration; pinned to 1% as a cross-implementation
/// regression anchor.  The acceptance gate itself is the fitted exponent.
const FROZEN_RELATIVE_GAPS: [f64; 4] = [0.30536, 0.11417, 0.067920, 0.029604];

#[test]
fn criterion_5_remainder_order_scaling() {
    criterion(5, "reference gap scales like the first power of h", || {
        let cfg = SweepConfig::new(
            SweepQuantity::DiracGap,
            vec![2.0],
            vec![0.15, 0.075, 0.0375, 0.01875],
            "acceptance-unwritten.csv",
        );
        let outcome = run_sweep(&cfg).expect("sweep");
        assert_eq!(outcome.rows.len(), 4);
        for row in &outcome.rows {
            assert!(row.is_ok(), "cell (mu {}, h {}) failed: {}", row.mu, row.h, row.status);
            assert!(row.rel_gap > 0.0);
        }
        assert!(
            outcome.rows[0].rel_gap > outcome.rows[3].rel_gap,
            "relative gap does not shrink across the h ladder"
        );
        for (row, want) in outcome.rows.iter().zip(FROZEN_RELATIVE_GAPS) {
            assert!(
                (row.rel_gap - want).abs() <= 0.01 * want,
                "h = {}: relative gap {:.6e} drifted from the frozen {want:.6e}",
                row.h,
                row.rel_gap
            );
        }
        let fit = outcome.fits[0]
            .fit
            .as_ref()
            .expect("power-law fit over the h ladder");
        assert_eq!(fit.n_points, 4);
        assert!(
            (fit.exponent - 1.0).abs() <= 0.3,
            "scaling exponent {:.4} outside 1.0 ± 0.3",
            fit.exponent
        );
    });
}

// =====================================================================
// 6. Successive-approximation residuals stay under the certified bounds
// =====================================================================

#[test]
fn criterion_6_series_certification() {
    criterion(6, "series residuals respect the certified bounds", || {
        let t = 0.3;
        let h = 0.1;
        // 20 seeded instances, dimensions cycling 3..=12
        for instance in 0..20usize {
            let dim = 3 + (instance % 10);
            let mut rng = ChaCha8Rng::seed_from_u64(900 + instance as u64);
            let a0 = random_hermitian(dim, 1.0, &mut rng);
            let b = random_hermitian(dim, 0.04, &mut rng);
            let full = OperatorMatrix::new(
                &a0.entries + &b.entries,
                true,
                BasisKind::OscillatorTensor,
                matrix_meta(),
            )
            .expect("sum");
            let u = propagator(&full, t, h).expect("propagator");
            let (_, terms) = duhamel_series(&a0, &b, t, h, 3).expect("series");
            let nu = op_norm(&b.entries);
            let mut partial = DMatrix::<Complex64>::zeros(dim, dim);
            for (k, term) in terms.iter().enumerate() {
                partial += &term.value;
                if (1..=3).contains(&k) {
                    let residual = op_norm(&(&u.entries - &partial));
                    let bound = remainder_check(nu, t, h, k, 0.0).expect("bound").bound;
                    assert!(
                        residual <= bound * (1.0 + 1e-9),
                        "instance {instance} (dim {dim}), K = {k}: residual \
                         {residual:.6e} above bound {bound:.6e}"
                    );
                }
            }
        }

        // B = 0: the truncated series IS the unperturbed propagator
        let dim = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        let a0 = random_hermitian(dim, 1.0, &mut rng);
        let zero = OperatorMatrix::new(
            DMatrix::<Complex64>::zeros(dim, dim),
            true,
            BasisKind::OscillatorTensor,
            matrix_meta(),
        )
        .expect("zero");
        let u = propagator(&a0, t, h).expect("propagator");
        let (series, _) = duhamel_series(&a0, &zero, t, h, 3).expect("series");
        assert!(
            op_norm(&(&u.entries - &series.entries)) <= 1e-12,
            "B = 0 series is not the bare propagator"
        );

        // commuting diagonal case: each term has the closed form
        // U₀ · diag((i t b_j / h)^k / k!)
        let a_diag = [0.3, -0.7, 1.1, 0.2, -0.4];
        let b_diag = [0.05, -0.03, 0.08, 0.01, -0.06];
        let diag_op = |vals: &[f64; 5]| {
            OperatorMatrix::new(
                DMatrix::from_diagonal(&DVector::from_iterator(
                    5,
                    vals.iter().map(|&v| Complex64::new(v, 0.0)),
                )),
                true,
                BasisKind::OscillatorTensor,
                matrix_meta(),
            )
            .expect("diagonal")
        };
        let (_, terms) = duhamel_series(&diag_op(&a_diag), &diag_op(&b_diag), t, h, 3)
            .expect("commuting series");
        let mut factorial = 1.0;
        for (k, term) in terms.iter().enumerate() {
            if k > 0 {
                factorial *= k as f64;
            }
            for (j, (&aj, &bj)) in a_diag.iter().zip(&b_diag).enumerate() {
                let closed = Complex64::from_polar(1.0, t * aj / h)
                    * (Complex64::new(0.0, t * bj / h)).powu(k as u32)
                    / factorial;
                let gap = (term.value[(j, j)] - closed).norm();
                assert!(
                    gap <= 1e-12,
                    "commuting term k = {k}, entry {j}: gap {gap:.3e}"
                );
            }
        }
    });
}

// =====================================================================
// 7. Ladder commutator and the phase-rotation law
// =====================================================================

#[test]
fn criterion_7_ladder_identities() {
    criterion(7, "ladder commutator and phase rotation hold", || {
        let (n1, n2, mu, h) = (8usize, 2usize, 3.0, 0.05);
        let (z, zs) = build_ladder(n1, n2, mu, h).expect("ladder");
        let comm = &zs.entries * &z.entries - &z.entries * &zs.entries;
        let expected = 2.0 * mu * h;
        // every basis vector below the truncation edge sees exactly 2μh
        for level in 0..n1 - 1 {
            for mode in 0..n2 {
                let i = level * n2 + mode;
                assert!(
                    (comm[(i, i)] - Complex64::new(expected, 0.0)).norm() <= 1e-12 * expected,
                    "interior commutator at level {level}, mode {mode}"
                );
                for j in 0..n1 * n2 {
                    if j != i {
                        assert!(
                            comm[(i, j)].norm() <= 1e-12 * expected,
                            "off-diagonal commutator leak at ({i}, {j})"
                        );
                    }
                }
            }
        }

        // conjugation by the flow of ½Z*Z multiplies the interior ladder
        // entries by e^{iμt}
        let t = 0.7;
        let a0 = OperatorMatrix::new(
            (&zs.entries * &z.entries).scale(0.5),
            true,
            BasisKind::OscillatorTensor,
            OperatorMeta {
                mu,
                h,
                grid: None,
            },
        )
        .expect("generator");
        let evolved = heisenberg_evolve(&a0, &z, t, h).expect("evolution");
        let phase = Complex64::from_polar(1.0, mu * t);
        let amp_scale = (2.0 * mu * h * (n1 as f64)).sqrt();
        for level in 0..n1 - 1 {
            // transitions into the truncation edge see the defective top
            // eigenvalue; only interior transitions obey the rotation law
            if level + 1 > n1 - 2 {
                continue;
            }
            for mode in 0..n2 {
                let (r, c) = ((level + 1) * n2 + mode, level * n2 + mode);
                let gap = (evolved.entries[(r, c)] - phase * z.entries[(r, c)]).norm();
                assert!(
                    gap <= 1e-9 * amp_scale,
                    "phase law breaks at level {level}, mode {mode}: gap {gap:.3e}"
                );
            }
        }
    });
}

// =====================================================================
// 8. Classical geometry battery
// =====================================================================

fn origin_launch() -> FlowState {
    FlowState {
        x: [0.0, 0.0],
        xi: [1.0, 0.0],
        t: 0.0,
    }
}

/// Per-winding self-intersection count over μ/2 windings of the standard
/// tilted field.
fn per_winding_count(mu: f64) -> f64 {
    let field = ModelField::euclidean_linear(mu, 1.0, [0.0, 0.2]).expect("field");
    let windings = (mu / 2.0).round();
    let traj = integrate_flow(&field, &origin_launch(), windings * 2.0 * PI / mu, 1e-10)
        .expect("trajectory");
    let events = self_intersections(&traj).expect("events");
    events.len() as f64 / traj.windings() as f64
}

#[test]
fn criterion_8_classical_geometry() {
    criterion(8, "classical geometry battery", || {
        // (a) constant field: energy conservation, radius and period
        let mu = 10.0;
        let field = ModelField::euclidean_constant(mu, 1.0).expect("field");
        let period = 2.0 * PI / mu;
        let traj = integrate_flow(&field, &origin_launch(), 10.0 * period, 1e-11)
            .expect("trajectory");
        let drift = traj
            .states
            .iter()
            .map(|s| (hamiltonian(&field, s) - traj.energy0).abs())
            .fold(0.0_f64, f64::max);
        assert!(drift <= 1e-9, "energy drift {drift:.3e} over ten periods");

        let radius = 1.0 / mu; // √V / μ with V = 1
        for (s, c) in traj.states.iter().zip(&traj.guiding_center) {
            let r = ((s.x[0] - c[0]).powi(2) + (s.x[1] - c[1]).powi(2)).sqrt();
            assert!(
                (r - radius).abs() <= 1e-6 * radius,
                "cyclotron radius {r:.9} vs {radius}"
            );
        }

        // measured period from the unwrapped velocity angle, which advances
        // linearly in a constant field, so the bracketing interpolation is
        // exact up to the integration tolerance
        let angle_of = |s: &FlowState| {
            let a = field.vecpot_at(s.x);
            (s.xi[1] - mu * a[1]).atan2(s.xi[0] - mu * a[0])
        };
        let mut accumulated = 0.0;
        let mut measured_period = None;
        let mut previous: Option<(f64, f64)> = None;
        for s in &traj.states {
            let theta = angle_of(s);
            if let Some((tp, thp)) = previous {
                let mut step = theta - thp;
                while step > PI {
                    step -= 2.0 * PI;
                }
                while step < -PI {
                    step += 2.0 * PI;
                }
                if measured_period.is_none() && (accumulated + step).abs() >= 2.0 * PI {
                    let need = if step > 0.0 {
                        2.0 * PI - accumulated
                    } else {
                        -2.0 * PI - accumulated
                    };
                    measured_period = Some(tp + (s.t - tp) * need / step);
                }
                accumulated += step;
            }
            previous = Some((s.t, theta));
        }
        let measured_period = measured_period.expect("one full turn");
        assert!(
            (measured_period - period).abs() <= 1e-6 * period,
            "cyclotron period {measured_period:.9e} vs {period:.9e}"
        );

        // (b) guiding-center drift speed at μ ≥ 20: the ½-normalized
        // Hamiltonian fixes the speed at |∇(V/F)| / (2μ)
        for mu in [20.0, 40.0] {
            let field = ModelField::euclidean_linear(mu, 1.0, [0.0, 0.1]).expect("field");
            let traj =
                integrate_flow(&field, &origin_launch(), 20.0 * 2.0 * PI / mu, 1e-10)
                    .expect("trajectory");
            let c0 = traj.guiding_center.first().expect("start");
            let c1 = traj.guiding_center.last().expect("end");
            let dt = traj.states.last().expect("end").t - traj.states[0].t;
            let measured =
                (((c1[0] - c0[0]) / dt).powi(2) + ((c1[1] - c0[1]) / dt).powi(2)).sqrt();
            let predicted = drift_velocity(&field, [0.0, 0.0]);
            let predicted_speed = (predicted[0].powi(2) + predicted[1].powi(2)).sqrt();
            assert!(
                (predicted_speed - 0.1 / (2.0 * mu)).abs() <= 1e-9 * predicted_speed,
                "drift formula constant at mu = {mu}"
            );
            assert!(
                (measured - predicted_speed).abs() <= 0.02 * predicted_speed,
                "mu = {mu}: measured drift {measured:.6e} vs {predicted_speed:.6e}"
            );
        }

        // (c) per-winding self-intersection count grows linearly in μ
        let mus = [16.0, 32.0, 64.0];
        let counts: Vec<(f64, f64)> = mus.iter().map(|&m| (m, per_winding_count(m))).collect();
        let fit = fit_power_law(&counts).expect("count fit");
        assert!(
            (fit.exponent - 1.0).abs() <= 0.15,
            "intersection exponent {:.4} outside 1.0 ± 0.15 (counts {counts:?})",
            fit.exponent
        );

        // (d) the branch-separation ratio r(φ,n)·μ²/(n·sinφ) is a stable
        // constant across μ, angles and separations
        let mut ratios = Vec::new();
        for &mu in &mus {
            let field = ModelField::euclidean_linear(mu, 1.0, [0.0, 0.2]).expect("field");
            let traj = integrate_flow(&field, &origin_launch(), 5.0 * 2.0 * PI / mu, 1e-10)
                .expect("trajectory");
            for &phi in &[PI / 8.0, PI / 4.0, 3.0 * PI / 8.0] {
                for n in 1..=2i64 {
                    let d = winding_distance(&traj, phi, n).expect("distance");
                    ratios.push(d * mu * mu / (n as f64 * phi.sin()));
                }
            }
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0_f64, f64::max);
        assert!(
            hi / lo <= 4.0,
            "separation ratio spreads by {:.2} (range {lo:.3e}..{hi:.3e})",
            hi / lo
        );

        // (e) near-equator tick accumulation follows the square-root law
        let mu = 16.0;
        let field = ModelField::euclidean_linear(mu, 1.0, [0.0, 0.2]).expect("field");
        let full_ladder = 2.0 * mu / (PI * 0.2);
        let windings = (1.12 * full_ladder).ceil() + 9.0;
        let traj = integrate_flow(&field, &origin_launch(), windings * 2.0 * PI / mu, 1e-10)
            .expect("trajectory");
        let ticks = tick_structure(&traj).expect("ticks");
        let (slope, _) = tick_sqrt_fit(&ticks).expect("tick fit");
        assert!(
            (slope - 0.5).abs() <= 0.1,
            "tick regression slope {slope:.4} outside 0.5 ± 0.1"
        );
    });
}

// =====================================================================
// 9. Threshold calculator worked values and branch consistency
// =====================================================================

#[test]
fn criterion_9_regime_calculator() {
    criterion(9, "threshold worked values and branch switching", || {
        let r = report(10.0, 1e-4, 2, 1.0, 0.0).expect("report");
        assert!(
            (r.t_star - 0.01).abs() <= 1e-12 * 0.01,
            "t_star {} is not μ²h = 0.01",
            r.t_star
        );
        let closed_t2 = (10.0 * 1e-4 * (1e-4_f64).ln().abs()).powf(1.0 / 3.0);
        assert!((r.t2_star - closed_t2).abs() <= 1e-12 * closed_t2);
        assert!(
            (r.t2_star - 0.2096).abs() <= 5e-4,
            "t2_star {} strays from the worked 0.2096",
            r.t2_star
        );
        assert!(matches!(r.regime, Regime::Intermediate));
        assert!(matches!(r.applicable, BoundBranch::IntermediateField));

        // the weak/intermediate boundary sits at (h|ln h|)^{-1/4} ≈ 5.741
        let boundary = (1e-4_f64 * (1e-4_f64).ln().abs()).powf(-0.25);
        assert!(
            (boundary - 5.741).abs() <= 1e-3,
            "weak-field boundary {boundary:.6} strays from the worked 5.741"
        );
        assert!(matches!(
            regime_classify(boundary - 0.01, 1e-4).expect("below"),
            Regime::Weak
        ));
        assert!(matches!(
            regime_classify(boundary + 0.01, 1e-4).expect("above"),
            Regime::Intermediate
        ));

        // branch switching mirrors the classification on all three regimes
        for (mu, expect_weak, expect_intermediate) in
            [(3.0, true, false), (10.0, false, true), (100.0, false, false)]
        {
            let rep = report(mu, 1e-4, 2, 1.0, 0.0).expect("report");
            let est = remainder_estimate(mu, 1e-4, 1.0).expect("estimate");
            match (expect_weak, expect_intermediate) {
                (true, _) => {
                    assert!(matches!(rep.regime, Regime::Weak));
                    assert!(matches!(rep.applicable, BoundBranch::WeakField));
                    assert!(matches!(est.branch, BoundBranch::WeakField));
                    assert!(est.value.expect("weak bound") > 0.0);
                }
                (_, true) => {
                    assert!(matches!(rep.regime, Regime::Intermediate));
                    assert!(matches!(rep.applicable, BoundBranch::IntermediateField));
                    assert!(matches!(est.branch, BoundBranch::IntermediateField));
                    assert!(est.value.expect("intermediate bound") > 0.0);
                }
                _ => {
                    assert!(matches!(rep.regime, Regime::Strong));
                    assert!(matches!(rep.applicable, BoundBranch::NotStated));
                    assert!(matches!(est.branch, BoundBranch::NotStated));
                    assert!(est.value.is_none());
                }
            }
        }
    });
}

// =====================================================================
// 10. Determinism of the self-test battery and the sweeps
// =====================================================================

#[test]
fn criterion_10_determinism() {
    criterion(10, "seeded reruns are byte-identical", || {
        let first = selftest(42).expect("selftest").to_csv();
        let second = selftest(42).expect("selftest").to_csv();
        assert_eq!(first.into_bytes(), second.into_bytes(), "selftest CSV differs");

        let trace_cfg = SweepConfig::new(
            SweepQuantity::KernelTrace,
            vec![3.0, 5.0],
            vec![0.2, 0.1],
            "acceptance-unwritten.csv",
        );
        let a = csv_report(&run_sweep(&trace_cfg).expect("sweep"));
        let b = csv_report(&run_sweep(&trace_cfg).expect("sweep"));
        assert_eq!(a.into_bytes(), b.into_bytes(), "trace sweep CSV differs");

        let mut seeded_cfg = SweepConfig::new(
            SweepQuantity::DuhamelResidual,
            vec![1.0],
            vec![0.4, 0.2],
            "acceptance-unwritten.csv",
        );
        seeded_cfg.seed = 31;
        let a = csv_report(&run_sweep(&seeded_cfg).expect("sweep"));
        let b = csv_report(&run_sweep(&seeded_cfg).expect("sweep"));
        assert_eq!(a.into_bytes(), b.into_bytes(), "seeded sweep CSV differs");
    });
}
