//! Classical magnetic Hamiltonian flow and loop/winding geometry.
//!
//! The classical symbol of the operator is
//!
//! ```text
//!     H(x, ξ) = ½ ( Σ_{jk} g^{jk}(x) (ξ_j − μ V_j(x)) (ξ_k − μ V_k(x)) − V(x) ),
//! ```
//!
//! and all trajectories live on the energy shell `H = 0`.  For large `μ` the
//! motion is a fast cyclotron rotation of radius `√V/(μF)` and period
//! `2π/(μF)` superposed on a slow guiding-center drift of speed
//! `|∇(V/F)|/(2μ)`; after `≍ μ` windings the drift has displaced the loop by a
//! full diameter, so consecutive windings cross each other in `≍ μ`
//! self-intersection points whose angular positions (measured from the pole
//! of the drift direction) obey a square-root accumulation law towards the
//! equator.  This module integrates the flow, extracts windings, guiding
//! centers and self-intersections, and measures precisely those geometric
//! laws.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Samples stored per cyclotron winding (the accepted-step cap).
const SAMPLES_PER_WINDING: usize = 256;

/// Memory guard on the total number of stored flow samples.
const SAMPLE_GUARD: usize = 4_000_000;

/// Central-difference step for closure-supplied data without analytic
/// derivatives.
const FD_STEP: f64 = 1e-6;

/// Two crossing branches with direction sine below this are treated as
/// overlapping parallel curves, not transversal crossings.
const PARALLEL_SKIP: f64 = 1e-8;

/// Crossings with direction sine below this are kept but flagged degenerate.
const DEGENERATE_ANGLE: f64 = 1e-6;

type Map2 = dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync;
type Vec2Fn = dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync;
type ScalarFn = dyn Fn([f64; 2]) -> f64 + Send + Sync;

/// Smooth field data of the operator: inverse metric `g^{jk}`, magnetic
/// vector potential `(V₁, V₂)`, electric potential `V`, and the coupling
/// `μ`.  Derivative closures are optional; when absent they fall back to
/// central differences, which limits achievable energy conservation (the
/// stock constructors supply analytic derivatives).
#[derive(Clone)]
pub struct ModelField {
    metric: Arc<Map2>,
    vecpot: Arc<Vec2Fn>,
    potential: Arc<ScalarFn>,
    vecpot_jac: Option<Arc<Map2>>,
    potential_grad: Option<Arc<Vec2Fn>>,
    /// Magnetic coupling `μ > 0`.
    pub mu: f64,
}

impl std::fmt::Debug for ModelField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelField")
            .field("mu", &self.mu)
            .field("data", &"<closures>")
            .finish()
    }
}

impl ModelField {
    /// Builds a field from closures.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] unless `μ > 0` and finite.
    pub fn new(
        metric: impl Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static,
        vecpot: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
        potential: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        mu: f64,
    ) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!("mu = {mu} must be > 0")));
        }
        Ok(ModelField {
            metric: Arc::new(metric),
            vecpot: Arc::new(vecpot),
            potential: Arc::new(potential),
            vecpot_jac: None,
            potential_grad: None,
            mu,
        })
    }

    /// Attaches an analytic vector-potential Jacobian `jac[j][k] = ∂_k V_j`.
    #[must_use]
    pub fn with_vecpot_jac(
        mut self,
        jac: impl Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Self {
        self.vecpot_jac = Some(Arc::new(jac));
        self
    }

    /// Attaches an analytic potential gradient.
    #[must_use]
    pub fn with_potential_grad(
        mut self,
        grad: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.potential_grad = Some(Arc::new(grad));
        self
    }

    /// Euclidean metric, Landau gauge `(0, x₁)` (unit field intensity), with
    /// an arbitrary potential and its analytic gradient.
    pub fn euclidean_landau(
        mu: f64,
        potential: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        potential_grad: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        Ok(Self::new(
            |_| [[1.0, 0.0], [0.0, 1.0]],
            |x| [0.0, x[0]],
            potential,
            mu,
        )?
        .with_vecpot_jac(|_| [[0.0, 0.0], [1.0, 0.0]])
        .with_potential_grad(potential_grad))
    }

    /// Euclidean metric, Landau gauge, affine potential `V = v0 + s·x`.
    pub fn euclidean_linear(mu: f64, v0: f64, slope: [f64; 2]) -> Result<Self> {
        Self::euclidean_landau(
            mu,
            move |x| v0 + slope[0] * x[0] + slope[1] * x[1],
            move |_| slope,
        )
    }

    /// Euclidean metric, Landau gauge, constant potential.
    pub fn euclidean_constant(mu: f64, v0: f64) -> Result<Self> {
        Self::euclidean_linear(mu, v0, [0.0, 0.0])
    }

    /// Inverse metric `g^{jk}` at `x`.
    pub fn metric_at(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        (self.metric)(x)
    }

    /// Vector potential at `x`.
    pub fn vecpot_at(&self, x: [f64; 2]) -> [f64; 2] {
        (self.vecpot)(x)
    }

    /// Electric potential at `x`.
    pub fn potential_at(&self, x: [f64; 2]) -> f64 {
        (self.potential)(x)
    }

    fn vecpot_jac_at(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        if let Some(jac) = &self.vecpot_jac {
            return jac(x);
        }
        let mut out = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += FD_STEP;
            xm[k] -= FD_STEP;
            let vp = (self.vecpot)(xp);
            let vm = (self.vecpot)(xm);
            for j in 0..2 {
                out[j][k] = (vp[j] - vm[j]) / (2.0 * FD_STEP);
            }
        }
        out
    }

    fn potential_grad_at(&self, x: [f64; 2]) -> [f64; 2] {
        if let Some(grad) = &self.potential_grad {
            return grad(x);
        }
        let mut out = [0.0; 2];
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += FD_STEP;
            xm[k] -= FD_STEP;
            out[k] = ((self.potential)(xp) - (self.potential)(xm)) / (2.0 * FD_STEP);
        }
        out
    }

    /// `∂_a g^{jk}` by central differences (index order `[a][j][k]`).
    fn metric_grad_at(&self, x: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
        let mut out = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += FD_STEP;
            xm[a] -= FD_STEP;
            let gp = (self.metric)(xp);
            let gm = (self.metric)(xm);
            for j in 0..2 {
                for k in 0..2 {
                    out[a][j][k] = (gp[j][k] - gm[j][k]) / (2.0 * FD_STEP);
                }
            }
        }
        out
    }

    /// Samples the standing assumptions on a `9×9` grid over
    /// `[-radius, radius]²`: `V ≥ eps`, `|F| ≥ eps`, and (when `eps0 > 0`)
    /// `|∇(V/F)| ≥ eps0`.
    ///
    /// # Errors
    /// [`Error::InvalidInput`] naming the first violated condition.
    pub fn validate_on(&self, radius: f64, eps: f64, eps0: f64) -> Result<()> {
        for i in 0..9 {
            for j in 0..9 {
                let x = [
                    -radius + radius * i as f64 / 4.0,
                    -radius + radius * j as f64 / 4.0,
                ];
                let v = self.potential_at(x);
                if v < eps {
                    return Err(Error::InvalidInput(format!(
                        "potential V = {v} < {eps} at {x:?}"
                    )));
                }
                let f = field_intensity(self, x);
                if f.abs() < eps {
                    return Err(Error::InvalidInput(format!(
                        "field intensity |F| = {} < {eps} at {x:?}",
                        f.abs()
                    )));
                }
                if eps0 > 0.0 {
                    let d = drift_velocity(self, x);
                    let grad = 2.0 * self.mu * (d[0] * d[0] + d[1] * d[1]).sqrt();
                    if grad < eps0 {
                        return Err(Error::InvalidInput(format!(
                            "|grad(V/F)| = {grad} < {eps0} at {x:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A phase-space point of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowState {
    /// Position.
    pub x: [f64; 2],
    /// Canonical momentum.
    pub xi: [f64; 2],
    /// Time.
    pub t: f64,
}

/// An integrated trajectory: time-ordered states with per-state guiding
/// centers and winding indices.  Immutable after integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Accepted integration states, time-ordered.
    pub states: Vec<FlowState>,
    /// Energy at the initial state; every state stays within the drift
    /// budget of it.
    pub energy0: f64,
    /// Guiding center `x + rot_{-π/2}(v)/(μF)` per state.
    pub guiding_center: Vec<[f64; 2]>,
    /// Completed windings of the velocity angle per state; non-decreasing.
    pub winding_index: Vec<usize>,
    /// Velocities `ẋ` per state (kept for dense refinement).
    vel: Vec<[f64; 2]>,
    /// Energies per state (kept for export).
    energy: Vec<f64>,
    /// Measured unit drift direction of the guiding center, `(0, 1)` when
    /// the drift is too small to measure.
    drift_dir: [f64; 2],
}

/// A transversal self-intersection of the planar projection.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntersectionEvent {
    /// Time of the earlier branch.
    pub t_early: f64,
    /// Time of the later branch.
    pub t_late: f64,
    /// Crossing point.
    pub point: [f64; 2],
    /// Winding indices of the two branches.
    pub winding_pair: (usize, usize),
    /// Angular parameter of the early branch: the angle between the ray
    /// from its guiding center and the pole axis (the direction
    /// perpendicular to the drift), folded into `[0, π/2]` so the equator
    /// sits at `π/2`.
    pub phi: f64,
    /// Set when the branches cross at an angle below 1e-6 rad.
    pub degenerate: bool,
}

impl Trajectory {
    /// Number of completed windings.
    pub fn windings(&self) -> usize {
        self.winding_index.last().copied().unwrap_or(0)
    }

    /// Measured unit drift direction of the guiding center.
    pub fn drift_direction(&self) -> [f64; 2] {
        self.drift_dir
    }

    /// Writes the trajectory as CSV rows `t,x1,x2,xi1,xi2,H` with 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,x1,x2,xi1,xi2,H")?;
        for (s, e) in self.states.iter().zip(&self.energy) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.x[0], s.x[1], s.xi[0], s.xi[1], e
            )?;
        }
        Ok(())
    }
}

/// Serialises intersection events to JSON.
pub fn events_to_json(events: &[IntersectionEvent]) -> serde_json::Value {
    serde_json::json!({ "events": events })
}

// =====================================================================
// Hamiltonian and flow field
// =====================================================================

fn hamiltonian_inner(f: &ModelField, x: [f64; 2], xi: [f64; 2]) -> f64 {
    let g = f.metric_at(x);
    let a = f.vecpot_at(x);
    let p = [xi[0] - f.mu * a[0], xi[1] - f.mu * a[1]];
    let mut quad = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            quad += g[j][k] * p[j] * p[k];
        }
    }
    0.5 * (quad - f.potential_at(x))
}

/// Classical symbol `½(Σ g^{jk}(ξ_j − μV_j)(ξ_k − μV_k) − V)` at a state.
pub fn hamiltonian(f: &ModelField, s: &FlowState) -> f64 {
    hamiltonian_inner(f, s.x, s.xi)
}

/// Hamiltonian vector field: returns `(ẋ, ξ̇)`.
fn flow_rhs(f: &ModelField, x: [f64; 2], xi: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let g = f.metric_at(x);
    let a = f.vecpot_at(x);
    let p = [xi[0] - f.mu * a[0], xi[1] - f.mu * a[1]];
    let w = [
        g[0][0] * p[0] + g[0][1] * p[1],
        g[1][0] * p[0] + g[1][1] * p[1],
    ];
    let jac = f.vecpot_jac_at(x);
    let dv = f.potential_grad_at(x);
    let dg = f.metric_grad_at(x);
    let mut xidot = [0.0; 2];
    for axis in 0..2 {
        let mut quad = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                quad += dg[axis][j][k] * p[j] * p[k];
            }
        }
        let mut adv = 0.0;
        for k in 0..2 {
            adv += w[k] * jac[k][axis];
        }
        xidot[axis] = -0.5 * quad + f.mu * adv + 0.5 * dv[axis];
    }
    (w, xidot)
}

/// Magnetic field intensity `F = √(det g^{jk}) (∂₁V₂ − ∂₂V₁)`, the scalar
/// curl of the vector potential in the metric volume normalisation,
/// evaluated by central differences (step 1e-5, one Richardson pass).
pub fn field_intensity(f: &ModelField, x: [f64; 2]) -> f64 {
    let curl = |step: f64| {
        let e1p = f.vecpot_at([x[0] + step, x[1]]);
        let e1m = f.vecpot_at([x[0] - step, x[1]]);
        let e2p = f.vecpot_at([x[0], x[1] + step]);
        let e2m = f.vecpot_at([x[0], x[1] - step]);
        (e1p[1] - e1m[1]) / (2.0 * step) - (e2p[0] - e2m[0]) / (2.0 * step)
    };
    let d1 = curl(1e-5);
    let d2 = curl(2e-5);
    let g = f.metric_at(x);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    det.sqrt() * (4.0 * d1 - d2) / 3.0
}

/// Guiding-center drift velocity `(∂₂(V/F), −∂₁(V/F)) / (2μ)`: the gradient
/// of the effective potential `V/(2F)` rotated by `−π/2`, which is the
/// measured mean velocity of the guiding center (exact for linear data).
/// Derivatives are central differences with step 1e-5 and one Richardson
/// extrapolation.
///
/// The perpendicular-rotation sign and the factor `½` (the Hamiltonian
/// carries `−V/2`, so the effective electric potential is `V/2`) are fixed
/// by validating against the integrated guiding-center motion of the model.
pub fn drift_velocity(f: &ModelField, x: [f64; 2]) -> [f64; 2] {
    let ratio = |pt: [f64; 2]| f.potential_at(pt) / field_intensity(f, pt);
    let deriv = |axis: usize, step: f64| {
        let mut xp = x;
        let mut xm = x;
        xp[axis] += step;
        xm[axis] -= step;
        (ratio(xp) - ratio(xm)) / (2.0 * step)
    };
    let richardson = |axis: usize| {
        let d1 = deriv(axis, 1e-5);
        let d2 = deriv(axis, 2e-5);
        (4.0 * d1 - d2) / 3.0
    };
    let d1 = richardson(0);
    let d2 = richardson(1);
    [d2 / (2.0 * f.mu), -d1 / (2.0 * f.mu)]
}

// =====================================================================
// Flow integration (Dormand–Prince 5(4))
// =====================================================================

struct RkResult {
    y5: [f64; 4],
    err: f64,
}

fn rk_step(f: &ModelField, y: [f64; 4], dt: f64, tol: f64) -> RkResult {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let eval = |y: [f64; 4]| {
        let (xd, xid) = flow_rhs(f, [y[0], y[1]], [y[2], y[3]]);
        [xd[0], xd[1], xid[0], xid[1]]
    };
    let mut k = [[0.0; 4]; 7];
    k[0] = eval(y);
    for stage in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            for c in 0..4 {
                ys[c] += dt * A[stage][j] * kj[c];
            }
        }
        k[stage + 1] = eval(ys);
    }
    let mut y5 = y;
    let mut y4 = y;
    for (j, kj) in k.iter().enumerate() {
        for c in 0..4 {
            y5[c] += dt * B5[j] * kj[c];
            y4[c] += dt * B4[j] * kj[c];
        }
    }
    let mut err: f64 = 0.0;
    for c in 0..4 {
        let sc = tol + tol * y[c].abs().max(y5[c].abs());
        err = err.max(((y5[c] - y4[c]) / sc).abs());
    }
    RkResult { y5, err }
}

/// Integrates the flow from `s0` for time `T` (either sign) at relative
/// tolerance `tol`, storing ≈ 256 states per cyclotron winding.
///
/// # Errors
/// * [`Error::InvalidInput`] when `|H(s0)| > 100·tol` — trajectories live on
///   the zero energy shell, and the admission budget matches the drift
///   budget below so that any state emitted by a successful integration is a
///   valid restart point;
/// * [`Error::MemoryGuard`] when the run would store more than 4·10⁶ states;
/// * [`Error::Accuracy`] on step-size underflow or when the energy drifts
///   beyond `100·tol`.
pub fn integrate_flow(f: &ModelField, s0: &FlowState, t_total: f64, tol: f64) -> Result<Trajectory> {
    if !t_total.is_finite() || !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(
            "integration time and tolerance must be finite, tol > 0".into(),
        ));
    }
    let energy0 = hamiltonian(f, s0);
    if !energy0.is_finite() {
        return Err(Error::InvalidInput("initial energy is not finite".into()));
    }
    if energy0.abs() > 100.0 * tol {
        return Err(Error::InvalidInput(format!(
            "initial state is off the zero energy shell: H = {energy0:.3e} > 100*tol = {:.1e}",
            100.0 * tol
        )));
    }

    let f0 = field_intensity(f, s0.x).abs().max(1e-12);
    let period = 2.0 * std::f64::consts::PI / (f.mu * f0);
    let hmax = period / SAMPLES_PER_WINDING as f64;
    let expected = (t_total.abs() / hmax) as usize + 2;
    if expected > SAMPLE_GUARD {
        return Err(Error::MemoryGuard(format!(
            "integration would store ~{expected} states (guard {SAMPLE_GUARD})"
        )));
    }

    let sign = if t_total < 0.0 { -1.0 } else { 1.0 };
    let mut y = [s0.x[0], s0.x[1], s0.xi[0], s0.xi[1]];
    let mut t = 0.0_f64;
    let mut dt = sign * hmax;
    let mut states = vec![FlowState {
        x: s0.x,
        xi: s0.xi,
        t: s0.t,
    }];
    let mut vels = vec![flow_rhs(f, s0.x, s0.xi).0];
    let mut energies = vec![energy0];

    let done_eps = 1e-13 * t_total.abs().max(1.0);
    while (t_total - t).abs() > done_eps {
        if (t_total - t).abs() < dt.abs() {
            dt = t_total - t;
        }
        if dt.abs() < 0.1 * done_eps {
            return Err(Error::Accuracy(format!(
                "step-size underflow at t = {t}: dt = {dt:.3e}"
            )));
        }
        let step = rk_step(f, y, dt, tol);
        if step.err <= 1.0 {
            t += dt;
            y = step.y5;
            let x = [y[0], y[1]];
            let xi = [y[2], y[3]];
            let e = hamiltonian_inner(f, x, xi);
            if (e - energy0).abs() > 100.0 * tol {
                return Err(Error::Accuracy(format!(
                    "energy drift {:.3e} exceeds 100*tol = {:.3e} at t = {t}",
                    (e - energy0).abs(),
                    100.0 * tol
                )));
            }
            states.push(FlowState {
                x,
                xi,
                t: s0.t + t,
            });
            vels.push(flow_rhs(f, x, xi).0);
            energies.push(e);
        }
        let factor = if step.err > 0.0 {
            (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        dt = (dt * factor).clamp(-hmax, hmax);
        if dt == 0.0 {
            dt = sign * hmax;
        }
    }

    // Guiding centers, winding count from the unwrapped velocity angle.
    let mut centers = Vec::with_capacity(states.len());
    for (s, v) in states.iter().zip(&vels) {
        let ff = field_intensity(f, s.x);
        centers.push([
            s.x[0] + v[1] / (f.mu * ff),
            s.x[1] - v[0] / (f.mu * ff),
        ]);
    }
    let mut theta_prev = vels[0][1].atan2(vels[0][0]);
    let mut unwrapped = 0.0_f64;
    let mut max_wind = 0usize;
    let mut winding = Vec::with_capacity(states.len());
    winding.push(0);
    for v in vels.iter().skip(1) {
        let theta = v[1].atan2(v[0]);
        let mut d = theta - theta_prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        unwrapped += d;
        theta_prev = theta;
        let w = (unwrapped.abs() / (2.0 * std::f64::consts::PI)) as usize;
        max_wind = max_wind.max(w);
        winding.push(max_wind);
    }

    // Measured drift direction: mean guiding center of the last winding
    // minus that of the first (kills the cyclotron wiggle).
    let wind_mean = |target: usize| -> Option<[f64; 2]> {
        let mut acc = [0.0; 2];
        let mut cnt = 0usize;
        for (c, &w) in centers.iter().zip(&winding) {
            if w == target {
                acc[0] += c[0];
                acc[1] += c[1];
                cnt += 1;
            }
        }
        (cnt > 0).then(|| [acc[0] / cnt as f64, acc[1] / cnt as f64])
    };
    let drift_dir = match (wind_mean(0), wind_mean(max_wind.saturating_sub(1))) {
        (Some(a), Some(b)) => {
            let d = [b[0] - a[0], b[1] - a[1]];
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            let scale = centers[0][0].abs().max(centers[0][1].abs()).max(1.0);
            if n > 1e-9 * scale {
                [d[0] / n, d[1] / n]
            } else {
                [0.0, 1.0]
            }
        }
        _ => [0.0, 1.0],
    };

    Ok(Trajectory {
        states,
        energy0,
        guiding_center: centers,
        winding_index: winding,
        vel: vels,
        energy: energies,
        drift_dir,
    })
}

// =====================================================================
// Self-intersections
// =====================================================================

/// Cubic Hermite position/velocity on the sample interval `[i, i+1]` at
/// absolute time `t`.
fn hermite_eval(traj: &Trajectory, i: usize, t: f64) -> ([f64; 2], [f64; 2]) {
    let (s0, s1) = (&traj.states[i], &traj.states[i + 1]);
    let dt = s1.t - s0.t;
    let tau = (t - s0.t) / dt;
    let (t2, t3) = (tau * tau, tau * tau * tau);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + tau;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let d00 = (6.0 * t2 - 6.0 * tau) / dt;
    let d10 = (3.0 * t2 - 4.0 * tau + 1.0) / dt;
    let d01 = (-6.0 * t2 + 6.0 * tau) / dt;
    let d11 = (3.0 * t2 - 2.0 * tau) / dt;
    let mut pos = [0.0; 2];
    let mut vel = [0.0; 2];
    for c in 0..2 {
        pos[c] = h00 * s0.x[c]
            + h10 * dt * traj.vel[i][c]
            + h01 * s1.x[c]
            + h11 * dt * traj.vel[i + 1][c];
        vel[c] = d00 * s0.x[c]
            + d10 * dt * traj.vel[i][c]
            + d01 * s1.x[c]
            + d11 * dt * traj.vel[i + 1][c];
    }
    (pos, vel)
}

/// Newton refinement of a segment-pair crossing to 1e-10 in time.
fn refine_crossing(
    traj: &Trajectory,
    i: usize,
    j: usize,
    t1_init: f64,
    t2_init: f64,
) -> Option<(f64, f64, [f64; 2], [f64; 2], [f64; 2])> {
    let mut t1 = t1_init;
    let mut t2 = t2_init;
    let span1 = traj.states[i + 1].t - traj.states[i].t;
    let span2 = traj.states[j + 1].t - traj.states[j].t;
    for _ in 0..30 {
        if (t1 - t1_init).abs() > 3.0 * span1.abs() || (t2 - t2_init).abs() > 3.0 * span2.abs() {
            return None;
        }
        let (p1, v1) = hermite_eval(traj, i, t1);
        let (p2, v2) = hermite_eval(traj, j, t2);
        let r = [p1[0] - p2[0], p1[1] - p2[1]];
        let det = v1[0] * (-v2[1]) - (-v2[0]) * v1[1];
        if det.abs() < 1e-30 {
            return None;
        }
        // Solve [v1, -v2] * (dt1, dt2) = -r
        let dt1 = (-r[0] * (-v2[1]) - (-v2[0]) * (-r[1])) / det;
        let dt2 = (v1[0] * (-r[1]) - (-r[0]) * v1[1]) / det;
        t1 += dt1;
        t2 += dt2;
        if dt1.abs().max(dt2.abs()) < 1e-12 {
            let (p1, v1) = hermite_eval(traj, i, t1);
            let (p2, v2) = hermite_eval(traj, j, t2);
            let mid = [0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])];
            return Some((t1, t2, mid, v1, v2));
        }
    }
    None
}

/// Planar segment intersection parameters, if any, with endpoint tolerance.
fn segment_cross(a0: [f64; 2], a1: [f64; 2], b0: [f64; 2], b1: [f64; 2]) -> Option<(f64, f64)> {
    let da = [a1[0] - a0[0], a1[1] - a0[1]];
    let db = [b1[0] - b0[0], b1[1] - b0[1]];
    let det = da[0] * db[1] - da[1] * db[0];
    let na = (da[0] * da[0] + da[1] * da[1]).sqrt();
    let nb = (db[0] * db[0] + db[1] * db[1]).sqrt();
    if det.abs() < PARALLEL_SKIP * na * nb {
        return None;
    }
    let r = [b0[0] - a0[0], b0[1] - a0[1]];
    let s = (r[0] * db[1] - r[1] * db[0]) / det;
    let u = (r[0] * da[1] - r[1] * da[0]) / det;
    (0.0..1.0).contains(&s).then_some(())?;
    (0.0..1.0).contains(&u).then_some((s, u))
}

/// Finds all transversal self-intersections of the planar projection:
/// spatial-hash broad phase over sample segments, exact 2×2 narrow phase,
/// then Newton refinement on the cubic Hermite interpolant (time
/// localisation ≈ 1e-10).  Overlapping near-parallel branch pairs (direction
/// sine < 1e-8) are not crossings and are skipped — a closed circular orbit
/// retraced many times therefore reports no events.  Transversal crossings
/// at angles below 1e-6 rad are kept with the `degenerate` flag set.
///
/// # Errors
/// [`Error::InsufficientData`] when fewer than two windings are present.
pub fn self_intersections(traj: &Trajectory) -> Result<Vec<IntersectionEvent>> {
    if traj.windings() < 2 {
        return Err(Error::InsufficientData(format!(
            "self_intersections needs >= 2 windings, got {}",
            traj.windings()
        )));
    }
    let n_seg = traj.states.len() - 1;
    // Cell size: the largest segment extent.
    let mut cell = 0.0_f64;
    for i in 0..n_seg {
        let a = traj.states[i].x;
        let b = traj.states[i + 1].x;
        cell = cell.max((b[0] - a[0]).abs()).max((b[1] - a[1]).abs());
    }
    let cell = cell.max(1e-12) * 1.5;
    let key = |p: [f64; 2]| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n_seg {
        let a = traj.states[i].x;
        let b = traj.states[i + 1].x;
        let (k0, k1) = (key(a), key(b));
        for gx in k0.0.min(k1.0)..=k0.0.max(k1.0) {
            for gy in k0.1.min(k1.1)..=k0.1.max(k1.1) {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut events = Vec::new();
    let mut seen: Vec<(f64, f64)> = Vec::new();
    let mut cells: Vec<_> = grid.iter().collect();
    cells.sort_by_key(|(k, _)| **k);
    for (&cell_key, segs) in cells {
        for (a_pos, &i) in segs.iter().enumerate() {
            for &j in segs.iter().skip(a_pos + 1) {
                let (i, j) = (i.min(j), i.max(j));
                if j - i <= 2 {
                    continue;
                }
                let Some((s, u)) = segment_cross(
                    traj.states[i].x,
                    traj.states[i + 1].x,
                    traj.states[j].x,
                    traj.states[j + 1].x,
                ) else {
                    continue;
                };
                // Process the crossing only in the cell that owns its point
                // (exact dedup across cells).
                let ax = traj.states[i].x;
                let bx = traj.states[i + 1].x;
                let pt = [ax[0] + s * (bx[0] - ax[0]), ax[1] + s * (bx[1] - ax[1])];
                if key(pt) != cell_key {
                    continue;
                }
                let t1g = traj.states[i].t + s * (traj.states[i + 1].t - traj.states[i].t);
                let t2g = traj.states[j].t + u * (traj.states[j + 1].t - traj.states[j].t);
                let Some((t1, t2, point, v1, v2)) = refine_crossing(traj, i, j, t1g, t2g) else {
                    continue;
                };
                let step = traj.states[i + 1].t - traj.states[i].t;
                if seen
                    .iter()
                    .any(|&(a, b)| (a - t1).abs() < 0.5 * step && (b - t2).abs() < 0.5 * step)
                {
                    continue;
                }
                seen.push((t1, t2));
                let cross = (v1[0] * v2[1] - v1[1] * v2[0]).abs();
                let sine = cross
                    / ((v1[0] * v1[0] + v1[1] * v1[1]).sqrt()
                        * (v2[0] * v2[0] + v2[1] * v2[1]).sqrt());
                let center = traj.guiding_center[i];
                // A near-tangential "crossing" whose branch guiding centers
                // coincide is a closed loop retracing itself (plus
                // interpolation noise), not a self-intersection.
                if sine < DEGENERATE_ANGLE {
                    let cj = traj.guiding_center[j];
                    let dc = ((center[0] - cj[0]).powi(2) + (center[1] - cj[1]).powi(2)).sqrt();
                    let r_loc =
                        ((point[0] - center[0]).powi(2) + (point[1] - center[1]).powi(2)).sqrt();
                    if dc < 1e-3 * r_loc {
                        continue;
                    }
                }
                let phi = folded_angle(point, center, traj.drift_dir);
                events.push(IntersectionEvent {
                    t_early: t1.min(t2),
                    t_late: t1.max(t2),
                    point,
                    winding_pair: (
                        traj.winding_index[i].min(traj.winding_index[j]),
                        traj.winding_index[i].max(traj.winding_index[j]),
                    ),
                    phi,
                    degenerate: sine < DEGENERATE_ANGLE,
                });
            }
        }
    }
    events.sort_by(|a, b| a.t_early.total_cmp(&b.t_early));
    Ok(events)
}

/// Angle of `point − center` against the pole axis (perpendicular to the
/// drift direction), folded into `[0, π/2]` with the equator at `π/2`.
fn folded_angle(point: [f64; 2], center: [f64; 2], drift: [f64; 2]) -> f64 {
    let pole = [-drift[1], drift[0]];
    let d = [point[0] - center[0], point[1] - center[1]];
    let s_pole = d[0] * pole[0] + d[1] * pole[1];
    let s_drift = d[0] * drift[0] + d[1] * drift[1];
    s_drift.abs().atan2(s_pole.abs())
}

/// Unfolded angle in `(-π, π]`: positive on the drift side of the pole.
fn side_angle(point: [f64; 2], center: [f64; 2], drift: [f64; 2]) -> f64 {
    let pole = [-drift[1], drift[0]];
    let d = [point[0] - center[0], point[1] - center[1]];
    let s_pole = d[0] * pole[0] + d[1] * pole[1];
    let s_drift = d[0] * drift[0] + d[1] * drift[1];
    s_drift.atan2(s_pole)
}

// =====================================================================
// Winding geometry
// =====================================================================

/// Distance from the `φ`-parametrized point on winding 0 to the nearest
/// point of winding `n` on the same lateral (drift) side.
///
/// The angular parameter runs from the pole (`0`, the direction
/// perpendicular to the measured drift) towards the equator (`π/2`) on the
/// drift side; candidate points on winding `n` are restricted to the same
/// side (`angle ∈ (0, 0.75π)`), and the distance is the minimum over
/// point-to-segment projections.
///
/// # Errors
/// [`Error::InvalidInput`] when winding `|n|` is absent or `φ` is not
/// reached on winding 0.
pub fn winding_distance(traj: &Trajectory, phi: f64, n: i64) -> Result<f64> {
    let n = n.unsigned_abs() as usize;
    if traj.windings() < n {
        return Err(Error::InvalidInput(format!(
            "winding {n} not present (trajectory has {})",
            traj.windings()
        )));
    }
    let drift = traj.drift_dir;
    // Locate φ on winding 0: find a bracketing sample interval, then bisect
    // the side angle of the Hermite interpolant (the chord midpoint would be
    // off the curve by the sagitta, ~r/256², which matters here).
    let mut base: Option<[f64; 2]> = None;
    for i in 0..traj.states.len() - 1 {
        if traj.winding_index[i] != 0 {
            break;
        }
        let c0 = traj.guiding_center[i];
        let c1 = traj.guiding_center[i + 1];
        let a0 = side_angle(traj.states[i].x, c0, drift);
        let a1 = side_angle(traj.states[i + 1].x, c1, drift);
        if (a0 - phi) * (a1 - phi) <= 0.0 && (a1 - a0).abs() < 1.0 {
            let angle_at = |t: f64| {
                let (p, _) = hermite_eval(traj, i, t);
                let w = (t - traj.states[i].t) / (traj.states[i + 1].t - traj.states[i].t);
                let c = [c0[0] + w * (c1[0] - c0[0]), c0[1] + w * (c1[1] - c0[1])];
                side_angle(p, c, drift)
            };
            let mut lo = traj.states[i].t;
            let mut hi = traj.states[i + 1].t;
            let rising = a1 > a0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (angle_at(mid) > phi) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            base = Some(hermite_eval(traj, i, 0.5 * (lo + hi)).0);
            break;
        }
    }
    let Some(p) = base else {
        return Err(Error::InvalidInput(format!(
            "phi = {phi} not reached on winding 0"
        )));
    };
    // Nearest same-side point on winding n: golden-section minimisation of
    // the distance to the Hermite curve over each candidate interval.
    let window = 0.75 * std::f64::consts::PI;
    let mut best = f64::INFINITY;
    let mut found = false;
    for i in 0..traj.states.len() - 1 {
        if traj.winding_index[i] != n {
            continue;
        }
        let ang = side_angle(traj.states[i].x, traj.guiding_center[i], drift);
        if !(0.0..window).contains(&ang) {
            continue;
        }
        found = true;
        let dist2 = |t: f64| {
            let (q, _) = hermite_eval(traj, i, t);
            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
        };
        let golden = 0.5 * (3.0 - 5.0_f64.sqrt());
        let mut lo = traj.states[i].t;
        let mut hi = traj.states[i + 1].t;
        let mut t1 = lo + golden * (hi - lo);
        let mut t2 = hi - golden * (hi - lo);
        let mut f1 = dist2(t1);
        let mut f2 = dist2(t2);
        for _ in 0..48 {
            if f1 < f2 {
                hi = t2;
                t2 = t1;
                f2 = f1;
                t1 = lo + golden * (hi - lo);
                f1 = dist2(t1);
            } else {
                lo = t1;
                t1 = t2;
                f1 = f2;
                t2 = hi - golden * (hi - lo);
                f2 = dist2(t2);
            }
        }
        best = best.min(f1.min(f2).sqrt());
    }
    if !found {
        return Err(Error::InvalidInput(format!(
            "no same-side samples found on winding {n}"
        )));
    }
    Ok(best)
}

/// Reference winding used by [`tick_structure`]: transients of the first few
/// windings are skipped.
const TICK_BASE_WINDING: usize = 3;

/// Near-equator tick structure: for the reference winding, groups its
/// crossings with the winding `m` steps later, keeps the principal (largest)
/// angle `φ_m` per separation, and returns `(φ_m, ℓ_m)` for `m = 1, 2, …`
/// up to the last observed separation.  The spacing is
/// `ℓ_m = |φ_{m+1} − φ_m|`; for the final mark it is the remaining gap to
/// the equator, `π/2 − φ_m̄`.
///
/// # Errors
/// [`Error::InsufficientData`] when fewer than 8 separations are observed
/// (e.g. a closed circular orbit has no intersections at all).
pub fn tick_structure(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let events = self_intersections(traj)?;
    let mut principal: HashMap<usize, f64> = HashMap::new();
    for ev in &events {
        if ev.winding_pair.0 != TICK_BASE_WINDING {
            continue;
        }
        let m = ev.winding_pair.1 - ev.winding_pair.0;
        let slot = principal.entry(m).or_insert(0.0);
        *slot = slot.max(ev.phi);
    }
    let mut marks = Vec::new();
    let mut m = 1usize;
    while let Some(&phi) = principal.get(&m) {
        marks.push(phi);
        m += 1;
    }
    if marks.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "tick_structure: only {} contiguous separations observed",
            marks.len()
        )));
    }
    let nbar = marks.len();
    let out = marks
        .iter()
        .enumerate()
        .map(|(idx, &phi)| {
            let ell = if idx + 1 < nbar {
                (marks[idx + 1] - phi).abs()
            } else {
                std::f64::consts::FRAC_PI_2 - phi
            };
            (phi, ell)
        })
        .collect();
    Ok(out)
}

/// Least-squares fit of `log(π/2 − φ_m)` against `log(m̄ − m)` over the
/// window `2 ≤ m̄ − m ≤ m̄/2`.  Returns `(slope, gap)` where `slope` should
/// be `½` under the square-root accumulation law and `gap` is the fitted
/// equator gap extrapolated to the final tick (`m̄ − m = 1`), a smoothed and
/// therefore stable version of `π/2 − φ_m̄` (the raw last angle wobbles with
/// the fractional number of windings that fit before tangency).
///
/// # Errors
/// [`Error::InsufficientData`] with fewer than 4 points in the window.
pub fn tick_sqrt_fit(ticks: &[(f64, f64)]) -> Result<(f64, f64)> {
    let nbar = ticks.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, &(phi, _)) in ticks.iter().enumerate() {
        let m = idx + 1;
        let back = nbar - m;
        if back >= 2 && back <= nbar / 2 && phi < std::f64::consts::FRAC_PI_2 {
            xs.push((back as f64).ln());
            ys.push((std::f64::consts::FRAC_PI_2 - phi).ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "tick regression window has only {} points",
            xs.len()
        )));
    }
    let (slope, intercept) = linfit(&xs, &ys);
    Ok((slope, intercept.exp()))
}

/// Least-squares line fit returning `(slope, intercept)`.
fn linfit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

// =====================================================================
// Tests
// =====================================================================
