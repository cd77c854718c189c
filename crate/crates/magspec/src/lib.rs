//! Numerics for a two-dimensional magnetic Schrödinger model.
//!
//! The crate studies the semiclassical operator
//!
//! ```text
//!     A = 1/2 ( Σ_{j,k} P_j g^{jk} P_k  -  V(x) ),      P_j = h D_j - μ V_j(x),
//! ```
//!
//! on `R²`, with small semiclassical parameter `h`, large magnetic coupling
//! `μ` (subject to `μ h ≤ 1`), metric `(g^{jk})`, magnetic potential
//! `(V_1, V_2)` and electric potential `V`.  Everything downstream of that
//! operator is organised into focused modules:
//!
//! * [`specfun`] — orthonormal Hermite functions, Laguerre polynomials,
//!   Bessel `J₁`, and the quadrature rules (Gauss–Legendre, Gauss–Hermite,
//!   tanh–sinh) used everywhere else.
//! * [`landau`] — Landau levels of the constant-coefficient model and the
//!   magnetic / non-magnetic Weyl expressions for the spectral density.
//! * [`kernels`] — pointwise evaluation of the spectral-projector kernel
//!   `e(x, y, τ)` of the model operator, its Laguerre closed form on the
//!   diagonal slice, and the smooth Weyl approximation.
//! * [`dirac_energy`] — the weakly singular pair-energy functional
//!   `I = ∬ ω(x-y) |e(x,y)|² ψ₂ ψ₁ dx dy` by two independent routes.
//! * [`dynamics`] — classical Hamiltonian trajectories: cyclotron motion,
//!   guiding-center drift, self-intersections and tick geometry.
//! * [`perturbation`] — finite-dimensional propagators, time-ordered
//!   successive-approximation (Duhamel) series with certified remainders,
//!   ladder operators, and a grid discretisation of the model operator.
//! * [`regimes`] — closed-form time thresholds and remainder estimates that
//!   classify the `(μ, h)` parameter plane.
//! * [`harness`] — parameter sweeps, power-law fits, CSV/JSON reporting and
//!   the command-line driver.
//!
//! Scalar conventions are shared by all modules: energies are measured at
//! spectral parameter `τ` (projector onto `A ≤ τ`), and kernels carry the
//! natural `h^{-2}` density normalisation in two dimensions.

pub mod dirac_energy;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod landau;
pub mod perturbation;
pub mod regimes;
pub mod specfun;

pub use error::{Error, Result};
