//! Numerical engine for an insurer's optimal-investment problem under
//! exponential utility, a diffusion factor model, and compound-Poisson claims.
//!
//! The wealth process is of Cramér–Lundberg type with investment:
//!
//! ```text
//! dX = {c + π*(μ(Y) − r(Y)1) + r(Y)X} dt + π*σ_p(Y) dW − dJ,
//! dY = g(Y) dt + σ_f(Y) dW,
//! ```
//!
//! and the objective is `sup_π E[−exp(−α X_T)]`. The engine solves the
//! problem two independent ways and cross-verifies them by simulation:
//!
//! * **HJB route** ([`pde`]): the value function factors as
//!   `−exp(−a(t,y)x − b(t,y))`; `a` and `b` solve backward parabolic PDEs
//!   discretized by an implicit theta-scheme.
//! * **FBSDE route** ([`pde`], [`control`]): the adjoint pair `(p̃, q̃, h)`
//!   has the explicit form `p̃ = η(t,Y)X + φ(t,Y)`, `h(z) = −η z`, with `η`
//!   and `φ` solving their own PDEs. The identities `η = α − a` and
//!   `φ = log(a/α) − b` tie the two routes together.
//! * **Probabilistic route** ([`feynman_kac`]): `a`, `b`, `φ` also have
//!   Feynman–Kac representations under drift-changed measures, estimated by
//!   Monte Carlo ([`sim`]) as an oracle independent of the finite differences.
//!
//! [`model`] holds the validated inputs, [`config`] the plain-text experiment
//! format, and [`control`] the strategies, value functions, and verification
//! experiments.

pub mod config;
pub mod control;
pub mod error;
pub mod feynman_kac;
pub mod linalg;
pub mod model;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod pde;
pub mod presets;
pub mod sim;

pub use error::{Error, Result};
