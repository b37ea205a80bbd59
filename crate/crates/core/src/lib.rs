//! Numerical laboratory for the Itô calculus of convex functions of
//! continuous semimartingales.
//!
//! The crate is organized in four layers:
//!
//! * [`convex`]: exact and numerical convex analysis: piecewise-linear
//!   (max-of-affine) functions, generic convex oracles, directional
//!   derivatives and subgradient checks, Moreau smoothing, mollified and
//!   directional-limit subgradient selections, and the compact-convergence
//!   metric `rho`.
//! * [`path`]: discrete-time semimartingale paths with separately tracked
//!   martingale and finite-variation components, Brownian perturbations,
//!   exit-time stopping, and reproducible per-path RNG substreams.
//! * [`ito`]: discrete stochastic calculus over those paths: Itô integrals,
//!   quadratic (co)variation, total variation, local-time estimators,
//!   `H^p`-norm estimation, and a martingale hypothesis test.
//! * [`lab`]: the experiments: explicit piecewise-linear decomposition,
//!   residual flatness, smoothing and perturbation convergence curves,
//!   perturbation condition estimates, and end-to-end decomposition
//!   verification with refinement contrasts.
//!
//! Everything is deterministic given a master seed: ensembles derive
//! per-path substreams from `(seed, path index)`, so results do not depend
//! on thread count.

pub mod convex;
pub mod error;
pub mod ito;
pub mod lab;
pub mod path;
pub mod stats;

pub use error::{Error, Result};
