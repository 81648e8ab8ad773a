//! High-order entropy stable flux differencing schemes for the quasi-1D
//! shallow water and compressible Euler equations.
//!
//! The building blocks are
//! - [`sbp`]: Lobatto collocation SBP operators on the reference element,
//! - [`physics`]: states, entropies and the non-symmetric entropy conservative fluxes,
//! - [`semidisc`]: the DGSEM flux differencing right-hand side, boundary
//!   conditions and diagnostics,
//! - [`time_integration`]: explicit Runge-Kutta integrators.

pub mod physics;
pub mod sbp;
pub mod semidisc;
pub mod time_integration;
