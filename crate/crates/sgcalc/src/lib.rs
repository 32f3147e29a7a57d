//! Symbolic–numeric toolkit for SG pseudo-differential calculus on
//! `R^n` and boundary value problems on half-spaces.
//!
//! The crate provides, bottom up:
//!
//! * a small closed expression kernel for SG symbols ([`expr`]): rational
//!   expressions in `x`, `ξ` and the weights `⟨x⟩`, `⟨ξ⟩`, with exact
//!   differentiation, evaluation (including a complexified normal
//!   covariable), polynomial extraction and seminorm sweeps;
//! * truncated-jet arithmetic ([`jets`]), adaptive contour quadrature
//!   ([`quad`]), finite-difference stencils ([`fd`]), dense complex
//!   polynomials ([`cpoly`]) and least-squares fitting ([`fitting`]);
//! * the symbol calculus itself ([`calculus`]): orders, Gevrey index
//!   bookkeeping, excision cutoffs, composition/adjoint expansions,
//!   parametrices of elliptic differential symbols and empirical remainder
//!   order measurement.

pub mod boundary;
pub mod calculus;
pub mod config;
pub mod cpoly;
pub mod ellipticity;
pub mod error;
pub mod expr;
pub mod extension;
pub mod solve;
pub mod verify;
pub mod fd;
pub mod fitting;
pub mod grid;
pub mod jets;
pub mod quad;

pub use error::{SgError, SgResult};
