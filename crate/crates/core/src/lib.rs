//! symflow-core: symbolic + numeric toolkit for the Lie symmetry analysis of
//! the damped inviscid Burgers family u_t + u^k u_x + lambda u^m = 0.
//!
//! Modules:
//! - [`exprcore`]: expression trees, exact differentiation, evaluation
//! - [`family`]: PDE parameters and the seven-case (k, m) classification
//! - [`symmetry`]: generator catalog, prolongation checks, Lie brackets
//! - [`flows`]: one-parameter group maps, exponentiation, pushforwards
//! - [`catalog`]: exact solutions, reductions, travelling waves
//! - [`verify`]: residual engine and audit reports
//! - [`moc`]: method-of-characteristics oracle

pub mod exprcore;
pub mod family;
pub mod util;

pub mod catalog;
pub mod flows;
pub mod moc;
pub mod symmetry;
pub mod verify;
