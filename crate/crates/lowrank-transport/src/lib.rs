//! Dynamical low-rank solver suite for the multi-scale linear transport
//! equation in diffusive scaling.
//!
//! The equation is split into a macro part (the density `rho`) and a micro
//! part `g` with zero angular mean; `g` is evolved on the manifold of rank-r
//! functions `X * S * V^T` by a projector-splitting integrator whose K/L/S
//! substeps are discretized with IMEX time stepping on a periodic staggered
//! grid. In the diffusion limit the scheme degenerates, uniformly in the
//! stiffness parameter, into an explicit 5-point scheme for the limiting
//! diffusion equation.
//!
//! The crate ships three solvers behind one problem catalog:
//!
//! - [`integrator`]: the low-rank scheme itself (first order in any substep
//!   ordering, and an almost-symmetric second-order variant built on the
//!   ARS(2,2,2) tableau),
//! - [`reference::FullTensorSolver`]: the same space/velocity discretization
//!   without low-rank compression, used as the accuracy and timing baseline,
//! - [`reference::DiffusionSolver`]: the limiting 5-point diffusion scheme,
//!   used for asymptotic-consistency checks.
//!
//! Start from the runnable examples (`cargo run --example accuracy_study`,
//! `diffusion_limit`, `rank_sweep`, ...) or the thin CLI bin; both drive the
//! [`harness`] module, which owns configuration, run orchestration, and CSV
//! output.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod lowrank;
pub mod mesh;
pub mod problems;
pub mod reference;
pub mod velocity;

pub use error::{Error, Result};
