//! Finite-difference solver for the one-dimensional Fokker-Planck equation.
//!
//! The density `u` lives at cell centers of a uniform staggered grid and the
//! flux `F = B u + C du/dx` at cell edges. Spatial fluxes use the Chang-Cooper
//! exponentially fitted weights, which keep the discrete scheme conservative
//! and positivity preserving and make discrete equilibria exact for linear
//! drift. Implicit BDF1/BDF2 steps are solved with a two-level cycle on a
//! factor-three nested grid pair (Gauss-Seidel smoothing, straight injection,
//! quadratic Lagrange prolongation, exact coarse solve).
//!
//! * [`grid`] - staggered grids and the fine/coarse hierarchy
//! * [`operator`] - problem definition, Chang-Cooper coefficients, system assembly
//! * [`linalg`] - tridiagonal systems, Thomas solve, relaxation
//! * [`transfer`] - restriction and prolongation
//! * [`twolevel`] - the two-level cycle and its iteration driver
//! * [`timeloop`] - BDF1/BDF2 marching and the stationary driver
//! * [`problems`] - built-in benchmark problems and the manufactured-source oracle
//! * [`metrics`] - error norms and convergence orders
//! * [`cli`] - command-line front end

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod metrics;
pub mod operator;
pub mod problems;
pub mod timeloop;
pub mod transfer;
pub mod twolevel;

pub use error::{Error, Result};
pub use grid::{GridHierarchy, StaggeredGrid};
pub use linalg::TridiagonalSystem;
pub use operator::{EdgeCoefficients, ProblemSpec, Reference, Scheme};
pub use problems::BenchmarkId;
pub use timeloop::RunReport;
pub use twolevel::CycleConfig;
