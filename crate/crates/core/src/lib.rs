//! Primal-dual finite elements for the regularized ROF / minimum-surface model
//!
//! The model seeks `(p, u, λ)` with `p = ∇u`, `λ = α p / |p|_β` and `u - div λ = f`
//! on the unit square with natural boundary conditions. It is discretized with
//! piecewise-constant `p`, `λ` and continuous piecewise-linear `u`, then solved by
//! Newton or Picard outer iterations. Each linearized saddle-point system is solved
//! by MINRES preconditioned with a block-diagonal Riesz map whose spectral bounds do
//! not depend on the mesh size, `α`, `β` or the outer iteration.
//!
//! Layout:
//! - [`mesh`]: structured triangulations of `(0,1)²`.
//! - [`local_ops`]: `|·|_β`, `H(r)`, its inverse and the Picard scalar.
//! - [`assembly`]: sparse P1 operators, the saddle-point operator, residuals and norms.
//! - [`krylov`]: preconditioned MINRES, PCG and a Lanczos condition estimate.
//! - [`amg`]: classical Ruge–Stüben algebraic multigrid.
//! - [`precond`]: exact and inexact block preconditioners.
//! - [`nonlinear`]: damped Newton and Picard drivers.
//! - [`experiments`]: benchmark problems, sweeps and table generation.
//! - [`output`]: CSV and PGM writers.
//! - [`invariants`]: executable checks of the stability inequalities.
//!
//! Data-parallel loops go through [`par::Execution`]; with the `parallel` feature
//! disabled every path runs sequentially and produces bit-identical results.

pub mod amg;
pub mod assembly;
mod error;
pub mod experiments;
pub mod invariants;
pub mod krylov;
pub mod local_ops;
pub mod mesh;
pub mod nonlinear;
pub mod output;
pub mod par;
pub mod precond;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
pub use local_ops::{Beta, SymMat2, Vec2};
pub use mesh::TriMesh;
