//! psifrac: boundary-value problems for ψ-Caputo fractional differential
//! equations of order α ∈ (2,3) with a nonlocal integral boundary condition
//!
//! The problem solved is
//!
//! ```text
//! D^{α,ψ} x(t) = f(t, x(t)),   t ∈ [a,b],   α ∈ (2,3)
//! x(a) = x_a,   x'(a) = x¹_a,   x(b) = K · I^{α,ψ} x(v),   v ∈ (a,b]
//! ```
//!
//! where `D^{α,ψ}` and `I^{α,ψ}` are the Caputo derivative and fractional
//! integral of `x` with respect to an increasing kernel function ψ. The
//! solver rewrites the problem as an equivalent Volterra integral equation,
//! discretizes the fractional integral with product-trapezoid weights in the
//! transformed variable s = ψ(τ), and solves the fixed-point form by damped
//! Picard iteration. Checkers for the contraction (Banach) and growth-bound
//! (Leray–Schauder) solvability hypotheses are included.
//!
//! Modules:
//! - [`expr`]: the small arithmetic expression language used by config files
//! - [`special`]: Gamma and one-parameter Mittag-Leffler functions
//! - [`kernel`]: the kernel ψ with its derivative and validation
//! - [`fracops`]: grids, product-integration weights, Caputo derivative
//! - [`solver`]: the Volterra fixed-point map, Picard solver, hypothesis checkers
//! - [`mod@reference`]: built-in problems with closed-form solutions
//!
//! All numerics are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the `*64` aliases below fix the common choice.
//!
//! # Quick start
//!
//! ```
//! use psifrac::kernel::{BuiltinKernel, PsiKernel};
//! use psifrac::solver::{picard_solve, Problem, SolverConfig};
//!
//! // D^{2.5} x = 0 with x(0) = 1, x'(0) = 2, and x(1) = 0 (K = 0):
//! // the solution is the psi-quadratic 1 + 2t - 3t^2.
//! let kernel = PsiKernel::<f64>::builtin(BuiltinKernel::Identity)?;
//! let problem = Problem::new(
//!     2.5, 0.0, 1.0,           // order and interval
//!     1.0, 2.0,                // x(a), x'(a)
//!     0.0, 0.5,                // coupling K and nonlocal point v
//!     Box::new(|_t, _x| Ok(0.0)),
//!     kernel,
//! )?;
//! let solution = picard_solve(&problem, &SolverConfig::default())?;
//! assert!(solution.converged());
//! let x_mid = solution.x.values()[solution.grid.len() / 2];
//! assert!((x_mid - (1.0 + 2.0 * 0.5 - 3.0 * 0.25)).abs() < 1e-12);
//! # Ok::<(), psifrac::solver::SolverError>(())
//! ```

// Validation predicates are written as negated comparisons on purpose: a NaN
// parameter must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod fracops;
pub mod kernel;
pub mod reference;
pub mod scalar;
pub mod solver;
pub mod special;

pub use scalar::Real;

/// Double-precision aliases for the main entry types.
pub type PsiKernel64 = kernel::PsiKernel<f64>;
pub type Grid64 = fracops::Grid<f64>;
pub type SampledFunction64 = fracops::SampledFunction<f64>;
pub type WeightMatrix64 = fracops::WeightMatrix<f64>;
pub type Problem64 = solver::Problem<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type Solution64 = solver::Solution<f64>;
