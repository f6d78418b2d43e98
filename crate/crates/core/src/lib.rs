//! Derivative-free approximation of gradients and Hessian diagonals.
//!
//! Given a point `x⁰` and a matrix of directions `S`, the function is sampled
//! at `x⁰ ± sⁱ`. From those `2k` values (plus `f(x⁰)`) the crate computes
//!
//! * the generalized centered simplex gradient `(Sᵀ)† δ_c`, and
//! * the centered simplex Hessian diagonal `(Wᵀ)† ε_f` with `W = S ⊙ S`,
//!
//! together with an a-priori error bound for the diagonal and the tooling
//! used to study how the choice of `S` affects accuracy.
//!
//! ```
//! use cshd_core::{approximate, build_set, Objective, SetKind, Vector};
//!
//! let f = Objective::new(2, |y| 3.0 * y[0] * y[0] + y[0] * y[1] - y[1] * y[1]);
//! let s = build_set(&SetKind::Cb, 2, 0.1).unwrap();
//! let x0 = Vector::from_slice(&[0.5, 1.0]).unwrap();
//! let a = approximate(&f, &x0, &s, None).unwrap();
//! assert!((a.diag_hessian.value.get(0) - 6.0).abs() < 1e-9);
//! assert!((a.diag_hessian.value.get(1) + 2.0).abs() < 1e-9);
//! assert_eq!(f.evaluations(), 5);
//! ```

pub mod calculus;
pub mod error;
pub mod error_analysis;
pub mod experiment;
pub mod matrix;
pub mod registry;
pub mod report;
pub mod reproduce;
pub mod sample_sets;

pub use calculus::{
    approximate, cshd, diag_model_eval, evaluate_stencil, evaluate_stencil_par, gcsg, Approximation,
    DiagHessianEstimate, EvaluatedStencil, GradientEstimate, Objective,
};
pub use error::{Error, Result};
pub use error_analysis::{
    convergence_order, cross_term_sum, error_bound, lipschitz_oracle, relative_error, BoundBreakdown,
    LipschitzEstimate, TruthSource,
};
pub use matrix::{hadamard, matrix_parts, operator_norm_l2, pseudoinverse, Matrix, MatrixParts, Svd, Vector};
pub use report::{ExperimentReport, Format, ReportRow};
pub use sample_sets::{build_set, SampleDirections, SetKind};
